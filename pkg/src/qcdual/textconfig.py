"""Line-oriented structured text used for spaces, scenario lists and configs.

Grammar::

    file    := line*
    line    := blank | comment | entry
    comment := '#' anything
    entry   := key ':' token (sep token)*
    sep     := whitespace | ','

Keys are case-sensitive identifiers (letters, digits, '_' and '-').  A key may
repeat when the schema allows it (e.g. one ``density:`` row per scenario).
Inline comments start with '#'.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .probspace import FiniteFilteredSpace

_KEY = re.compile(r"^[A-Za-z][A-Za-z0-9_\-]*$")


class ConfigError(ValueError):
    """A parse or validation error carrying the offending line and field."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.field = field
        self.source = source
        parts = [p for p in (source, f"line {line}" if line is not None else None) if p]
        prefix = ":".join(parts)
        if field:
            prefix = f"{prefix} field '{field}'" if prefix else f"field '{field}'"
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class Entry:
    line: int
    key: str
    tokens: tuple


def parse_text(text: str, source: str | None = None) -> list[Entry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError("expected 'key: values'", lineno, None, source)
        key, rest = line.split(":", 1)
        key = key.strip()
        if not _KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", lineno, key or None, source)
        tokens = tuple(t for t in re.split(r"[\s,]+", rest.strip()) if t)
        entries.append(Entry(lineno, key, tokens))
    return entries


def _numbers(entry: Entry, source, exact: bool = False):
    out = []
    for tok in entry.tokens:
        try:
            val = Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"not a number: {tok!r}", entry.line, entry.key, source) from None
        out.append(val if exact else float(val))
    return out


def _single(entries, key, source, required=True):
    found = [e for e in entries if e.key == key]
    if len(found) > 1:
        raise ConfigError(f"duplicate key (first at line {found[0].line})", found[1].line, key, source)
    if not found:
        if required:
            raise ConfigError("missing required field", None, key, source)
        return None
    return found[0]


def space_from_entries(entries: list[Entry], source: str | None = None) -> FiniteFilteredSpace:
    w_entry = _single(entries, "weights", source)
    b_entry = _single(entries, "blocks", source)
    weights = _numbers(w_entry, source, exact=True)
    labels = []
    for tok in b_entry.tokens:
        try:
            labels.append(int(tok))
        except ValueError:
            raise ConfigError(f"block label must be an integer, got {tok!r}", b_entry.line, "blocks",
                              source) from None
    if len(weights) != len(labels):
        raise ConfigError(f"{len(weights)} weights but {len(labels)} block labels", b_entry.line,
                          "blocks", source)
    if any(w < 0 for w in weights):
        raise ConfigError("negative atom weight", w_entry.line, "weights", source)
    try:
        return FiniteFilteredSpace.from_raw(weights, labels)
    except ValueError as exc:
        raise ConfigError(str(exc), w_entry.line, "weights", source) from None


def load_space(path) -> FiniteFilteredSpace:
    with open(path) as fh:
        text = fh.read()
    return space_from_entries(parse_text(text, str(path)), str(path))


def parse_space(text: str) -> FiniteFilteredSpace:
    return space_from_entries(parse_text(text))


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def dump_space(space: FiniteFilteredSpace) -> str:
    lines = [
        "weights: " + " ".join(_fmt(w) for w in space.exact_weights),
        "blocks: " + " ".join(str(int(b)) for b in space.blocks),
    ]
    return "\n".join(lines) + "\n"


def dump_scenarios(densities, space: FiniteFilteredSpace) -> str:
    """Space header followed by one ``density:`` row per scenario."""
    rows = [dump_space(space).rstrip("\n")]
    for Z in densities:
        rows.append("density: " + " ".join(_fmt(z) for z in np.asarray(Z, dtype=float)))
    return "\n".join(rows) + "\n"


def parse_scenarios(text: str, source: str | None = None):
    from .scenarios import validate_scenario

    entries = parse_text(text, source)
    space = space_from_entries(entries, source)
    out = []
    for e in entries:
        if e.key != "density":
            continue
        Z = np.array(_numbers(e, source), dtype=float)
        if Z.shape != (space.n,):
            raise ConfigError(f"density has {Z.size} values, space has {space.n} atoms", e.line,
                              "density", source)
        if not validate_scenario(Z, space):
            raise ConfigError("not a valid scenario density (need Z >= 0 and E[Z|G] = 1)", e.line,
                              "density", source)
        out.append(Z)
    return space, out


def load_scenarios(path):
    with open(path) as fh:
        return parse_scenarios(fh.read(), str(path))


def numbers_of(entry: Entry, source=None) -> list[float]:
    return _numbers(entry, source)
