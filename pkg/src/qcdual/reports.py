"""Audit reports and their Markdown / CSV rendering.

Floats are rendered with repr-stable formatting so that identical inputs give
byte-identical reports.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

MAX_WITNESSES = 5


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x + 0.0:.12g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + " ".join(fmt(v) for v in x) + "]"
    return str(x)


@dataclass
class Report:
    name: str
    status: str
    checked: int = 0
    failures: int = 0
    inconclusive: int = 0
    max_violation: float = 0.0
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def line(self) -> str:
        return (f"{self.name}: {self.status.upper()} (checked={self.checked}, failures={self.failures}, "
                f"max_violation={fmt(self.max_violation)})")


class Checker:
    """Accumulates violations of one property and produces a Report.

    `record(violation, witness)` takes the amount by which the property is
    violated (<= 0 means it holds); anything above `tol` is a failure.
    """

    def __init__(self, name: str, tol: float = 1e-9):
        self.name = name
        self.tol = tol
        self.checked = 0
        self.failures = 0
        self.inconclusive = 0
        self.max_violation = 0.0
        self.witnesses = []
        self.details = {}

    def record(self, violation: float, witness=None) -> bool:
        self.checked += 1
        v = float(violation)
        if np.isnan(v):
            v = np.inf
        if v > self.max_violation:
            self.max_violation = v
        if v > self.tol:
            self.failures += 1
            if witness is not None and len(self.witnesses) < MAX_WITNESSES:
                self.witnesses.append(witness)
            return False
        return True

    def record_bool(self, ok: bool, witness=None) -> bool:
        return self.record(0.0 if ok else np.inf, witness)

    def record_inconclusive(self, witness=None):
        self.checked += 1
        self.inconclusive += 1
        if witness is not None and len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(witness)

    def report(self) -> Report:
        if self.failures:
            status = FAIL
        elif self.inconclusive:
            status = INCONCLUSIVE
        else:
            status = PASS
        return Report(self.name, status, self.checked, self.failures, self.inconclusive,
                      self.max_violation, list(self.witnesses), dict(self.details))


def violation_le(a, b) -> float:
    """Largest amount by which a <= b fails, elementwise over extended reals."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    with np.errstate(invalid="ignore"):
        diff = a - b
    diff = np.where((a == b), 0.0, diff)  # equal infinities
    return float(np.max(diff)) if diff.size else 0.0


def violation_eq(a, b) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
    diff = np.where((a == b), 0.0, diff)
    return float(np.max(diff)) if diff.size else 0.0


def combine(name: str, reports) -> Report:
    reports = list(reports)
    statuses = [r.status for r in reports]
    status = FAIL if FAIL in statuses else INCONCLUSIVE if INCONCLUSIVE in statuses else PASS
    out = Report(name, status)
    for r in reports:
        out.checked += r.checked
        out.failures += r.failures
        out.inconclusive += r.inconclusive
        out.max_violation = max(out.max_violation, r.max_violation)
        out.witnesses.extend(r.witnesses[: MAX_WITNESSES - len(out.witnesses)])
    out.details["parts"] = [r.name for r in reports]
    return out


REPORT_COLUMNS = ("check", "status", "checked", "failures", "inconclusive", "max_violation")


def report_rows(reports):
    return [(r.name, r.status, r.checked, r.failures, r.inconclusive, fmt(r.max_violation))
            for r in reports]


def to_markdown(columns, rows, title: str | None = None) -> str:
    out = []
    if title:
        out.append(f"## {title}")
        out.append("")
    out.append("| " + " | ".join(columns) + " |")
    out.append("|" + "|".join("---" for _ in columns) + "|")
    for row in rows:
        out.append("| " + " | ".join(fmt(v) for v in row) + " |")
    return "\n".join(out) + "\n"


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render(columns, rows, fmt_name: str = "md", title: str | None = None) -> str:
    if fmt_name == "csv":
        return to_csv(columns, rows)
    if fmt_name == "md":
        return to_markdown(columns, rows, title)
    raise ValueError(f"unknown report format {fmt_name!r} (expected csv or md)")


def render_reports(reports, fmt_name: str = "md", title: str | None = None) -> str:
    return render(REPORT_COLUMNS, report_rows(reports), fmt_name, title)


def render_witnesses(reports) -> str:
    lines = []
    for r in reports:
        for w in r.witnesses:
            lines.append(f"- {r.name}: {fmt(w) if not isinstance(w, dict) else _fmt_dict(w)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _fmt_dict(d: dict) -> str:
    return ", ".join(f"{k}={fmt(v)}" for k, v in d.items())
