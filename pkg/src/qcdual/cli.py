"""Command-line harness: load a space, run one suite, emit a deterministic report.

Exit codes: 0 when every assertion passes, 1 on an assertion failure, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import acceptance, dualtransform, maximalsets, mclass, separation
from .probspace import FiniteFilteredSpace
from .reports import FAIL, REPORT_COLUMNS, combine, render, report_rows
from .riskmeasures import (MeasureConfigError, audit_all, catalog_listing, effectiveness_partition,
                           parse_measure)
from .sampling import random_gmeasurable, random_variable, rng_from
from .scenarios import random_scenario, scenario_grid
from .textconfig import ConfigError, load_scenarios, load_space, numbers_of, parse_text

COMMANDS = ("audit-measure", "compute-R", "verify-duality", "check-mclass", "acceptance-roundtrip",
            "maximal-sets", "separate")
MAX_ATOMS = 16
MAX_BLOCKS = 4
MAX_GRID = 12
OK, FAILED, CONFIG = 0, 1, 2


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcdual", description="Desk-scale checks for quasiconvex conditional risk measures.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--space", help="space file (weights/blocks); default: uniform 2+2")
    ap.add_argument("--measure", help="catalog measure, e.g. entropic:gamma=1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--grid", type=int, default=8, help="scenario lattice resolution")
    ap.add_argument("--budget", type=int, default=dualtransform.DEFAULT_BUDGET)
    ap.add_argument("--samples", type=int, help="number of seeded samples")
    ap.add_argument("--format", choices=("md", "csv"), default="md")
    ap.add_argument("--out", help="directory for the report file")
    ap.add_argument("--position", help="position X, comma-separated per atom")
    ap.add_argument("--level", help="level: one number, or one per atom")
    ap.add_argument("--scenarios", help="scenario file (space header plus density rows)")
    ap.add_argument("--class", dest="class_file", help="file with 'element:' rows (maximal-sets)")
    ap.add_argument("--relation", default=">=", choices=tuple(maximalsets.RELATIONS))
    ap.add_argument("--generators", help="file with 'generator:' rows and optional 'mode:' (separate)")
    ap.add_argument("--mode", choices=separation.MODES, help="hull mode (separate)")
    ap.add_argument("--allow-large", action="store_true",
                    help=f"exceed the desk limits n<={MAX_ATOMS}, m<={MAX_BLOCKS}, grid<={MAX_GRID}")
    return ap


# config helpers --------------------------------------------------------

def _space(args) -> FiniteFilteredSpace:
    space = load_space(args.space) if args.space else FiniteFilteredSpace.uniform([2, 2])
    over = []
    if space.n > MAX_ATOMS:
        over.append(f"n={space.n} > {MAX_ATOMS}")
    if space.m > MAX_BLOCKS:
        over.append(f"m={space.m} > {MAX_BLOCKS}")
    if args.grid > MAX_GRID:
        over.append(f"grid={args.grid} > {MAX_GRID}")
    if args.grid < 1:
        raise ConfigError("must be a positive integer", field="grid")
    if over:
        msg = "beyond desk limits: " + ", ".join(over)
        if not args.allow_large:
            raise ConfigError(msg + " (pass --allow-large to override)")
        warnings.warn(msg, stacklevel=2)
    return space


def _measure(args):
    if not args.measure:
        raise ConfigError("this command needs --measure; catalog:\n" + catalog_listing(), field="measure")
    try:
        return parse_measure(args.measure)
    except MeasureConfigError as exc:
        msg = str(exc)
        if "catalog" not in msg:
            msg += "\ncatalog:\n" + catalog_listing()
        raise ConfigError(msg, field="measure") from None


def _vector(text, n, name, space=None, g_measurable=False):
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}", field=name) from None
    if len(vals) == 1:
        vals = vals * n
    if len(vals) != n:
        raise ConfigError(f"expected 1 or {n} values, got {len(vals)}", field=name)
    out = np.array(vals)
    if g_measurable and space is not None:
        try:
            space.per_block(out)
        except ValueError as exc:
            raise ConfigError(str(exc), field=name) from None
    return out


def _rows(path, key, n):
    with open(path) as fh:
        entries = parse_text(fh.read(), str(path))
    rows = []
    extra = {}
    for e in entries:
        if e.key == key:
            vals = numbers_of(e, str(path))
            if len(vals) != n:
                raise ConfigError(f"expected {n} values, got {len(vals)}", e.line, key, str(path))
            rows.append(np.array(vals))
        else:
            extra[e.key] = (e.line, e.tokens)
    if not rows:
        raise ConfigError(f"no '{key}:' rows", None, key, str(path))
    return rows, extra


def _positions(args, space, rng, default_count):
    if args.position:
        return [_vector(args.position, space.n, "position")]
    return [random_variable(space, rng) for _ in range(args.samples or default_count)]


# output ----------------------------------------------------------------

class Output:
    def __init__(self, fmt_name: str):
        self.fmt = fmt_name
        self.parts = []

    def table(self, title, columns, rows):
        if self.fmt == "csv":
            self.parts.append(f"# {title}\n" + render(columns, rows, "csv"))
        else:
            self.parts.append(render(columns, rows, "md", title))

    def reports(self, title, reports):
        self.table(title, REPORT_COLUMNS, report_rows(reports))

    def text(self) -> str:
        return "\n".join(p.rstrip("\n") + "\n" for p in self.parts)


def _status(reports) -> int:
    return FAILED if any(r.status == FAIL for r in reports) else OK


# commands --------------------------------------------------------------

def cmd_audit_measure(args, out: Output) -> int:
    space = _space(args)
    rho = _measure(args)
    results = audit_all(rho, space, args.samples or 200, args.seed,
                        args.tol if args.tol is not None else 1e-9)
    rows, code = [], OK
    for prop, rep, declared in results:
        if declared and not rep.passed:
            code = FAILED
        rows.append((prop, declared, rep.status, rep.checked, rep.failures, rep.max_violation))
    out.table(f"audits for {rho.label}", ("property", "declared", "status", "checked", "failures",
                                          "max_violation"), rows)
    part = effectiveness_partition(rho, space, seed=args.seed)
    out.table("effectiveness partition", ("T_rho", "Upsilon_rho", "method"),
              [(sorted(part.T), sorted(part.Upsilon), part.method)])
    return code


def cmd_compute_R(args, out: Output) -> int:
    space = _space(args)
    rho = _measure(args)
    if args.scenarios:
        sspace, scen = load_scenarios(args.scenarios)
        if sspace.n != space.n or not np.array_equal(sspace.blocks, space.blocks):
            raise ConfigError("scenario file space differs from --space", field="scenarios")
    else:
        scen = list(scenario_grid(space, 1))
    levels = [_vector(args.level or "0", space.n, "level", space, g_measurable=True)]
    surface = dualtransform.DualSurface(rho, space, seed=args.seed)
    try:
        rows = surface.tabulate(levels, scen)
    except ValueError as exc:
        raise ConfigError(str(exc), field="measure") from None
    out.table(f"R for {rho.label}", surface.COLUMNS, rows)
    out.table("scenarios", ("scenario_id", "density"), [(i, Z) for i, Z in enumerate(scen)])
    return OK


def cmd_verify_duality(args, out: Output) -> int:
    space = _space(args)
    rho = _measure(args)
    rng = rng_from(args.seed)
    rows, code = [], OK
    for s, X in enumerate(_positions(args, space, rng, 3)):
        try:
            res = dualtransform.duality_sup(rho, X, space, args.grid, args.budget, seed=args.seed + s,
                                            tol=args.tol)
        except ValueError as exc:
            raise ConfigError(str(exc), field="measure") from None
        if not res.passed:
            code = FAILED
        for row in res.rows():
            rows.append((s,) + tuple(row) + ("pass" if res.gap[row[0]] <= res.tol else "fail",))
    out.table(f"duality gaps for {rho.label}", ("sample",) + dualtransform.DualityResult.COLUMNS
              + ("status",), rows)
    return code


def cmd_check_mclass(args, out: Output) -> int:
    space = _space(args)
    rho = _measure(args)
    K = mclass.candidate_from_measure(rho, seed=args.seed)
    n = args.samples or 100
    reps = mclass.audit_kk(K, space, n, args.seed)
    rng = rng_from(args.seed)
    prog = []
    for _ in range(max(1, n // 5)):
        Ys, Zs = random_gmeasurable(space, rng), random_scenario(space, rng)
        prog.append(mclass.lemma_program_check(K, Ys, Zs, space, seed=int(rng.integers(2**31)),
                                               tol=args.tol or dualtransform.NUMERIC_TOL))
    reps.append(combine("lemma-program", prog))
    reps.append(mclass.uniqueness_check(rho, K, space, seed=args.seed))
    out.reports(f"M-class audit of R for {rho.label}", reps)
    iv = reps[3]
    out.table("item iv search", ("success_rate", "min_margin"),
              [(iv.details.get("success_rate"), iv.details.get("min_margin"))])
    return _status(reps)


def cmd_acceptance(args, out: Output) -> int:
    space = _space(args)
    rho = _measure(args)
    n = args.samples or 100
    reps = acceptance.roundtrip_check(rho, space, n, args.seed, args.tol or 1e-6)
    fam = acceptance.family_from_measure(rho, space)
    reps += acceptance.audit_family(fam, space, n, args.seed)
    out.reports(f"acceptance family of {rho.label}", reps)
    out.table("normalization", ("shift", "unshifted_blocks"),
              [(fam.details["shift"], fam.details["unshifted"])])
    return _status(reps)


def cmd_maximal_sets(args, out: Output) -> int:
    space = _space(args)
    if args.class_file:
        elements, _ = _rows(args.class_file, "element", space.n)
    else:
        # G-measurable elements satisfy the pasting hypothesis, so the cover holds
        rng = rng_from(args.seed)
        elements = [np.round(random_gmeasurable(space, rng)) for _ in range(3)]
    Y0 = _vector(args.level or "0", space.n, "level")
    res = maximalsets.maximal_sets(elements, Y0, args.relation, space, seed=args.seed)
    out.table(f"maximal sets for relation {args.relation}",
              ("A_M", "A_M_perp", "uncovered", "disjoint", "covered", "closure_size", "exhaustive"),
              [(sorted(res.A_M), sorted(res.A_M_perp), sorted(res.uncovered), res.disjoint,
                res.covered, res.closure_size, res.closure_exhaustive)])
    out.table("class", ("element", "values"), [(i, e) for i, e in enumerate(elements)])
    if res.witness is not None:
        out.table("witness", ("values",), [(res.witness,)])
    return OK if res.disjoint and res.covered else FAILED


def cmd_separate(args, out: Output) -> int:
    space = _space(args)
    rng = rng_from(args.seed)
    mode = args.mode
    if args.generators:
        gens, extra = _rows(args.generators, "generator", space.n)
        if mode is None and "mode" in extra:
            mode = extra["mode"][1][0] if extra["mode"][1] else None
            if mode not in separation.MODES:
                raise ConfigError(f"unknown hull mode {mode!r}", extra["mode"][0], "mode",
                                  args.generators)
    else:
        gens = [rng.normal(size=space.n) for _ in range(3)]
    mode = mode or "convex"
    X = _positions(args, space, rng, 1)[0] if args.position else rng.normal(scale=3.0, size=space.n)
    C = separation.GeneratorSet(np.array(gens), mode)
    outside = separation.is_outside(X, C, space)
    sep = separation.separate(X, C, space, blocks=[b for b, v in outside.outside.items() if v])
    rows, code = [], OK
    for b in range(space.m):
        if b in outside.A_C.blocks:
            rows.append((b, "trivial", "-", "-", "-"))
            continue
        if not outside.outside[b]:
            rows.append((b, "inside", "-", "-", outside.certificates[b][1]))
            continue
        ok = sep.status[b] == separation.SEPARATED and sep.margins[b] >= separation.BOUNDARY_MARGIN
        if not ok:
            code = FAILED
        rows.append((b, "outside", sep.status[b], sep.margins[b], sep.w.get(b, np.array([]))))
    out.table(f"separation ({mode} hull)", ("block", "verdict", "status", "margin", "certificate"), rows)
    out.table("position", ("X", "Z"), [(X, sep.Z)])
    return code


HANDLERS = {
    "audit-measure": cmd_audit_measure,
    "compute-R": cmd_compute_R,
    "verify-duality": cmd_verify_duality,
    "check-mclass": cmd_check_mclass,
    "acceptance-roundtrip": cmd_acceptance,
    "maximal-sets": cmd_maximal_sets,
    "separate": cmd_separate,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        print(f"error: {exc}", file=stderr)
        return CONFIG
    out = Output(args.format)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = HANDLERS[args.command](args, out)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=stderr)
        return CONFIG
    text = out.text()
    stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.command}.{args.format}"), "w") as fh:
            fh.write(text)
    print(f"result: {'PASS' if code == OK else 'FAIL'}", file=stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
