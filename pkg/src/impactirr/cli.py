"""Command-line entry point.

Exit codes: 0 success, 1 reproduction mismatch, 2 parse/validation error,
3 solver error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from impactirr.engine import check_references, evaluate, prepare, with_housing_param
from impactirr.errors import ImpactIRRError, ScenarioSyntaxError, SolveError, ValidationError
from impactirr.ingest import BUNDLED_CASES, load_bundled, load_scenario
from impactirr.report import record_to_dict, render, report_for
from impactirr.valuation import combined_flows, npv, solve_rates

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PARSE = 2
EXIT_SOLVE = 3
EXIT_IO = 4

FORMAT_ENV = "IMPACTIRR_FORMAT"
FORMATS = ("text", "json", "csv")
SWEEP_PARAMS = ("hurdle", "vacancy", "growth", "attribution")

log = logging.getLogger("impactirr")


def _default_format() -> str:
    fmt = os.environ.get(FORMAT_ENV, "text")
    return fmt if fmt in FORMATS else "text"


def _write(out, data: bytes) -> None:
    out.buffer.write(data) if hasattr(out, "buffer") else out.write(data.decode("utf-8"))
    out.flush()


def cmd_evaluate(args, out) -> int:
    sf = load_scenario(args.scenario)
    ev = evaluate(sf, hurdle=args.hurdle)
    _write(out, render(report_for(ev), args.format))
    return EXIT_OK


def _comparison_table(checks) -> str:
    rows = [("metric", "published", "tool", "tolerance", "result")]
    for c in checks:
        f = c.figure
        tol = f"{f.tolerance:g}" + (" (relative)" if f.relative else "")
        actual = "n/a" if c.actual is None else f"{c.actual:.6g}"
        rows.append((f.metric, f"{f.value:.6g}", actual, tol, "PASS" if c.passed else "FAIL"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def cmd_reproduce(args, out) -> int:
    ev = evaluate(load_bundled(args.case))
    rec = report_for(ev)
    checks = check_references(ev)
    if args.format == "json":
        payload = {
            "case": args.case,
            "report": record_to_dict(rec),
            "checks": [
                {
                    "metric": c.figure.metric,
                    "published": c.figure.value,
                    "tool": c.actual,
                    "tolerance": c.figure.tolerance,
                    "relative": c.figure.relative,
                    "passed": c.passed,
                }
                for c in checks
            ],
        }
        _write(out, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))
    elif args.format == "csv":
        _write(out, render(rec, "csv"))
        sys.stderr.write(_comparison_table(checks))
    else:
        _write(out, render(rec, "text") + b"\nComparison with published figures\n" + _comparison_table(checks).encode())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_MISMATCH


def sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValidationError("step must be positive", "--step")
    if stop < start:
        raise ValidationError("empty range: --to is below --from", "--to")
    n = int((stop - start) / step + 1e-9)
    return [round(start + i * step, 12) for i in range(n + 1)]


def sweep_point(sf, param: str, value: float) -> tuple[float, float | None, str]:
    """INPV at the hurdle and impact IRR with one parameter replaced."""
    hurdle = attribution = None
    if param == "hurdle":
        hurdle = value
    elif param == "attribution":
        attribution = value
    elif param == "vacancy":
        sf = with_housing_param(sf, "vacancy_rate", value)
    elif param == "growth":
        sf = with_housing_param(sf, "annual_growth", value)
    else:
        raise ValidationError(f"unknown sweep parameter {param!r}", "--param")
    spec, fin, imp, attrib, r = prepare(sf, hurdle=hurdle, attribution_override=attribution)
    flows = combined_flows(fin, imp, list(attrib), spec.c0)
    inpv_at = npv(flows, r)
    try:
        sol = solve_rates(flows)
    except SolveError as exc:
        return inpv_at, None, type(exc).__name__
    return inpv_at, sol.rate, "multiple_roots" if sol.multiple else "ok"


def cmd_sweep(args, out) -> int:
    sf = load_scenario(args.scenario)
    grid = sweep_grid(args.start, args.stop, args.step)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        # map preserves grid order regardless of completion order
        results = list(pool.map(lambda v: sweep_point(sf, args.param, v), grid))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([args.param, "inpv_at_hurdle", "impact_irr", "status"])
    for v, (inpv_at, irr, status) in zip(grid, results):
        w.writerow([repr(v), f"{inpv_at:.2f}", "" if irr is None else repr(irr), status])
    _write(out, buf.getvalue().encode("utf-8"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="impactirr", description="Impact NPV / impact IRR valuation")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", help="value a scenario file")
    e.add_argument("scenario", type=Path)
    e.add_argument("--format", choices=FORMATS, default=None, help=f"output format (default ${FORMAT_ENV} or text)")
    e.add_argument("--hurdle", type=float, default=None, help="override the hurdle rate, as a fraction")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("reproduce", help="run a bundled published case and compare headline figures")
    r.add_argument("case", choices=BUNDLED_CASES)
    r.add_argument("--format", choices=FORMATS, default=None)
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("sweep", help="CSV of INPV and impact IRR over a parameter grid")
    s.add_argument("scenario", type=Path)
    s.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--jobs", type=int, default=1, help="grid points evaluated in parallel")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if getattr(args, "format", "text") is None:
        args.format = _default_format()
    try:
        return args.func(args, out)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except (ScenarioSyntaxError, ValidationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except SolveError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVE
    except ImpactIRRError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
