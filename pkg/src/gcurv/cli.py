"""Command-line entry point ``gcurv``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import fundamental
from .expr import ParseError
from .fields import MetricError
from .scenarios import (
    SUITES,
    PointReport,
    Scenario,
    ScenarioError,
    get_scenario,
    load_scenario,
    point_summary,
    reconstruction_report,
    run_suite,
    scenario_names,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve(name: str) -> Scenario:
    """A registered name, or a path to a scenario JSON file."""
    if name.endswith(".json") or Path(name).is_file():
        return load_scenario(name)
    return get_scenario(name)


def parse_point(text: str, coords: Sequence[str]) -> list[float]:
    """``"u=1,v=0"`` → coordinate list; unnamed coordinates default to 0."""
    values = dict.fromkeys(coords, 0.0)
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in values:
            raise UsageError(f"bad point entry {item!r}; expected name=value with name in {', '.join(coords)}")
        try:
            values[key] = float(val)
        except ValueError:
            raise UsageError(f"bad number in point entry {item!r}") from None
    return [values[c] for c in coords]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def format_table(reports: Sequence[PointReport]) -> str:
    lines = []
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        point = ", ".join(f"{x:g}" for x in rep.point) or "-"
        lines.append(f"{status}  {rep.scenario}  {rep.suite}  ({point})")
        if rep.error:
            lines.append(f"      error: {rep.error}")
        for name, (value, tol) in sorted(rep.residuals.entries.items()):
            mark = " " if value <= tol else "!"
            lines.append(f"    {mark} {name:<34s} {value:10.3e}  tol {tol:.0e}")
        for note in rep.skipped:
            lines.append(f"      skipped: {note}")
    n_fail = sum(not r.passed for r in reports)
    lines.append(f"{len(reports) - n_fail}/{len(reports)} passed")
    return "\n".join(lines)


def cmd_list(args) -> int:
    for name in scenario_names():
        sc = get_scenario(name)
        print(f"{name:28s} d={sc.ambient.dim}  {sc.description}")
    return EXIT_PASS


def cmd_report(args) -> int:
    sc = _resolve(args.scenario)
    point = parse_point(args.point, sc.point_chart.coords)
    if not sc.point_chart.contains(point):
        raise UsageError(f"point {point} lies outside the chart domain of {sc.name}")
    summary = point_summary(sc, point)
    if args.json:
        print(_dumps(summary))
    else:
        for key, value in summary.items():
            print(f"{key}: {value}")
    return EXIT_PASS


def cmd_verify(args) -> int:
    sc = _resolve(args.scenario)
    reports = run_suite(args.suite, sc, args.tol, args.seed)
    if args.json:
        print(_dumps([r.to_dict(timing=args.timing) for r in reports]))
    else:
        print(format_table(reports))
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def cmd_reconstruct(args) -> int:
    sc = _resolve(args.scenario)
    if sc.surface is None:
        raise UsageError(f"scenario {sc.name} carries no (h, k) surface data")
    if args.grid < 2:
        raise UsageError("--grid needs at least 2 nodes per axis")
    base = sc.surface.grid
    grid = fundamental.GridSpec(base.lo, base.hi, (args.grid, args.grid))
    report, frame, diagnostics = reconstruction_report(sc, grid, args.tol)
    mesh = fundamental.mesh_json(frame, diagnostics)
    mesh["scenario"] = sc.name
    mesh["residuals"] = report.to_dict()
    Path(args.out).write_text(_dumps(mesh) + "\n", encoding="utf-8")
    for name, (value, tol) in sorted(report.entries.items()):
        print(f"{'PASS' if value <= tol else 'FAIL'}  {name:<24s} {value:.3e}")
    return EXIT_PASS if report.passed() else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gcurv", description="Generalised curvature checks on chart-based scenarios")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=cmd_list)

    r = sub.add_parser("report", help="pointwise geometric quantities")
    r.add_argument("--scenario", required=True, help="built-in name or scenario JSON path")
    r.add_argument("--point", required=True, help='coordinates such as "u=1,v=0"; omitted ones are 0')
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--scenario", required=True, help="built-in name or scenario JSON path")
    v.add_argument("--tol", type=float, default=None, help="override the per-suite tolerance")
    v.add_argument("--seed", type=int, default=0, help="seed for the random sample points")
    v.add_argument("--json", action="store_true")
    v.add_argument("--timing", action="store_true", help="include wall times in JSON (breaks byte-identity)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("reconstruct", help="integrate (h, k) into a surface in R^3")
    c.add_argument("--scenario", required=True)
    c.add_argument("--grid", type=int, default=33, help="nodes per axis")
    c.add_argument("--out", required=True, help="mesh JSON output path")
    c.add_argument("--tol", type=float, default=None)
    c.set_defaults(func=cmd_reconstruct)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ScenarioError, ParseError, MetricError) as exc:
        print(f"gcurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
