"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import ConfigError, DomainError, ParameterError, StageError
from .io import format_float
from .pipeline import price, run_scenario, run_simulation_only, validate_scenario
from .scenario import bundled_scenarios, parse_scenario

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4


def _out_dir(args, scenario_name: str) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get("EPIACT_OUT", "epiact_out")
    return Path(root) / scenario_name


def _load(args):
    return parse_scenario(args.scenario, args.set)


def cmd_simulate(args) -> int:
    scenario = _load(args)
    out = _out_dir(args, scenario.name)
    run_simulation_only(scenario, out)
    print(f"trajectory written to {out / 'trajectory.csv'}")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load(args)
    out = _out_dir(args, scenario.name)
    manifest = run_scenario(scenario, out)
    for name, digest in manifest.files:
        print(f"{digest[:12]}  {out / name}")
    return EXIT_OK


def cmd_premium(args) -> int:
    scenario = _load(args)
    summary = price(scenario)
    print(f"net_level_premium = {format_float(summary.net_level_premium)}")
    print(f"optimal_premium = {format_float(summary.optimal_premium)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = _load(args)
    checks = validate_scenario(scenario, convergence=not args.quick)
    for check in checks:
        print(check.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_DOMAIN


def _sweep_one(source: str, overrides: tuple[str, ...], out: str) -> tuple[float, float]:
    scenario = parse_scenario(source, overrides)
    run_scenario(scenario, out)
    summary = price(scenario)
    return summary.net_level_premium, summary.optimal_premium


def _parse_grid(items) -> list[tuple[str, list[str]]]:
    axes = []
    for item in items:
        target, sep, values = item.partition("=")
        if not sep or "." not in target:
            raise ConfigError(f"--grid {item!r} must look like section.key=v1,v2,...")
        choices = [v.strip() for v in values.split(",") if v.strip()]
        if not choices:
            raise ConfigError(f"--grid {item!r} lists no values")
        axes.append((target.strip(), choices))
    return axes


def cmd_sweep(args) -> int:
    base = _load(args)  # fail fast on a bad base scenario
    axes = _parse_grid(args.grid)
    if not axes:
        raise ConfigError("sweep needs at least one --grid section.key=v1,v2,...")
    combos = []
    for values in itertools.product(*(choices for _, choices in axes)):
        combos.append(tuple(args.set) + tuple(f"{t}={v}" for (t, _), v in zip(axes, values)))
    for overrides in combos:
        parse_scenario(args.scenario, overrides)
    out = _out_dir(args, base.name + "_sweep")
    out.mkdir(parents=True, exist_ok=True)
    dirs = [str(out / f"run_{n:03d}") for n in range(len(combos))]
    sources = [str(args.scenario)] * len(combos)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, sources, combos, dirs))
    else:
        results = [_sweep_one(s, c, d) for s, c, d in zip(sources, combos, dirs)]
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", *(target for target, _ in axes), "net_level_premium", "optimal_premium"])
        for n, (overrides, (nlp, pstar)) in enumerate(zip(combos, results)):
            settings = [o.partition("=")[2] for o in overrides[len(args.set):]]
            writer.writerow([f"run_{n:03d}", *settings, format_float(nlp), format_float(pstar)])
    print(f"{len(combos)} runs written under {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiact",
        description="SEIARD epidemic simulation (NSFD scheme) with actuarial valuation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("scenario",
                       help="scenario file, or a bundled name: " + ", ".join(bundled_scenarios()))
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one scenario setting (repeatable)")
        if with_out:
            p.add_argument("-o", "--out", help="output directory (default: $EPIACT_OUT/<scenario>)")

    p = sub.add_parser("simulate", help="integrate and write trajectory.csv only")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="full pipeline: tables, results, plots, manifest")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("premium", help="print the net level premium and the admissible bound")
    common(p, with_out=False)
    p.set_defaults(func=cmd_premium)

    p = sub.add_parser("validate", help="invariant, convergence and identity checks")
    common(p, with_out=False)
    p.add_argument("--quick", action="store_true", help="skip the convergence-order study")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run every combination of a parameter grid")
    common(p)
    p.add_argument("--grid", action="append", default=[], metavar="SECTION.KEY=V1,V2,...",
                   help="grid axis (repeatable); the cartesian product is run")
    p.add_argument("-j", "--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, (ConfigError, ParameterError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_DOMAIN


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, DomainError, StageError, ValueError,
            ArithmeticError, OSError) as exc:
        print(f"epiact {args.command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
