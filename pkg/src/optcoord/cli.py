"""Command-line entry point: ``optcoord validate|bounds|run``.

Exit codes: 0 success, 2 validation failure (including unreadable scenario
files), 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .costs import lipschitz_constant
from .graph import build_laplacian, max_step_size
from .report import build_report, write_csv, write_plots
from .scenario_io import ScenarioFormatError, load_scenario
from .sim import ScenarioValidationError, run, validate_scenario

log = logging.getLogger("optcoord")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optcoord",
                                     description="Distributed optimal coordination simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check graph, step size and per-agent assumptions")
    p.add_argument("file")

    p = sub.add_parser("bounds", help="print the step-size bound for a scenario")
    p.add_argument("file")

    p = sub.add_parser("run", help="simulate and write trajectory.csv, metrics.json, plots/")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="seed for scenarios that request random initial states")
    p.add_argument("--stride", type=int, default=None, help="override record_stride")
    return parser


def cmd_validate(args) -> int:
    sc = load_scenario(args.file)
    checks, _ = validate_scenario(sc)
    lap = build_laplacian(sc.topology)
    try:
        print(f"step-size bound: {max_step_size(lap, lipschitz_constant(sc.costs)):.12g}")
    except ValueError as exc:
        print(f"step-size bound: unavailable ({exc})")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<24} {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INVALID


def cmd_bounds(args) -> int:
    sc = load_scenario(args.file)
    lap = build_laplacian(sc.topology)
    lmax = float(lap.spectrum[-1])
    lip = lipschitz_constant(sc.costs)
    print(f"lambda_max(L): {lmax:.12g}")
    print(f"lipschitz:     {lip:.12g}")
    try:
        bound = max_step_size(lap, lip)
    except ValueError as exc:
        print(f"bound:         unavailable ({exc})")
        return EXIT_INVALID
    ok = 0 < sc.beta < bound
    print(f"bound:         {bound:.12g}")
    print(f"beta:          {sc.beta:.12g} ({'admissible' if ok else 'inadmissible'})")
    return EXIT_OK


def cmd_run(args) -> int:
    sc = load_scenario(args.file, seed=args.seed, stride=args.stride)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    t0 = time.perf_counter()
    trajectory = run(sc)
    elapsed = time.perf_counter() - t0
    lap = build_laplacian(sc.topology)
    report = build_report(trajectory, lap, sc.beta)
    report.wall_clock_seconds = elapsed
    write_csv(trajectory, out / "trajectory.csv")
    (out / "metrics.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    write_plots(trajectory, out / "plots")
    print(f"{sc.name}: {len(trajectory)} records, final max output error "
          f"{report.final_max_output_error:.3e}, consensus error {report.final_consensus_error:.3e}, "
          f"tracking error {report.final_max_tracking_error:.3e}")
    print(f"wrote {out / 'trajectory.csv'}, {out / 'metrics.json'}, {out / 'plots'}/")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "bounds": cmd_bounds, "run": cmd_run}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ScenarioFormatError, ScenarioValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 3
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
