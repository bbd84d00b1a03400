"""Command-line entry point ``jsta``.

Exit codes: 0 success, 2 configuration error, 3 numerical-precondition
error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..errors import ConfigurationError, ContractError, MissingDataError, NumericalPreconditionError
from . import runner
from .config import RunConfig, load_config
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _jobs(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--jobs expects an integer, got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jsta", description="Joint spectral-spatial biphoton phase simulator and retrieval.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate amplitudes and interferograms")
    s.add_argument("config", nargs="?", help="run configuration JSON (defaults when omitted)")
    s.add_argument("--out", help=f"run directory (default: ${runner.OUTPUT_ROOT_ENV}/<scenario>-seed<seed>)")
    s.add_argument("--seed", type=int)
    s.add_argument("--scenario")
    s.add_argument("--noiseless", action="store_true", default=None)
    s.add_argument("--jobs", type=_jobs, default=1, help="worker processes for post-selection points")
    s.add_argument("--retrieve", action="store_true", help="run retrieval right after simulating")

    r = sub.add_parser("retrieve", help="retrieve phases from a simulated run")
    r.add_argument("run_dir")
    r.add_argument("--jobs", type=_jobs, default=1)

    f = sub.add_parser("fit", help="re-fit dispersion on stored phase surfaces")
    f.add_argument("run_dir")
    f.add_argument("--pump-only", action="store_true", help="drop the single-photon quadratic terms")

    rep = sub.add_parser("report", help="figures and consolidated JSON for completed runs")
    rep.add_argument("run_dirs", nargs="*")
    rep.add_argument("--out", help="report directory (default: <first run>/report)")

    t = sub.add_parser("selftest", help="run the built-in invariant checks")
    t.add_argument("--seed", type=int, default=0)
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    try:
        return cfg.with_overrides(seed=args.seed, scenario=args.scenario, noiseless=args.noiseless)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = _config(args)
        run_dir = runner.cmd_simulate(cfg, args.out, args.jobs)
        print(f"simulated {len(cfg.scan.idler_points)} post-selection(s) into {run_dir}")
        if args.retrieve:
            rep = runner.cmd_retrieve(run_dir, args.jobs)
            for ps in rep["post_selections"]:
                print(f"{ps['dir']}: gdd {ps['fit']['gdd']:.6g} fs^2, tod {ps['fit']['tod']:.6g} fs^3")
        return EXIT_OK
    if args.command == "retrieve":
        rep = runner.cmd_retrieve(args.run_dir, args.jobs)
        for ps in rep["post_selections"]:
            print(f"{ps['dir']}: gdd {ps['fit']['gdd']:.6g} fs^2, tod {ps['fit']['tod']:.6g} fs^3, "
                  f"phase rms error {ps['errors']['phase_rms']:.3g} rad")
        print(f"report hash {rep['report_hash']}")
        return EXIT_OK
    if args.command == "fit":
        for row in runner.cmd_fit(args.run_dir, local=not args.pump_only):
            print(json.dumps({"idler_point": row["idler_point"], "gdd": row["fit"]["gdd"], "tod": row["fit"]["tod"]}))
        return EXIT_OK
    if args.command == "report":
        if not args.run_dirs:
            raise ConfigurationError("report: give at least one run directory")
        rep = runner.cmd_report(args.run_dirs, args.out)
        print(f"wrote {len(rep['figures'])} figures")
        return EXIT_OK
    if args.command == "selftest":
        results = run_selftest(args.seed)
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}: {r['detail']}")
        return EXIT_OK if all(r["passed"] for r in results) else EXIT_NUMERICAL
    raise ConfigurationError(f"unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigurationError, ContractError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalPreconditionError as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (MissingDataError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
