"""Command line entry point.

::

    conformal-ms run --config run.json [--out DIR] [--t-end T] [--resume SNAPSHOT]
    conformal-ms preset nls_dark [--out DIR] [--t-end T]
    conformal-ms converge --config run.json [--levels 3] [--out DIR]
    conformal-ms figures [PRESET ...] [--out DIR] [--t-end T]

Exit status: 0 on success, 2 for invalid input, 3 when a solve fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import (ArgumentError, ConfigurationError, ConformalMSError,
                      ParseError, SolverError, StepError, StudyError)
from .config import config_from_dict, config_to_dict, load_config
from .figures import emit_figures_data
from .presets import PRESETS, preset
from .runner import convergence_study, run, write_convergence

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--t-end", type=float, dest="t_end", help="override the final time")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    p = argparse.ArgumentParser(prog="conformal-ms",
                                description="Exponential multi-symplectic integrators.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a configuration file")
    r.add_argument("--config", required=True)
    r.add_argument("--resume", help="snapshot file to restart from")
    pr = sub.add_parser("preset", parents=[common], help="run a named preset")
    pr.add_argument("name", choices=PRESETS)
    c = sub.add_parser("converge", parents=[common], help="temporal convergence study")
    c.add_argument("--config", required=True)
    c.add_argument("--levels", type=int, default=3)
    f = sub.add_parser("figures", parents=[common], help="write figure data")
    f.add_argument("names", nargs="*", metavar="PRESET")
    return p


def _with_overrides(cfg, args):
    if args.t_end is not None:
        cfg = replace(cfg, t_end=args.t_end)
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=args.out))
    return config_from_dict(config_to_dict(cfg))


def _report(summary, quiet):
    if not quiet:
        print(json.dumps(summary.to_dict(), indent=2))
    return EXIT_OK if summary.ok else EXIT_SOLVER


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _with_overrides(load_config(args.config), args)
            return _report(run(cfg, resume_from=args.resume), args.quiet)
        if args.command == "preset":
            cfg = preset(args.name, t_end=args.t_end, out=args.out)
            return _report(run(cfg), args.quiet)
        if args.command == "converge":
            cfg = _with_overrides(load_config(args.config), args)
            rows = convergence_study(cfg, args.levels)
            if args.out is not None:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                write_convergence(rows, Path(args.out) / "convergence.csv")
            if not args.quiet:
                print("dt,error,order_vs_finest,self_difference,observed_order")
                for r in rows:
                    print(",".join(str(v) for v in r))
            return EXIT_OK
        names = args.names or None
        unknown = [n for n in args.names if n not in PRESETS]
        if unknown:
            raise ArgumentError(f"unknown presets {unknown}; choose from {PRESETS}")
        results = emit_figures_data(names, args.out or "figures", args.t_end)
        if not args.quiet:
            for name, (surface, residuals, _) in results.items():
                print(f"{name}: {surface} {residuals}")
        return EXIT_OK
    except (ParseError, ArgumentError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (StepError, SolverError, StudyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConformalMSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
