"""``oul`` command-line entry point.

Exit codes: 0 success, 1 a verify check failed, 2 invalid input or unmet
precondition, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import NumericalError, PreconditionError
from .acceptance import SUITES
from .commands import cmd_covariance, cmd_eigfun, cmd_ness, cmd_propagate, cmd_spectrum, cmd_verify, report_json
from .config import parse_config, with_overrides

log = logging.getLogger("oul")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


def _floats(text):
    return [float(v) for v in text.split(",")]


def _alpha(text):
    vals = _floats(text)
    if len(vals) % 2:
        raise argparse.ArgumentTypeError("alpha0 takes re,im pairs")
    return [complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]


def build_parser():
    p = argparse.ArgumentParser(prog="oul", description="Spectral OU and quadratic-Lindbladian toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--config", required=True, type=Path, help="TOML model file")
        sp_.add_argument("--out", type=Path, help="write output here instead of stdout")
        sp_.add_argument("--seed", type=int, help="override options.seed")
        sp_.add_argument("--t", type=float, help="time (covariance, propagate)")
        sp_.add_argument("--order", type=int, help="maximum total order of the spectral sum")
        sp_.add_argument("--x0", type=_floats, help="classical start point, comma separated")
        sp_.add_argument("--alpha0", type=_alpha, help="coherent amplitude as re,im")
        sp_.add_argument("-v", "--verbose", action="store_true")
        return sp_

    common(sub.add_parser("spectrum", help="eigenvalues up to a total order"))
    common(sub.add_parser("ness", help="stationary density on the grid"))
    s = common(sub.add_parser("eigfun", help="right/left eigenfunction on the grid"))
    s.add_argument("--mu", help="multi-index, e.g. 1,0")
    s = common(sub.add_parser("covariance", help="covariance time series"))
    s.add_argument("--steps", type=int, default=50)
    common(sub.add_parser("propagate", help="time-dependent density / Q-function on the grid"))
    s = common(sub.add_parser("verify", help="run the acceptance checks"))
    s.add_argument("--suite", choices=sorted(SUITES), default="all")
    return p


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    command_line = "oul " + " ".join(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = with_overrides(cfg, options=with_overrides(cfg.options, seed=args.seed))
        if args.command == "verify":
            results, code = cmd_verify(cfg, args.suite)
            for r in results:
                print(r.line(), file=sys.stderr)
            _emit(report_json(results, args.suite, cfg), args.out)
            return code
        if args.command == "spectrum":
            table = cmd_spectrum(cfg, args.order, command=command_line)
        elif args.command == "ness":
            table = cmd_ness(cfg, command=command_line)
        elif args.command == "eigfun":
            table = cmd_eigfun(cfg, args.mu, command=command_line)
        elif args.command == "covariance":
            table = cmd_covariance(cfg, args.t, args.steps, command=command_line)
        else:
            table = cmd_propagate(cfg, args.t, args.x0, args.alpha0, args.order, command=command_line)
        _emit(table.to_csv(), args.out)
        return EXIT_OK
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
