import argparse
import sys
from typing import List, Optional

from loguru import logger

from ..utils.errors import (ConfigError, InfeasibleStepsizeError, LyapunovBoundError, NonFiniteIterateError,
                            SplitBenchError)
from ..utils.logging import setup_logging
from .commands import cmd_rates, cmd_run, cmd_spectra, cmd_verify
from .experiment import load_config, with_overrides

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.bench",
                                     description="Accelerated splitting methods: runs, contraction checks, rate sweeps")
    parser.add_argument("--log-level", default=None, help="loguru level (default: LOG_LEVEL setting)")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("run", "write one Lyapunov trace per algorithm"),
                            ("verify", "check traces against the contraction envelope"),
                            ("rates", "sweep conditioning or lambda_min and compare iteration counts")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", help="INI experiment config")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--max-iters", type=int, default=None)
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--algs", default=None, help="comma-separated algorithms, e.g. acv1,APDTR-II")

    spectra = sub.add_parser("spectra", help="spectral summary of a whitespace-separated matrix file")
    spectra.add_argument("matrix", help="matrix file, one row per line")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "spectra":
        summary = cmd_spectra(args.matrix)
        for key, val in summary.as_dict().items():
            print(f"{key:<16} {val:.12g}")
        return EXIT_OK

    config = with_overrides(load_config(args.config), seed=args.seed, max_iters=args.max_iters,
                            algorithms=args.algs, out=args.out)
    if args.command == "run":
        for path in cmd_run(config):
            print(path)
        return EXIT_OK
    if args.command == "verify":
        summary = cmd_verify(config)
        print(summary.table())
        if summary.first_failure is not None:
            check, k = summary.first_failure
            logger.error(f"First failing check: {check} at k={k}")
        return summary.exit_code
    report = cmd_rates(config)
    print(report.table())
    return EXIT_OK if report.trend_ok else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns 0 on success, 1 on a failed check, 2 on config or stepsize errors"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return _dispatch(args)
    except (ConfigError, InfeasibleStepsizeError) as e:
        logger.error(f"Refused: {e}")
        return EXIT_CONFIG
    except (LyapunovBoundError, NonFiniteIterateError) as e:
        logger.error(f"Check failed: {e}")
        return EXIT_CHECK_FAILED
    except SplitBenchError as e:
        logger.error(f"Run failed: {e}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
