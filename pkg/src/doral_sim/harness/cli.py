"""
Command line interface

    doral-sim run <config|preset> [--seed N] [--reps N] [--out DIR] [--no-plots]
    doral-sim presets
    doral-sim validate <config|preset>

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
Progress goes to standard error, result paths to standard output.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from .. import __version__
from ..bandits.errors import ConfigurationError, ModelValidationError
from .config import ENV_LOG_LEVEL, PLOT_FORMATS, load_config, with_overrides
from .output import emit_csv, now_stamp, render_plots, resolve_timezone, write_manifest
from .presets import PRESETS
from .runner import run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doral-sim",
        description="Budgeted contextual bandits with delayed feedback: simulate and compare",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: $DORAL_LOG_LEVEL or INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment")
    run.add_argument("config", help="YAML config path or preset name")
    run.add_argument("--seed", type=int, default=None, help="Override the base seed")
    run.add_argument("--reps", type=int, default=None, help="Override the replication count")
    run.add_argument("--out", default=None, help="Output directory")
    run.add_argument("--workers", type=int, default=None, help="Worker processes")
    run.add_argument("--format", choices=PLOT_FORMATS, default=None, help="Chart format")
    run.add_argument("--no-plots", action="store_true", help="Skip chart rendering")

    commands.add_parser("presets", help="List built-in scenarios")

    validate = commands.add_parser("validate", help="Check a config without running it")
    validate.add_argument("config", help="YAML config path or preset name")
    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or os.environ.get(ENV_LOG_LEVEL) or "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    config = with_overrides(
        config,
        base_seed=args.seed,
        replications=args.reps,
        output_dir=args.out,
        workers=args.workers,
        plot_format=args.format,
        plots=False if args.no_plots else None,
    )

    tz = resolve_timezone()
    started_at = now_stamp(tz)
    result = run_experiment(config)
    files = list(emit_csv([result], config.output_dir).values())
    if config.plots:
        files.extend(render_plots([result], config.output_dir, fmt=config.plot_format))
    manifest = write_manifest([result], config.output_dir, started_at, now_stamp(tz), files)

    for path in files + [manifest]:
        print(path)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.command == "presets":
            for name in PRESETS:
                print(name)
            return EXIT_OK
        if args.command == "validate":
            config = load_config(args.config)
            logger.info(
                "%s is valid: %d policies, %d replications",
                args.config,
                len(config.policies),
                config.replications,
            )
            return EXIT_OK
        return _run(args)
    except (ConfigurationError, ModelValidationError) as error:
        logger.error("Invalid configuration: %s", error)
        return EXIT_INVALID
    except Exception as error:
        logger.exception("Run failed: %s", error)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
