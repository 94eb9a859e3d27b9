"""
bell-link command line.

    bell-link chsh --config my_run.conf --seed 7 --out runs/chsh --format csv --workers 4
"""

from typing import Optional, Sequence
import argparse
import logging
import sys

from bell_link.errors import BellLinkError
from bell_link.utils.config_loader import build_config, RunConfig, SCENARIOS
from bell_link.utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bell-link")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", type=str, default=None, help="YAML or key=value file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--format", type=str, choices=("csv", "json"), default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--exact", action="store_true", help="expected counts instead of sampling")
    parser.add_argument(
        "--force", action="store_true", help="overwrite results of a different config"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "scenario": args.scenario,
        "seed": args.seed,
        "output.directory": args.out,
        "output.format": args.format,
        "runtime.workers": args.workers,
        "chsh.exact": True if args.exact else None,
    }
    try:
        conf = build_config(args.config, overrides)
        run = RunConfig.from_omega_conf(conf)

        from bell_link.scenarios import run_scenario
        from bell_link.scenarios.run_outputs import prepare_output_dir

        # the run log only goes into a directory this config may write to
        prepare_output_dir(run.output_directory, run.config_hash(), force=args.force)
        setup_logging(
            run.output_directory,
            level=str(conf.logging.level),
            max_bytes=int(conf.logging.max_bytes),
            backup_count=int(conf.logging.backup_count),
        )
        summary = run_scenario(run, force=args.force)
    except ValueError as e:
        logger.error(f"invalid input: {e}")
        print(f"bell-link: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (BellLinkError, RuntimeError, OSError) as e:
        logger.error(f"run failed: {e}")
        print(f"bell-link: {e}", file=sys.stderr)
        return EXIT_FAILED
    logger.info(f"{summary.scenario} finished, results in {run.output_directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
