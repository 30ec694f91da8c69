"""
Command-line entry point for the Scooter Encounter Analyzer

    python -m app.main simulate --config pipeline.toml --out out/
    python -m app.main detect --receptions out/receptions.jsonl --out out/
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from app.commands import COMMANDS
from app.config import PipelineConfig, get_settings
from app.exceptions import ConfigError, DataError, EncounterAnalysisError

# Import and setup logging
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from logging_config import setup_logging

logger = logging.getLogger(__name__)

settings = get_settings()

EXIT_OK = 0
EXIT_DATA_ERROR = DataError.exit_code
EXIT_CONFIG_ERROR = ConfigError.exit_code

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
PATH_FLAGS = ("network", "receptions", "feedback", "schedule", "campus_polygons", "encounters", "truth")


class _ConfigErrorParser(argparse.ArgumentParser):
    """Argument errors are configuration errors"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Pipeline TOML config file")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--seed", type=int, help="Seed for every random draw")
    common.add_argument("--timezone", help="IANA timezone of the study area")
    common.add_argument(
        "--log-level", dest="log_level", type=str.upper, choices=LOG_LEVELS, help="Overrides the log_level setting",
    )
    common.add_argument(
        "--dry-run", dest="dry_run", action="store_true", help="Compute and print the summary without writing output files",
    )

    parser = _ConfigErrorParser(prog="scooter-encounters", description=f"{settings.app_name} v{settings.version}")
    parser.add_argument("--version", action="version", version=settings.version)
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ConfigErrorParser)
    for module in COMMANDS.values():
        module.register(subparsers, parents=[common])
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """CLI flags as a nested config mapping; unset flags are left out"""
    overrides: Dict[str, Any] = {"paths": {}}
    if args.out:
        overrides["output_dir"] = args.out
    if args.dry_run:
        overrides["storage_backend"] = "memory"
    if args.seed is not None:
        overrides["seed"] = args.seed
        overrides["simulation"] = {"seed": args.seed}
    if args.timezone:
        overrides["timezone"] = args.timezone
        overrides["detector"] = {"timezone": args.timezone}
        overrides.setdefault("simulation", {})["timezone"] = args.timezone
    if getattr(args, "workers", None):
        overrides["max_workers"] = args.workers
    for name in PATH_FLAGS:
        value = getattr(args, name, None)
        if value:
            overrides["paths"][name] = value
    if args.command == "simulate":
        for name in ("network", "schedule"):
            if getattr(args, name, None):
                overrides.setdefault("simulation", {})[name] = getattr(args, name)
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        Exit code: 0 ok, 1 data error, 2 config error
    """
    args = build_parser().parse_args(argv)
    setup_logging(
        level=(args.log_level or settings.log_level).upper(),
        log_file=settings.log_file,
        json_format=settings.log_json,
    )

    try:
        config = PipelineConfig.load(args.config, overrides_from_args(args))
        logger.info(f"Running {args.command} (v{settings.version}) into {config.output_dir}")
        summary = COMMANDS[args.command].run(config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except DataError as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA_ERROR
    except EncounterAnalysisError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}", exc_info=True)
        return EXIT_DATA_ERROR

    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
