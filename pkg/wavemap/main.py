"""Command-line entry point: `python -m wavemap <command> ...`.

Subcommands scan, mode, picard and certify each live in wavemap.commands.
Every flag can also be set through WAVEMAP_<FLAG> (e.g. WAVEMAP_HI=1.1);
explicit flags win. Exit codes: 0 ok, 1 certificate failed, 2 invalid
configuration, 3 computation failed.
"""
import argparse
import sys

from wavemap import __version__
from wavemap.commands import EXIT_COMPUTE_ERROR, EXIT_CONFIG_ERROR, certify, mode, picard, scan
from wavemap.commands._options import cli_values
from wavemap.core.config import build_run_config
from wavemap.core.errors import ConfigError, WavemapError
from wavemap.core.logger import get_logger
from wavemap.core.system_monitor import get_memory_usage_mb

logger = get_logger("wavemap.main")

COMMANDS = {module.NAME: module for module in (scan, mode, picard, certify)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemap",
        description="Mode stability of the self-similar co-rotational wave map.",
        epilog="Exit codes: 0 ok, 1 certificate failed, 2 configuration error, 3 computation error.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMANDS.values():
        module.add_parser(subparsers)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    module = COMMANDS[args.command]
    values = cli_values(args, module.FLAGS)
    if hasattr(args, "lam"):
        values["lam"] = args.lam

    try:
        config = build_run_config(args.command, values)
    except ConfigError as e:
        parser.print_usage(sys.stderr)
        for problem in e.problems:
            print(f"{parser.prog} {args.command}: error: {problem}", file=sys.stderr)
        logger.error(f"Invalid configuration for {args.command}: {e}")
        return EXIT_CONFIG_ERROR

    logger.info(f"wavemap {args.command} starting | Memory: {get_memory_usage_mb():.2f} MB")
    try:
        return module.run(config)
    except WavemapError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return EXIT_COMPUTE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
