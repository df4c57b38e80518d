"""
Command-line entry point of the P2 signature simulator
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from core.config import CONFIG_ENV, LOG_LEVEL_ENV, OUTPUT_FORMATS, SCENARIOS, Config
from core.errors import ConfigurationError, SimulatorError
from attack.search import SecurityGoal
from . import commands

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _shared(parser: argparse.ArgumentParser):
    parser.add_argument("--L", "--key-length", dest="key_length", type=int, help="key length L")
    parser.add_argument("--policy", help="exact or threshold:<fraction>")
    parser.add_argument("--output", choices=OUTPUT_FORMATS, help="text or structured (JSON lines)")
    parser.add_argument("--forward-on-reject", action=argparse.BooleanOptionalAction,
                        help="the first verifier forwards even after rejecting")
    parser.add_argument("--db", help="SQLAlchemy URL recording the results, e.g. sqlite:///runs.db")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2sim", description="Classical P2 quantum digital signature simulator")
    parser.add_argument("--config", help=f"JSON settings file (default ${CONFIG_ENV})")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS,
                        help=f"log level on stderr (default ${LOG_LEVEL_ENV} or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its transcript")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--strategy", type=str, help="strategy file for the custom scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--message", choices=("0", "1", "both"))
    run.add_argument("--keys", help="pinned keys k0B,k1B,k0C,k1C")
    run.add_argument("--masks", help="pinned masks n0B,n1B,n0C,n1C")
    _shared(run)
    run.set_defaults(handler=commands.cmd_run)

    search = sub.add_parser("search", help="exhaustive search for universal attacker strategies")
    search.add_argument("--goal", choices=[goal.value for goal in SecurityGoal])
    search.add_argument("--alphabet", help="comma-separated attacker actions")
    search.add_argument("--victim", choices=("B", "C"))
    search.add_argument("--workers", type=int)
    _shared(search)
    search.set_defaults(handler=commands.cmd_search)

    stats = sub.add_parser("stats", help="acceptance rates of an attacker strategy")
    stats.add_argument("--strategy", help="naive, mitm, proxy or a strategy file")
    stats.add_argument("--victim", choices=("B", "C"))
    stats.add_argument("--trials", type=int)
    stats.add_argument("--seed", type=int)
    stats.add_argument("--exact", action="store_true", help="also print exact rates")
    _shared(stats)
    stats.set_defaults(handler=commands.cmd_stats)

    config = sub.add_parser("config", help="show or write the settings file")
    config_sub = config.add_subparsers(dest="action", required=True)
    config_sub.add_parser("show", help="print the effective settings")
    init = config_sub.add_parser("init", help="write the effective settings to a file")
    init.add_argument("path")
    init.add_argument("--force", action="store_true")
    config.set_defaults(handler=commands.cmd_config, db=None)

    return parser


def setup_logging(level: Optional[str]):
    level = level or os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    if level not in LOG_LEVELS:
        raise ConfigurationError(f"{LOG_LEVEL_ENV} must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    try:
        setup_logging(args.log_level)
        config = Config(args.config)
        return args.handler(args, config)
    except SimulatorError as e:
        logger.error(str(e))
        return commands.EXIT_ERROR
