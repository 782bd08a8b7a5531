import argparse
import logging

from typing import Dict, List, Optional

from src.utils.logger import setup_logger

logger = setup_logger(__name__, logging.WARNING)


class UsageError(Exception):
    """Raised instead of exiting when the command line cannot be parsed."""

    def __init__(self, message: str, usage: str):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _int_list(value: str) -> List[int]:
    try:
        return [int(item) for item in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def parse_args(argv: Optional[List[str]] = None) -> Dict:
    """
    Defines and parses CLI arguments as a dictionary.

    :param argv: list -- Arguments without the program name (defaults to sys.argv[1:])
    :return: args_dict: dict
    """
    logger.info("Parsing CLI arguments as dict ...")

    parser = _Parser(prog="main.py", description="Multi-layer satellite network telecommand routing simulator")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = subparsers.add_parser("run", help="Run the mission and write CSV/JSON results")
    validate = subparsers.add_parser("validate", help="Parse and check a scenario file only")
    access = subparsers.add_parser("access-report", help="Write SC-accessible satellite counts per layer and sample")

    for sub in (run, validate, access):
        sub.add_argument("--scenario", help="Path to the scenario file", type=str, default="configs/scenario.yaml")
    for sub in (run, access):
        sub.add_argument("--out", help="Output directory (overrides the scenario file)", type=str, default=None)
        sub.add_argument("--samples", help="Number of time samples", type=int, default=None)

    run.add_argument("--schemes", help="Comma-separated scheme names, e.g. CLD-I,NONCLD-GEO", type=_csv_list)
    run.add_argument("--configs", help="Comma-separated link configurations, e.g. I,III", type=_csv_list)
    run.add_argument("--targets", help="Comma-separated target global IDs, e.g. 1,5,9", type=_int_list)
    run.add_argument("--workers", help="Threads evaluating samples concurrently", type=int, default=None)
    run.add_argument("--shuffle-seed", help="Evaluate samples in a shuffled order", type=int, default=None)

    args = parser.parse_args(argv)
    args_dict = vars(args)

    logger.info(f"Successfully parsed {len(args_dict.keys())} CLI argument(s).")

    return args_dict
