import os
from argparse import ArgumentParser, ArgumentTypeError, RawDescriptionHelpFormatter
from typing import Optional

from .config import COMMANDS

THREADS_ENV = "COLLIDE_PBE_THREADS"


def positive_int(value: str) -> int:
    """argparse type for worker counts"""
    try:
        number = int(value)
    except ValueError:
        raise ArgumentTypeError(f"expected a positive integer, got {value!r}")
    if number < 1:
        raise ArgumentTypeError(f"expected a positive integer, got {number}")
    return number


def create_cli_parser() -> ArgumentParser:
    """Create command line argument parser with all available options"""
    parser = ArgumentParser(
        prog="collide-pbe",
        description="Deterministic solver for coagulation with collisional breakage",
        formatter_class=RawDescriptionHelpFormatter,
        epilog=(
            "exit codes: 0 success, 1 configuration error, 2 integration aborted "
            "(partial outputs kept), 3 oracle case failed"
        ),
    )

    parser.add_argument("command", choices=COMMANDS, help="What to run")

    parser.add_argument(
        "--config", required=True, help="Configuration file (YAML or key = value lines)"
    )

    # Output directory overrides output.dir
    parser.add_argument("--out", help="Output directory")

    parser.add_argument(
        "--threads",
        type=positive_int,
        help=f"Worker threads for converge/oracle (fallback: ${THREADS_ENV}, then 1)",
    )

    parser.add_argument(
        "--dump-tables",
        action="store_true",
        help="simulate: also write kernel.csv, probability.csv and redistribution.csv",
    )

    return parser


def resolve_threads(cli_value: Optional[int]) -> int:
    """--threads, else $COLLIDE_PBE_THREADS, else 1"""
    if cli_value is not None:
        return cli_value
    env_value = os.environ.get(THREADS_ENV)
    if env_value:
        try:
            return positive_int(env_value)
        except ArgumentTypeError:
            raise ValueError(f"{THREADS_ENV}={env_value!r} is not a positive integer")
    return 1
