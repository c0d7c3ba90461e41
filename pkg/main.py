import sys
from typing import List, Optional

from src.engine.simulation_runner import SimulationRunner
from src.utils.cli_parser import create_cli_parser, resolve_threads
from src.utils.config import override_output_dir, parse_config
from src.utils.exceptions import ConfigError, StiffnessError
from src.utils.logger import set_default_level, setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORTED = 2
EXIT_ORACLE_FAILED = 3


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_cli_parser()
    args = parser.parse_args(argv)

    try:
        config = override_output_dir(parse_config(args.config, args.command), args.out)
        threads = resolve_threads(args.threads)
    except (ConfigError, ValueError) as e:
        errors = e.errors if isinstance(e, ConfigError) else [str(e)]
        logger.error(f"Invalid configuration {args.config}:")
        for error in errors:
            logger.error(f"  - {error}")
        return EXIT_CONFIG

    set_default_level(config.logging_level)

    try:
        runner = SimulationRunner(
            config, threads=threads, dump_tables=args.dump_tables
        )
        outcome = runner.run()
    except StiffnessError as e:
        logger.error(f"Run aborted, partial outputs kept in {config.output_dir}: {e}")
        return EXIT_ABORTED
    except ValueError as e:
        logger.error(f"Invalid model or initial condition: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"Cannot write outputs to {config.output_dir}: {e}")
        return EXIT_CONFIG

    logger.info(f"Outputs written to {outcome.output_dir}")
    if outcome.command == "oracle" and not outcome.passed:
        return EXIT_ORACLE_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
