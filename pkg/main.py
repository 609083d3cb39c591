"""markovdiff main entry point."""

import sys
from typing import List, Optional

from dotenv import load_dotenv

from src.cli.config import load_run_config
from src.cli.parser import build_parser, overrides_from_args
from src.cli.runner import EXIT_INVALID, run
from src.utils.config import load_config
from src.utils.errors import ConfigError, ModelError
from src.utils.logging import setup_logging


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for markovdiff."""
    # Load environment variables
    load_dotenv()

    # Parse command line arguments
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        env = load_config()
    except ConfigError as exc:
        setup_logging(args.log_level, sys.stderr)
        parser.exit(EXIT_INVALID, f"{exc}\n")
    setup_logging(args.log_level or env["log_level"], sys.stderr)

    # Resolve the run configuration: defaults < environment < file < flags
    try:
        config = load_run_config(
            args.command,
            args.config,
            overrides_from_args(args),
            env_defaults={"mc.workers": env["workers"]},
        )
    except (ConfigError, ModelError) as exc:
        sys.stderr.write(f"Invalid configuration: {exc}\n")
        return EXIT_INVALID

    # Run the selected subcommand
    return run(config, include_timing=args.timing)


if __name__ == "__main__":
    sys.exit(main())
