"""
Command-line front end for markovdiff.

This package provides:
- A strict JSON run-configuration schema with explicit defaults
- The argument parser and the mapping from flags to configuration keys
- One implementation per subcommand
- Dispatch with a fixed exit-code contract and canonical report writing
"""

from src.cli.commands import COMMANDS, CommandResult
from src.cli.config import RunConfig, load_run_config, schema_defaults
from src.cli.parser import build_parser, overrides_from_args
from src.cli.runner import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, run, write_csv, write_report

__all__ = [
    'COMMANDS',
    'CommandResult',
    'RunConfig',
    'load_run_config',
    'schema_defaults',
    'build_parser',
    'overrides_from_args',
    'EXIT_INVALID',
    'EXIT_NUMERICAL',
    'EXIT_OK',
    'run',
    'write_csv',
    'write_report',
]
