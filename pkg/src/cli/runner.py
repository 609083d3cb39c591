"""Dispatch a resolved run and write its output.

Exit codes: 0 on success, 2 for configuration, model or assumption
failures, 3 when a numerical routine misses its tolerance.
"""

import csv
import logging
import sys
import time
from pathlib import Path
from typing import IO, Any, Dict, Iterable, Optional, Sequence, Union

from src import __version__
from src.cli.commands import COMMANDS, CommandResult
from src.cli.config import RunConfig
from src.limits.report import plain, report_json
from src.utils.errors import AssumptionError, ConfigError, ModelError, NumericalError

# Get the module logger
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

Destination = Optional[Union[str, Path, IO[str]]]


def _open(destination: Destination):
    if destination is None:
        return sys.stdout, False
    if isinstance(destination, (str, Path)):
        Path(destination).parent.mkdir(parents=True, exist_ok=True)
        return open(destination, "w", newline=""), True
    return destination, False


def write_report(document: Dict[str, Any], destination: Destination = None) -> None:
    """Write a JSON document in canonical form (sorted keys, indent 2, trailing newline)."""
    handle, owned = _open(destination)
    try:
        handle.write(report_json(document))
    finally:
        if owned:
            handle.close()


def write_csv(rows: Iterable[Sequence[Any]], columns: Sequence[str], destination: Destination = None) -> int:
    """Write a table with a header row; returns the number of data rows."""
    handle, owned = _open(destination)
    count = 0
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if value is None else (repr(value) if isinstance(value, float) else value) for value in row])
            count += 1
    finally:
        if owned:
            handle.close()
    return count


def _estimate_rows(document: Dict[str, Any]) -> Iterable[Sequence[Any]]:
    for name, estimate in sorted(document.get("estimates", {}).items()):
        yield (name, estimate["value"], estimate["stderr"], estimate["n"])


def emit(result: CommandResult, config: RunConfig, include_timing: bool = False) -> None:
    """Write a command result in the configured format."""
    destination = config.output["path"]
    if result.is_table:
        if config.output["format"] == "json":
            rows = [dict(zip(result.columns, row)) for row in result.rows]
            write_report({"rows": plain(rows), "config": config.to_dict(), "version": __version__}, destination)
        else:
            write_csv(result.rows, result.columns, destination)
        return

    if config.output["format"] == "csv":
        write_csv(_estimate_rows(result.document), ("name", "value", "stderr", "n"), destination)
        return
    document = dict(result.document)
    if include_timing and result.report is not None:
        document = result.report.to_dict(include_timing=True)
    document["config"] = config.to_dict()
    document["version"] = __version__
    write_report(document, destination)


def run(config: RunConfig, include_timing: bool = False) -> int:
    """Run one subcommand and write its output.

    Args:
        config: Resolved configuration
        include_timing: Add wall-clock seconds to JSON reports

    Returns:
        Process exit code
    """
    command = COMMANDS.get(config.command)
    if command is None:
        logger.error(f"Subcommand {config.command} is not supported")
        return EXIT_INVALID

    started = time.perf_counter()
    logger.info(f"Running {config.command}")
    try:
        result = command(config)
    except (ConfigError, ModelError, AssumptionError) as exc:
        logger.error(f"{config.command} rejected its input: {exc}")
        return EXIT_INVALID
    except NumericalError as exc:
        logger.error(f"{config.command} failed numerically: {exc}")
        return EXIT_NUMERICAL

    emit(result, config, include_timing)
    logger.info(f"{config.command} finished in {time.perf_counter() - started:.2f}s with exit code {result.exit_code}")
    return result.exit_code
