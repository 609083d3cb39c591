"""CSV dump of simulated paths (columns path_id, time, value, origin)."""

import csv
import logging
from pathlib import Path
from typing import IO, Iterable, Union

from src.paths.simulate import PathSample

# Get the module logger
logger = logging.getLogger(__name__)

PATH_COLUMNS = ("path_id", "time", "value", "origin")


def write_paths_csv(paths: Iterable[PathSample], destination: Union[str, Path, IO[str]]) -> int:
    """Write paths in long format.

    Args:
        paths: Paths to write
        destination: File path or open text stream

    Returns:
        Number of rows written
    """
    if isinstance(destination, (str, Path)):
        with open(destination, "w", newline="") as handle:
            return write_paths_csv(paths, handle)

    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(PATH_COLUMNS)
    rows = 0
    for path in paths:
        for time, value in zip(path.times, path.values):
            writer.writerow([path.path_id, repr(float(time)), repr(float(value)), path.origin.value])
            rows += 1
    logger.debug(f"Wrote {rows} path rows")
    return rows
