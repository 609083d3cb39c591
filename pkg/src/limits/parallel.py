"""Monte-Carlo settings and deterministic chunked evaluation over paths.

Paths are split into fixed chunks of path ids whose size comes from the
configuration, never from the worker count. Chunks are mapped in order and
concatenated, so results do not depend on how many workers ran them.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, TypeVar

from src.utils.errors import ConfigError

# Get the module logger
logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class MonteCarloConfig:
    """Path count, base seed, chunking and worker count of a Monte-Carlo run."""

    n_paths: int = 2000
    seed: int = 12345
    chunk_size: int = 250
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_paths < 2:
            raise ConfigError(f"mc.n_paths must be at least 2, got {self.n_paths}")
        if self.chunk_size < 1:
            raise ConfigError(f"mc.chunk_size must be positive, got {self.chunk_size}")
        if self.workers < 1:
            raise ConfigError(f"mc.workers must be positive, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"mc.seed must be non-negative, got {self.seed}")

    def chunks(self) -> List[range]:
        """Path-id ranges, in order."""
        return [
            range(start, min(start + self.chunk_size, self.n_paths))
            for start in range(0, self.n_paths, self.chunk_size)
        ]

    def to_dict(self) -> Dict[str, Any]:
        """Identity of the run; the worker count is not part of it."""
        return {"n_paths": self.n_paths, "seed": self.seed, "chunk_size": self.chunk_size}


def map_path_chunks(task: Callable[[range], T], mc: MonteCarloConfig) -> List[T]:
    """Apply ``task`` to every chunk of path ids and return results in chunk order.

    Args:
        task: Function of a range of path ids
        mc: Monte-Carlo settings

    Returns:
        One result per chunk
    """
    chunks = mc.chunks()
    logger.debug(f"Evaluating {mc.n_paths} paths in {len(chunks)} chunks on {mc.workers} workers")
    if mc.workers == 1 or len(chunks) == 1:
        return [task(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        return list(pool.map(task, chunks))
