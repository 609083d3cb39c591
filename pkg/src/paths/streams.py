"""Counter-based random streams, one independent substream per path.

A stream is a Philox generator keyed by ``SeedSequence(seed,
spawn_key=(stream_id,))``. Path ``j`` always reads the same bits no matter
which worker simulates it or how paths are chunked.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from src.utils.errors import ConfigError

MAX_U64 = 2**64


class PathOrigin(str, Enum):
    """Which process produced a path."""

    CHAIN = "chain"
    EULER = "euler"
    EXACT_DIFFUSION = "exact-diffusion"


@dataclass(frozen=True)
class RandomStream:
    """Seed and stream id of one reproducible substream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= int(value) < MAX_U64:
                raise ConfigError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of the substream."""
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(sequence))

    def substream(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)


def base_noise(stream: RandomStream, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """The uniforms and normals a chain path of ``size`` steps consumes.

    Uniforms are drawn first, then normals; simulators rely on this order.
    """
    rng = stream.generator()
    uniforms = rng.random(size)
    normals = rng.standard_normal(size)
    return uniforms, normals


def base_normals(stream: RandomStream, size: int) -> np.ndarray:
    """The normals a diffusion path of ``size`` steps consumes."""
    return stream.generator().standard_normal(size)


def stacked_noise(seed: int, path_ids: Sequence[int], size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row-stacked ``base_noise`` for several paths."""
    uniforms = np.empty((len(path_ids), size))
    normals = np.empty((len(path_ids), size))
    for row, path_id in enumerate(path_ids):
        uniforms[row], normals[row] = base_noise(RandomStream(seed, path_id), size)
    return uniforms, normals


def stacked_normals(seed: int, path_ids: Sequence[int], size: int) -> np.ndarray:
    """Row-stacked ``base_normals`` for several paths."""
    normals = np.empty((len(path_ids), size))
    for row, path_id in enumerate(path_ids):
        normals[row] = base_normals(RandomStream(seed, path_id), size)
    return normals
