"""Brownian bridges on [0, 1] by Levy bisection.

Each interior mesh point is filled in as the midpoint of an already known
interval (l, r): given B_l and B_r, B_m is normal with the linear
interpolation as mean and variance (t_m - t_l)(t_r - t_m) / (t_r - t_l).
This is exact for any mesh, dyadic or not.
"""

from collections import deque
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from src.paths.streams import RandomStream
from src.utils.errors import ConfigError


@lru_cache(maxsize=16)
def _bisection_order(mesh: int) -> Tuple[Tuple[int, int, int], ...]:
    order: List[Tuple[int, int, int]] = []
    queue = deque([(0, mesh)])
    while queue:
        left, right = queue.popleft()
        if right - left < 2:
            continue
        mid = (left + right) // 2
        order.append((left, mid, right))
        queue.append((left, mid))
        queue.append((mid, right))
    return tuple(order)


def simulate_bridges(rng: RandomStream, mesh: int, count: int) -> np.ndarray:
    """Simulate ``count`` bridges at the points j / mesh, j = 0..mesh.

    Returns:
        Array of shape (count, mesh + 1) with zero first and last columns

    Raises:
        ConfigError: If ``mesh < 2``
    """
    if mesh < 2:
        raise ConfigError(f"bridge mesh must be at least 2, got {mesh}")
    order = _bisection_order(mesh)
    normals = rng.generator().standard_normal((count, len(order)))
    bridges = np.zeros((count, mesh + 1))
    for column, (left, mid, right) in enumerate(order):
        weight = (mid - left) / (right - left)
        sd = np.sqrt((mid - left) * (right - mid) / (right - left) / mesh)
        bridges[:, mid] = (
            (1.0 - weight) * bridges[:, left] + weight * bridges[:, right] + sd * normals[:, column]
        )
    return bridges


def simulate_bridge(rng: RandomStream, mesh: int = 64) -> np.ndarray:
    """Simulate one Brownian bridge at mesh + 1 equidistant points."""
    return simulate_bridges(rng, mesh, 1)[0]
