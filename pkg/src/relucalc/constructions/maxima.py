"""Exact networks for the maximum and the running maximum."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..algebra import affine_net, compose, identity_net, parallelize_equal
from ..network import AffineLayer, Network

__all__ = ["build_max", "build_running_max", "max2_net"]


def max2_net() -> Network:
    """``max(x, y) = relu(x - y) + relu(y) - relu(-y)`` with widths ``(2, 3, 1)``."""
    return Network(
        (
            AffineLayer([[1.0, -1.0], [0.0, 1.0], [0.0, -1.0]], [0.0, 0.0, 0.0]),
            AffineLayer([[1.0, 1.0, -1.0]], [0.0]),
        )
    )


@lru_cache(maxsize=None)
def build_max(d: int) -> Network:
    """Network realizing the maximum of ``d`` numbers exactly.

    Coordinates are paired up and reduced by :func:`max2_net`; an odd one
    out rides along through an identity network. The tree has
    ``ceil(log2(d))`` levels. For ``d = 1`` the identity network is returned.
    """
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    if d == 1:
        return identity_net(1)
    if d == 2:
        return max2_net()
    pairs = [max2_net()] * (d // 2)
    if d % 2:
        pairs.append(identity_net(1))
    return compose(build_max((d + 1) // 2), parallelize_equal(pairs))


def running_max_spread(d: int) -> np.ndarray:
    """Matrix sending ``x`` to ``d`` blocks, block ``i`` being ``x_1..x_i`` padded with ``x_i``."""
    a = np.zeros((d * d, d))
    for i in range(d):
        for j in range(d):
            a[i * d + j, min(j, i)] = 1.0
    return a


def build_running_max(d: int) -> Network:
    """Network realizing ``x -> (x_1, max(x_1, x_2), ..., max(x_1..x_d))`` exactly."""
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    return compose(parallelize_equal([build_max(d)] * d), affine_net(running_max_spread(d)))
