"""Small exact networks: clipping and a sum of absolute values."""

from __future__ import annotations

import numpy as np

from ..algebra import affine_net, compose, compose_chain, parallelize_equal
from ..network import AffineLayer, Network

__all__ = ["build_clip", "build_abs_sum"]


def _unit_relu() -> Network:
    return Network((AffineLayer([[1.0]], [0.0]), AffineLayer([[1.0]], [0.0])))


def build_clip(u: float, v: float, n: int) -> Network:
    """Clip every coordinate of ``R^n`` to ``[u, v]``.

    The scalar piece is ``max(u, min(x, v))`` written as two shifted ReLUs
    composed in sequence; ``n`` copies are stacked in parallel.
    """
    if v < u:
        raise ValueError(f"clip needs u <= v, got u={u}, v={v}")
    if n < 1:
        raise ValueError("n must be positive")
    lower = compose_chain([affine_net([[1.0]], [u]), _unit_relu(), affine_net([[1.0]], [-u])])
    upper = compose_chain([affine_net([[-1.0]], [v]), _unit_relu(), affine_net([[-1.0]], [v])])
    scalar = compose(lower, upper)
    return parallelize_equal([scalar] * n)


def build_abs_sum(d: int = 3) -> Network:
    """Network with widths ``(d, 2d, d, 1)`` realizing ``|x_1| + ... + |x_d|``.

    The first layer emits ``x_i`` and ``-x_i``, the second adds each pair
    back into ``|x_i|`` and the last layer sums.
    """
    if d < 1:
        raise ValueError("d must be positive")
    eye = np.eye(d)
    split = np.kron(eye, np.array([[1.0], [-1.0]]))
    fold = np.kron(eye, np.array([[1.0, 1.0]]))
    return Network(
        (
            AffineLayer(split, np.zeros(2 * d)),
            AffineLayer(fold, np.zeros(d)),
            AffineLayer(np.ones((1, d)), np.zeros(1)),
        )
    )
