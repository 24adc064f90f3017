"""Approximate squares and products.

The square on ``[0, 1]`` comes from the sawtooth expansion
``x**2 = x - sum_s g_s(x) / 4**s``, where ``g_s`` is the ``s``-fold
composition of the tent map. Stopping after ``m`` teeth leaves an error of
at most ``4**-(m + 1)``. Everything else is built from that piece by
rescaling, the polarization identity ``xy = ((x + y)**2 - x**2 - y**2) / 2``
and a binary tree of pairwise products.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..algebra import (
    affine_net,
    compose,
    compose_chain_with_identities,
    identity_net,
    parallelize_equal,
)
from ..network import AffineLayer, Network
from .basic import build_clip

__all__ = [
    "square01_length",
    "build_square01",
    "build_square",
    "build_prod2",
    "build_pairwise_prod",
    "prod_tree_tolerances",
    "build_prod_pow2",
    "ceil_log2",
    "build_prod",
    "build_running_prod",
    "build_running_prod_clipped",
]

_TENT_ROW = np.array([2.0, -4.0, 2.0, 0.0])
_KNOT_BIAS = np.array([0.0, -0.5, -1.0, 0.0])


def ceil_log2(n: int) -> int:
    """``ceil(log2(n))`` for a positive integer, computed exactly."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1).bit_length()


def square01_length(eps: float) -> int:
    """Number of layers used by :func:`build_square01` for accuracy ``eps``."""
    target = 1 / Fraction(eps)
    k = 0
    while Fraction(4) ** k < target:
        k += 1
    return max(2, k)


def build_square01(eps: float) -> Network:
    """Approximate ``x**2`` on ``[0, 1]`` within ``eps`` using width-4 hidden layers.

    Each hidden layer holds ``relu(y)``, ``relu(y - 1/2)``, ``relu(y - 1)`` for
    the current tent input ``y`` plus a running partial sum. The realization
    is zero left of 0, equals ``x`` right of 1 and is 2-Lipschitz everywhere.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    teeth = square01_length(eps) - 1
    layers = [AffineLayer(np.ones((4, 1)), _KNOT_BIAS)]
    for s in range(1, teeth):
        w = np.vstack([_TENT_ROW, _TENT_ROW, _TENT_ROW, -_TENT_ROW / 4.0**s])
        w[3, 3] = 1.0
        layers.append(AffineLayer(w, _KNOT_BIAS))
    out = -_TENT_ROW / 4.0**teeth
    out[3] = 1.0
    layers.append(AffineLayer(out[None, :], [0.0]))
    return Network(tuple(layers))


def build_square(R: float, eps: float) -> Network:
    """Approximate ``x**2`` on ``[-R, R]`` within ``eps``; the realization is ``2R``-Lipschitz.

    Computes ``R**2 * s(|x| / R)`` with ``s`` from :func:`build_square01`.
    """
    if not (R > 0 and eps > 0):
        raise ValueError(f"R and eps must be positive, got R={R}, eps={eps}")
    fold = Network(
        (
            AffineLayer([[1.0 / R], [-1.0 / R]], [0.0, 0.0]),
            AffineLayer([[1.0, 1.0]], [0.0]),
        )
    )
    inner = build_square01(min(1.0, eps / (R * R)))
    return compose(affine_net([[R * R]]), compose(inner, fold))


def build_prod2(R: float, eps: float) -> Network:
    """Approximate ``(x, y) -> xy`` on ``[-R, R]^2`` within ``eps``."""
    if not (R > 0 and eps > 0):
        raise ValueError(f"R and eps must be positive, got R={R}, eps={eps}")
    sq = build_square(2.0 * R, 2.0 * eps / 3.0)
    spread = affine_net([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    combine = affine_net([[0.5, -0.5, -0.5]])
    return compose(combine, compose(parallelize_equal([sq, sq, sq]), spread))


def build_pairwise_prod(d: int, R: float, eps: float) -> Network:
    """Map ``(x_1, ..., x_2d)`` to ``(x_1 x_2, ..., x_{2d-1} x_2d)`` within Euclidean error ``eps``."""
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    return parallelize_equal([build_prod2(R, eps / math.sqrt(d))] * d)


def prod_tree_tolerances(k: int, R: float, eps: float) -> list[float]:
    """Accuracy demanded from each level of the product tree over ``2**k`` factors.

    Level ``i`` gets ``2**((5i - 5k) / 2) * R**(2**i - 2**k) * eps / k`` so
    that, after amplification by the Lipschitz constants of the later levels,
    every level contributes ``eps / k``.
    """
    return [
        2.0 ** ((5 * i - 5 * k) / 2) * R ** (2**i - 2**k) * eps / k for i in range(1, k + 1)
    ]


def build_prod_pow2(k: int, R: float, eps: float) -> Network:
    """Approximate the product of ``2**k`` numbers in ``[-R, R]`` within ``eps``.

    Level ``i`` multiplies neighbours pairwise on ``[-R**(2**(i-1)), R**(2**(i-1))]``;
    the levels are chained with identity networks in between.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if not (R > 0 and eps > 0):
        raise ValueError(f"R and eps must be positive, got R={R}, eps={eps}")
    levels = [
        build_pairwise_prod(2 ** (k - i), R ** (2 ** (i - 1)), tol)
        for i, tol in enumerate(prod_tree_tolerances(k, R, eps), start=1)
    ]
    return compose_chain_with_identities(levels[::-1])


def build_prod(d: int, R: float, eps: float) -> Network:
    """Approximate ``x_1 * ... * x_d`` on ``[-R, R]^d`` within ``eps`` (``R >= 1``).

    The input is padded with ones up to the next power of two. For ``d = 1``
    the affine identity is returned.
    """
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if d == 1:
        return affine_net([[1.0]])
    k = ceil_log2(d)
    width = 2**k
    pad = np.zeros((width, d))
    pad[:d, :] = np.eye(d)
    ones = np.zeros(width)
    ones[d:] = 1.0
    return compose(build_prod_pow2(k, R, eps), affine_net(pad, ones))


def _prefix_spread(d: int) -> tuple[np.ndarray, np.ndarray]:
    # block i holds x_1..x_i followed by ones
    a = np.zeros((d * d, d))
    b = np.zeros(d * d)
    for i in range(d):
        for j in range(d):
            if j <= i:
                a[i * d + j, j] = 1.0
            else:
                b[i * d + j] = 1.0
    return a, b


def build_running_prod(d: int, R: float, eps: float) -> Network:
    """Approximate ``x -> (x_1, x_1 x_2, ..., x_1 ... x_d)`` on ``[-R, R]^d`` within Euclidean error ``eps``."""
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    block = build_prod(d, R, eps / math.sqrt(d))
    a, b = _prefix_spread(d)
    return compose(parallelize_equal([block] * d), affine_net(a, b))


def build_running_prod_clipped(d: int, R: float, eps: float) -> Network:
    """Running product of the coordinates clipped to ``[-1, 1]``.

    Valid on all of ``R^d``; ``R`` only records the intended domain. The
    clip network is joined to the running product on ``[-1, 1]^d`` through
    an identity network.
    """
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    inner = build_running_prod(d, 1.0, eps / 2.0)
    return compose(inner, compose(identity_net(d), build_clip(-1.0, 1.0, d)))
