"""Piecewise-linear interpolation networks and grid-based approximators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..algebra import affine_net, identity_net, parallelize_varlen
from ..errors import GridError
from ..functions import Function1D
from ..network import AffineLayer, Network

__all__ = [
    "Grid1D",
    "build_interpolation",
    "build_grid_loclip",
    "build_loclip_1d",
    "build_componentwise",
    "componentwise_lipschitz",
]


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Strictly increasing knots with one value per knot."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if k.ndim != 1 or v.ndim != 1 or k.shape != v.shape:
            raise GridError(f"knots and values must be vectors of equal length, got {k.shape} and {v.shape}")
        if k.size < 2:
            raise GridError("a grid needs at least two knots")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
            raise GridError("grid entries must be finite")
        bad = np.nonzero(np.diff(k) <= 0)[0]
        if bad.size:
            i = int(bad[0])
            raise GridError(f"knots must increase strictly; knot {i + 1} = {k[i + 1]} follows {k[i]}")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    @property
    def segments(self) -> int:
        return self.knots.size - 1


def build_interpolation(grid: Grid1D) -> Network:
    """One-hidden-layer network through the points of ``grid``.

    Hidden unit ``n`` is ``relu(x - knot_n)``. The output weights are the
    jumps in slope, so the realization is linear between knots and constant
    outside ``[knots[0], knots[-1]]``.
    """
    xi, h = grid.knots, grid.values
    slopes = np.diff(h) / np.diff(xi)
    out = np.empty(xi.size)
    out[0] = slopes[0]
    out[1:-1] = np.diff(slopes)
    out[-1] = -slopes[-1]
    hidden = AffineLayer(np.ones((xi.size, 1)), -xi)
    return Network((hidden, AffineLayer(out[None, :], [h[0]])))


def _grid_count(radius: float, step: float) -> int:
    # smallest k with k * step >= radius, as evaluated in floating point
    k = max(1, math.ceil(radius / step))
    while k > 1 and (k - 1) * step >= radius:
        k -= 1
    while k * step < radius:
        k += 1
    return k


def build_grid_loclip(fn: Function1D, R: float, eps: float) -> Grid1D:
    """Symmetric grid on ``[-R, R]`` fine enough for ``fn`` at accuracy ``eps``.

    With ``step = eps / (2 c (1 + 2R)**a)`` the grid has ``2N + 1`` knots where
    ``N`` is the least integer with ``N * step >= R``. Knots are spaced
    ``R / N <= step`` apart; clipping ``n * step`` to ``[-R, R]`` instead can
    leave a sliver segment next to ``R`` when ``R / step`` is an integer up
    to rounding, and the slope across a sliver is dominated by rounding.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not fn.lip_c > 0:
        raise ValueError("grid construction needs a positive Lipschitz constant c")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    step = eps / (2.0 * fn.lip_c * (1.0 + 2.0 * R) ** fn.lip_a)
    n = _grid_count(R, step)
    pos = R * (np.arange(1, n + 1, dtype=np.float64) / n)
    pos[-1] = R
    knots = np.concatenate([-pos[::-1], [0.0], pos])
    return Grid1D(knots, fn(knots))


def build_loclip_1d(fn: Function1D, R: float, eps: float) -> Network:
    """Interpolation network approximating ``fn`` on ``[-R, R]`` within ``eps``.

    A constant function (``lip_c == 0``) gives the one-layer network
    ``x -> 0 x + f(0)`` with two parameters.
    """
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if fn.lip_c == 0:
        return affine_net([[0.0]], [float(fn(np.zeros(1))[0])])
    return build_interpolation(build_grid_loclip(fn, R, eps))


def componentwise_lipschitz(fns: Sequence[Function1D], R: float) -> float:
    return max(f.lipschitz_on(R) for f in fns)


def build_componentwise(fns: Sequence[Function1D], R: float, eps: float) -> Network:
    """Apply ``fns[j]`` to coordinate ``j``, within Euclidean error ``eps`` on ``[-R, R]^d``."""
    if not fns:
        raise ValueError("need at least one function")
    per = eps / math.sqrt(len(fns))
    nets = [build_loclip_1d(f, R, per) for f in fns]
    return parallelize_varlen(nets, [identity_net(1)] * len(nets))
