"""Registry of named constructions with their oracles and promised bounds.

Every entry knows how to build its network from a :class:`Params` record,
what function the network should realize, on which box the promises hold and
what the promises are. The command line and the sweep harness both work
from this table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import constructions as C
from .algebra import affine_net, identity_net
from .functions import Function1D, named_function
from .network import Network
from .verify import Box, CellSpec, Claims

__all__ = ["Params", "Construction", "CONSTRUCTIONS", "get_construction"]

SQRT32 = math.sqrt(32.0)


@dataclass(frozen=True)
class Params:
    d: int | None = None
    R: float | None = None
    eps: float | None = None
    n: int | None = None
    k: int | None = None
    u: float | None = None
    v: float | None = None
    fn: str | None = None
    pipeline: str | None = None
    knots: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None
    weights: tuple[tuple[float, ...], ...] | None = None
    bias: tuple[float, ...] | None = None

    def need(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError("missing parameter(s): " + ", ".join("--" + m for m in missing))


@dataclass(frozen=True)
class Construction:
    name: str
    summary: str
    required: tuple[str, ...]
    build: Callable[[Params], Network]
    oracle: Callable[[Params], Callable[[np.ndarray], np.ndarray]]
    domain: Callable[[Params], Box]
    claims: Callable[[Params], Claims]
    sweep_axis: str = "d"

    def validate(self, p: Params) -> None:
        p.need(*self.required)
        for name in ("d", "n", "k"):
            val = getattr(p, name)
            if val is not None and val < 1:
                raise ValueError(f"--{name} must be a positive integer, got {val}")
        if p.R is not None and not p.R > 0:
            raise ValueError(f"--R must be positive, got {p.R}")
        if p.eps is not None and not p.eps > 0:
            raise ValueError(f"--eps must be positive, got {p.eps}")

    def cell(self, d: int, R: float, eps: float, base: Params | None = None) -> CellSpec:
        p = replace(base or Params(), **{self.sweep_axis: d}, R=R, eps=eps)
        self.validate(p)
        return CellSpec(self.build(p), self.oracle(p), self.domain(p), self.claims(p))

    def cell_factory(self, base: Params) -> Callable[[int, float, float], CellSpec]:
        return lambda d, R, eps: self.cell(d, R, eps, base)


def _relu(x: float) -> float:
    return max(0.0, x)


def _radius(p: Params, default: float = 1.0) -> float:
    return default if p.R is None else p.R


def _cube(dim: int, p: Params) -> Box:
    return Box.cube(dim, _radius(p))


def _fns(p: Params, d: int) -> list[Function1D]:
    names = [s for s in (p.fn or "").split(",") if s.strip()]
    if not names:
        raise ValueError("missing parameter: --fn")
    fns = [named_function(s) for s in names]
    if len(fns) == 1:
        return fns * d
    if len(fns) != d:
        raise ValueError(f"got {len(fns)} functions for dimension {d}")
    return fns


def _loclip_param_bound(fn: Function1D, R: float, eps: float) -> float:
    if fn.lip_c == 0:
        return 2
    return 12 * fn.lipschitz_on(R) * R / eps + 10


# identity ------------------------------------------------------------------

def _identity_claims(p):
    return Claims(error=0.0, lipschitz=1.0, params_exact=4 * p.d**2 + 3 * p.d, length=2)


# affine --------------------------------------------------------------------

def _affine_parts(p: Params):
    if p.weights is None:
        raise ValueError("missing parameter: --weights")
    w = np.array(p.weights, dtype=np.float64, ndmin=2)
    b = np.zeros(w.shape[0]) if p.bias is None else np.array(p.bias, dtype=np.float64)
    if b.shape != (w.shape[0],):
        raise ValueError(f"--bias has length {b.size}, expected {w.shape[0]}")
    return w, b


def _affine_oracle(p):
    w, b = _affine_parts(p)
    return lambda x: x @ w.T + b


def _affine_claims(p):
    w, b = _affine_parts(p)
    return Claims(
        error=0.0,
        lipschitz=float(np.linalg.norm(w, 2)) * (1 + 1e-12),
        params_exact=w.shape[0] * (w.shape[1] + 1),
        length=1,
    )


# clip ----------------------------------------------------------------------

def _clip_check(p):
    if p.v < p.u:
        raise ValueError(f"clip needs --u <= --v, got u={p.u}, v={p.v}")


def _clip_domain(p):
    _clip_check(p)
    r = _radius(p, max(abs(p.u), abs(p.v)) + 1.0)
    return Box.cube(p.n, r)


def _clip_claims(p):
    return Claims(error=0.0, lipschitz=1.0, params_exact=3 * p.n**2 + 3 * p.n, length=3)


# interpolation -------------------------------------------------------------

def _grid(p: Params) -> C.Grid1D:
    if p.knots is None or p.values is None:
        raise ValueError("missing parameter(s): --knots and --values")
    return C.Grid1D(np.array(p.knots), np.array(p.values))


def _interp_claims(p):
    g = _grid(p)
    slopes = np.abs(np.diff(g.values) / np.diff(g.knots))
    return Claims(error=0.0, lipschitz=float(slopes.max()) * (1 + 1e-12), params_exact=3 * g.segments + 4, length=2)


def _interp_domain(p):
    g = _grid(p)
    span = g.knots[-1] - g.knots[0]
    return Box((g.knots[0] - span,), (g.knots[-1] + span,))


# loclip --------------------------------------------------------------------

def _loclip_claims(p):
    fn = _fns(p, 1)[0]
    return Claims(error=p.eps, lipschitz=fn.lipschitz_on(p.R), params=_loclip_param_bound(fn, p.R, p.eps))


def _componentwise_claims(p):
    fns = _fns(p, p.d)
    scaled = p.eps / math.sqrt(p.d)
    per = [max(7.0, _loclip_param_bound(f, p.R, scaled)) for f in fns]
    return Claims(
        error=p.eps,
        lipschitz=max(f.lipschitz_on(p.R) for f in fns),
        params=0.5 * sum(per) ** 2,
    )


def _componentwise_oracle(p):
    fns = _fns(p, p.d)
    return lambda x: np.column_stack([f(x[:, j]) for j, f in enumerate(fns)])


# maxima --------------------------------------------------------------------

def _max_claims(p):
    d = p.d
    return Claims(
        error=0.0,
        lipschitz=1.0,
        params=3 * d * d + 18 * d + 12 * C.ceil_log2(d) - 6.5,
        length=C.ceil_log2(d) + 1 if d >= 2 else 2,
    )


def _running_max_claims(p):
    d = p.d
    return Claims(error=0.0, lipschitz=math.sqrt(d), params=3 * d**4 + 30 * d**3)


# squares and products ----------------------------------------------------------

def _square01_claims(p):
    e = p.eps
    return Claims(
        error=e,
        lipschitz=2.0,
        params=max(13.0, 10 * math.log2(1 / e) - 7),
        length=C.square01_length(e),
    )


def _square_claims(p):
    R, e = p.R, p.eps
    return Claims(error=e, lipschitz=2 * R, params=max(21.0, 20 * math.log2(R) - 10 * math.log2(e) + 1))


def _prod2_claims(p):
    R, e = p.R, p.eps
    return Claims(error=e, lipschitz=SQRT32 * R, params=max(157.0, 211 + 180 * math.log2(R) - 90 * math.log2(e)))


def _pairwise_claims(p):
    d, R, e = p.d, p.R, p.eps
    return Claims(
        error=e,
        lipschitz=SQRT32 * R,
        params=d * d * max(157.0, 211 + 45 * (4 * math.log2(R) - 2 * math.log2(e) + math.log2(d))),
    )


def _pairwise_oracle(p):
    return lambda x: x[:, 0::2] * x[:, 1::2]


def _pow2_claims(p):
    k, R, e = p.k, p.R, p.eps
    return Claims(
        error=e,
        lipschitz=2 ** (5 * k / 2) * R ** (2**k - 1),
        params=426 * k * 4**k + 90 * _relu(math.log2(R)) * 8**k + 90 * _relu(math.log2(1 / e)) * 4**k,
    )


def _prod_claims(p):
    d, R, e = p.d, p.R, p.eps
    return Claims(
        error=e,
        lipschitz=SQRT32 * d**2.5 * R ** (2 * d - 1),
        params=1896 * d**3 + 720 * math.log2(R) * d**3 + 360 * _relu(math.log2(1 / e)) * d**2,
    )


def _running_prod_bound(d: int, R: float, e: float) -> float:
    return 2296 * d**5 + 720 * math.log2(R) * d**5 + 360 * _relu(math.log2(1 / e)) * d**4


def _running_prod_claims(p):
    d, R, e = p.d, p.R, p.eps
    return Claims(error=e, lipschitz=SQRT32 * d**3 * R ** (2 * d - 1), params=_running_prod_bound(d, R, e))


def _running_prod_clipped_claims(p):
    d, e = p.d, p.eps
    return Claims(
        error=e,
        lipschitz=SQRT32 * d**3,
        params=10 * d * d + 10 * d + 2 * _running_prod_bound(d, 1.0, e / 2),
    )


# pipelines -----------------------------------------------------------------

def _spec(p: Params) -> C.PipelineSpec:
    if p.pipeline is None:
        raise ValueError("missing parameter: --pipeline")
    return C.parse_pipeline(p.pipeline, p.d)


def _pipeline_claims(p):
    plan = C.plan_pipeline(_spec(p), p.R, p.eps)
    lip = 1.0
    for s in plan.steps:
        lip *= float(s.lipschitz)
    return Claims(error=p.eps, lipschitz=lip)


def _abs_sum_claims(p):
    d = p.d
    return Claims(error=0.0, lipschitz=math.sqrt(d), params_exact=2 * d * (d + 1) + d * (2 * d + 1) + d + 1, length=3)


def _eps01(p: Params) -> float:
    if not 0 < p.eps <= 1:
        raise ValueError(f"--eps must lie in (0, 1], got {p.eps}")
    return p.eps


def _R1(p: Params) -> float:
    if p.R < 1:
        raise ValueError(f"--R must be at least 1, got {p.R}")
    return p.R


_ENTRIES = [
    Construction(
        "identity", "identity on R^d", ("d",),
        lambda p: identity_net(p.d),
        lambda p: (lambda x: x),
        lambda p: _cube(p.d, p),
        _identity_claims,
    ),
    Construction(
        "affine", "single affine layer x -> Wx + B", ("weights",),
        lambda p: affine_net(*_affine_parts(p)),
        _affine_oracle,
        lambda p: _cube(_affine_parts(p)[0].shape[1], p),
        _affine_claims,
    ),
    Construction(
        "clip", "clip each coordinate to [u, v]", ("u", "v", "n"),
        lambda p: (_clip_check(p), C.build_clip(p.u, p.v, p.n))[1],
        lambda p: (lambda x: np.clip(x, p.u, p.v)),
        _clip_domain,
        _clip_claims,
        sweep_axis="n",
    ),
    Construction(
        "interp", "piecewise-linear interpolation through (knots, values)", ("knots", "values"),
        lambda p: C.build_interpolation(_grid(p)),
        lambda p: (lambda x, g=_grid(p): np.interp(x[:, 0], g.knots, g.values)[:, None]),
        _interp_domain,
        _interp_claims,
    ),
    Construction(
        "loclip1d", "grid approximation of a named scalar function", ("fn", "R", "eps"),
        lambda p: C.build_loclip_1d(_fns(p, 1)[0], _R1(p), _eps01(p)),
        lambda p: (lambda x, f=_fns(p, 1)[0]: f(x[:, 0])[:, None]),
        lambda p: Box.cube(1, p.R),
        _loclip_claims,
    ),
    Construction(
        "max", "maximum of d numbers", ("d",),
        lambda p: C.build_max(p.d),
        lambda p: (lambda x: x.max(axis=1, keepdims=True)),
        lambda p: _cube(p.d, p),
        _max_claims,
    ),
    Construction(
        "running_max", "prefix maxima of d numbers", ("d",),
        lambda p: C.build_running_max(p.d),
        lambda p: (lambda x: np.maximum.accumulate(x, axis=1)),
        lambda p: _cube(p.d, p),
        _running_max_claims,
    ),
    Construction(
        "square01", "x^2 on [0, 1]", ("eps",),
        lambda p: C.build_square01(_eps01(p)),
        lambda p: (lambda x: x**2),
        lambda p: Box((0.0,), (1.0,)),
        _square01_claims,
    ),
    Construction(
        "square", "x^2 on [-R, R]", ("R", "eps"),
        lambda p: C.build_square(p.R, p.eps),
        lambda p: (lambda x: x**2),
        lambda p: Box.cube(1, p.R),
        _square_claims,
    ),
    Construction(
        "prod2", "xy on [-R, R]^2", ("R", "eps"),
        lambda p: C.build_prod2(p.R, p.eps),
        lambda p: (lambda x: x[:, :1] * x[:, 1:2]),
        lambda p: Box.cube(2, p.R),
        _prod2_claims,
    ),
    Construction(
        "pairwise_prod", "products of d neighbouring pairs on [-R, R]^(2d)", ("d", "R", "eps"),
        lambda p: C.build_pairwise_prod(p.d, p.R, p.eps),
        _pairwise_oracle,
        lambda p: Box.cube(2 * p.d, p.R),
        _pairwise_claims,
    ),
    Construction(
        "prod_pow2", "product of 2^k numbers on [-R, R]^(2^k)", ("k", "R", "eps"),
        lambda p: C.build_prod_pow2(p.k, p.R, p.eps),
        lambda p: (lambda x: x.prod(axis=1, keepdims=True)),
        lambda p: Box.cube(2**p.k, p.R),
        _pow2_claims,
        sweep_axis="k",
    ),
    Construction(
        "prod", "product of d numbers on [-R, R]^d", ("d", "R", "eps"),
        lambda p: C.build_prod(p.d, _R1(p), p.eps),
        lambda p: (lambda x: x.prod(axis=1, keepdims=True)),
        lambda p: Box.cube(p.d, p.R),
        _prod_claims,
    ),
    Construction(
        "running_prod", "prefix products of d numbers on [-R, R]^d", ("d", "R", "eps"),
        lambda p: C.build_running_prod(p.d, _R1(p), p.eps),
        lambda p: (lambda x: np.cumprod(x, axis=1)),
        lambda p: Box.cube(p.d, p.R),
        _running_prod_claims,
    ),
    Construction(
        "running_prod_clipped", "prefix products of the coordinates clipped to [-1, 1]", ("d", "R", "eps"),
        lambda p: C.build_running_prod_clipped(p.d, _R1(p), _eps01(p)),
        lambda p: (lambda x: np.cumprod(np.clip(x, -1.0, 1.0), axis=1)),
        lambda p: Box.cube(p.d, p.R),
        _running_prod_clipped_claims,
    ),
    Construction(
        "componentwise", "named scalar functions applied coordinatewise", ("d", "fn", "R", "eps"),
        lambda p: C.build_componentwise(_fns(p, p.d), _R1(p), _eps01(p)),
        _componentwise_oracle,
        lambda p: Box.cube(p.d, p.R),
        _componentwise_claims,
    ),
    Construction(
        "pipeline", "chain of cw:<fn>, rmax and rprod steps", ("d", "pipeline", "R", "eps"),
        lambda p: C.build_pipeline(_spec(p), p.R, p.eps),
        lambda p: C.pipeline_oracle(_spec(p)),
        lambda p: Box.cube(p.d, p.R),
        _pipeline_claims,
    ),
    Construction(
        "abs_sum", "|x_1| + ... + |x_d| with two hidden layers", ("d",),
        lambda p: C.build_abs_sum(p.d),
        lambda p: (lambda x: np.abs(x).sum(axis=1, keepdims=True)),
        lambda p: _cube(p.d, p),
        _abs_sum_claims,
    ),
]

CONSTRUCTIONS: dict[str, Construction] = {c.name: c for c in _ENTRIES}


def get_construction(name: str) -> Construction:
    try:
        return CONSTRUCTIONS[name]
    except KeyError:
        raise KeyError(
            f"unknown construction {name!r}; choose from {', '.join(CONSTRUCTIONS)}"
        ) from None
