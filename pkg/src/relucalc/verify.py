"""Sampling-based checks of error, Lipschitz and size claims.

Errors and Lipschitz constants are estimated from samples, so a reported
value is a lower bound on the true quantity. A failed check is therefore a
genuine counterexample, while a passed check is evidence rather than proof.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .algebra import compose, identity_net
from .errors import ContainmentError
from .network import Network

__all__ = [
    "Box",
    "BoundCheck",
    "Claims",
    "VerifyReport",
    "sample_points",
    "estimate_sup_error",
    "estimate_lipschitz",
    "check_bounds",
    "verify",
    "Approximant",
    "composition_cost_check",
    "SweepRow",
    "SweepResult",
    "SweepCellError",
    "sweep",
    "cell_seed",
    "CSV_HEADER",
    "CellSpec",
    "Fit",
]

CSV_HEADER = ("d", "R", "eps", "params", "sup_error", "lipschitz", "passed")
_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower_i, upper_i]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo, hi = tuple(map(float, self.lower)), tuple(map(float, self.upper))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be nonempty and of equal length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, d: int, R: float) -> "Box":
        return cls((-R,) * d, (R,) * d)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def radius(self) -> float:
        return max(max(abs(a), abs(b)) for a, b in zip(self.lower, self.upper))

    def contains(self, other: "Box") -> bool:
        return self.dim == other.dim and all(
            a <= c and d <= b
            for a, b, c, d in zip(self.lower, self.upper, other.lower, other.upper)
        )


def _as_box(domain, d: int) -> Box:
    if isinstance(domain, Box):
        if domain.dim != d:
            raise ValueError(f"domain has dimension {domain.dim}, network expects {d}")
        return domain
    return Box.cube(d, float(domain))


@dataclass(frozen=True)
class BoundCheck:
    """One claim compared with its measured value.

    ``relation`` is ``"<="`` (passes when ``measured <= bound + 1e-9 (1 + |bound|)``)
    or ``"=="`` (exact equality, used for integer counts).
    """

    label: str
    measured: float
    bound: float
    passed: bool
    relation: str = "<="

    @classmethod
    def at_most(cls, label: str, measured: float, bound: float) -> "BoundCheck":
        return cls(label, measured, bound, bool(measured <= bound + _TOL * (1 + abs(bound))))

    @classmethod
    def equal(cls, label: str, measured: float, bound: float) -> "BoundCheck":
        return cls(label, measured, bound, bool(measured == bound), "==")

    def __str__(self):
        verdict = "pass" if self.passed else "FAIL"
        return f"{verdict} {self.label}: {self.measured:.6g} {self.relation} {self.bound:.6g}"


@dataclass(frozen=True)
class Claims:
    """Bounds a construction promises. ``None`` means no claim."""

    error: float | None = None
    lipschitz: float | None = None
    params: float | None = None
    params_exact: int | None = None
    length: int | None = None


@dataclass(frozen=True)
class VerifyReport:
    sup_error_estimate: float
    lipschitz_estimate: float
    param_count: int
    checks: tuple[BoundCheck, ...]
    sample_count: int
    seed: int

    def __post_init__(self):
        labels = [c.label for c in self.checks]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate check labels {labels}")
        if self.sample_count <= 0:
            raise ValueError("sample count must be positive")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[BoundCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = [
            f"params={self.param_count} sup_error={self.sup_error_estimate:.6g} "
            f"lipschitz={self.lipschitz_estimate:.6g} samples={self.sample_count} seed={self.seed}"
        ]
        lines += [str(c) for c in self.checks]
        return "\n".join(lines)


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & (2**64 - 1), *stream])))


def sample_points(box: Box, samples: int, seed: int, method: str = "auto") -> np.ndarray:
    """Points of ``box`` for error estimation.

    ``grid`` places ``samples`` points per axis in one dimension and
    ``ceil(samples ** (1/d))`` per axis otherwise. ``lhs`` draws a seeded
    Latin hypercube of ``samples`` points and adds the box corners when
    there are at most 1024 of them. ``auto`` picks ``grid`` for ``d <= 2``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    d = box.dim
    lo, hi = np.array(box.lower), np.array(box.upper)
    if method == "auto":
        method = "grid" if d <= 2 else "lhs"
    if method == "grid":
        m = samples if d == 1 else max(2, math.ceil(samples ** (1.0 / d) - 1e-9))
        axes = [np.linspace(a, b, m) for a, b in zip(lo, hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    if method == "lhs":
        sampler = qmc.LatinHypercube(d=d, seed=_rng(seed, 0))
        pts = qmc.scale(sampler.random(samples), lo, hi)
        if d <= 10:
            corners = np.array(list(itertools.product(*zip(lo, hi))))
            pts = np.vstack([pts, corners])
        return pts
    if method == "uniform":
        return _rng(seed, 0).uniform(lo, hi, size=(samples, d))
    raise ValueError(f"unknown sampling method {method!r}")


def _sup_error_on(net: Network, oracle, pts: np.ndarray) -> float:
    got = net(pts)
    want = np.asarray(oracle(pts), dtype=np.float64).reshape(got.shape)
    return float(np.max(np.linalg.norm(got - want, axis=1)))


def estimate_sup_error(
    net: Network,
    oracle: Callable[[np.ndarray], np.ndarray],
    domain,
    samples: int = 10_000,
    seed: int = 0,
    method: str = "auto",
) -> float:
    """Largest Euclidean distance between ``net`` and ``oracle`` on sampled points.

    ``domain`` is a :class:`Box` or a radius ``R`` meaning ``[-R, R]^d``.
    ``oracle`` maps an ``(n, d)`` batch to an ``(n, out)`` batch.
    """
    box = _as_box(domain, net.input_dim)
    return _sup_error_on(net, oracle, sample_points(box, samples, seed, method))


def estimate_lipschitz(net: Network, domain, pair_samples: int = 10_000, seed: int = 0) -> float:
    """Largest ratio ``|f(x) - f(y)| / |x - y|`` over random pairs in ``domain``.

    Half the pairs are independent uniform points; the other half are close
    pairs at distances spread log-uniformly between ``1e-4`` and ``1`` times
    the box size, which catches steep pieces far better than distant pairs.
    """
    box = _as_box(domain, net.input_dim)
    lo, hi = np.array(box.lower), np.array(box.upper)
    rng = _rng(seed, 1)
    n_far = pair_samples // 2
    n_near = pair_samples - n_far
    x = rng.uniform(lo, hi, size=(pair_samples, box.dim))
    y = np.empty_like(x)
    y[:n_far] = rng.uniform(lo, hi, size=(n_far, box.dim))
    scale = max(float(np.max(hi - lo)), 1e-12)
    step = rng.normal(size=(n_near, box.dim))
    step /= np.linalg.norm(step, axis=1, keepdims=True)
    step *= (scale * 10.0 ** rng.uniform(-4, 0, size=n_near))[:, None]
    y[n_far:] = np.clip(x[n_far:] + step, lo, hi)
    dx = np.linalg.norm(x - y, axis=1)
    keep = dx > 0
    df = np.linalg.norm(net(x[keep]) - net(y[keep]), axis=1)
    return float(np.max(df / dx[keep])) if keep.any() else 0.0


def check_bounds(net: Network, claims: Claims) -> list[BoundCheck]:
    """Structural claims (size and length) checked directly on ``net``."""
    out = []
    if claims.params is not None:
        out.append(BoundCheck.at_most("params", net.param_count, claims.params))
    if claims.params_exact is not None:
        out.append(BoundCheck.equal("params_exact", net.param_count, claims.params_exact))
    if claims.length is not None:
        out.append(BoundCheck.equal("length", net.length, claims.length))
    return out


def verify(
    net: Network,
    oracle: Callable[[np.ndarray], np.ndarray],
    domain,
    claims: Claims,
    samples: int = 10_000,
    pair_samples: int = 10_000,
    seed: int = 0,
    method: str = "auto",
) -> VerifyReport:
    """Measure error and Lipschitz behaviour on ``domain`` and check every claim."""
    box = _as_box(domain, net.input_dim)
    pts = sample_points(box, samples, seed, method)
    err = _sup_error_on(net, oracle, pts)
    lip = estimate_lipschitz(net, box, pair_samples, seed)
    checks = check_bounds(net, claims)
    if claims.error is not None:
        checks.append(BoundCheck.at_most("error", err, claims.error))
    if claims.lipschitz is not None:
        checks.append(BoundCheck.at_most("lipschitz", lip, claims.lipschitz))
    return VerifyReport(err, lip, net.param_count, tuple(checks), len(pts), seed)


@dataclass(frozen=True)
class Approximant:
    """A map together with a recipe for approximating networks.

    ``build(eps)`` returns a network accurate to ``eps`` on ``domain``;
    ``lipschitz`` bounds the Lipschitz constant of every such network and
    ``image`` is a box containing ``oracle(domain)``.
    """

    build: Callable[[float], Network]
    oracle: Callable[[np.ndarray], np.ndarray]
    domain: Box
    image: Box
    lipschitz: float


def composition_cost_check(
    f1: Approximant,
    f2: Approximant,
    eps: float,
    samples: int = 10_000,
    pair_samples: int = 10_000,
    seed: int = 0,
) -> VerifyReport:
    """Check the cost of ``f2 o f1`` built as ``net2 . I . net1``.

    ``net1`` gets accuracy ``eps / (2 L2)`` and ``net2`` gets ``eps / 2``. The
    report checks ``P <= 4 d2 (d2 + 1) + 2 P(net1) + 2 P(net2)`` where ``d2`` is
    the inner dimension, the end-to-end error against ``eps`` and the
    Lipschitz estimate against ``L1 L2``.
    """
    if not f2.domain.contains(f1.image):
        raise ContainmentError(
            f"image box {f1.image} of the inner map is not inside the domain {f2.domain} of the outer map"
        )
    net1 = f1.build(eps / (2.0 * f2.lipschitz) if f2.lipschitz > 0 else eps / 2.0)
    net2 = f2.build(eps / 2.0)
    d2 = net2.input_dim
    net = compose(net2, compose(identity_net(d2), net1))
    bound = 4 * d2 * (d2 + 1) + 2 * net1.param_count + 2 * net2.param_count

    def oracle(x):
        return f2.oracle(f1.oracle(x))

    claims = Claims(error=eps, lipschitz=f1.lipschitz * f2.lipschitz, params=bound)
    return verify(net, oracle, f1.domain, claims, samples, pair_samples, seed)


@dataclass(frozen=True)
class SweepRow:
    d: int
    R: float
    eps: float
    params: int
    sup_error: float
    lipschitz: float
    passed: bool
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class Fit:
    slope: float
    residual: float
    points: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    d_fit: Fit | None
    eps_fit: Fit | None
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def fitted_exponents(self) -> tuple[float | None, float | None]:
        return (
            self.d_fit.slope if self.d_fit else None,
            self.eps_fit.slope if self.eps_fit else None,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.d, repr(r.R), repr(r.eps), r.params, repr(r.sup_error), repr(r.lipschitz), str(r.passed).lower()])
        return buf.getvalue()


class SweepCellError(RuntimeError):
    """A construction failed to build or evaluate in one sweep cell."""

    def __init__(self, d, R, eps, cause):
        super().__init__(f"sweep cell d={d}, R={R}, eps={eps} failed: {cause}")
        self.cell = (d, R, eps)


def cell_seed(seed: int, d: int, R: float, eps: float) -> int:
    """Sub-seed of one sweep cell, independent of evaluation order."""
    words = struct.unpack("<4I", struct.pack("<dd", float(R), float(eps)))
    ss = np.random.SeedSequence([seed & (2**64 - 1), int(d), *words])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fit(xs: Sequence[float], ys: Sequence[float]) -> Fit:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return Fit(float(coef[0]), float(np.sqrt(np.mean(resid**2))), len(xs))


def _fit_along(rows, axis: str) -> Fit | None:
    # one fit per setting of the other two axes; report the steepest one
    groups: dict = {}
    for r in rows:
        key = (r.R, r.eps) if axis == "d" else (r.d, r.R)
        x = r.d if axis == "d" else 1.0 / r.eps
        groups.setdefault(key, {})[x] = r.params
    fits = [
        _fit(sorted(g), [g[x] for x in sorted(g)]) for g in groups.values() if len(g) >= 3
    ]
    if not fits:
        return None
    steep = max(fits, key=lambda f: f.slope)
    return Fit(steep.slope, max(f.residual for f in fits), steep.points)


@dataclass(frozen=True)
class CellSpec:
    """What a sweep needs from a construction at one grid cell."""

    net: Network
    oracle: Callable[[np.ndarray], np.ndarray]
    domain: Box
    claims: Claims


def sweep(
    cell: Callable[[int, float, float], CellSpec] | str,
    ds: Sequence[int],
    Rs: Sequence[float],
    epss: Sequence[float],
    seed: int = 0,
    samples: int = 2_000,
    pair_samples: int = 2_000,
    workers: int = 1,
) -> SweepResult:
    """Build and verify every cell of the grid ``ds x Rs x epss``.

    ``cell(d, R, eps)`` returns the network, its oracle, domain and claims;
    a construction name from :mod:`relucalc.catalog` is accepted too.
    Parameter counts are fitted against ``d`` and against ``1/eps`` by least
    squares on logarithms, separately for every setting of the other axes,
    whenever an axis has at least three distinct values.
    """
    if not (ds and Rs and epss):
        raise ValueError("sweep grids must be nonempty")
    if isinstance(cell, str):
        from .catalog import get_construction

        cell = get_construction(cell).cell
    grid = list(itertools.product(ds, Rs, epss))

    def run(coords):
        d, R, eps = coords
        try:
            spec = cell(d, R, eps)
            rep = verify(spec.net, spec.oracle, spec.domain, spec.claims, samples, pair_samples, cell_seed(seed, d, R, eps))
        except Exception as exc:  # noqa: BLE001 - rewrapped with coordinates
            raise SweepCellError(d, R, eps, exc) from exc
        return SweepRow(d, R, eps, rep.param_count, rep.sup_error_estimate, rep.lipschitz_estimate, rep.passed, tuple(str(c) for c in rep.failures()))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = tuple(pool.map(run, grid))
    else:
        rows = tuple(map(run, grid))
    return SweepResult(rows, _fit_along(rows, "d"), _fit_along(rows, "eps"), seed)
