"""Chains of running maxima, running products and componentwise maps.

A pipeline on ``R^d`` applies a list of steps in order. Each step is
approximated by its own network and the networks are chained with identity
networks in between. The accuracy handed to step ``i`` is scaled down by the
product of the Lipschitz constants of the steps after it, so the total error
of the chain stays within the requested ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from ..algebra import affine_net, compose_chain_with_identities
from ..errors import PipelineError
from ..functions import Function1D, named_function
from ..network import Network
from .interpolation import build_componentwise
from .maxima import build_running_max
from .products import build_running_prod_clipped

__all__ = [
    "RunningMax",
    "RunningProduct",
    "Componentwise",
    "PipelineSpec",
    "PipelinePlan",
    "StepPlan",
    "plan_pipeline",
    "build_pipeline",
    "pipeline_out_dim",
    "pipeline_oracle",
    "parse_pipeline",
]


@dataclass(frozen=True)
class RunningMax:
    def __str__(self):
        return "rmax"


@dataclass(frozen=True)
class RunningProduct:
    def __str__(self):
        return "rprod"


@dataclass(frozen=True)
class Componentwise:
    """Scalar functions applied coordinatewise; a single function is used for every coordinate."""

    fns: tuple[Function1D, ...]

    def __post_init__(self):
        fns = tuple(self.fns) if not isinstance(self.fns, Function1D) else (self.fns,)
        if not fns:
            raise PipelineError("componentwise step needs at least one function")
        object.__setattr__(self, "fns", fns)

    def for_dim(self, d: int) -> tuple[Function1D, ...]:
        if len(self.fns) == 1:
            return self.fns * d
        if len(self.fns) != d:
            raise PipelineError(f"componentwise step has {len(self.fns)} functions for dimension {d}")
        return self.fns

    @property
    def value_bound(self) -> float:
        return max(f.value_bound for f in self.fns)

    def __str__(self):
        return "cw:" + ",".join(f.name for f in self.fns)


Step = Union[RunningMax, RunningProduct, Componentwise]


@dataclass(frozen=True)
class PipelineSpec:
    """Ordered steps acting on ``R^d``.

    A running product is only accurate for inputs in ``[-1, 1]^d``, so each
    one must follow a componentwise step whose values stay in ``[-1, 1]``,
    with only running maxima or products in between. Set ``inputs_clipped``
    when the raw inputs already lie in ``[-1, 1]^d``.
    """

    steps: tuple[Step, ...]
    input_dim: int
    inputs_clipped: bool = False

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if self.input_dim < 1:
            raise PipelineError("input dimension must be positive")
        bounded = self.inputs_clipped
        for i, step in enumerate(steps):
            if isinstance(step, Componentwise):
                step.for_dim(self.input_dim)
                bounded = step.value_bound <= 1
            elif isinstance(step, RunningProduct) and not bounded:
                raise PipelineError(
                    f"step {i} is a running product, but its inputs are not known to lie in "
                    "[-1, 1]: a product step must come after a componentwise step with "
                    "value bound at most 1 (or the inputs must be pre-clipped)"
                )
            elif not isinstance(step, (RunningMax, RunningProduct)):
                raise PipelineError(f"step {i} has unknown type {type(step).__name__}")

    def __str__(self):
        return "|".join(str(s) for s in self.steps)


@dataclass(frozen=True)
class StepPlan:
    step: Step
    radius: float
    lipschitz: Fraction
    eps: float


@dataclass(frozen=True)
class PipelinePlan:
    steps: tuple[StepPlan, ...]
    eps: float
    budget_sum: Fraction = field(default=Fraction(0))

    @property
    def within_budget(self) -> bool:
        return self.budget_sum <= Fraction(self.eps)


def pipeline_out_dim(spec: PipelineSpec, d: int) -> int:
    """Output dimension of the pipeline on ``R^d``; every step preserves dimension."""
    if d < 1:
        raise ValueError("d must be positive")
    return d


def _sqrt_upper(n: int) -> Fraction:
    s = Fraction(math.sqrt(n))
    while s * s < n:
        s = Fraction(math.nextafter(float(s), math.inf))
    return s


def _growth_upper(fn: Function1D, radius: float) -> Fraction:
    c, base, a = Fraction(fn.lip_c), 1 + 2 * Fraction(radius), fn.lip_a
    if float(a).is_integer():
        return c * base ** int(a)
    # pow is accurate to a few ulps; inflate well past that
    return Fraction(fn.lipschitz_on(radius)) * (1 + Fraction(1, 10**9))


def _image_radius(fn: Function1D, radius: float) -> float:
    # interpolation networks stay within the range of their knot values, and
    # |f(x)| <= |f(0)| + c (1 + 2r)^a r on [-r, r]
    grown = abs(float(fn(np.zeros(1))[0])) + float(_growth_upper(fn, radius)) * radius
    return min(fn.value_bound, grown * (1 + 1e-12))


def _float_below(q: Fraction) -> float:
    x = float(q)
    while Fraction(x) > q:
        x = math.nextafter(x, 0.0)
    return x


def plan_pipeline(spec: PipelineSpec, R: float, eps: float) -> PipelinePlan:
    """Input radius, Lipschitz constant and accuracy of every step.

    Lipschitz constants are rational upper bounds. Step ``i`` receives
    ``eps / (n * max(1, prod_{j > i} L_j))`` rounded down to a float, and the
    resulting sum ``sum_i prod_{j > i} L_j * eps_i`` is recomputed exactly.
    """
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if spec.inputs_clipped and R != 1:
        raise PipelineError("a pipeline with pre-clipped inputs is defined on [-1, 1]^d only")
    d = spec.input_dim
    radii, lips = [], []
    r = float(R)
    for step in spec.steps:
        radii.append(r)
        if isinstance(step, RunningMax):
            lips.append(_sqrt_upper(d))
        elif isinstance(step, RunningProduct):
            lips.append(_sqrt_upper(32 * d**6))
            r = 1.0
        else:
            build_r = max(1.0, r)
            fns = step.for_dim(d)
            lips.append(max(_growth_upper(f, build_r) for f in fns))
            r = max(_image_radius(f, build_r) for f in fns)
    n = len(spec.steps)
    plans, total = [], Fraction(0)
    for i, step in enumerate(spec.steps):
        downstream = Fraction(1)
        for lj in lips[i + 1 :]:
            downstream *= lj
        e = _float_below(Fraction(eps) / (n * max(Fraction(1), downstream)))
        total += downstream * Fraction(e)
        plans.append(StepPlan(step, radii[i], lips[i], e))
    plan = PipelinePlan(tuple(plans), eps, total)
    if not plan.within_budget:
        raise PipelineError(f"budget sum {float(total)} exceeds eps={eps}")
    return plan


def _step_net(p: StepPlan, d: int) -> Network:
    if isinstance(p.step, RunningMax):
        return build_running_max(d)
    if isinstance(p.step, RunningProduct):
        return build_running_prod_clipped(d, 1.0, p.eps)
    return build_componentwise(p.step.for_dim(d), max(1.0, p.radius), p.eps)


def build_pipeline(spec: PipelineSpec, R: float, eps: float) -> Network:
    """Network approximating the pipeline on ``[-R, R]^d`` within Euclidean error ``eps``."""
    plan = plan_pipeline(spec, R, eps)
    d = spec.input_dim
    if not plan.steps:
        return affine_net(np.eye(d))
    nets = [_step_net(p, d) for p in plan.steps]
    return compose_chain_with_identities(nets[::-1])


def pipeline_oracle(spec: PipelineSpec):
    """Exact pipeline map on batches of shape ``(n, d)``."""
    d = spec.input_dim

    def apply(x):
        z = np.array(x, dtype=np.float64, ndmin=2)
        for step in spec.steps:
            if isinstance(step, RunningMax):
                z = np.maximum.accumulate(z, axis=1)
            elif isinstance(step, RunningProduct):
                z = np.cumprod(z, axis=1)
            else:
                z = np.column_stack([f(z[:, j]) for j, f in enumerate(step.for_dim(d))])
        return z

    return apply


def parse_pipeline(text: str, d: int, inputs_clipped: bool = False) -> PipelineSpec:
    """Read a pipeline written as ``cw:sin|rmax|rprod``.

    ``cw:`` takes one function for all coordinates or a comma separated list
    with one entry per coordinate. An empty string is the empty pipeline.
    """
    steps: list[Step] = []
    for part in filter(None, (p.strip() for p in text.split("|"))):
        if part == "rmax":
            steps.append(RunningMax())
        elif part == "rprod":
            steps.append(RunningProduct())
        elif part.startswith("cw:"):
            names = [s for s in part[3:].split(",") if s.strip()]
            if not names:
                raise PipelineError(f"componentwise step {part!r} names no function")
            steps.append(Componentwise(tuple(named_function(s) for s in names)))
        else:
            raise PipelineError(f"unknown pipeline step {part!r}; use rmax, rprod or cw:<fn>")
    return PipelineSpec(tuple(steps), d, inputs_clipped)
