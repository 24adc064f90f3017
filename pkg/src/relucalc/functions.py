"""Scalar target functions with growth metadata.

Each :class:`Function1D` carries constants ``c`` and ``a`` such that
``|f(x) - f(y)| <= c (1 + |x| + |y|)**a |x - y|`` for all real ``x, y``,
and a bound on ``|f|``. Interpolation grids are sized from these numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Function1D", "named_function", "FUNCTION_NAMES"]


@dataclass(frozen=True)
class Function1D:
    eval: Callable[[np.ndarray], np.ndarray]
    lip_c: float
    lip_a: float = 0.0
    value_bound: float = math.inf
    name: str = "f"

    def __post_init__(self):
        if not (self.lip_c >= 0 and self.lip_a >= 0 and self.value_bound >= 0):
            raise ValueError("growth constants and value bound must be nonnegative")

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def lipschitz_on(self, R: float) -> float:
        """Lipschitz constant on ``[-R, R]`` implied by the metadata."""
        return self.lip_c * (1.0 + 2.0 * R) ** self.lip_a


def _const(v: float) -> Function1D:
    return Function1D(lambda x: np.full_like(x, v), 0.0, 0.0, abs(v), f"const:{v!r}")


def _clip(u: float, v: float) -> Function1D:
    if v < u:
        raise ValueError(f"clip bounds out of order: {u} > {v}")
    return Function1D(
        lambda x: np.clip(x, u, v), 1.0, 0.0, max(abs(u), abs(v)), f"clip:{u!r}:{v!r}"
    )


_SIMPLE = {
    "sin": Function1D(np.sin, 1.0, 0.0, 1.0, "sin"),
    "cos": Function1D(np.cos, 1.0, 0.0, 1.0, "cos"),
    "tanh": Function1D(np.tanh, 1.0, 0.0, 1.0, "tanh"),
    "relu": Function1D(lambda x: np.maximum(x, 0.0), 1.0, 0.0, math.inf, "relu"),
    "square": Function1D(np.square, 1.0, 1.0, math.inf, "square"),
    "clip": _clip(-1.0, 1.0),
}

FUNCTION_NAMES = tuple(_SIMPLE) + ("const:<v>", "clip:<u>:<v>")


def named_function(text: str) -> Function1D:
    """Look up a function by name.

    Accepts ``sin``, ``cos``, ``tanh``, ``relu``, ``square``, ``clip``
    (to ``[-1, 1]``), ``clip:<u>:<v>`` and ``const:<v>``.
    """
    text = text.strip()
    if text in _SIMPLE:
        return _SIMPLE[text]
    head, _, rest = text.partition(":")
    try:
        if head == "const" and rest:
            return _const(float(rest))
        if head == "clip" and rest:
            u, v = rest.split(":")
            return _clip(float(u), float(v))
    except ValueError as exc:
        raise ValueError(f"bad function spec {text!r}: {exc}") from None
    raise ValueError(f"unknown function {text!r}; known: {', '.join(FUNCTION_NAMES)}")
