"""Fully connected feedforward networks and their evaluation.

A network is a nonempty list of affine layers ``(W_k, B_k)``. Evaluating it
applies every affine map in turn and an activation after each layer except
the last one. The widths ``(l_0, ..., l_L)`` and the parameter count
``sum_k l_k (l_{k-1} + 1)`` are the two size measures used throughout the
package.

Networks are immutable: the arrays they hold are read-only copies, and every
operation in :mod:`relucalc.algebra` returns a new network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "Activation",
    "RELU",
    "IDENTITY",
    "AffineLayer",
    "Network",
    "dims",
    "param_count",
    "realize",
    "networks_close",
    "to_json",
    "from_json",
    "save",
    "load",
]

# Upper bound on the number of float64 entries in one intermediate batch.
_CHUNK_ENTRIES = 1 << 23


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Activation:
    """Scalar activation applied componentwise.

    ``kind`` is ``"relu"``, ``"identity"`` or ``"custom"``. Custom activations
    carry a vectorized callable in ``fn``.
    """

    kind: str
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("relu", "identity", "custom"):
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom activation needs a function")

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray]) -> "Activation":
        return cls("custom", fn)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "identity":
            return z
        return np.asarray(self.fn(z), dtype=np.float64)


RELU = Activation("relu")
IDENTITY = Activation("identity")


@dataclass(frozen=True, eq=False)
class AffineLayer:
    """One affine map ``x -> W x + B`` with ``W`` of shape ``(out, in)``."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ShapeError(f"weights must be a matrix, got shape {w.shape}")
        if b.ndim != 1:
            raise ShapeError(f"bias must be a vector, got shape {b.shape}")
        if b.shape[0] != w.shape[0]:
            raise ShapeError(
                f"bias length {b.shape[0]} does not match weight rows {w.shape[0]}"
            )
        if w.shape[1] == 0 or w.shape[0] == 0:
            raise ShapeError(f"layer widths must be positive, got {w.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ShapeError("layer entries must be finite")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "bias", _frozen(b))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def param_count(self) -> int:
        return self.out_dim * (self.in_dim + 1)


@dataclass(frozen=True, eq=False)
class Network:
    """Nonempty sequence of affine layers with matching widths."""

    layers: tuple[AffineLayer, ...]

    def __post_init__(self):
        layers = tuple(
            l if isinstance(l, AffineLayer) else AffineLayer(*l) for l in self.layers
        )
        if not layers:
            raise ShapeError("a network needs at least one layer")
        for k in range(1, len(layers)):
            if layers[k].in_dim != layers[k - 1].out_dim:
                raise ShapeError(
                    f"layer {k + 1} expects input width {layers[k].in_dim} "
                    f"but layer {k} has output width {layers[k - 1].out_dim}"
                )
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_arrays(cls, pairs: Iterable[tuple[Sequence, Sequence]]) -> "Network":
        return cls(tuple(AffineLayer(np.asarray(w), np.asarray(b)) for w, b in pairs))

    @property
    def length(self) -> int:
        return len(self.layers)

    @property
    def hidden_length(self) -> int:
        return len(self.layers) - 1

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(l.out_dim for l in self.layers)

    def width(self, n: int) -> int:
        """Width of layer ``n``, with zero past the output layer."""
        if n < 0:
            raise IndexError("layer index must be nonnegative")
        d = self.dims
        return d[n] if n < len(d) else 0

    @property
    def param_count(self) -> int:
        return sum(l.param_count for l in self.layers)

    def __call__(self, x, activation: Activation = RELU) -> np.ndarray:
        return realize(self, x, activation)

    def __repr__(self) -> str:
        return f"Network(dims={self.dims}, params={self.param_count})"


def dims(net: Network) -> tuple[int, ...]:
    """Layer widths ``(l_0, ..., l_L)``."""
    return net.dims


def param_count(net: Network) -> int:
    """Number of weight and bias entries, zeros included."""
    return net.param_count


def realize(net: Network, x, activation: Activation = RELU) -> np.ndarray:
    """Evaluate ``net`` at a point or at a batch of points.

    ``x`` is either a vector of length ``l_0`` or an array of shape
    ``(n, l_0)``; the result has the matching shape with ``l_L`` columns.
    Large batches are processed in chunks to bound memory use.
    """
    x = np.asarray(x, dtype=np.float64)
    given = x.shape
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ShapeError(
            f"expected input of length {net.input_dim}, got shape {given}"
        )
    widest = max(net.dims)
    chunk = max(1, _CHUNK_ENTRIES // widest)
    if x.shape[0] <= chunk:
        out = _forward(net, x, activation)
    else:
        out = np.concatenate(
            [_forward(net, x[i : i + chunk], activation) for i in range(0, x.shape[0], chunk)]
        )
    return out[0] if single else out


def _forward(net: Network, z: np.ndarray, activation: Activation) -> np.ndarray:
    last = len(net.layers) - 1
    for k, layer in enumerate(net.layers):
        z = z @ layer.weights.T + layer.bias
        if k < last:
            z = activation(z)
    return z


def networks_close(f: Network, g: Network, atol: float = 1e-12) -> bool:
    """Layerwise shape equality plus entrywise closeness."""
    if f.dims != g.dims:
        return False
    return all(
        np.allclose(a.weights, b.weights, rtol=0.0, atol=atol)
        and np.allclose(a.bias, b.bias, rtol=0.0, atol=atol)
        for a, b in zip(f.layers, g.layers)
    )


def to_json(net: Network) -> str:
    payload = {
        "layers": [
            {"weights": l.weights.tolist(), "bias": l.bias.tolist()} for l in net.layers
        ]
    }
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(payload, allow_nan=False)


def from_json(text: str) -> Network:
    data = json.loads(text)
    try:
        layers = data["layers"]
        pairs = [(np.array(l["weights"], dtype=np.float64), np.array(l["bias"], dtype=np.float64)) for l in layers]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed network document: {exc}") from exc
    for w, _ in pairs:
        if w.ndim == 1 and w.size == 0:
            raise ShapeError("empty weight matrix")
    return Network.from_arrays(pairs)


def save(net: Network, path: str | Path) -> None:
    Path(path).write_text(to_json(net) + "\n", encoding="utf-8")


def load(path: str | Path) -> Network:
    return from_json(Path(path).read_text(encoding="utf-8"))
