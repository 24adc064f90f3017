"""Operations that build new networks out of existing ones.

Composition merges the last affine map of the inner network into the first
affine map of the outer one, so ``compose(f, g)`` has ``L(f) + L(g) - 1``
layers. Parallelization stacks networks of equal length block-diagonally.
Networks of different lengths are first padded to a common length by
composing them with powers of a one-hidden-layer network that realizes the
identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import CompositionError, ExtensionError, ParallelizationError, ShapeError
from .network import AffineLayer, Network

__all__ = [
    "compose",
    "compose_chain",
    "compose_chain_with_identities",
    "parallelize_equal",
    "parallelize_varlen",
    "identity_net",
    "affine_net",
    "power",
    "ExtensionConfig",
    "extend",
]


def compose(f: Network, g: Network) -> Network:
    """Network realizing ``f o g``."""
    if f.input_dim != g.output_dim:
        raise CompositionError(
            f"cannot compose: outer network has dims {f.dims} with input width "
            f"{f.input_dim}, inner network has dims {g.dims} with output width {g.output_dim}"
        )
    first, last = f.layers[0], g.layers[-1]
    merged = AffineLayer(
        first.weights @ last.weights, first.weights @ last.bias + first.bias
    )
    return Network(g.layers[:-1] + (merged,) + f.layers[1:])


def compose_chain(fs: Sequence[Network]) -> Network:
    """Plain composition ``fs[0] o fs[1] o ... o fs[-1]``."""
    if not fs:
        raise CompositionError("empty chain")
    acc = fs[-1]
    for k in range(len(fs) - 2, -1, -1):
        try:
            acc = compose(fs[k], acc)
        except CompositionError as exc:
            raise CompositionError(f"at chain position {k}: {exc}") from None
    return acc


def compose_chain_with_identities(fs: Sequence[Network]) -> Network:
    """Compose ``fs[0] o I o fs[1] o ... o I o fs[-1]``.

    An identity network is placed between every pair of neighbours. This
    costs more parameters than plain composition but, when every inner
    factor has at least two layers, the count is bounded by
    ``3 * sum(P) - P(first) - P(last)``. A one-layer inner factor merges
    with the identity layers on both sides into a single layer, which can
    exceed that bound.
    """
    if not fs:
        raise CompositionError("empty chain")
    acc = fs[-1]
    for k in range(len(fs) - 2, -1, -1):
        if fs[k].input_dim != fs[k + 1].output_dim:
            raise CompositionError(
                f"at chain position {k}: network {k} has dims {fs[k].dims}, "
                f"network {k + 1} has dims {fs[k + 1].dims}"
            )
        acc = compose(fs[k], compose(identity_net(fs[k].input_dim), acc))
    return acc


def parallelize_equal(fs: Sequence[Network]) -> Network:
    """Block-diagonal stack of networks that all have the same length."""
    if not fs:
        raise ParallelizationError("need at least one network")
    lengths = [f.length for f in fs]
    if len(set(lengths)) != 1:
        raise ParallelizationError(f"networks have different lengths {lengths}")
    if len(fs) == 1:
        return fs[0]
    layers = []
    for k in range(lengths[0]):
        w = block_diag(*(f.layers[k].weights for f in fs))
        b = np.concatenate([f.layers[k].bias for f in fs])
        layers.append(AffineLayer(w, b))
    return Network(tuple(layers))


def identity_net(d: int) -> Network:
    """Width-``2d`` network realizing the identity on ``R^d``.

    Each coordinate passes through ``max(x, 0) - max(-x, 0)``.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    eye = np.eye(d)
    up = np.kron(eye, np.array([[1.0], [-1.0]]))
    down = np.kron(eye, np.array([[1.0, -1.0]]))
    return Network((AffineLayer(up, np.zeros(2 * d)), AffineLayer(down, np.zeros(d))))


def affine_net(weights, bias=None) -> Network:
    """Single-layer network ``x -> W x + B``."""
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    b = np.zeros(w.shape[0]) if bias is None else np.atleast_1d(np.asarray(bias, dtype=np.float64))
    if b.shape != (w.shape[0],):
        raise ShapeError(f"bias shape {b.shape} does not match weight rows {w.shape[0]}")
    return Network((AffineLayer(w, b),))


def power(g: Network, n: int) -> Network:
    """``n``-fold composition of ``g`` with itself; ``n = 0`` gives the affine identity."""
    if g.input_dim != g.output_dim:
        raise CompositionError(
            f"power needs equal input and output widths, got dims {g.dims}"
        )
    if n < 0:
        raise ValueError("power must be nonnegative")
    acc = affine_net(np.eye(g.output_dim))
    for _ in range(n):
        acc = compose(g, acc)
    return acc


@dataclass(frozen=True)
class ExtensionConfig:
    """Target length and the padding network used to reach it.

    The padding network must map ``R^d`` to ``R^d`` through exactly one
    hidden layer.
    """

    target_length: int
    padding_net: Network

    def __post_init__(self):
        if self.target_length < 1:
            raise ExtensionError("target length must be positive")
        g = self.padding_net
        if g.hidden_length != 1:
            raise ExtensionError(
                f"padding network must have one hidden layer, got dims {g.dims}"
            )
        if g.input_dim != g.output_dim:
            raise ExtensionError(
                f"padding network must have equal input and output widths, got dims {g.dims}"
            )


def extend(f: Network, cfg: ExtensionConfig) -> Network:
    """Lengthen ``f`` to ``cfg.target_length`` layers by composing with padding."""
    if cfg.target_length < f.length:
        raise ExtensionError(
            f"target length {cfg.target_length} is shorter than network length {f.length}"
        )
    if cfg.padding_net.input_dim != f.output_dim:
        raise ExtensionError(
            f"padding network dims {cfg.padding_net.dims} do not fit network output "
            f"width {f.output_dim}"
        )
    return compose(power(cfg.padding_net, cfg.target_length - f.length), f)


def parallelize_varlen(
    fs: Sequence[Network], pads: Sequence[Network] | None = None
) -> Network:
    """Parallelize networks of any lengths.

    Every network is extended to the longest length with its pad before
    stacking. Without explicit pads, ``identity_net(output width)`` is used.
    """
    if not fs:
        raise ParallelizationError("need at least one network")
    if pads is None:
        pads = [identity_net(f.output_dim) for f in fs]
    if len(pads) != len(fs):
        raise ParallelizationError(f"got {len(fs)} networks but {len(pads)} pads")
    target = max(f.length for f in fs)
    extended = []
    for j, (f, pad) in enumerate(zip(fs, pads)):
        try:
            extended.append(extend(f, ExtensionConfig(target, pad)))
        except ExtensionError as exc:
            raise ParallelizationError(f"pad {j}: {exc}") from None
    return parallelize_equal(extended)
