"""Explicit ReLU network constructions, a composition algebra and bound checks."""

from .algebra import (
    ExtensionConfig,
    affine_net,
    compose,
    compose_chain,
    compose_chain_with_identities,
    extend,
    identity_net,
    parallelize_equal,
    parallelize_varlen,
    power,
)
from .network import (
    IDENTITY,
    RELU,
    Activation,
    AffineLayer,
    Network,
    dims,
    from_json,
    load,
    networks_close,
    param_count,
    realize,
    save,
    to_json,
)

__version__ = "0.1.0"
