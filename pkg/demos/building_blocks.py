"""Compose, stack and pad small ReLU networks, then save one to disk.

Run: python demos/building_blocks.py
"""

import tempfile
from pathlib import Path

import numpy as np

from relucalc import (
    ExtensionConfig,
    affine_net,
    compose,
    compose_chain_with_identities,
    extend,
    identity_net,
    load,
    parallelize_equal,
    save,
)
from relucalc.constructions import build_abs_sum, build_max, max2_net

rng = np.random.default_rng(0)

# |x1| + |x2| + |x3| with one hidden layer of |.| pairs and one summing layer
fixture = build_abs_sum()
print("l1 norm network:", fixture.dims, "params", fixture.param_count)
print("  at (1, -2, 3):", fixture([1.0, -2.0, 3.0]))

# max of four numbers from three copies of max2
pair = parallelize_equal([max2_net(), max2_net()])
max4 = compose_chain_with_identities([max2_net(), pair])
x = rng.normal(size=(5, 4))
print("\nmax of 4 via identity interposition:", max4.dims, "params", max4.param_count)
print("  matches the tree construction:", np.allclose(max4(x), build_max(4)(x)))
print("  tree construction is smaller:", build_max(4).dims, "params", build_max(4).param_count)

# plain composition merges the touching affine layers
scale = affine_net([[2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0]])
merged = compose(max2_net(), scale)
print("\nmax(2 x1, -x4):", merged.dims, merged([1.0, 9.0, 9.0, -3.0]))

# padding a shallow network to a target length with identity blocks
line = affine_net([[0.5]], [1.0])
padded = extend(line, ExtensionConfig(4, identity_net(1)))
print("\naffine map padded to length 4:", padded.dims, padded([[-2.0], [6.0]]).ravel())

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "l1.json"
    save(fixture, path)
    back = load(path)
    print("\nJSON round trip identical:", all(
        np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)
        for a, b in zip(fixture.layers, back.layers)
    ))
