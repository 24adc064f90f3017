"""How size grows with accuracy for squares and products.

The square on [0, 1] is a sawtooth cascade of width-4 layers, so each extra
layer buys a factor 4 in accuracy. Products are built from squares by
polarization and arranged in a binary tree, so their size grows with
log(1/eps), not with a power of 1/eps.

Run: python demos/products.py
"""

import numpy as np

from relucalc.constructions import build_prod, build_square01
from relucalc.verify import Box, estimate_sup_error

print("x^2 on [0, 1]")
print(f"{'eps':>8} {'layers':>6} {'params':>6} {'measured error':>15}")
for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6):
    net = build_square01(eps)
    err = estimate_sup_error(net, lambda x: x**2, Box((0.0,), (1.0,)), samples=100_001)
    print(f"{eps:8.0e} {net.length:6d} {net.param_count:6d} {err:15.3e}")

print("\nproduct of d numbers on [-1, 1]^d")
print(f"{'d':>3} {'eps':>8} {'params':>8} {'measured error':>15}")
for d in (2, 4, 8):
    for eps in (1e-1, 1e-2, 1e-3):
        net = build_prod(d, 1.0, eps)
        err = estimate_sup_error(net, lambda x: np.prod(x, axis=1, keepdims=True), 1.0, samples=20_000, seed=d)
        print(f"{d:3d} {eps:8.0e} {net.param_count:8d} {err:15.3e}")
