"""Chained maps on R^d and the cost curve of their networks.

A pipeline such as ``cw:sin|rprod`` applies sin to every coordinate and then
takes prefix products. Each step gets its own share of the error budget,
scaled down by the Lipschitz constants of the steps after it. The sweep at
the end fits log(size) against log(d) and log(1/eps); polynomial growth
shows up as a straight line with a moderate slope.

Run: python demos/pipeline_costs.py   (about half a minute)
"""

import numpy as np

from relucalc.catalog import CONSTRUCTIONS, Params
from relucalc.constructions import build_pipeline, parse_pipeline, pipeline_oracle, plan_pipeline
from relucalc.verify import estimate_sup_error, sweep

spec = parse_pipeline("cw:tanh|rmax|cw:cos", 3)
plan = plan_pipeline(spec, 1.0, 0.1)
print(f"pipeline {spec} on [-1, 1]^3, eps = 0.1")
for p in plan.steps:
    print(f"  {str(p.step):8} Lipschitz <= {float(p.lipschitz):8.4f}  budget {p.eps:.3e}")
print(f"  weighted budget sum {float(plan.budget_sum):.6f} (exact rational, <= 0.1)")
net = build_pipeline(spec, 1.0, 0.1)
err = estimate_sup_error(net, pipeline_oracle(spec), 1.0, samples=10_000, seed=1)
print(f"  network {net.param_count} params, measured error {err:.2e}")

cell = CONSTRUCTIONS["pipeline"].cell_factory(Params(pipeline="cw:sin|rprod"))
result = sweep(cell, [2, 3, 4], [1.0], [0.5, 0.25, 0.1], seed=7)
print("\ncw:sin|rprod cost grid")
print(result.to_csv(), end="")
print(f"exponent vs d: {result.d_fit.slope:.2f} (rms residual {result.d_fit.residual:.3f})")
print(f"exponent vs 1/eps: {result.eps_fit.slope:.2f} (rms residual {result.eps_fit.residual:.3f})")
print("all cells within their claims:", result.passed)
