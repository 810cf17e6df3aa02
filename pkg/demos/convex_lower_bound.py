"""Convex chain: gradient floor, planted shallow instance, and how many steps GD and prox-AGD need."""

import numpy as np

from hardchains.optimizers import gradient_descent, prox_agd, prox_agd_bound
from hardchains.scaling import ProblemClassSpec, plan_convex_value
from hardchains.verifiers import convex_min_grad_exact

print("min ||grad|| over vectors supported on the first T-1 coordinates")
for T in (2, 5, 20, 100):
    print(f"  T={T:4d}  alpha=1: {convex_min_grad_exact(T, 1.0):.3e}   alpha=1/T: {convex_min_grad_exact(T, 1 / T):.3e}")

print("\nL1=4, gap 1: planted horizon against measured counts")
for eps in (0.04, 0.02, 0.01):
    plan = plan_convex_value(ProblemClassSpec(1, [4.0], eps, delta=1.0))
    f = plan.instance()
    gd = gradient_descent(f, 1 / 4.0, budget=10**6, eps=eps)
    agd = prox_agd(f, 1.0, 4.0, eps)
    print(f"  eps={eps:<5} T_plan={plan.T:4d}  GD={gd.T_eps:6d}  prox-AGD={agd.T_eps:4d}"
          f"  (prox-AGD ceiling {prox_agd_bound(4.0, 1.0, eps):.0f})")
    assert np.linalg.norm(f.grad(np.zeros(f.dim))) > eps
