"""Central finite-difference stencils shared by the derivative estimators."""

from math import comb

import numpy as np


def central_difference(func, x, order, h):
    """Order-n central difference of a vectorized scalar function.

    Uses the binomial stencil ``sum_k (-1)^k C(n, k) f(x + (n/2 - k) h) / h^n``,
    which is second-order accurate in ``h`` for every ``n``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    total = np.zeros_like(x)
    for k in range(order + 1):
        total = total + (-1) ** k * comb(order, k) * func(x + (order / 2 - k) * h)
    return total / h**order
