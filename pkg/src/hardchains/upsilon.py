"""The scalar non-convexity used by the non-convex chain.

For a scale parameter ``r >= 1``::

    U_r(x) = 120 * integral_1^x  t^2 (t - 1) / (1 + (t/r)^2) dt

``U_r`` has a global minimum ``U_r(1) = 0``, stationary points at 0 and 1,
and a derivative below -1 on ``(-inf, -0.1] u [0.1, 0.9]``. As ``r`` grows it
tends to the quartic ``30 x^4 - 40 x^3 + 10``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._fd import central_difference

__all__ = [
    "UpsilonParams",
    "upsilon_value",
    "upsilon_deriv",
    "upsilon_higher_deriv",
    "upsilon_lipschitz_estimate",
    "upsilon_grad_sup",
    "smoothness_constant",
]

# Power series in (t/r)^2 is used when max(|x|, 1) / r is below this ratio.
_SERIES_RATIO = 0.5
_SERIES_TERMS = 40
# Gauss-Legendre on [1, x] is used for |x - 1| below this, where the
# antiderivative difference loses relative precision.
_LOCAL_RADIUS = 0.05
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class UpsilonParams:
    r: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r < 1:
            raise ValueError(f"r must be a finite real >= 1, got {self.r!r}")


def _as_params(params):
    if isinstance(params, UpsilonParams):
        return params
    return UpsilonParams(float(params))


def _integrand(t, r):
    return t * t * (t - 1.0) / (1.0 + (t / r) ** 2)


def _closed_form(x, r):
    # 120 * [r^2 (x-1)^2 / 2 - (r^4/2) log((x^2+r^2)/(1+r^2)) + r^3 (atan(x/r) - atan(1/r))]
    r2 = r * r
    log_term = np.log1p((x * x - 1.0) / (1.0 + r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        atan_sub = np.arctan(r * (x - 1.0) / (r2 + x))
    atan_direct = np.arctan(x / r) - np.arctan(1.0 / r)
    atan_diff = np.where(r2 + x > 0, atan_sub, atan_direct)
    return 120.0 * (0.5 * r2 * (x - 1.0) ** 2 - 0.5 * r2 * r2 * log_term + r2 * r * atan_diff)


def _series(x, r):
    # 1/(1+u^2) = sum_k (-u^2)^k integrated term by term against t^2 (t - 1).
    total = np.zeros_like(x)
    inv_r2 = 1.0 / (r * r)
    coef = 1.0
    for k in range(_SERIES_TERMS):
        a = 2 * k + 4
        b = 2 * k + 3
        total = total + coef * ((x**a - 1.0) / a - (x**b - 1.0) / b)
        coef = -coef * inv_r2
    return 120.0 * total


def _local(x, r):
    half = 0.5 * (x - 1.0)
    mid = 1.0 + half
    t = mid[..., None] + half[..., None] * _GL_NODES
    return 120.0 * half * np.sum(_GL_WEIGHTS * _integrand(t, r), axis=-1)


def upsilon_value(x, params=UpsilonParams()):
    """Value of ``U_r`` at ``x`` (scalar or array)."""
    r = _as_params(params).r
    x_arr = np.asarray(x, dtype=float)
    xa = np.atleast_1d(x_arr)
    out = np.empty_like(xa)
    local = np.abs(xa - 1.0) < _LOCAL_RADIUS
    series = ~local & (np.maximum(np.abs(xa), 1.0) <= _SERIES_RATIO * r)
    closed = ~local & ~series
    if local.any():
        out[local] = _local(xa[local], r)
    if series.any():
        out[series] = _series(xa[series], r)
    if closed.any():
        out[closed] = _closed_form(xa[closed], r)
    if x_arr.ndim == 0:
        return float(out[0])
    return out.reshape(x_arr.shape)


def upsilon_deriv(x, params=UpsilonParams(), order=1):
    """First or second derivative of ``U_r`` in closed form."""
    r = _as_params(params).r
    x = np.asarray(x, dtype=float)
    den = 1.0 + (x / r) ** 2
    if order == 1:
        out = 120.0 * x * x * (x - 1.0) / den
    elif order == 2:
        num = x * x * (x - 1.0)
        dnum = 3.0 * x * x - 2.0 * x
        dden = 2.0 * x / (r * r)
        out = 120.0 * (dnum * den - num * dden) / den**2
    else:
        raise ValueError(
            f"analytic derivative of order {order} not provided; use finite differences "
            "(upsilon_higher_deriv)"
        )
    return float(out) if out.ndim == 0 else out


def upsilon_higher_deriv(x, params=UpsilonParams(), order=3):
    """Derivative of any order >= 1.

    Orders 1 and 2 are analytic. Higher orders apply an ``(order - 2)``-th
    central difference to the analytic second derivative, with step
    ``eps ** (1 / (order + 2)) * max(1, |x|)``.
    """
    if order in (1, 2):
        return upsilon_deriv(x, params, order)
    if order < 1:
        raise ValueError("order must be >= 1")
    params = _as_params(params)
    x = np.asarray(x, dtype=float)
    h = np.finfo(float).eps ** (1.0 / (order + 2)) * np.maximum(1.0, np.abs(x))
    out = central_difference(lambda z: upsilon_deriv(z, params, 2), x, order - 2, h)
    return float(out) if out.ndim == 0 else out


def _grid(r, half_width, points):
    if points < 2:
        raise ValueError("empty grid: need at least 2 points")
    if half_width < 2:
        raise ValueError("grid must cover at least [-2r, 2r]")
    return np.linspace(-half_width * r, half_width * r, points)


def upsilon_lipschitz_estimate(params=UpsilonParams(), q=1, half_width=5.0, points=40001):
    """Grid lower estimate of the Lipschitz constant of ``U_r^(q)``.

    The grid spans ``[-half_width * r, half_width * r]``; the derivative
    features live on the scale ``r`` so the default covers the supremum.

    Returns:
        (estimate, spacing) where ``spacing`` is the grid resolution.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    params = _as_params(params)
    x = _grid(params.r, half_width, points)
    vals = upsilon_higher_deriv(x, params, q + 1)
    return float(np.max(np.abs(vals))), float(x[1] - x[0])


def upsilon_grad_sup(params=UpsilonParams(), points=100001):
    """``max_{z in [0, 1]} |U_r'(z)|`` by grid maximization."""
    z = np.linspace(0.0, 1.0, points)
    return float(np.max(np.abs(upsilon_deriv(z, params, 1))))


_CONSTANT_SCALES = (1.0, 2.0, 10.0, 100.0)


@lru_cache(maxsize=None)
def smoothness_constant(q):
    """Empirical constant ``ell_q`` of the unscaled non-convex chain.

    ``ell_q`` bounds ``sup |U_r^(q+1)| / r^(3-q)`` over ``r >= 1``; it is the
    largest scaled grid estimate over a few representative ``r``. For
    ``q = 1`` it also covers the quadratic chain's Hessian norm bound of 4.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    est = max(
        upsilon_lipschitz_estimate(UpsilonParams(r), q)[0] / r ** (3 - q) for r in _CONSTANT_SCALES
    )
    if q == 1:
        est = max(est, 4.0)
    return est
