"""Hard instances: chain functions with exact first-order oracles.

Every instance exposes ``dim`` and ``value_grad(x) -> (value, gradient)``.
Gradients are hand-written stencils so that coordinates which must vanish
come out as literal zeros; the zero-chain checks depend on that.

Dimension conventions:

* convex chain: ``T``
* non-convex chain: ``T + 1``
* distance-bounded chain with planted bump: ``T + 2``
* geometric chain: ``T``
"""

from dataclasses import dataclass
from functools import lru_cache
from math import e as _E

import numpy as np

from ._fd import central_difference
from .upsilon import UpsilonParams, upsilon_deriv, upsilon_value

__all__ = [
    "ChainParams",
    "GeometricChainParams",
    "Instance",
    "ConvexChain",
    "NonconvexChain",
    "ScaledInstance",
    "DistanceBoundedInstance",
    "GeometricChain",
    "FunctionInstance",
    "RotatedInstance",
    "Regularized",
    "convex_chain_value_grad",
    "nonconvex_chain_value_grad",
    "scaled_value_grad",
    "bump_value_grad",
    "bump_lipschitz_estimate",
    "distance_bounded_value_grad",
    "geometric_chain_value_grad",
    "instance_from_dict",
]


@dataclass(frozen=True)
class ChainParams:
    """Dimensionless parameters of the chain functions.

    ``alpha`` weights the first link of the convex chain; ``mu`` and ``r``
    only enter the non-convex chain, whose first link weight is ``sqrt(mu)``.
    """

    T: int
    alpha: float = 1.0
    mu: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu must lie in (0, 1], got {self.mu!r}")
        if not self.r >= 1:
            raise ValueError(f"r must be >= 1, got {self.r!r}")
        object.__setattr__(self, "T", int(self.T))


@dataclass(frozen=True)
class GeometricChainParams:
    T: int
    lam: float
    s: float
    beta: float

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        if not self.lam > 0 or not self.s > 0:
            raise ValueError("lam and s must be positive")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        object.__setattr__(self, "T", int(self.T))


def _check_dim(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"expected a vector of length {dim}, got shape {x.shape}")
    return x


def _link_grad(x, first_weight):
    """Value and gradient of ``w/2 (x_1 - 1)^2 + 1/2 sum (x_i - x_{i+1})^2``."""
    d = x[:-1] - x[1:]
    g = np.zeros_like(x)
    g[:-1] += d
    g[1:] -= d
    g[0] += first_weight * (x[0] - 1.0)
    value = 0.5 * first_weight * (x[0] - 1.0) ** 2 + 0.5 * float(d @ d)
    return value, g


def convex_chain_value_grad(x, params):
    """``alpha/2 (x_1 - 1)^2 + 1/2 sum_{i<T} (x_i - x_{i+1})^2`` and its gradient."""
    x = _check_dim(x, params.T)
    return _link_grad(x, params.alpha)


def nonconvex_chain_value_grad(x, params):
    """Convex chain with ``alpha = sqrt(mu)`` plus ``mu * sum_{i<=T} U_r(x_i)``."""
    x = _check_dim(x, params.T + 1)
    value, g = _link_grad(x, np.sqrt(params.mu))
    ups = UpsilonParams(params.r)
    head = x[:-1]
    value += params.mu * float(np.sum(upsilon_value(head, ups)))
    g[:-1] += params.mu * upsilon_deriv(head, ups, 1)
    return value, g


def nonconvex_chain_hess_diag(x, params):
    """Diagonal of the tridiagonal Hessian; the off-diagonal is constant -1."""
    x = _check_dim(x, params.T + 1)
    diag = np.full(params.T + 1, 2.0)
    diag[0] = 1.0 + np.sqrt(params.mu)
    diag[-1] = 1.0
    diag[:-1] += params.mu * upsilon_deriv(x[:-1], UpsilonParams(params.r), 2)
    return diag


def scaled_value_grad(x, inst):
    """``lam sigma^2 base(x / sigma)`` and ``lam sigma base_grad(x / sigma)``."""
    return inst.value_grad(x)


def geometric_chain_value_grad(x, params):
    """``lam [(s - beta x_1)^2 + sum_{i<T} (x_i - beta x_{i+1})^2]`` and its gradient."""
    x = _check_dim(x, params.T)
    lam, beta = params.lam, params.beta
    head = params.s - beta * x[0]
    res = x[:-1] - beta * x[1:]
    value = lam * (head * head + float(res @ res))
    g = np.zeros_like(x)
    g[0] -= 2.0 * lam * beta * head
    g[:-1] += 2.0 * lam * res
    g[1:] -= 2.0 * lam * beta * res
    return value, g


# Bump squashing: phi(t) = e * exp(-1 / [2t - 1]_+^2), identically 0 for t <= 1/2.
# Below this margin exp(-1/u^2) is exactly 0.0 in double precision anyway.
_BUMP_CUTOFF = 1e-2


def _bump_profile(t):
    u = 2.0 * np.asarray(t, dtype=float) - 1.0
    out = np.zeros_like(u)
    live = u > _BUMP_CUTOFF
    out[live] = _E * np.exp(-1.0 / u[live] ** 2)
    return out


def bump_value_grad(x):
    """Compactly supported bump centred at ``0.8 e_d`` (``d = len(x)``).

    ``h(x) = phi(1 - 25/2 ||x - 0.8 e_d||^2)``; equals 1 at the centre and is
    exactly zero, with zero gradient, whenever ``x_d <= 3/5`` or ``||x|| >= 1``.
    """
    x = np.asarray(x, dtype=float)
    diff = x.copy()
    diff[-1] -= 0.8
    u = 1.0 - 25.0 * float(diff @ diff)  # u = 2t - 1
    if u <= _BUMP_CUTOFF:
        return 0.0, np.zeros_like(x)
    value = _E * np.exp(-1.0 / u**2)
    # dphi/dt = phi * 4 / u^3, dt/dx = -25 (x - c)
    grad = value * (4.0 / u**3) * (-25.0) * diff
    return float(value), grad


@lru_cache(maxsize=None)
def bump_lipschitz_estimate(q, offsets=81, points=4001):
    """Grid lower estimate of the Lipschitz constant of the bump's q-th derivative.

    The bump is radial, so its restriction to any line is
    ``s -> phi(1 - 12.5 (s^2 + b^2))`` with ``b`` the line's distance from
    the centre; the estimate maximizes ``|d^(q+1)/ds^(q+1)|`` over ``s`` and ``b``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    s = np.linspace(-0.25, 0.25, points)
    best = 0.0
    for b in np.linspace(0.0, 0.2, offsets):
        prof = lambda z, b=b: _bump_profile(1.0 - 12.5 * (z * z + b * b))  # noqa: E731
        vals = central_difference(prof, s, q + 1, 2.5e-4)
        best = max(best, float(np.max(np.abs(vals))))
    return best


class Instance:
    """Base class: a smooth function with a first-order oracle."""

    family = "generic"
    dim: int

    def value_grad(self, x):
        raise NotImplementedError

    def value(self, x):
        return self.value_grad(x)[0]

    def grad(self, x):
        return self.value_grad(x)[1]

    def __call__(self, x):
        return self.value(x)

    def to_dict(self):
        raise TypeError(f"{type(self).__name__} is not serializable")


class ConvexChain(Instance):
    family = "convex-chain"

    def __init__(self, params):
        self.params = params
        self.dim = params.T

    def value_grad(self, x):
        return convex_chain_value_grad(x, self.params)

    @property
    def minimizer(self):
        return np.ones(self.dim)

    def to_dict(self):
        p = self.params
        return {"family": self.family, "T": p.T, "alpha": p.alpha}


class NonconvexChain(Instance):
    family = "nonconvex-chain"

    def __init__(self, params):
        self.params = params
        self.dim = params.T + 1

    def value_grad(self, x):
        return nonconvex_chain_value_grad(x, self.params)

    def hess_diag(self, x):
        return nonconvex_chain_hess_diag(x, self.params)

    @property
    def minimizer(self):
        return np.ones(self.dim)

    def to_dict(self):
        p = self.params
        return {"family": self.family, "T": p.T, "mu": p.mu, "r": p.r}


class ScaledInstance(Instance):
    """``f(x) = lam sigma^2 base(x / sigma)``."""

    family = "scaled"

    def __init__(self, base, lam, sigma):
        if not lam > 0 or not sigma > 0:
            raise ValueError("lam and sigma must be positive")
        self.base = base
        self.lam = float(lam)
        self.sigma = float(sigma)
        self.dim = base.dim

    def value_grad(self, x):
        x = _check_dim(x, self.dim)
        v, g = self.base.value_grad(x / self.sigma)
        return self.lam * self.sigma**2 * v, (self.lam * self.sigma) * g

    @property
    def minimizer(self):
        return self.sigma * self.base.minimizer

    def to_dict(self):
        return {
            "family": self.family,
            "lam": self.lam,
            "sigma": self.sigma,
            "base": self.base.to_dict(),
        }


def distance_bounded_value_grad(x, inst):
    return inst.value_grad(x)


class DistanceBoundedInstance(Instance):
    """Scaled non-convex chain on the first ``T + 1`` coordinates minus a planted bump.

    ``f(x) = inner(x_1..x_{T+1}) - lambda_tilde * h(x / D)`` in dimension ``T + 2``.
    """

    family = "distance-bounded"

    def __init__(self, inner, lambda_tilde, D):
        if not lambda_tilde > 0 or not D > 0:
            raise ValueError("lambda_tilde and D must be positive")
        self.inner = inner
        self.lambda_tilde = float(lambda_tilde)
        self.D = float(D)
        self.dim = inner.dim + 1

    def value_grad(self, x):
        x = _check_dim(x, self.dim)
        v, g_in = self.inner.value_grad(x[:-1])
        hv, hg = bump_value_grad(x / self.D)
        g = np.empty_like(x)
        g[:-1] = g_in
        g[-1] = 0.0
        if hv != 0.0:
            g -= (self.lambda_tilde / self.D) * hg
        return v - self.lambda_tilde * hv, g

    @property
    def bump_centre(self):
        c = np.zeros(self.dim)
        c[-1] = 0.8 * self.D
        return c

    def to_dict(self):
        return {
            "family": self.family,
            "lambda_tilde": self.lambda_tilde,
            "D": self.D,
            "inner": self.inner.to_dict(),
        }


class GeometricChain(Instance):
    family = "geometric-chain"

    def __init__(self, params):
        self.params = params
        self.dim = params.T

    def value_grad(self, x):
        return geometric_chain_value_grad(x, self.params)

    @property
    def minimizer(self):
        p = self.params
        return p.s * p.beta ** -np.arange(1, p.T + 1, dtype=float)

    def to_dict(self):
        p = self.params
        return {"family": self.family, "T": p.T, "lam": p.lam, "s": p.s, "beta": p.beta}


class FunctionInstance(Instance):
    """Wraps a plain ``value_grad`` callable."""

    def __init__(self, dim, value_grad, name="function"):
        self.dim = int(dim)
        self._value_grad = value_grad
        self.family = name

    def value_grad(self, x):
        x = _check_dim(x, self.dim)
        v, g = self._value_grad(x)
        return float(v), np.asarray(g, dtype=float)


class RotatedInstance(Instance):
    """``f_U(x) = f(U^T x)`` for ``U`` with orthonormal columns."""

    family = "rotated"

    def __init__(self, base, U):
        U = np.asarray(U, dtype=float)
        if U.shape[1] != base.dim:
            raise ValueError("U must have base.dim columns")
        self.base = base
        self.U = U
        self.dim = U.shape[0]

    def value_grad(self, x):
        x = _check_dim(x, self.dim)
        v, g = self.base.value_grad(self.U.T @ x)
        return v, self.U @ g


class Regularized(Instance):
    """``f(x) + sigma/2 ||x||^2``."""

    family = "regularized"

    def __init__(self, base, sigma):
        self.base = base
        self.sigma = float(sigma)
        self.dim = base.dim

    def value_grad(self, x):
        v, g = self.base.value_grad(x)
        return v + 0.5 * self.sigma * float(x @ x), g + self.sigma * x


def instance_from_dict(d):
    """Rebuild an instance from its ``to_dict`` descriptor."""
    family = d["family"]
    if family == ConvexChain.family:
        return ConvexChain(ChainParams(T=d["T"], alpha=d["alpha"]))
    if family == NonconvexChain.family:
        return NonconvexChain(ChainParams(T=d["T"], mu=d["mu"], r=d["r"]))
    if family == ScaledInstance.family:
        return ScaledInstance(instance_from_dict(d["base"]), d["lam"], d["sigma"])
    if family == DistanceBoundedInstance.family:
        return DistanceBoundedInstance(instance_from_dict(d["inner"]), d["lambda_tilde"], d["D"])
    if family == GeometricChain.family:
        return GeometricChain(GeometricChainParams(T=d["T"], lam=d["lam"], s=d["s"], beta=d["beta"]))
    raise ValueError(f"unknown instance family {family!r}")
