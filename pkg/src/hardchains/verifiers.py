"""Numeric certificates for the chain constructions.

Each check returns a :class:`VerificationReport` rather than raising, so a
suite can be rendered as a pass/fail table.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize

from .instances import (
    ChainParams,
    FunctionInstance,
    GeometricChain,
    GeometricChainParams,
    nonconvex_chain_value_grad,
)
from .optimizers import GradientDescent, run_until_stationary
from .upsilon import upsilon_deriv, upsilon_grad_sup

__all__ = [
    "VerificationReport",
    "check_zero_chain",
    "negative_control",
    "convex_min_grad_exact",
    "convex_min_grad_lstsq",
    "nonconvex_grad_floor_search",
    "disc_tight_point",
    "disc_tight_constant",
    "lipschitz_estimate",
    "check_membership",
    "geometric_resistance_chain",
    "suboptimality_resistance_demo",
]


@dataclass
class VerificationReport:
    claim: str
    bound: float
    measured: float
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "claim": self.claim,
            "bound": float(self.bound),
            "measured": float(self.measured),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
            "metadata": self.metadata,
        }

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.claim}: measured={self.measured:.6g} bound={self.bound:.6g}"


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def check_zero_chain(f, dim=None, trials=100, seed=0, scale=1.0):
    """Random prefix-supported inputs must give gradients with no new coordinates past ``i``.

    For ``i`` drawn from ``1..dim`` and ``x`` supported on the first
    ``i - 1`` coordinates, coordinates ``i+1..dim`` of the gradient must be
    literal zeros. The origin (``i = 1``) is always tried.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dim = f.dim if dim is None else dim
    rng = _rng(seed)
    failures = 0
    first_failure = None
    for k in range(trials):
        i = 1 if k == 0 else int(rng.integers(1, dim + 1))
        x = np.zeros(dim)
        x[: i - 1] = scale * rng.standard_normal(i - 1)
        g = f.grad(x)
        leak = np.flatnonzero(g[i:])
        if leak.size:
            failures += 1
            if first_failure is None:
                first_failure = {"i": i, "coordinate": int(leak[0]) + i + 1}
    return VerificationReport(
        "zero-chain",
        0.0,
        float(failures),
        0.0,
        failures == 0,
        {"family": getattr(f, "family", "?"), "dim": dim, "trials": trials,
         "first_failure": first_failure},
    )


def negative_control(dim):
    """``||x||^2 / 2 + x_d``: its gradient at 0 is ``e_d``, so it is not a zero-chain."""

    def value_grad(x):
        g = x.copy()
        g[-1] += 1.0
        return 0.5 * float(x @ x) + x[-1], g

    return FunctionInstance(dim, value_grad, "negative-control")


def _check_convex_args(T, alpha):
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")


def convex_min_grad_exact(T, alpha):
    """``min ||grad f_{T,alpha}(x)||`` over ``x_T = 0``, equal to ``1/sqrt(sum_i (i-1+1/alpha)^2)``."""
    _check_convex_args(T, alpha)
    i = np.arange(T, dtype=float)
    return float(1.0 / np.sqrt(np.sum((i + 1.0 / alpha) ** 2)))


def _convex_system(T, alpha):
    A = np.zeros((T, T))
    idx = np.arange(T)
    A[idx, idx] = 2.0
    A[0, 0] = 1.0 + alpha
    A[-1, -1] = 1.0 if T > 1 else alpha
    A[idx[:-1], idx[1:]] = -1.0
    A[idx[1:], idx[:-1]] = -1.0
    b = np.zeros(T)
    b[0] = alpha
    return A, b


def convex_min_grad_lstsq(T, alpha):
    """Dense least-squares value of the same minimum; cubic cost, T <= 200."""
    _check_convex_args(T, alpha)
    if T > 200:
        raise ValueError("dense cross-check is capped at T = 200")
    A, b = _convex_system(T, alpha)
    M = A[:, :-1]
    if M.shape[1] == 0:
        return float(np.linalg.norm(b))
    v, *_ = np.linalg.lstsq(M, b, rcond=None)
    return float(np.linalg.norm(M @ v - b))


def disc_tight_constant(r=1.0):
    """``27 + sqrt(3) G`` with ``G = max_{[0,1]} |U_r'|``."""
    return 27.0 + math.sqrt(3.0) * upsilon_grad_sup(r)


def disc_tight_point(T, mu, r=1.0):
    """Explicit low-gradient point of the non-convex chain with ``x_T = x_{T+1} = 0``.

    The second differences of ``x`` are ``-delta_n`` with a symmetric
    plus/minus profile over ``2m + 1`` links, ``m = ceil(1/(3 sqrt(mu)))``.
    For ``T <= 8`` the origin is returned.

    Returns:
        (x, gradient norm)
    """
    if int(T) != T or T < 1:
        raise ValueError("T must be a positive integer")
    if not T**-2 <= mu <= 1:
        raise ValueError(f"need mu in [T^-2, 1] = [{T**-2:.4g}, 1], got {mu!r}")
    params = ChainParams(T, mu=mu, r=r)
    x = np.zeros(T + 1)
    if T > 8:
        m = math.ceil(1.0 / (3.0 * math.sqrt(mu)))
        c = 1.0 / (m * (m + 1))
        delta = np.zeros(2 * m + 2)
        delta[1 : m + 1] = c
        delta[m + 2 : 2 * m + 2] = -c
        prev, cur = 1.0, 1.0
        x[0] = 1.0
        for n in range(2, 2 * m + 2):
            prev, cur = cur, 2 * cur - prev - delta[n - 1]
            x[n - 1] = cur
        # entries past 2m+1 are zero by construction; clear rounding dust
        np.clip(x, 0.0, 1.0, out=x)
        x[2 * m + 1 :] = 0.0
    _, g = nonconvex_chain_value_grad(x, params)
    return x, float(np.linalg.norm(g))


def _transition_length(x):
    return int(np.count_nonzero((x > 0.1) & (x < 0.9)))


def nonconvex_grad_floor_search(T, mu, r=1.0, restarts=4, seed=0):
    """Smallest ``||grad f_T(x)||`` found over ``{x_T = x_{T+1} = 0}``.

    ``x_T`` and ``x_{T+1}`` are eliminated and ``||grad||^2`` is minimized by
    L-BFGS over the remaining ``T - 1`` coordinates (its gradient is
    ``2 H grad`` with the tridiagonal Hessian ``H``). Starts: the origin,
    the explicit low-gradient point, step profiles with ramps of several
    lengths, and ``restarts`` random monotone profiles.

    The report passes when the minimum lies in
    ``[mu^(3/4)/4 - 1e-6, (27 + sqrt(3) G) mu^(3/4)]``.
    """
    if not 0 < mu <= 1:
        raise ValueError("mu must lie in (0, 1]")
    ChainParams(T, mu=mu, r=r)  # validates T and r
    rng = _rng(seed)
    n = T - 1
    root_mu = math.sqrt(mu)

    def full(z):
        x = np.zeros(T + 1)
        x[:n] = z
        return x

    def objective(z):
        # gradient and tridiagonal Hessian of the chain; values are never needed
        x = full(z)
        head = x[:-1]
        d = head - x[1:]
        g = np.zeros(T + 1)
        g[:-1] += d
        g[1:] -= d
        g[0] += root_mu * (x[0] - 1.0)
        g[:-1] += mu * upsilon_deriv(head, r, 1)
        h = np.full(T + 1, 2.0)
        h[0] = 1.0 + root_mu
        h[-1] = 1.0
        h[:-1] += mu * upsilon_deriv(head, r, 2)
        hg = h * g
        hg[:-1] -= g[1:]
        hg[1:] -= g[:-1]
        return float(g @ g), 2.0 * hg[:n]

    starts = [("origin", np.zeros(n))]
    if T > 1 and T**-2 <= mu:
        starts.append(("explicit", disc_tight_point(T, mu, r)[0][:n]))
    width = 1.0 / math.sqrt(mu)
    k = n // 4
    for m in sorted({max(1, int(round(width * s))) for s in (0.5, 1.0, 2.0)}):
        z = np.clip(1.0 - (np.arange(n) - k) / m, 0.0, 1.0)
        starts.append((f"ramp m={m}", z))
    for j in range(restarts):
        starts.append((f"random {j}", np.sort(rng.uniform(0.0, 1.0, n))[::-1].copy()))

    best = (math.inf, None, None)
    failures = []
    for name, z0 in starts:
        if n == 0:
            best = (objective(z0)[0], name, z0)
            break
        res = minimize(objective, z0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 20000, "maxfun": 40000, "ftol": 1e-14, "gtol": 1e-12})
        if not np.isfinite(res.fun):
            failures.append(name)
            continue
        if res.fun < best[0]:
            best = (float(res.fun), name, res.x)
    measured = math.sqrt(best[0])
    lower = mu**0.75 / 4.0
    upper = disc_tight_constant(r) * mu**0.75
    tol = 1e-6
    passed = (lower - tol <= measured <= upper) and not failures
    x_best = full(best[2]) if best[2] is not None else None
    return VerificationReport(
        "gradient-floor",
        lower,
        measured,
        tol,
        passed,
        {
            "T": T, "mu": mu, "r": r, "upper": upper,
            "ratio_to_mu34": measured / mu**0.75,
            "best_start": best[1],
            "best_transition_length": None if x_best is None else _transition_length(x_best),
            "starts": len(starts),
            "diverged_starts": failures,
        },
    )


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def lipschitz_estimate(f, order=1, samples=200, radius=1.0, centre=None, seed=0):
    """Sampled lower estimate of the Lipschitz constant of the order-th derivative.

    Points are ``centre + rho u`` with ``u`` a random unit vector and ``rho``
    uniform on ``[0, radius]``; a cube would put nearly every point far from
    the centre in high dimension. Each is paired with an offset ``t v``
    along a random unit direction, ``t`` log-uniform in ``[1e-3, 1] * radius``. Order 1 uses ``||grad(x + t v) - grad(x)|| / t``;
    order 2 uses the same ratio for Hessian-vector products formed by
    central differences of gradients.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = _rng(seed)
    d = f.dim
    centre = np.zeros(d) if centre is None else np.asarray(centre, dtype=float)
    best = 0.0
    for _ in range(samples):
        x = centre + radius * rng.uniform() * _unit(rng, d)
        v = _unit(rng, d)
        t = radius * 10.0 ** rng.uniform(-3.0, 0.0)
        y = x + t * v
        if order == 1:
            diff = f.grad(y) - f.grad(x)
        else:
            h = 1e-3 * t
            hv_y = (f.grad(y + h * v) - f.grad(y - h * v)) / (2 * h)
            hv_x = (f.grad(x + h * v) - f.grad(x - h * v)) / (2 * h)
            diff = hv_y - hv_x
        best = max(best, float(np.linalg.norm(diff)) / t)
    return best


def _local_min(f, x0):
    res = minimize(lambda x: f.value_grad(x), x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-12})
    return res.x, float(res.fun)


def check_membership(plan, samples=200, seed=0, tolerance=1e-9):
    """Class-membership certificates for a planned instance.

    Checks sampled Lipschitz estimates against ``L_1`` and ``L_2`` (when the
    class has them) and either the value gap against ``delta`` or the
    minimizer norm against ``D``. For the bump variant it additionally
    requires the planted point to have negative value.
    """
    spec = plan.spec
    f = plan.instance()
    rng = _rng(seed)
    dim = f.dim
    sigma = plan.sigma
    chain_centre = np.zeros(dim)
    chain_centre[: dim - (1 if plan.family == "distance-bounded" else 0)] = 0.5 * sigma
    regions = [(chain_centre, sigma)]
    if plan.family == "distance-bounded":
        regions.append((f.bump_centre, 0.2 * spec.D))
    reports = []
    for q in range(1, min(spec.p, 2) + 1):
        est = max(
            lipschitz_estimate(f, q, samples, radius, centre, rng) for centre, radius in regions
        )
        L = spec.lipschitz[q - 1]
        reports.append(VerificationReport(
            f"lipschitz-order-{q}", L, est, tolerance, est <= L * (1 + tolerance),
            {"family": plan.family, "T": plan.T},
        ))
    x0 = np.zeros(dim)
    f0 = f.value(x0)
    if plan.family == "distance-bounded":
        planted = f.value(f.bump_centre)
        reports.append(VerificationReport(
            "planted-minimum-negative", 0.0, planted, 0.0, planted < 0, {"T": plan.T},
        ))
        x_min, _ = _local_min(f, f.bump_centre)
        norm = float(np.linalg.norm(x_min))
        reports.append(VerificationReport(
            "minimizer-norm", spec.D, norm, tolerance, norm <= spec.D * (1 + tolerance),
            {"start": "planted point"},
        ))
    elif plan.family == "convex-distance":
        norm = float(np.linalg.norm(f.minimizer))
        reports.append(VerificationReport(
            "minimizer-norm", spec.D, norm, tolerance, norm <= spec.D * (1 + tolerance), {},
        ))
    else:
        candidates = [f.value(f.minimizer)]
        for start in (x0, f.minimizer, sigma * rng.uniform(0.0, 1.0, dim)):
            candidates.append(_local_min(f, start)[1])
        gap = f0 - min(candidates)
        reports.append(VerificationReport(
            "value-gap", spec.delta, gap, tolerance, gap <= spec.delta * (1 + tolerance),
            {"f0": f0, "best_value": min(candidates)},
        ))
    return reports


def geometric_resistance_chain(L1, delta, eps, T):
    """Geometric chain with ``f(0) - inf f = delta`` and an ``L1``-Lipschitz gradient."""
    if not 0 < eps < delta:
        raise ValueError("need 0 < eps < delta")
    beta = 1.0 - math.sqrt(eps / delta)
    lam = L1 / (2.0 * (1.0 + beta) ** 2)
    s = math.sqrt(delta / lam)
    return GeometricChain(GeometricChainParams(T, lam, s, beta))


def suboptimality_resistance_demo(L1, delta, eps, T=30, algorithm=None):
    """Run a zero-respecting method for ``T`` queries; no iterate may be eps-suboptimal."""
    f = geometric_resistance_chain(L1, delta, eps, T)
    algorithm = algorithm or GradientDescent(1.0 / L1)
    trace = run_until_stationary(algorithm, f, 0.0, T, stop=False)
    best_gap = min(trace.values)  # inf f = 0 at the geometric minimizer
    return VerificationReport(
        "suboptimality-resistance",
        eps,
        best_gap,
        0.0,
        best_gap > eps and trace.zero_respecting,
        {"T": T, "beta": f.params.beta, "lam": f.params.lam, "s": f.params.s,
         "queries": trace.n_queries, "zero_respecting": trace.zero_respecting},
    )
