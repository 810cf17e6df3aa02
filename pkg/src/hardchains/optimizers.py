"""Reference first-order methods and the loop that measures time to stationarity.

An algorithm is an object with ``iterate(x0)`` returning a generator. The
generator yields query points and is sent back ``(value, gradient)`` for
each one, so the run loop owns the oracle and the bookkeeping::

    gen = algorithm.iterate(x0)
    x = next(gen)
    while ...:
        x = gen.send(f.value_grad(x))
"""

from dataclasses import dataclass, field
import csv
import json
import math

import numpy as np

__all__ = [
    "FirstOrderOracleQuery",
    "IterateTrace",
    "NonFiniteError",
    "BudgetExhausted",
    "GradientDescent",
    "AGD",
    "gradient_descent",
    "agd_strongly_convex",
    "prox_agd",
    "prox_agd_bound",
    "run_until_stationary",
    "default_budget",
]

MAX_BUDGET = 10**7


class NonFiniteError(FloatingPointError):
    def __init__(self, index, what="value/gradient"):
        super().__init__(f"non-finite {what} at query {index}")
        self.index = index


class BudgetExhausted(RuntimeError):
    def __init__(self, budget, best_grad_norm, trace=None):
        super().__init__(
            f"no eps-stationary point within {budget} queries "
            f"(best gradient norm {best_grad_norm:.6g})"
        )
        self.budget = budget
        self.best_grad_norm = best_grad_norm
        self.trace = trace


@dataclass
class FirstOrderOracleQuery:
    point: np.ndarray
    value: float
    gradient: np.ndarray
    index: int

    def __post_init__(self):
        if self.gradient.shape != self.point.shape:
            raise ValueError("gradient and point dimensions differ")


@dataclass
class IterateTrace:
    """Per-query record of one run; query indices start at 1.

    ``support_sizes[t-1]`` is the size of the accumulated iterate support
    after query ``t`` and ``max_support_index[t-1]`` the largest 1-based
    coordinate on which query ``t`` is nonzero (0 when it is the origin).
    ``zero_respecting`` is False as soon as some iterate touches a
    coordinate no earlier gradient revealed.
    """

    values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    support_sizes: list = field(default_factory=list)
    max_support_index: list = field(default_factory=list)
    queries: list = None
    T_eps: int = None
    eps: float = None
    zero_respecting: bool = True
    restarts: list = field(default_factory=list)
    algorithm: str = ""

    def __len__(self):
        return len(self.values)

    @property
    def n_queries(self):
        return len(self.values)

    @property
    def best_grad_norm(self):
        return min(self.grad_norms) if self.grad_norms else math.inf

    def chain_progress_ok(self):
        """Query ``t`` is zero on every coordinate ``j >= t``."""
        return all(m <= t - 1 for t, m in enumerate(self.max_support_index, start=1))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "f", "grad_norm", "support_size"])
            for t, row in enumerate(zip(self.values, self.grad_norms, self.support_sizes), 1):
                w.writerow([t, repr(row[0]), repr(row[1]), row[2]])

    def summary(self):
        return {
            "algorithm": self.algorithm,
            "eps": self.eps,
            "T_eps": self.T_eps,
            "queries": self.n_queries,
            "best_grad_norm": self.best_grad_norm,
            "final_value": self.values[-1] if self.values else None,
            "zero_respecting": self.zero_respecting,
            "chain_progress_ok": self.chain_progress_ok(),
            "restarts": len(self.restarts),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


class GradientDescent:
    name = "gd"

    def __init__(self, step):
        if not step > 0:
            raise ValueError("step must be positive")
        self.step = float(step)

    def iterate(self, x0):
        x = np.array(x0, dtype=float)
        while True:
            _, g = yield x
            x = x - self.step * g


class AGD:
    """Nesterov's constant-momentum method for ``sc``-strongly convex, ``L``-smooth f.

    With ``reg > 0`` the method runs on ``f + reg/2 ||x||^2`` while the
    oracle still reports the plain ``f``; ``sc`` and ``L`` then refer to the
    regularized function.

    Monotone guard: if a query point ``y`` has objective above the value at
    the first query, the momentum point is discarded, the last accepted
    iterate is queried instead and a plain gradient step is taken from it.
    Indices of such extra queries land in ``self.restarts`` and the accepted
    iterates (all with objective at most the initial one) in ``self.accepted``.
    """

    name = "agd"

    def __init__(self, sc, L, reg=0.0):
        if not 0 < sc <= L:
            raise ValueError(f"need 0 < sc <= L, got sc={sc}, L={L}")
        self.sc = float(sc)
        self.L = float(L)
        self.reg = float(reg)
        q = math.sqrt(self.sc / self.L)
        self.momentum = (1 - q) / (1 + q)
        self.accepted = []
        self.restarts = []

    def _objective(self, x, v, g):
        if self.reg:
            return v + 0.5 * self.reg * float(x @ x), g + self.reg * x
        return v, g

    def iterate(self, x0):
        self.accepted = []
        self.restarts = []
        x = np.array(x0, dtype=float)
        y = x
        f0 = None
        count = 0
        while True:
            v, g = yield y
            count += 1
            v, g = self._objective(y, v, g)
            if f0 is None:
                f0 = v
                self.accepted.append(x)
            if v > f0 and y is not x:
                self.restarts.append(count + 1)
                v, g = yield x
                count += 1
                v, g = self._objective(x, v, g)
                x_new = x - g / self.L
                y = x_new
            else:
                x_new = y - g / self.L
                y = x_new + self.momentum * (x_new - x)
            x = x_new
            self.accepted.append(x)


def default_budget(predicted_T):
    """Ten times the predicted count, at least 100 and at most ``MAX_BUDGET``."""
    return int(min(max(10 * math.ceil(predicted_T), 100), MAX_BUDGET))


def run_until_stationary(algorithm, f, eps, budget, x0=None, record_queries=False, stop=True):
    """Drive ``algorithm`` on ``f`` until ``||grad f|| <= eps`` or ``budget`` queries.

    ``T_eps`` is the first 1-based query index meeting the test. With
    ``stop=False`` the run continues to the budget (useful for fixed-length
    demonstrations). Supports are tracked with exact-zero semantics.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    x0 = np.zeros(f.dim) if x0 is None else np.asarray(x0, dtype=float)
    trace = IterateTrace(queries=[] if record_queries else None, eps=eps,
                         algorithm=getattr(algorithm, "name", type(algorithm).__name__))
    revealed = np.zeros(f.dim, dtype=bool)
    touched = np.zeros(f.dim, dtype=bool)
    gen = algorithm.iterate(x0)
    x = next(gen)
    for t in range(1, budget + 1):
        v, g = f.value_grad(x)
        if not (math.isfinite(v) and np.all(np.isfinite(g))):
            raise NonFiniteError(t)
        gn = float(np.linalg.norm(g))
        nz = x != 0.0
        if trace.zero_respecting and np.any(nz & ~revealed):
            trace.zero_respecting = False
        touched |= nz
        revealed |= g != 0.0
        idx = np.flatnonzero(nz)
        trace.values.append(float(v))
        trace.grad_norms.append(gn)
        trace.support_sizes.append(int(np.count_nonzero(touched)))
        trace.max_support_index.append(int(idx[-1]) + 1 if idx.size else 0)
        if record_queries:
            trace.queries.append(FirstOrderOracleQuery(x.copy(), float(v), g.copy(), t))
        if trace.T_eps is None and gn <= eps:
            trace.T_eps = t
            if stop:
                break
        if t < budget:
            x = gen.send((v, g))
    trace.restarts = list(getattr(algorithm, "restarts", []))
    return trace


def gradient_descent(f, step, x0=None, budget=1000, eps=0.0, **kw):
    return run_until_stationary(GradientDescent(step), f, eps, budget, x0, **kw)


def agd_strongly_convex(f, sc, L, x0=None, budget=1000, eps=0.0, **kw):
    return run_until_stationary(AGD(sc, L), f, eps, budget, x0, **kw)


def prox_agd_bound(L, delta, eps):
    """Query bound ``1 + 5 sqrt(L delta)/eps * log+(25 L delta / eps^2)``."""
    return 1 + 5 * math.sqrt(L * delta) / eps * max(0.0, math.log(25 * L * delta / eps**2))


def prox_agd(f, delta, L, eps, budget=None, x0=None, **kw):
    """AGD on ``f + sigma/2 ||x||^2`` with ``sigma = eps^2 / (3 delta)``.

    Stops on the gradient of the original ``f``. Raises
    :class:`BudgetExhausted` if no query is eps-stationary within ``budget``
    (default: twice the query bound).
    """
    sigma = eps**2 / (3 * delta)
    if budget is None:
        budget = int(min(2 * math.ceil(prox_agd_bound(L, delta, eps)), MAX_BUDGET))
    algo = AGD(sigma, L + sigma, reg=sigma)
    algo.name = "prox-agd"
    trace = run_until_stationary(algo, f, eps, budget, x0, **kw)
    if trace.T_eps is None:
        raise BudgetExhausted(budget, trace.best_grad_norm, trace)
    return trace
