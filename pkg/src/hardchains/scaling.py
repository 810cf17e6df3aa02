"""Planners that instantiate a hard chain for a given smoothness class.

A planner takes a :class:`ProblemClassSpec` (the class ``F(p, Delta, L_1..L_p)``
or its distance-bounded analogue, plus a target accuracy ``epsilon``) and
returns a :class:`ScalingPlan`: the scalings ``(lam, sigma)``, chain
parameters ``(T, alpha, mu, r)`` and the un-floored lower-bound expression.
Every emitted plan's instance is a member of the class, and every
zero-respecting method started at 0 needs more than ``T`` queries on it.
"""

from dataclasses import asdict, dataclass, field
import math

from .instances import (
    ChainParams,
    ConvexChain,
    DistanceBoundedInstance,
    NonconvexChain,
    ScaledInstance,
    bump_lipschitz_estimate,
)
from .upsilon import smoothness_constant

__all__ = [
    "FAMILIES",
    "ProblemClassSpec",
    "SmoothnessConstants",
    "ScalingPlan",
    "PlanningError",
    "plan_convex_value",
    "plan_convex_distance",
    "plan_nonconvex_p2",
    "plan_nonconvex_general",
    "plan_distance_bounded",
    "plan_for_family",
    "predicted_lower_bound",
    "default_family",
    "plan_summary",
]

FAMILIES = (
    "convex-value",
    "convex-distance",
    "nonconvex-p2",
    "nonconvex-general",
    "distance-bounded",
)

_FLOOR_TOL = 1e-12
_P2_CONST = 20.0 * 4.0 ** (12 / 7)
_GENERAL_CONST = 20.0 * 4.0 ** (8 / 5)


class PlanningError(ValueError):
    """The requested class/accuracy admits no valid hard instance."""


def _floor(x):
    """Floor that snaps values within 1e-12 (relative) of an integer onto it."""
    nearest = round(x)
    if abs(x - nearest) <= _FLOOR_TOL * max(1.0, abs(x)):
        return int(nearest)
    return math.floor(x)


@dataclass(frozen=True)
class ProblemClassSpec:
    """Target function class and accuracy.

    Exactly one of ``delta`` (initial value gap) and ``D`` (bound on the
    norm of every global minimizer) is set. ``lipschitz[q-1]`` is ``L_q``.
    """

    p: int
    lipschitz: tuple
    epsilon: float
    delta: float = None
    D: float = None

    def __post_init__(self):
        object.__setattr__(self, "lipschitz", tuple(float(v) for v in self.lipschitz))
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p!r}")
        if len(self.lipschitz) != self.p:
            raise ValueError(f"need {self.p} Lipschitz constants, got {len(self.lipschitz)}")
        if any(not v > 0 for v in self.lipschitz):
            raise ValueError("Lipschitz constants must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if (self.delta is None) == (self.D is None):
            raise ValueError("set exactly one of delta and D")
        bound = self.delta if self.delta is not None else self.D
        if not bound > 0:
            raise ValueError("delta / D must be positive")

    @property
    def L1(self):
        return self.lipschitz[0]

    def halved(self):
        return ProblemClassSpec(
            self.p, [v / 2 for v in self.lipschitz], self.epsilon, self.delta, self.D
        )

    def with_epsilon(self, epsilon):
        return ProblemClassSpec(self.p, self.lipschitz, epsilon, self.delta, self.D)

    def check_nonconvex_hypothesis(self):
        """Require ``eps^(q-1) <= L_1^q / L_q`` for ``q = 2..p``."""
        if self.p < 2:
            raise PlanningError(
                "p = 1 is not covered by the non-convex planners: a Lipschitz gradient "
                "alone gives the gradient-descent rate; use a convex planner or p >= 2"
            )
        for q in range(2, self.p + 1):
            lhs = self.epsilon ** (q - 1)
            rhs = self.L1**q / self.lipschitz[q - 1]
            if lhs > rhs * (1 + _FLOOR_TOL):
                raise PlanningError(
                    f"accuracy hypothesis violated for q={q}: "
                    f"eps^{q - 1} = {lhs:.6g} > L_1^{q}/L_{q} = {rhs:.6g}"
                )

    def to_dict(self):
        return asdict(self) | {"lipschitz": list(self.lipschitz)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["p"], d["lipschitz"], d["epsilon"], d.get("delta"), d.get("D"))


@dataclass(frozen=True)
class SmoothnessConstants:
    """Smoothness constants of the unscaled chain (``ell``) and bump (``ell_tilde``).

    ``ell_hat`` is the inflated set the planners divide by:
    ``ell_hat_1 = 2 ell_1`` and ``ell_hat_q = max(ell_q, 4^(q-1) (2 ell_1)^q)``.
    Construct directly to substitute analytic values.
    """

    ell: tuple
    ell_hat: tuple
    ell_tilde: tuple

    def __post_init__(self):
        for name in ("ell", "ell_hat", "ell_tilde"):
            vals = tuple(float(v) for v in getattr(self, name))
            if any(not v > 0 for v in vals):
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, vals)
        if not len(self.ell) == len(self.ell_hat) == len(self.ell_tilde):
            raise ValueError("constant lists must have equal length")

    @property
    def p(self):
        return len(self.ell)

    @classmethod
    def from_ell(cls, ell, ell_tilde):
        ell = tuple(float(v) for v in ell)
        hat = [2.0 * ell[0]]
        for q in range(2, len(ell) + 1):
            hat.append(max(ell[q - 1], 4.0 ** (q - 1) * (2.0 * ell[0]) ** q))
        return cls(ell, tuple(hat), tuple(ell_tilde))

    @classmethod
    def empirical(cls, p):
        """Grid estimates for ``q = 1..p``."""
        ell = [smoothness_constant(q) for q in range(1, p + 1)]
        ell_tilde = [bump_lipschitz_estimate(q) for q in range(1, p + 1)]
        return cls.from_ell(ell, ell_tilde)

    def L_hat(self, lipschitz):
        if len(lipschitz) > self.p:
            raise ValueError(f"constants cover p <= {self.p}, got {len(lipschitz)} orders")
        return [L / h for L, h in zip(lipschitz, self.ell_hat)]

    def to_dict(self):
        return {k: list(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["ell"], d["ell_hat"], d["ell_tilde"])


@dataclass(frozen=True)
class ScalingPlan:
    family: str
    lam: float
    sigma: float
    mu: float
    r: float
    alpha: float
    T: int
    predicted_T: float
    spec: ProblemClassSpec
    constants: SmoothnessConstants = None
    qstar: int = None
    lambda_tilde: float = None
    notes: tuple = field(default_factory=tuple)

    @property
    def fallback(self):
        return any(n.startswith("fallback") for n in self.notes)

    def instance(self):
        if self.family in ("convex-value", "convex-distance"):
            base = ConvexChain(ChainParams(self.T, alpha=self.alpha))
            return ScaledInstance(base, self.lam, self.sigma)
        base = NonconvexChain(ChainParams(self.T, mu=self.mu, r=self.r))
        inner = ScaledInstance(base, self.lam, self.sigma)
        if self.family == "distance-bounded":
            return DistanceBoundedInstance(inner, self.lambda_tilde, self.spec.D)
        return inner

    def to_dict(self):
        return {
            "family": self.family,
            "lam": self.lam,
            "sigma": self.sigma,
            "mu": self.mu,
            "r": self.r,
            "alpha": self.alpha,
            "T": self.T,
            "predicted_T": self.predicted_T,
            "qstar": self.qstar,
            "lambda_tilde": self.lambda_tilde,
            "notes": list(self.notes),
            "spec": self.spec.to_dict(),
            "constants": None if self.constants is None else self.constants.to_dict(),
            "instance": self.instance().to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        constants = d.get("constants")
        return cls(
            family=d["family"],
            lam=d["lam"],
            sigma=d["sigma"],
            mu=d["mu"],
            r=d["r"],
            alpha=d["alpha"],
            T=d["T"],
            predicted_T=d["predicted_T"],
            spec=ProblemClassSpec.from_dict(d["spec"]),
            constants=None if constants is None else SmoothnessConstants.from_dict(constants),
            qstar=d.get("qstar"),
            lambda_tilde=d.get("lambda_tilde"),
            notes=tuple(d.get("notes", ())),
        )


def _require_delta(spec):
    if spec.delta is None:
        raise PlanningError("this planner needs a value-gap bound delta")


def _require_D(spec):
    if spec.D is None:
        raise PlanningError("this planner needs a distance bound D")


def plan_convex_value(spec, constants=None, notes=()):
    """Convex chain with ``alpha = 1/T`` and value gap at most ``delta``."""
    _require_delta(spec)
    L1, eps = spec.L1, spec.epsilon
    predicted = math.sqrt(L1 * spec.delta) / (4.0 * eps)
    T = _floor(predicted)
    if T < 1:
        raise PlanningError(
            f"target accuracy trivially achievable: eps={eps:g} gives T={T} < 1"
        )
    lam = L1 / 4.0
    alpha = 1.0 / T
    sigma = (T - 1 + 1 / alpha) ** 1.5 * eps / lam
    return ScalingPlan(
        "convex-value", lam, sigma, 1.0, 1.0, alpha, T, predicted, spec, constants,
        notes=tuple(notes),
    )


def plan_convex_distance(spec, constants=None):
    """Convex chain with ``alpha = 1`` whose minimizer has norm at most ``D``."""
    _require_D(spec)
    L1, eps = spec.L1, spec.epsilon
    predicted = math.sqrt(L1 * spec.D) / 2.0 / math.sqrt(eps)
    T = _floor(predicted)
    if T < 1:
        raise PlanningError(
            f"target accuracy trivially achievable: eps={eps:g} gives T={T} < 1"
        )
    lam = L1 / 4.0
    sigma = T**1.5 * eps / lam
    return ScalingPlan("convex-distance", lam, sigma, 1.0, 1.0, 1.0, T, predicted, spec, constants)


def _p2_scalings(L_hat, eps):
    lam = L_hat[0]
    sigma = (4.0 * L_hat[0] ** -0.25 * L_hat[1] ** -0.75 * eps) ** (4 / 7)
    mu = L_hat[1] * sigma / lam
    return lam, sigma, mu, 1.0, 2


def _qstar(L_hat):
    vals = [(L_hat[q - 1] / L_hat[0]) ** (1 / (q - 1)) for q in range(2, len(L_hat) + 1)]
    best = min(vals)
    # ties go to the smaller order
    return next(q for q, v in zip(range(2, len(L_hat) + 1), vals) if v <= best * (1 + _FLOOR_TOL))


def _general_scalings(L_hat, eps):
    qs = _qstar(L_hat)
    ratio = L_hat[qs - 1] / L_hat[0]
    lam = L_hat[0]
    mubar = L_hat[0] * ratio ** (2 / (qs - 1))
    rbar = ratio ** (-1 / (qs - 1))
    sigma = (4.0 / L_hat[0] * ratio ** (-3 / (2 * (qs - 1))) * eps) ** 0.4
    mu = mubar * sigma**2 / lam
    r = rbar / sigma
    return lam, sigma, mu, r, qs


def _check_scalings(lam, sigma, mu, r, eps):
    if mu > 1 + _FLOOR_TOL:
        raise PlanningError(f"planned mu = {mu:.6g} > 1; the accuracy hypothesis fails")
    if r < 1 - _FLOOR_TOL:
        raise PlanningError(f"planned r = {r:.6g} < 1; the accuracy hypothesis fails")
    if lam * mu**0.75 * sigma < 4 * eps * (1 - _FLOOR_TOL):
        raise PlanningError("gradient floor lam mu^(3/4) sigma >= 4 eps fails")
    return min(mu, 1.0), max(r, 1.0)


def _nonconvex_T(budget, lam, sigma, mu):
    return _floor((budget - lam * math.sqrt(mu) * sigma**2 / 2) / (10 * lam * mu * sigma**2))


def _plan_nonconvex(spec, constants, family):
    _require_delta(spec)
    spec.check_nonconvex_hypothesis()
    if constants is None:
        constants = SmoothnessConstants.empirical(spec.p)
    L_hat = constants.L_hat(spec.lipschitz)
    scalings = _p2_scalings if family == "nonconvex-p2" else _general_scalings
    lam, sigma, mu, r, qs = scalings(L_hat, spec.epsilon)
    mu, r = _check_scalings(lam, sigma, mu, r, spec.epsilon)
    predicted = predicted_lower_bound(spec, family, constants)
    offset = lam * math.sqrt(mu) * sigma**2
    if offset > spec.delta:
        return plan_convex_value(
            spec, constants,
            notes=(f"fallback from {family}: lam sqrt(mu) sigma^2 = {offset:.4g} > delta",),
        )
    T = _nonconvex_T(spec.delta, lam, sigma, mu)
    if T < 1:
        return plan_convex_value(
            spec, constants, notes=(f"fallback from {family}: planned T = {T} < 1",)
        )
    return ScalingPlan(family, lam, sigma, mu, r, 1.0, T, predicted, spec, constants, qstar=qs)


def plan_nonconvex_p2(spec, constants=None):
    """Lipschitz gradient and Hessian: ``r = 1``, ``mu = L_hat_2 sigma / lam``."""
    if spec.p != 2:
        raise PlanningError(f"plan_nonconvex_p2 needs p = 2, got p = {spec.p}")
    return _plan_nonconvex(spec, constants, "nonconvex-p2")


def plan_nonconvex_general(spec, constants=None):
    """Lipschitz derivatives of every order up to ``p >= 2`` via the ``q*`` rescaling."""
    if spec.p < 2:
        spec.check_nonconvex_hypothesis()
    return _plan_nonconvex(spec, constants, "nonconvex-general")


def _lambda_tilde(spec, constants):
    D = spec.D
    return min(
        spec.lipschitz[q - 1] * D ** (q + 1) / (2.0 * constants.ell_tilde[q - 1])
        for q in range(1, spec.p + 1)
    )


def plan_distance_bounded(spec, constants=None):
    """Non-convex chain with halved constants minus a bump of depth ``lambda_tilde``.

    The planted minimum makes every global minimizer lie within ``D`` of the
    origin while remaining invisible to zero-respecting methods.
    """
    _require_D(spec)
    half = spec.halved()
    half.check_nonconvex_hypothesis()
    if constants is None:
        constants = SmoothnessConstants.empirical(spec.p)
    L_hat = constants.L_hat(half.lipschitz)
    scalings = _p2_scalings if spec.p == 2 else _general_scalings
    lam, sigma, mu, r, qs = scalings(L_hat, spec.epsilon)
    mu, r = _check_scalings(lam, sigma, mu, r, spec.epsilon)
    lt = _lambda_tilde(spec, constants)
    T = _nonconvex_T(lt, lam, sigma, mu)
    if T < 1:
        raise PlanningError(
            f"bump depth lambda_tilde = {lt:.4g} too shallow for eps={spec.epsilon:g} (T={T})"
        )
    predicted = predicted_lower_bound(spec, "distance-bounded", constants)
    plan = ScalingPlan(
        "distance-bounded", lam, sigma, mu, r, 1.0, T, predicted, spec, constants,
        qstar=qs, lambda_tilde=lt,
    )
    inst = plan.instance()
    if not inst.value(inst.bump_centre) < 0:
        raise PlanningError("planted minimum is not below zero")
    return plan


def default_family(spec):
    if spec.p == 1:
        return "convex-value" if spec.delta is not None else "convex-distance"
    if spec.D is not None:
        return "distance-bounded"
    return "nonconvex-p2" if spec.p == 2 else "nonconvex-general"


_PLANNERS = {
    "convex-value": plan_convex_value,
    "convex-distance": plan_convex_distance,
    "nonconvex-p2": plan_nonconvex_p2,
    "nonconvex-general": plan_nonconvex_general,
    "distance-bounded": plan_distance_bounded,
}


def plan_for_family(spec, family=None, constants=None):
    family = family or default_family(spec)
    if family not in _PLANNERS:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    return _PLANNERS[family](spec, constants)


def _nonconvex_bound(gap, L_hat, eps, p2):
    if p2:
        return gap * L_hat[0] ** (3 / 7) * L_hat[1] ** (2 / 7) / (_P2_CONST * eps ** (12 / 7))
    best = min(
        (L_hat[0]) ** (3 / 5 - 2 / (5 * (q - 1))) * L_hat[q - 1] ** (2 / (5 * (q - 1)))
        for q in range(2, len(L_hat) + 1)
    )
    return gap * best / (_GENERAL_CONST * eps ** (8 / 5))


def predicted_lower_bound(spec, family=None, constants=None):
    """Closed-form (un-floored) lower bound on the queries a zero-respecting method needs."""
    family = family or default_family(spec)
    eps = spec.epsilon
    if family == "convex-value":
        _require_delta(spec)
        return math.sqrt(spec.L1 * spec.delta) / (4.0 * eps)
    if family == "convex-distance":
        _require_D(spec)
        return math.sqrt(spec.L1 * spec.D) / 2.0 / math.sqrt(eps)
    if constants is None:
        constants = SmoothnessConstants.empirical(spec.p)
    if family in ("nonconvex-p2", "nonconvex-general"):
        _require_delta(spec)
        L_hat = constants.L_hat(spec.lipschitz)
        return _nonconvex_bound(spec.delta, L_hat, eps, family == "nonconvex-p2")
    if family == "distance-bounded":
        _require_D(spec)
        L_hat = constants.L_hat(spec.halved().lipschitz)
        return _nonconvex_bound(_lambda_tilde(spec, constants), L_hat, eps, spec.p == 2)
    raise ValueError(f"unknown family {family!r}")


def plan_summary(plan):
    """Short human-readable line for a plan."""
    parts = [f"{plan.family}: T={plan.T}", f"predicted_T={plan.predicted_T:.4g}"]
    parts += [f"lam={plan.lam:.4g}", f"sigma={plan.sigma:.4g}", f"mu={plan.mu:.4g}", f"r={plan.r:.4g}"]
    if plan.qstar is not None:
        parts.append(f"q*={plan.qstar}")
    return ", ".join(parts) + ("" if not plan.notes else f" [{'; '.join(plan.notes)}]")

