"""Experiment orchestration: plans, optimizer runs, verification suites, sweeps.

Everything here is also reachable from ``python3 -m hardchains``; see
:func:`main` for the command line.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .instances import (
    ChainParams,
    ConvexChain,
    DistanceBoundedInstance,
    NonconvexChain,
    ScaledInstance,
)
from .optimizers import (
    BudgetExhausted,
    GradientDescent,
    default_budget,
    prox_agd,
    run_until_stationary,
)
from .scaling import (
    FAMILIES,
    PlanningError,
    ProblemClassSpec,
    SmoothnessConstants,
    plan_for_family,
    predicted_lower_bound,
)
from .verifiers import (
    check_membership,
    check_zero_chain,
    convex_min_grad_exact,
    convex_min_grad_lstsq,
    disc_tight_constant,
    disc_tight_point,
    geometric_resistance_chain,
    lipschitz_estimate,
    negative_control,
    nonconvex_grad_floor_search,
    suboptimality_resistance_demo,
    VerificationReport,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SlopeFit",
    "fit_slope",
    "build_spec",
    "build_plan",
    "run_plan",
    "sweep_row",
    "complexity_sweep",
    "verification_suite",
    "run_lemma",
    "LEMMAS",
    "main",
]

ALGORITHMS = ("gd", "prox-agd")
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str = "convex-value"
    epsilon_grid: tuple = (0.04, 0.02, 0.01, 0.005)
    p: int = 1
    lipschitz: tuple = (4.0,)
    delta: float = 1.0
    D: float = None
    algorithm: str = "gd"
    budget: int = None
    out: str = "."
    seed: int = 0
    workers: int = 1
    # parameters of the unscaled chain used by `verify` and `lemma`
    T: int = 50
    mu: float = 0.04
    r: float = 1.0

    def __post_init__(self):
        self.epsilon_grid = tuple(float(e) for e in self.epsilon_grid)
        self.lipschitz = tuple(float(v) for v in self.lipschitz)
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        grid = self.epsilon_grid
        if not grid or any(not e > 0 for e in grid):
            raise ConfigError("epsilon_grid must be non-empty and positive")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("epsilon_grid must be strictly decreasing")
        if self.family in ("convex-distance", "distance-bounded"):
            self.delta = None if self.D is not None else self.delta
            if self.D is None:
                raise ConfigError(f"family {self.family} needs D")
        elif self.delta is None:
            raise ConfigError(f"family {self.family} needs delta")
        else:
            self.D = None
        if len(self.lipschitz) != self.p:
            raise ConfigError(f"need {self.p} Lipschitz constants, got {len(self.lipschitz)}")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        d = asdict(self)
        d["epsilon_grid"] = list(self.epsilon_grid)
        d["lipschitz"] = list(self.lipschitz)
        return d


@dataclass
class SlopeFit:
    """Least-squares line through ``(log(1/eps), log T)``."""

    slope: float
    intercept: float
    r_squared: float
    points: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def fit_slope(eps, counts):
    eps = np.asarray(eps, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if eps.size < 3:
        raise ValueError("a slope fit needs at least 3 points")
    xs = np.log(1.0 / eps)
    ys = np.log(counts)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    total = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / total if total > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2, [[float(a), float(b)] for a, b in zip(xs, ys)])


def build_spec(config, eps):
    return ProblemClassSpec(config.p, config.lipschitz, eps, config.delta, config.D)


def _constants(config):
    if config.family in ("convex-value", "convex-distance"):
        return None
    return SmoothnessConstants.empirical(config.p)


def build_plan(config, eps, constants=None):
    spec = build_spec(config, eps)
    if constants is None:
        constants = _constants(config)
    return plan_for_family(spec, config.family, constants)


def run_plan(plan, algorithm="gd", budget=None, record_queries=False):
    """Run a zero-respecting method from 0 on the planned instance.

    Returns the trace; a prox-AGD run that exhausts its budget returns the
    partial trace (``T_eps`` is None) instead of raising.
    """
    f = plan.instance()
    spec = plan.spec
    eps = spec.epsilon
    budget = budget or default_budget(max(plan.T, plan.predicted_T))
    if algorithm == "gd":
        return run_until_stationary(GradientDescent(1.0 / spec.L1), f, eps, budget,
                                    record_queries=record_queries)
    if algorithm == "prox-agd":
        if plan.family not in ("convex-value",):
            raise ConfigError("prox-agd needs a convex value-gap instance")
        try:
            return prox_agd(f, spec.delta, spec.L1, eps, budget, record_queries=record_queries)
        except BudgetExhausted as exc:
            return exc.trace
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def sweep_row(config, eps, constants=None):
    """One sweep row; the predicted count is the closed form of the configured family."""
    plan = build_plan(config, eps, constants)
    predicted = predicted_lower_bound(plan.spec, config.family, plan.constants or constants)
    trace = run_plan(plan, config.algorithm, config.budget)
    measured = trace.T_eps
    exhausted = measured is None
    # an exhausted run still certifies T_eps > budget >= T
    floor = max(plan.T, predicted)
    return {
        "eps": eps,
        "family": config.family,
        "instance_family": plan.family,
        "fallback": plan.fallback,
        "T_plan": plan.T,
        "T_predicted": predicted,
        "T_measured": measured,
        "budget": trace.n_queries if exhausted else None,
        "exhausted": exhausted,
        "dominates": (measured > floor) if not exhausted else trace.n_queries > floor,
        "zero_respecting": trace.zero_respecting,
    }


def _row_job(args):
    config, eps, constants = args
    return sweep_row(config, eps, constants)


def complexity_sweep(config):
    """Plan and run every grid point; rows come back ordered as the grid (largest eps first)."""
    constants = _constants(config)
    jobs = [(config, eps, constants) for eps in config.epsilon_grid]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_row_job, jobs))
    else:
        rows = [_row_job(j) for j in jobs]
    eps = [r["eps"] for r in rows]
    fits = {"predicted": fit_slope(eps, [r["T_predicted"] for r in rows]).to_dict()}
    done = [r for r in rows if not r["exhausted"]]
    if len(done) >= 3:
        fits["measured"] = fit_slope([r["eps"] for r in done], [r["T_measured"] for r in done]).to_dict()
    return rows, fits


SWEEP_COLUMNS = ("eps", "T_predicted", "T_measured", "T_plan", "instance_family", "fallback",
                 "exhausted", "dominates", "zero_respecting")


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in SWEEP_COLUMNS])


def _chain_instances(T, mu, r):
    convex = ConvexChain(ChainParams(T, alpha=1.0 / T))
    nonconvex = NonconvexChain(ChainParams(T, mu=mu, r=r))
    scaled = ScaledInstance(nonconvex, 2.0, 0.5)
    bumped = DistanceBoundedInstance(ScaledInstance(nonconvex, 1.0, 0.1), 1.0, 1.0)
    geometric = geometric_resistance_chain(4.0, 1.0, 0.25, T)
    return {"convex-chain": convex, "nonconvex-chain": nonconvex, "scaled": scaled,
            "distance-bounded": bumped, "geometric-chain": geometric}


def verification_suite(config):
    """All verifier checks for the configured chain parameters.

    Returns ``(reports, controls)``; controls are designed to fail and are
    reported separately.
    """
    T, mu, r, seed = config.T, config.mu, config.r, config.seed
    reports = []
    for f in _chain_instances(T, mu, r).values():
        reports.append(check_zero_chain(f, trials=100, seed=seed))
    for alpha in (1.0, 1.0 / T):
        exact = convex_min_grad_exact(T, alpha)
        bound = (T - 1 + 1 / alpha) ** -1.5
        reports.append(VerificationReport(
            "convex-floor", bound, exact, 0.0, exact > bound, {"T": T, "alpha": alpha},
        ))
        if T <= 200:
            dense = convex_min_grad_lstsq(T, alpha)
            rel = abs(exact - dense) / exact
            reports.append(VerificationReport(
                "convex-floor-dense", 1e-10, rel, 1e-10, rel <= 1e-10, {"T": T, "alpha": alpha},
            ))
    floor = nonconvex_grad_floor_search(T, mu, r, seed=seed)
    reports.append(floor)
    if T**-2 <= mu:
        _, norm = disc_tight_point(T, mu, r)
        upper = disc_tight_constant(r) * mu**0.75
        reports.append(VerificationReport(
            "explicit-point", upper, norm, 0.0, floor.measured <= norm < upper,
            {"T": T, "mu": mu, "r": r, "lower": floor.measured},
        ))
    est = lipschitz_estimate(ConvexChain(ChainParams(T)), 1, 200, 1.0, seed=seed)
    reports.append(VerificationReport("convex-lipschitz", 4.0, est, 1e-9, est <= 4.0 * (1 + 1e-9), {}))
    reports.append(suboptimality_resistance_demo(4.0, 1.0, 0.25, 30))
    spec_plan = build_plan(config, config.epsilon_grid[0])
    reports.extend(check_membership(spec_plan, samples=100, seed=seed))
    controls = [check_zero_chain(negative_control(T), trials=20, seed=seed)]
    return reports, controls


def _lemma_zero_chain(config):
    return [check_zero_chain(f, seed=config.seed) for f in _chain_instances(config.T, config.mu, config.r).values()]


def _lemma_convex_floor(config):
    T = config.T
    out = []
    for alpha in (1.0, 1.0 / T):
        exact = convex_min_grad_exact(T, alpha)
        out.append(VerificationReport("convex-floor", (T - 1 + 1 / alpha) ** -1.5, exact, 0.0,
                                      exact > (T - 1 + 1 / alpha) ** -1.5, {"T": T, "alpha": alpha}))
    return out


def _lemma_disc_tight(config):
    _, norm = disc_tight_point(config.T, config.mu, config.r)
    upper = disc_tight_constant(config.r) * config.mu**0.75
    lower = config.mu**0.75 / 4
    return [VerificationReport("explicit-point", upper, norm, 0.0, lower <= norm < upper,
                               {"T": config.T, "mu": config.mu, "r": config.r})]


LEMMAS = {
    "zero-chain": _lemma_zero_chain,
    "convex-floor": _lemma_convex_floor,
    "gradient-floor": lambda c: [nonconvex_grad_floor_search(c.T, c.mu, c.r, seed=c.seed)],
    "explicit-point": _lemma_disc_tight,
    "resistance": lambda c: [suboptimality_resistance_demo(c.lipschitz[0], c.delta or 1.0, 0.25, 30)],
    "membership": lambda c: check_membership(build_plan(c, c.epsilon_grid[0]), seed=c.seed),
}


def run_lemma(name, config):
    if name not in LEMMAS:
        raise ConfigError(f"unknown lemma {name!r}; choose from {', '.join(LEMMAS)}")
    return LEMMAS[name](config)


# ---------------------------------------------------------------- command line


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_grid(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --eps-grid {text!r}") from exc


def _load_config(args):
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {
        "family": args.family,
        "epsilon_grid": _parse_grid(args.eps_grid) if args.eps_grid else None,
        "out": args.out,
        "seed": args.seed,
        "workers": args.workers,
        "algorithm": args.algorithm,
        "budget": args.budget,
        "T": args.T,
        "mu": args.mu,
        "r": args.r,
    }
    if args.lipschitz:
        lips = _parse_grid(args.lipschitz)
        overrides["lipschitz"] = lips
        overrides["p"] = len(lips)
    if args.delta is not None:
        overrides["delta"], overrides["D"] = args.delta, None
    if args.D is not None:
        overrides["D"], overrides["delta"] = args.D, None
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _table(reports):
    return "\n".join(r.line() for r in reports)


def _cmd_make_instance(config, args):
    plan = build_plan(config, config.epsilon_grid[0])
    path = os.path.join(config.out, "plan.json")
    _write_json(plan.to_dict(), path)
    print(f"wrote {path}: {plan.family} T={plan.T}")
    return EXIT_OK


def _cmd_run(config, args):
    plan = build_plan(config, config.epsilon_grid[0])
    trace = run_plan(plan, config.algorithm, config.budget)
    trace.to_csv(os.path.join(config.out, "trace.csv"))
    summary = trace.summary() | {"T_plan": plan.T, "family": plan.family}
    _write_json(summary, os.path.join(config.out, "run.json"))
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_verify(config, args):
    reports, controls = verification_suite(config)
    _write_json({"reports": [r.to_dict() for r in reports],
                 "controls": [c.to_dict() for c in controls]},
                os.path.join(config.out, "report.json"))
    print(_table(reports))
    print("negative control (expected to fail):")
    print(_table(controls))
    ok = all(r.passed for r in reports) and not any(c.passed for c in controls)
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_sweep(config, args):
    if len(config.epsilon_grid) < 4:
        raise ConfigError("a sweep needs at least 4 epsilon values")
    rows, fits = complexity_sweep(config)
    write_sweep_csv(rows, os.path.join(config.out, "sweep.csv"))
    _write_json({"config": config.to_dict(), "rows": rows, "fits": fits},
                os.path.join(config.out, "report.json"))
    for row in rows:
        print(f"eps={row['eps']:<10g} T_predicted={row['T_predicted']:<12.5g} "
              f"T_plan={row['T_plan']:<8d} T_measured={row['T_measured']}")
    print(f"predicted slope {fits['predicted']['slope']:.4f}")
    if "measured" in fits:
        print(f"measured slope {fits['measured']['slope']:.4f}")
    return EXIT_OK if all(r["dominates"] for r in rows) else EXIT_FAILED


def _cmd_lemma(config, args):
    reports = run_lemma(args.name, config)
    _write_json({"reports": [r.to_dict() for r in reports]}, os.path.join(config.out, "report.json"))
    print(_table(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; flags override its fields")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--family", help=", ".join(FAMILIES))
    common.add_argument("--eps-grid", help="comma-separated, strictly decreasing")
    common.add_argument("--algorithm", help=", ".join(ALGORITHMS))
    common.add_argument("--budget", type=int)
    common.add_argument("--lipschitz", help="comma-separated L_1,...,L_p")
    common.add_argument("--delta", type=float)
    common.add_argument("--D", type=float)
    common.add_argument("--T", type=int)
    common.add_argument("--mu", type=float)
    common.add_argument("--r", type=float)
    parser = argparse.ArgumentParser(prog="hardchains", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("make-instance", parents=[common], help="write plan.json")
    sub.add_parser("run", parents=[common], help="single optimizer run, writes trace.csv")
    sub.add_parser("verify", parents=[common], help="verification suite, writes report.json")
    sub.add_parser("sweep", parents=[common], help="complexity sweep, writes sweep.csv")
    lemma = sub.add_parser("lemma", parents=[common], help="one verifier, writes report.json")
    lemma.add_argument("name", choices=sorted(LEMMAS))
    return parser


_COMMANDS = {
    "make-instance": _cmd_make_instance,
    "run": _cmd_run,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "lemma": _cmd_lemma,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args)
        os.makedirs(config.out, exist_ok=True)
        return _COMMANDS[args.command](config, args)
    except (ConfigError, PlanningError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
