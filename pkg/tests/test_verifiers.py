import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from hardchains.instances import ChainParams, ConvexChain, FunctionInstance, NonconvexChain
from hardchains.scaling import (
    ProblemClassSpec,
    plan_convex_distance,
    plan_convex_value,
    plan_distance_bounded,
    plan_nonconvex_general,
    plan_nonconvex_p2,
)
from hardchains.upsilon import upsilon_grad_sup
from hardchains.verifiers import (
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
)


def test_zero_chain_reports():
    assert check_zero_chain(ConvexChain(ChainParams(10))).passed
    assert check_zero_chain(NonconvexChain(ChainParams(10, mu=0.1))).passed
    bad = check_zero_chain(negative_control(6), trials=10)
    assert not bad.passed
    assert bad.metadata["first_failure"] == {"i": 1, "coordinate": 6}


def test_zero_chain_rejects_no_trials():
    with pytest.raises(ValueError):
        check_zero_chain(ConvexChain(ChainParams(3)), trials=0)


def test_convex_floor_examples():
    assert convex_min_grad_exact(2, 1.0) == pytest.approx(1 / math.sqrt(5), rel=1e-15)
    assert convex_min_grad_lstsq(2, 1.0) == pytest.approx(1 / math.sqrt(5), rel=1e-14)
    assert convex_min_grad_exact(1, 1.0) == 1.0
    assert convex_min_grad_lstsq(1, 1.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.floats(1e-3, 1.0))
def test_convex_floor_matches_dense_and_beats_power(T, alpha):
    exact = convex_min_grad_exact(T, alpha)
    assert exact > (T - 1 + 1 / alpha) ** -1.5
    assert convex_min_grad_lstsq(T, alpha) == pytest.approx(exact, rel=1e-10)


def test_convex_floor_validation():
    with pytest.raises(ValueError):
        convex_min_grad_exact(0, 1.0)
    with pytest.raises(ValueError):
        convex_min_grad_exact(3, 1.5)
    with pytest.raises(ValueError):
        convex_min_grad_lstsq(201, 1.0)


def test_disc_tight_structure():
    T, mu = 60, 0.01
    m = math.ceil(1 / (3 * math.sqrt(mu)))
    assert m == 4
    x, norm = disc_tight_point(T, mu)
    assert x.shape == (T + 1,)
    assert np.all((x >= 0) & (x <= 1))
    assert not x[2 * m + 1:].any()
    assert x[0] == 1.0
    assert norm < disc_tight_constant(1.0) * mu**0.75


def test_disc_tight_second_differences():
    x, _ = disc_tight_point(100, 0.01)
    m = 4
    c = 1 / (m * (m + 1))
    # x_n = 2 x_{n-1} - x_{n-2} - delta_{n-1} with x_0 = 1
    xs = np.concatenate([[1.0], x])
    second = xs[2:2 * m + 2] - 2 * xs[1:2 * m + 1] + xs[:2 * m]
    delta = np.array([c] * m + [0.0] + [-c] * m)
    assert np.allclose(second, -delta[: second.size], atol=1e-15)


def test_disc_tight_edge_case():
    x, norm = disc_tight_point(8, 0.05)
    assert not x.any()
    assert norm == pytest.approx(math.sqrt(0.05))
    assert norm <= 27 * 0.05**0.75


def test_disc_tight_hypothesis():
    with pytest.raises(ValueError):
        disc_tight_point(10, 1e-3)


def test_floor_search_example():
    rep = nonconvex_grad_floor_search(50, 0.04, 1.0, restarts=2)
    assert rep.passed
    assert rep.measured >= 0.04**0.75 / 4 - 1e-6
    assert rep.measured <= (27 + math.sqrt(3) * upsilon_grad_sup(1.0)) * 0.04**0.75
    assert rep.measured <= disc_tight_point(50, 0.04)[1]
    assert rep.metadata["best_transition_length"] is not None


def test_floor_search_origin_value_when_mu_one():
    rep = nonconvex_grad_floor_search(4, 1.0, 1.0, restarts=2)
    assert rep.measured <= 1.0
    assert rep.measured >= 0.25


def test_floor_search_against_generic_solver():
    # an independent Nelder-Mead pass from the same origin start cannot beat it
    T, mu = 6, 0.3
    f = NonconvexChain(ChainParams(T, mu=mu))

    def sq(z):
        x = np.concatenate([z, [0.0, 0.0]])
        g = f.grad(x)
        return g @ g

    res = minimize(sq, np.zeros(T - 1), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 40000})
    rep = nonconvex_grad_floor_search(T, mu, 1.0)
    assert rep.measured <= math.sqrt(res.fun) * (1 + 1e-6)


def test_lipschitz_estimates():
    quad = FunctionInstance(7, lambda x: (0.5 * float(x @ x), x.copy()))
    assert lipschitz_estimate(quad, 1, samples=50) == pytest.approx(1.0, abs=1e-9)
    assert lipschitz_estimate(ConvexChain(ChainParams(20)), 1, samples=200) <= 4.0
    assert lipschitz_estimate(quad, 2, samples=20) <= 1e-6
    with pytest.raises(ValueError):
        lipschitz_estimate(quad, 3)
    with pytest.raises(ValueError):
        lipschitz_estimate(quad, 1, samples=1)


@pytest.mark.parametrize("plan", [
    plan_convex_value(ProblemClassSpec(1, [4.0], 0.02, delta=1.0)),
    plan_convex_distance(ProblemClassSpec(1, [4.0], 0.02, D=1.0)),
    plan_nonconvex_p2(ProblemClassSpec(2, [1e3, 1e7], 1e-3, delta=1.0)),
    plan_nonconvex_general(ProblemClassSpec(3, [1e3, 1e6, 1e9], 1e-3, delta=1.0)),
    plan_distance_bounded(ProblemClassSpec(2, [1e4, 1e6], 0.05, D=1.0)),
], ids=lambda p: p.family)
def test_membership(plan):
    reports = check_membership(plan, samples=60)
    assert all(r.passed for r in reports), [r.to_dict() for r in reports]


def test_geometric_chain_constants():
    f = geometric_resistance_chain(4.0, 1.0, 0.25, 30)
    assert f.value(np.zeros(30)) == pytest.approx(1.0)
    assert lipschitz_estimate(f, 1, samples=200) <= 4.0


def test_suboptimality_resistance():
    rep = suboptimality_resistance_demo(4.0, 1.0, 0.25, 30)
    assert rep.passed and rep.measured > 0.25


def test_near_optimal_points_track_minimizer():
    # spot-check at T = 3: points with f <= eps stay near s beta^-i
    eps, delta = 0.25, 1.0
    f = geometric_resistance_chain(4.0, delta, eps, 3)
    p = f.params
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(4000):
        x = f.minimizer + rng.normal(scale=0.5, size=3)
        if f.value(x) <= eps:
            hits += 1
            i = np.arange(1, 4)
            bound = p.beta ** (-i) / (1 - p.beta) * math.sqrt(eps / p.lam)
            assert np.all(np.abs(x - p.s * p.beta ** (-i)) < bound)
    assert hits > 0
