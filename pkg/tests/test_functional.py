from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_functional

from wedreg.errors import DimensionError
from wedreg.functional import (
    affine_free,
    embed,
    eval_functional,
    free_inner,
    gradient,
    hessian_apply,
    hessian_matrix,
    inject_fault,
    make_problem,
)
from wedreg.spatial import interval_domain, klein_gordon, no_potential, power, scalar_domain
from wedreg.validate import gradient_fd_error, hessian_checks, random_free


def scalar_problem(n=12, eps=0.3, u0=1.0, u1=0.0, nl=None, T=1.0):
    return make_problem(scalar_domain(), nl or power(4), [u0], [u1], T, n, eps)


def test_embed_examples():
    prob = scalar_problem(n=4, u0=0.0)
    np.testing.assert_array_equal(embed(np.zeros(3), prob).states, np.zeros((5, 1)))
    prob = scalar_problem(n=4)
    assert embed(np.zeros(3), prob).states[1, 0] == 1.0
    prob = scalar_problem(n=4, u1=2.0)
    states = embed(np.zeros(3), prob).states
    assert states[1, 0] == 1.5
    assert (states[1, 0] - states[0, 0]) / prob.tau == 2.0
    with pytest.raises(DimensionError):
        embed(np.zeros(4), prob)


def test_functional_vanishes_on_affine_without_potential():
    prob = scalar_problem(nl=no_potential(), u1=0.7)
    traj = embed(affine_free(prob), prob)
    assert eval_functional(traj, prob) == pytest.approx(0.0, abs=1e-20)
    assert np.max(np.abs(gradient(traj, prob))) <= 1e-9


def test_functional_single_second_difference():
    prob = scalar_problem(n=6, u0=0.0, nl=no_potential())
    tau = prob.tau
    states = np.zeros(7)
    states[3:] = tau**2 * np.arange(1, 5)  # delta^2 u_3 = 1, every other second difference 0
    value = eval_functional(embed(states[2:], prob), prob)
    assert value == pytest.approx(0.5 * tau * prob.rho[3], rel=1e-12)


def test_functional_matches_exact_summation():
    prob = scalar_problem(n=6, eps=0.5)
    ones = eval_functional(embed(np.ones(5), prob), prob)
    assert ones == pytest.approx(float(brute_functional([1] * 7, 1, Fraction(1, 2), 4)), rel=1e-14)
    # frozen exact value for (u_0..u_6) = (1, 1, 1, 2, 0, -1, 3)
    free = np.array([1.0, 2.0, 0.0, -1.0, 3.0])
    assert eval_functional(embed(free, prob), prob) == pytest.approx(881307 / 1024, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), eps=st.sampled_from([0.05, 0.2, 0.7]))
def test_functional_matches_brute_force_on_random_integers(seed, eps):
    rng = np.random.default_rng(seed)
    free = rng.integers(-3, 4, size=7).astype(float)
    prob = make_problem(scalar_domain(), power(4), [1.0], [2.0], 2.0, 8, eps)
    states = embed(free, prob).states[:, 0]
    exact = brute_functional([Fraction(1), Fraction(3, 2)] + [Fraction(int(s)) for s in states[2:]],
                             2, Fraction(eps), 4)
    assert eval_functional(embed(free, prob), prob) == pytest.approx(float(exact), rel=1e-12)


@pytest.mark.parametrize("case", ["scalar", "interval", "klein-gordon"])
def test_gradient_against_central_differences(case):
    if case == "scalar":
        prob = scalar_problem(n=20, eps=0.1)
    else:
        nl = power(4) if case == "interval" else klein_gordon(3.0, 1.5)
        dom = interval_domain(2.0, 7)
        prob = make_problem(dom, nl, np.linspace(0.2, 1, 7), np.zeros(7), 1.0, 16, 0.2)
    assert gradient_fd_error(prob, probes=5) <= 1e-6


def test_injected_fault_breaks_gradient():
    prob = scalar_problem(n=20)
    with inject_fault("grad-sign"):
        assert gradient_fd_error(prob) > 100 * 1e-6
    assert gradient_fd_error(prob) <= 1e-6
    with pytest.raises(ValueError):
        with inject_fault("nonsense"):
            pass


def test_hessian_symmetric_and_nonnegative():
    for prob in (scalar_problem(n=20), make_problem(interval_domain(1.0, 5), power(3), np.ones(5),
                                                    np.zeros(5), 1.0, 10, 0.3)):
        asym, curv = hessian_checks(prob)
        assert asym <= 1e-12
        assert curv >= 0
        rng = np.random.default_rng(0)
        assert not np.any(hessian_apply(embed(random_free(prob, rng), prob), np.zeros(prob.free_shape), prob))


def test_hessian_matrix_matches_apply():
    dom = interval_domain(1.0, 4)
    prob = make_problem(dom, power(4), np.ones(4), np.zeros(4), 1.0, 9, 0.2)
    rng = np.random.default_rng(5)
    traj = embed(random_free(prob, rng), prob)
    v = rng.standard_normal(prob.free_shape)
    dense = hessian_matrix(traj, prob) @ v.ravel()
    np.testing.assert_allclose(dense, prob.tau * dom.h * hessian_apply(traj, v, prob).ravel(), rtol=1e-11)


def test_gradient_is_directional_derivative_of_hessian():
    prob = scalar_problem(n=15, eps=0.2)
    rng = np.random.default_rng(9)
    z = random_free(prob, rng)
    d = rng.standard_normal(prob.free_shape)
    s = 1e-6
    fd = (gradient(embed(z + s * d, prob), prob) - gradient(embed(z - s * d, prob), prob)) / (2 * s)
    hv = hessian_apply(embed(z, prob), d, prob)
    assert np.linalg.norm(fd - hv) <= 1e-6 * np.linalg.norm(hv)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.sampled_from([0.25, 0.5, 0.75]))
def test_functional_convex_along_constraint_set(seed, lam):
    prob = scalar_problem(n=10, eps=0.2)
    rng = np.random.default_rng(seed)
    a, b = random_free(prob, rng, 2.0), random_free(prob, rng, 2.0)
    ia, ib = eval_functional(embed(a, prob), prob), eval_functional(embed(b, prob), prob)
    mid = eval_functional(embed(lam * a + (1 - lam) * b, prob), prob)
    assert mid <= lam * ia + (1 - lam) * ib + 1e-10 * (1 + ia + ib)


def test_gradient_norm_uses_time_weighted_product():
    prob = scalar_problem(n=10)
    g = np.ones(prob.free_shape)
    assert free_inner(g, g, prob) == pytest.approx(prob.tau * 9)
