import math

import numpy as np
import pytest
from scipy.integrate import quad

from wedreg.diagnostics import (
    continuous_functional,
    convergence_study,
    distance,
    el_residual,
    energy_lhs,
    final_bc_residual,
    recovery_gap,
    recovery_trajectory,
)
from wedreg.errors import ConfigurationError, DomainError
from wedreg.functional import affine_free, embed, make_problem
from wedreg.solvers import minimize, solve_limit
from wedreg.spatial import initial_datum, interval_domain, no_potential, power, scalar_domain
from wedreg.temporal import TimeSamples, Trajectory, build_grid, discrete_derivative


def scalar_traj(values, T=3.0):
    values = np.asarray(values, dtype=float)
    return Trajectory(build_grid(T, len(values) - 1), values, scalar_domain())


def test_energy_of_zero_and_ramp():
    assert energy_lhs(scalar_traj(np.zeros(11)), power(4)).value == 0.0
    n, T = 30, 3.0
    tau = T / n
    rep = energy_lhs(scalar_traj(tau * np.arange(n + 1), T), no_potential())
    assert rep.velocity == pytest.approx(T - 3 * tau, rel=1e-12)
    assert rep.value == rep.velocity + rep.gradient + rep.potential
    assert rep.window == (pytest.approx(tau), pytest.approx(T - 2 * tau))
    with pytest.raises(ConfigurationError):
        energy_lhs(scalar_traj(np.zeros(5)), power(4))


def test_energy_potential_part_is_pth_power():
    n, T = 10, 1.0
    u = np.linspace(-1, 2, n + 1)
    rep = energy_lhs(scalar_traj(u, T), power(3))
    assert rep.potential == pytest.approx((T / n) * np.sum(np.abs(u[2 : n - 1]) ** 3), rel=1e-14)


def test_energy_invariant_under_sign_flip():
    dom = interval_domain(4.0, 31)
    u0 = initial_datum("bump 1.5", dom)
    u1 = 0.3 * initial_datum("bump 1", dom)
    reps = []
    for sign in (1.0, -1.0):
        prob = make_problem(dom, power(4), sign * u0, sign * u1, 2.0, 40, 0.2)
        reps.append(energy_lhs(minimize(prob).traj, prob.nl).value)
    assert abs(reps[0] - reps[1]) <= 1e-12 * reps[0]


def test_el_residual_examples():
    prob = make_problem(scalar_domain(), no_potential(), [1.0], [0.4], 3.0, 30, 0.2)
    assert el_residual(embed(affine_free(prob), prob), prob) <= 1e-10
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 40, 0.2)
    res = minimize(prob)
    assert res.converged and el_residual(res.traj, prob) <= 10 * 1e-10
    bumped = res.traj.states.copy()
    bumped[20] += 1e-3
    assert el_residual(Trajectory(prob.grid, bumped, prob.domain), prob) > 1e-4


def test_final_conditions_examples():
    n, T = 12, 3.0
    t = build_grid(T, n).times
    assert final_bc_residual(scalar_traj(2 + 0.5 * t, T)) == pytest.approx((0.0, 0.0), abs=1e-12)
    d2, d3 = final_bc_residual(scalar_traj(t**2, T))
    assert d2 == pytest.approx(2.0, rel=1e-10) and d3 == pytest.approx(0.0, abs=1e-9)


def test_distance_examples():
    traj = scalar_traj(np.ones(31))
    same = TimeSamples.from_trajectory(traj)
    assert distance(traj, same) == 0.0
    zero = TimeSamples(np.linspace(0, 3, 301), np.zeros(301))
    assert distance(traj, zero, "sup") == 1.0
    assert distance(traj, zero, "l2") == pytest.approx(math.sqrt(3.0), rel=1e-12)
    with pytest.raises(DomainError):
        distance(traj, TimeSamples(np.linspace(0, 2, 21), np.zeros(21)))
    with pytest.raises(ValueError):
        distance(traj, zero, "max")


def test_recovery_of_constant_and_affine():
    prob = make_problem(scalar_domain(), power(4), [2.0], [0.0], 1.0, 10, 0.2)
    rec = recovery_trajectory(lambda t: np.full((len(t), 1), 2.0), prob)
    np.testing.assert_allclose(rec.states, 2.0, rtol=1e-15)
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.5], 1.0, 10, 0.2)
    rec = recovery_trajectory(lambda t: (1.0 + 0.5 * t)[:, None], prob)
    tau = prob.tau
    i = np.arange(2, 11)
    np.testing.assert_allclose(rec.states[2:, 0], 1.0 + (i * tau - tau / 2) * 0.5, rtol=1e-14)
    assert rec.states[0, 0] == 1.0
    assert discrete_derivative(rec.states, tau)[0, 0] == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(ConfigurationError):
        recovery_trajectory(lambda t: (3.0 + t)[:, None], prob)


def test_continuous_functional_against_adaptive_quadrature():
    eps = 0.2
    value = continuous_functional(lambda t: np.cos(t)[:, None], lambda t: -np.cos(t)[:, None],
                                  eps, power(4), scalar_domain(), 3.0)
    oracle, _ = quad(lambda t: np.exp(-t / eps) * (0.5 * np.cos(t) ** 2 + 0.5 * np.cos(t) ** 4 / eps**2),
                     0.0, 3.0, epsabs=1e-13, epsrel=1e-13)
    assert value == pytest.approx(oracle, rel=1e-10)


def test_recovery_gap_shrinks_for_sampled_reference():
    t = np.linspace(0, 3, 3001)
    ref = TimeSamples(t, np.cos(t))
    gaps = []
    for n in (100, 200, 400):
        prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, n, 0.2)
        gaps.append(abs(recovery_gap(ref, prob)))
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.fixture(scope="module")
def fig1_reference():
    return solve_limit(scalar_domain(), power(4), [1.0], [0.0], 3.0, 1e-3)


def test_study_without_potential_has_zero_distance():
    prob = make_problem(scalar_domain(), no_potential(), [1.0], [0.5], 3.0, 60, 0.4)
    ref = solve_limit(scalar_domain(), no_potential(), [1.0], [0.5], 3.0, 1e-2)
    recs = convergence_study(prob, [0.4, 0.1], ref)
    for r in recs:
        assert r.dist_sup <= 1e-12 and r.dist_l2 <= 1e-12


def test_study_orders_and_reports(fig1_reference):
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 200, 0.4)
    recs = convergence_study(prob, [0.4, 0.2, 0.1, 0.05], fig1_reference)
    assert [r.eps for r in recs] == [0.4, 0.2, 0.1, 0.05]
    d = [r.dist_sup for r in recs]
    assert all(a > b for a, b in zip(d, d[1:]))
    for r in recs:
        assert r.ok
        fields = [r.dist_sup, r.dist_l2, r.energy_value, r.u1_gap, *r.bc_res]
        assert all(math.isfinite(v) and v >= 0 for v in fields)
        np.testing.assert_array_equal(r.traj.states[0], prob.u0)


def test_study_records_failures_without_aborting(fig1_reference):
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 600, 0.4)
    recs = convergence_study(prob, [0.2, 1e-4], fig1_reference)
    assert recs[0].ok and not recs[1].ok
    assert "underflow" in recs[1].status and math.isnan(recs[1].dist_sup)


def test_study_validates_eps_list():
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 50, 0.4)
    for bad in ([], [0.1, 0.2], [0.6, 0.1], [0.1, -0.1]):
        with pytest.raises(ConfigurationError):
            convergence_study(prob, bad)
    assert len(convergence_study(prob, [0.6], energy_checks=False)) == 1


def test_parallel_study_matches_serial(fig1_reference):
    prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 100, 0.4)
    serial = convergence_study(prob, [0.4, 0.2, 0.1], fig1_reference, jobs=1)
    parallel = convergence_study(prob, [0.4, 0.2, 0.1], fig1_reference, jobs=2)
    for a, b in zip(serial, parallel):
        assert a.eps == b.eps and a.dist_sup == b.dist_sup
        np.testing.assert_array_equal(a.traj.states, b.traj.states)
