import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, trapezoid

from epiact import (
    ActuarialParams,
    CompartmentState,
    DomainError,
    GridSpec,
    ParameterError,
    Trajectory,
    benefit_and_premium_apv,
    discounted_annuity,
    infinite_annuity,
    integrate_nsfd,
    integrate_reference,
    net_level_premium,
    optimal_premium,
    perpetuity_identity_residual,
    reserve_series,
)

DELTA = 1e-4


def constant_traj(state, t_end=10.0, k=0.5):
    times = GridSpec(0.0, t_end, k).times()
    return Trajectory(times, np.tile(np.asarray(state, dtype=float), (times.size, 1)))


@pytest.fixture(scope="module")
def policy():
    return ActuarialParams(discount=DELTA, horizon=200.0)


def test_constant_weight_closed_form():
    t = np.linspace(0, 10, 101)
    got = discounted_annuity(np.ones_like(t), t, 0.05)
    exact = (1 - math.exp(-0.5)) / 0.05
    assert exact == pytest.approx(7.869387, abs=1e-6)
    # trapezoid error bound: T * k^2 * max|f''| / 12
    assert abs(got - exact) <= 10 * 0.1 ** 2 * 0.05 ** 2 / 12 * 1.0001


def test_constant_weight_error_is_second_order():
    exact = (1 - math.exp(-0.5)) / 0.05
    errs = [abs(discounted_annuity(np.ones(n + 1), np.linspace(0, 10, n + 1), 0.05) - exact)
            for n in (10, 20, 40)]
    assert 3.9 < errs[0] / errs[1] < 4.1 and 3.9 < errs[1] / errs[2] < 4.1


def test_zero_weights_and_zero_discount():
    t = np.linspace(0, 5, 11)
    assert discounted_annuity(np.zeros_like(t), t, 0.05) == 0.0
    assert discounted_annuity(np.ones_like(t), t, 0.0) == pytest.approx(5.0, rel=1e-15)


def test_upto_between_nodes():
    t = np.linspace(0, 10, 11)
    assert discounted_annuity(np.ones_like(t), t, 0.0, upto=3.5) == pytest.approx(3.5, rel=1e-15)
    # linear weight is integrated exactly without discounting
    assert discounted_annuity(t, t, 0.0, upto=3.5) == pytest.approx(3.5 ** 2 / 2, rel=1e-15)
    assert discounted_annuity(t, t, 0.0, upto=0.0) == 0.0


def test_upto_beyond_grid_rejected():
    t = np.linspace(0, 10, 11)
    with pytest.raises(ValueError, match="outside the grid"):
        discounted_annuity(np.ones_like(t), t, 0.05, upto=10.5)
    with pytest.raises(ParameterError):
        discounted_annuity(np.ones_like(t), t, -0.01)


def test_annuity_matches_adaptive_quadrature(rates, x0):
    # independent oracle: dense output of an adaptive solver under scipy quad
    from scipy.integrate import solve_ivp
    from epiact import eval_rhs_normalized

    def rhs(_, y):
        return eval_rhs_normalized(CompartmentState.renormalized(*np.clip(y, 0, None)), rates).as_array()

    sol = solve_ivp(rhs, (0, 200), x0.as_array(), method="DOP853", rtol=1e-12, atol=1e-15,
                    dense_output=True)
    oracle, _ = quad(lambda t: math.exp(-DELTA * t) * (sol.sol(t)[0] + sol.sol(t)[1]), 0, 200,
                     limit=400, epsabs=1e-13, epsrel=1e-13)
    traj = integrate_reference(x0, rates, GridSpec(0, 200, 0.1))
    got = discounted_annuity(traj.s + traj.e, traj.times, DELTA)
    assert got == pytest.approx(oracle, rel=1e-6)


def test_infinite_annuity_reports_tail():
    t = np.linspace(0, 400, 4001)
    value, tail = infinite_annuity(np.ones_like(t), t, 0.05)
    assert tail == pytest.approx(math.exp(-20) / 0.05)
    assert value + tail == pytest.approx(20.0, rel=1e-5)
    with pytest.raises(ParameterError):
        infinite_annuity(np.ones_like(t), t, 0.0)


def test_net_level_premium_trivial_cases():
    assert net_level_premium(constant_traj([0.25, 0.25, 0.25, 0.25, 0, 0]), 0.01) == pytest.approx(1.0)
    assert net_level_premium(constant_traj([0.7, 0.3, 0, 0, 0, 0]), 0.01) == 0.0
    with pytest.raises(DomainError, match="no premium base"):
        net_level_premium(constant_traj([0, 0, 0.5, 0.5, 0, 0]), 0.01)


def test_net_level_premium_positive_and_stable(rates, x0):
    values = [net_level_premium(integrate_reference(x0, rates, GridSpec(0, 200, k)), DELTA)
              for k in (0.1, 0.05)]
    assert values[0] > 0
    assert values[0] == pytest.approx(values[1], rel=1e-6)


def test_net_level_premium_partial_horizon(nsfd_run):
    assert 0 < net_level_premium(nsfd_run, DELTA, upto=100.0) < net_level_premium(nsfd_run, DELTA)


def test_perpetuity_disease_free_closed_form(rates):
    traj = constant_traj([1, 0, 0, 0, 0, 0], t_end=400.0, k=0.01)
    params = rates.replace(gamma_a=0.2, delta_a=0.007)
    got = perpetuity_identity_residual(traj, params, 0.05)
    # trapezoid overshoot on exp(-delta t) is about delta * k^2 / 12
    assert got == pytest.approx(-math.exp(-20) / 0.05, abs=0.05 * 0.01 ** 2 / 12 * 1.01)


def test_perpetuity_identity_on_equalized_rates(rates, x0):
    params = rates.replace(gamma_a=0.2, delta_a=0.007)
    traj = integrate_nsfd(x0, params, GridSpec(0, 400, 0.1))
    residual = perpetuity_identity_residual(traj, params, 0.05, truncation=400.0)
    assert abs(residual) <= math.exp(-20) / 0.05 + 1e-4


def test_perpetuity_preconditions(rates, nsfd_run):
    with pytest.raises(ParameterError, match="identity requires equal class rates"):
        perpetuity_identity_residual(nsfd_run, rates, 0.05)
    with pytest.raises(ParameterError):
        perpetuity_identity_residual(nsfd_run, rates.replace(gamma_a=0.2, delta_a=0.007), 0.0)


def test_terminal_reserve_is_zero(rates, nsfd_run, policy):
    for premium in (0.0, 0.01, 1.0):
        assert reserve_series(nsfd_run, rates, policy.with_premium(premium)).reserve[-1] == 0.0


def test_no_cash_flows_no_reserve(rates, nsfd_run):
    act = ActuarialParams(DELTA, 200.0, premium=0.0, b_i=0, b_a=0, l_d=0)
    assert np.all(reserve_series(nsfd_run, rates, act).reserve == 0.0)


def test_reserve_requires_premium_and_matching_horizon(rates, nsfd_run, policy):
    with pytest.raises(ParameterError):
        reserve_series(nsfd_run, rates, policy)
    with pytest.raises(ValueError, match="horizon"):
        reserve_series(nsfd_run, rates, ActuarialParams(DELTA, 150.0, premium=0.01))


def test_reserve_split_consistency(rates, nsfd_run):
    act = ActuarialParams(DELTA, 200.0, premium=0.02, l_d=5.0)
    series = reserve_series(nsfd_run, rates, act)
    rebuilt = series.benefit_apv - act.premium * series.premium_base_apv
    scale = np.max(np.abs(series.reserve))
    np.testing.assert_allclose(series.reserve, rebuilt, rtol=0, atol=1e-13 * scale)


def test_recurrence_matches_direct_integrals(rates, nsfd_run):
    # O(N^2) oracle: trapezoid of the discounted remaining flow from every node
    act = ActuarialParams(DELTA, 200.0, premium=0.02, b_i=1.5, b_a=0.5, l_d=3.0)
    series = reserve_series(nsfd_run, rates, act)
    i, a, t = nsfd_run.i, nsfd_run.a, nsfd_run.times
    g = (1.5 * i + 0.5 * a + 3.0 * (rates.delta_i * i + rates.delta_a * a)
         - 0.02 * (nsfd_run.s + nsfd_run.e + nsfd_run.r))
    direct = np.array([trapezoid(np.exp(-DELTA * (t[n:] - t[n])) * g[n:], t[n:]) if n < t.size - 1 else 0.0
                       for n in range(t.size)])
    np.testing.assert_allclose(series.reserve, direct, rtol=1e-12, atol=1e-14)


def test_death_benefit_raises_benefit_apv(rates, nsfd_run):
    plain, _ = benefit_and_premium_apv(nsfd_run, rates, ActuarialParams(DELTA, 200.0))
    loaded, _ = benefit_and_premium_apv(nsfd_run, rates, ActuarialParams(DELTA, 200.0, l_d=10.0))
    assert np.all(loaded[:-1] > plain[:-1])


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.2), st.floats(0.0, 0.2))
def test_reserve_monotone_in_premium(rates, nsfd_run, p1, p2):
    lo, hi = sorted((p1, p2))
    v_lo = reserve_series(nsfd_run, rates, ActuarialParams(DELTA, 200.0, premium=lo)).reserve
    v_hi = reserve_series(nsfd_run, rates, ActuarialParams(DELTA, 200.0, premium=hi)).reserve
    assert np.all(v_lo >= v_hi)
    if hi - lo > 1e-9:
        assert np.all(v_lo[:-1] > v_hi[:-1])


def test_free_coverage_has_zero_bound(rates, nsfd_run):
    assert optimal_premium(nsfd_run, rates, ActuarialParams(DELTA, 200.0, b_i=0, b_a=0)) == 0.0


def test_constant_trajectory_bound(rates):
    traj = constant_traj([0.3, 0.1, 0.15, 0.05, 0.4, 0.0], t_end=10.0)
    got = optimal_premium(traj, rates, ActuarialParams(0.01, 10.0))
    assert got == pytest.approx(0.2 / 0.8, rel=1e-12)
    b, p = benefit_and_premium_apv(traj, rates, ActuarialParams(0.01, 10.0))
    np.testing.assert_allclose(b[:-1] / p[:-1], 0.25, rtol=1e-12)


def test_bound_needs_premium_base(rates):
    traj = constant_traj([0, 0, 0.5, 0.5, 0, 0], t_end=10.0)
    with pytest.raises(DomainError, match="premium base identically zero"):
        optimal_premium(traj, rates, ActuarialParams(0.01, 10.0))


def test_bound_feasibility(rates, nsfd_run, policy):
    pstar = optimal_premium(nsfd_run, rates, policy)
    reserve = reserve_series(nsfd_run, rates, policy.with_premium(pstar)).reserve
    scale = np.max(np.abs(reserve))
    assert abs(reserve.min()) <= 1e-10 * scale
    for factor in (0.1, 0.5, 0.9, 0.99, 1.0):
        v = reserve_series(nsfd_run, rates, policy.with_premium(factor * pstar)).reserve
        assert v.min() >= -1e-10 * scale


def test_premium_above_bound_goes_negative(rates, nsfd_run, policy):
    # reserve decreases in the premium, so only premiums above the bound dip below zero
    pstar = optimal_premium(nsfd_run, rates, policy)
    for factor in (1.01, 1.1):
        assert reserve_series(nsfd_run, rates, policy.with_premium(factor * pstar)).reserve.min() < 0
    for factor in (0.9, 0.99):
        assert np.all(reserve_series(nsfd_run, rates, policy.with_premium(factor * pstar)).reserve[:-1] > 0)


def test_action_params_validation():
    with pytest.raises(ParameterError):
        ActuarialParams(-0.01, 10.0)
    with pytest.raises(ParameterError):
        ActuarialParams(0.01, 0.0)
    with pytest.raises(ParameterError):
        ActuarialParams(0.01, 10.0, premium=-1.0)
    with pytest.raises(ParameterError):
        ActuarialParams(0.01, 10.0, l_d=-1.0)
