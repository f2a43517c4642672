import pytest

from conftest import THETA0_REF, oracle_truth
from rumor_inspect import (
    Allocation,
    DynState,
    IntegratorConfig,
    ModelParams,
    ParameterError,
    derivatives,
    full_steady_state,
    group_masses,
    integrate,
    prevalences,
    seed_state,
    verify_global_stability,
)

FAST = IntegratorConfig(dt=0.05)


def analytic_state(p, a):
    ss = full_steady_state(p, a)
    masses = group_masses(p, a)
    coords = (ss.rho_00_a, ss.rho_00_na, ss.rho_10_a, ss.rho_11_na)
    return DynState(*(c if m > 0.0 else 0.0 for c, m in zip(coords, masses)), t=0.0)


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def test_zero_state_has_zero_rates(ref_params):
    rates = derivatives(DynState(0.0, 0.0, 0.0, 0.0), ref_params, Allocation.uniform(0.2))
    assert rates == (0.0, 0.0, 0.0, 0.0)


def test_rates_vanish_at_analytic_steady_state(ref_params):
    a = Allocation.uniform(0.2)
    rates = derivatives(analytic_state(ref_params, a), ref_params, a)
    assert max(abs(r) for r in rates) < 1e-9


def test_hand_evaluated_rumor_rate():
    p = ModelParams.from_rates(nu=1.0, k=1.0, delta=0.5, x=0.3)
    a = Allocation.uniform(0.2)
    rates = derivatives(DynState(0.0, 0.0, 0.0, 0.5), p, a)
    # theta1 = 0.7*0.8*0.5 = 0.28; rate = 0.5*0.28 - 0.5*0.5
    assert rates.r11na == pytest.approx(-0.11, abs=1e-12)
    # inspecting groups see total prevalence 0.28; the non-inspecting
    # type-0 group sees only theta0 = 0
    assert rates.r00a == rates.r10a == pytest.approx(0.28, abs=1e-12)
    assert rates.r00na == 0.0


def test_empty_groups_are_pinned():
    p = ModelParams.from_lambda(2.0, 0.3)
    a = Allocation.uniform(1.0)  # non-inspecting groups are empty
    rates = derivatives(DynState(0.2, 0.7, 0.2, 0.7), p, a)
    assert rates.r00na == 0.0 and rates.r11na == 0.0
    assert rates.r00a != 0.0


def test_derivatives_domain_check(ref_params):
    with pytest.raises(ParameterError):
        derivatives(DynState(1.2, 0.0, 0.0, 0.0), ref_params, Allocation.uniform(0.2))


def test_integrate_single_step_composes_derivatives(ref_params):
    # one accepted step must equal classical RK4 assembled from derivatives()
    a = Allocation.uniform(0.2)
    s0 = DynState(0.3, 0.1, 0.25, 0.4)
    dt = 0.05
    traj = integrate(s0, ref_params, a, IntegratorConfig(dt=dt, t_max=dt), store_every=1)

    def plus(s, r, h):
        return DynState(*(si + h * ri for si, ri in zip(s[:4], r)), t=0.0)

    k1 = derivatives(s0, ref_params, a)
    k2 = derivatives(plus(s0, k1, dt / 2), ref_params, a)
    k3 = derivatives(plus(s0, k2, dt / 2), ref_params, a)
    k4 = derivatives(plus(s0, k3, dt), ref_params, a)
    manual = [
        si + dt / 6.0 * (a_ + 2.0 * (b_ + c_) + d_)
        for si, a_, b_, c_, d_ in zip(s0[:4], k1, k2, k3, k4)
    ]
    stepped = traj.states[1]
    for got, want in zip(stepped[:4], manual):
        assert got == pytest.approx(want, abs=1e-15)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def test_analytic_steady_state_converges_immediately(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(analytic_state(ref_params, a), ref_params, a, FAST)
    assert traj.converged and traj.n_steps <= 1


def test_zero_seed_stays_zero(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(DynState(0.0, 0.0, 0.0, 0.0), ref_params, a, FAST)
    assert traj.converged and traj.n_steps == 0
    assert traj.final[:4] == (0.0, 0.0, 0.0, 0.0)


def test_small_seed_reaches_fixed_point(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(seed_state(ref_params, a), ref_params, a, FAST)
    assert traj.converged
    th0, th1 = prevalences(traj.final, ref_params, a)
    assert th0 == pytest.approx(THETA0_REF, abs=1e-6)
    assert th1 == pytest.approx(0.06, abs=1e-6)


def test_large_seed_reaches_same_fixed_point(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(DynState(0.9, 0.9, 0.9, 0.9), ref_params, a, FAST)
    th0, th1 = prevalences(traj.final, ref_params, a)
    assert traj.converged
    assert th0 == pytest.approx(THETA0_REF, abs=1e-6)
    assert th1 == pytest.approx(0.06, abs=1e-6)


def test_trajectory_stays_in_unit_box(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(DynState(0.99, 0.99, 0.99, 0.99), ref_params, a, FAST)
    for s in traj.states:
        for c in s[:4]:
            assert -1e-12 <= c <= 1.0 + 1e-12


def test_oversized_step_is_halved_not_fatal():
    p = ModelParams.from_lambda(5.0, 0.3)
    a = Allocation.uniform(0.2)
    traj = integrate(DynState(0.999, 0.999, 0.999, 0.999), p, a, IntegratorConfig(dt=40.0))
    assert traj.converged
    th0, th1 = prevalences(traj.final, p, a)
    assert th0 == pytest.approx(oracle_truth(5.0, 0.3, 0.2, 0.2), abs=1e-6)


def test_horizon_flag_when_not_converged(ref_params):
    a = Allocation.uniform(0.2)
    traj = integrate(seed_state(ref_params, a), ref_params, a, IntegratorConfig(dt=0.05, t_max=1.0))
    assert not traj.converged and traj.status == "horizon"


def test_rumor_coordinate_monotone_from_below(ref_params):
    a = Allocation.uniform(0.2)
    base = analytic_state(ref_params, a)
    start = DynState(base.r00a, base.r00na, base.r10a, 0.5 * base.r11na, t=0.0)
    traj = integrate(start, ref_params, a, FAST)
    rumor_path = [s.r11na for s in traj.states]
    assert all(b >= a_ - 1e-12 for a_, b in zip(rumor_path, rumor_path[1:]))
    assert traj.converged


def test_time_scale_invariance():
    # scaling (nu, delta) together rescales time but not the limit
    slow = ModelParams.from_rates(nu=1.0, k=1.0, delta=0.5, x=0.3)
    fast = ModelParams.from_rates(nu=3.0, k=1.0, delta=1.5, x=0.3)
    a = Allocation.uniform(0.2)
    cfg = IntegratorConfig(dt=0.02, conv_tol=1e-12)
    lim_slow = integrate(seed_state(slow, a), slow, a, cfg).final
    lim_fast = integrate(seed_state(fast, a), fast, a, cfg).final
    for u, v in zip(lim_slow[:4], lim_fast[:4]):
        assert u == pytest.approx(v, abs=1e-9)
    assert lim_slow.t > lim_fast.t


@pytest.mark.parametrize(
    "lam,x,alpha",
    [(2.0, 0.3, 0.2), (2.0, 0.3, 1.0), (3.0, 0.5, 0.2), (5.0, 0.7, 0.2), (2.0, 1.0, 0.5)],
)
def test_limit_matches_analytic_componentwise(lam, x, alpha):
    p = ModelParams.from_lambda(lam, x)
    a = Allocation.uniform(alpha)
    traj = integrate(seed_state(p, a), p, a, FAST)
    assert traj.converged
    target = analytic_state(p, a)
    for got, want, m in zip(traj.final[:4], target[:4], group_masses(p, a)):
        if m > 0.0:
            assert got == pytest.approx(want, abs=1e-6)
        else:
            assert got == 0.0


# ---------------------------------------------------------------------------
# global stability
# ---------------------------------------------------------------------------

def test_stability_subcritical_limits_are_zero():
    p = ModelParams.from_lambda(0.5, 0.3)
    report = verify_global_stability(p, Allocation.uniform(0.5), 4, FAST, seed=7)
    assert report.passed
    for lim in report.limits:
        assert max(lim[:4]) < 1e-6


def test_stability_reference_point(ref_params):
    report = verify_global_stability(ref_params, Allocation.uniform(0.2), 8, FAST, seed=3)
    assert report.passed and report.all_converged
    assert report.max_gap < 1e-6


def test_stability_full_inspection(ref_params):
    report = verify_global_stability(ref_params, Allocation.uniform(1.0), 8, FAST, seed=3)
    assert report.passed
    th0, th1 = prevalences(report.limits[0], ref_params, Allocation.uniform(1.0))
    assert th0 == pytest.approx(0.5, abs=1e-6)
    assert th1 == 0.0


def test_stability_requires_two_starts(ref_params):
    with pytest.raises(ParameterError):
        verify_global_stability(ref_params, Allocation.uniform(0.2), 1)


def test_stability_reports_failure_without_crash(ref_params):
    short = IntegratorConfig(dt=0.05, t_max=0.5)
    report = verify_global_stability(ref_params, Allocation.uniform(0.2), 3, short, seed=5)
    assert not report.passed and not report.all_converged


def test_stability_jobs_deterministic(ref_params):
    a = Allocation.uniform(0.2)
    serial = verify_global_stability(ref_params, a, 4, FAST, seed=11, jobs=1)
    threaded = verify_global_stability(ref_params, a, 4, FAST, seed=11, jobs=3)
    assert serial.limits == threaded.limits
    assert serial.max_gap == threaded.max_gap
