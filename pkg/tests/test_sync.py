import numpy as np
import pytest

from glvsync import (
    IntegrationConfig,
    LyapunovConfig,
    ModelKind,
    SyncGains,
    Trajectory,
    active_coupled_field,
    active_experiment,
    adaptive_coupled_field,
    adaptive_experiment,
    conditional_lyapunov_spectrum,
    frozen_eigenvalue_averages,
    integrate,
    make_active_field,
    make_field,
    sync_condition_check,
    sync_errors,
    vector_field,
)

GAINS_STRONG = SyncGains(5.0, 30.0)
GAINS_DEMO = SyncGains(0.000024, 1.345)
S0 = np.array([1.0023, 1.0589, 0.6503, 1.5, 1.0])


def test_gain_validation():
    with pytest.raises(ValueError):
        SyncGains(0.0, 1.0)
    with pytest.raises(ValueError):
        SyncGains(1.0, -2.0)


def test_sync_errors_helper():
    e = sync_errors([1.0, 2.0, 3.0, 5.0, 7.0])
    assert e.e2 == 3.0 and e.e3 == 4.0 and e.norm == 5.0


def test_manifold_is_flow_invariant(params, rng):
    # with response == drive the control input vanishes and the response
    # derivatives equal the drive derivatives
    for _ in range(50):
        d = rng.uniform(0.1, 2.0, 3)
        s = np.array([d[0], d[1], d[2], d[1], d[2]])
        f = active_coupled_field(params, GAINS_STRONG, s)
        assert f[3] == f[1]
        assert f[4] == f[2]


def test_manifold_errors_stay_zero(params, x0):
    s0 = np.array([x0[0], x0[1], x0[2], x0[1], x0[2]])
    res = active_experiment(params, GAINS_DEMO, s0, IntegrationConfig(step=0.005, t_end=100.0))
    assert np.all(res.e2 == 0.0)
    assert np.all(res.e3 == 0.0)


def test_error_dynamics_diagonal_identity(params, rng):
    # e2' = (-1-mu1+x1d) e2 and e3' = (-q-mu2+p x1d^2) e3, algebraically
    gains = SyncGains(0.7, 2.3)
    for _ in range(100):
        s = rng.uniform(0.1, 2.5, 5)
        f = active_coupled_field(params, gains, s)
        e2 = s[3] - s[1]
        e3 = s[4] - s[2]
        assert f[3] - f[1] == pytest.approx((-1.0 - gains.mu1 + s[0]) * e2, abs=1e-12)
        assert f[4] - f[2] == pytest.approx(
            (-params.q - gains.mu2 + params.p * s[0] ** 2) * e3, abs=1e-12
        )


def test_one_way_coupling_bitwise(params, x0):
    cfg = IntegrationConfig(step=0.005, t_end=50.0)
    drive = integrate(make_field(ModelKind.LINEAR, params), x0, cfg)
    coupled = integrate(make_active_field(params, GAINS_STRONG), S0, cfg)
    assert np.array_equal(drive.states, coupled.states[:, :3])
    # the compiled experiment path steps identically to the generic one
    res = active_experiment(params, GAINS_STRONG, S0, cfg)
    assert np.array_equal(res.trajectory.states, coupled.states)


def test_sync_condition_margins_match_direct_minimum(params, x0):
    cfg = IntegrationConfig(step=0.005, t_end=200.0)
    drive = integrate(make_field(ModelKind.LINEAR, params), x0, cfg)
    rep = sync_condition_check(params, GAINS_STRONG, drive)
    x1d = drive.states[:, 0]
    assert rep.margin_e2 == pytest.approx(6.0 - x1d.max(), abs=1e-12)
    assert rep.margin_e3 == pytest.approx(
        (30.0 + params.q - params.p * x1d ** 2).min(), abs=1e-12
    )
    assert rep.ok
    # near-zero gains fail as soon as the orbit exceeds x1d = 1
    rep_tiny = sync_condition_check(params, SyncGains(1e-9, 1e-9), drive)
    assert not rep_tiny.ok


def test_sync_condition_constant_drive(params):
    traj = Trajectory(times=np.zeros(1), states=np.array([[1.0, 3.0, 0.0]]))
    rep = sync_condition_check(params, SyncGains(0.5, 0.5), traj)
    assert rep.ok
    assert rep.margin_e2 == pytest.approx(0.5)
    assert rep.margin_e3 == pytest.approx(0.5 + params.q - params.p)


def test_active_sync_envelope_and_decay(params, x0):
    # margins measured over a long drive orbit bound the error decay
    cfg_drive = IntegrationConfig(step=0.005, t_end=5000.0)
    drive = integrate(make_field(ModelKind.LINEAR, params), x0, cfg_drive)
    rep = sync_condition_check(params, GAINS_STRONG, drive)
    assert rep.ok and rep.margin_e2 > 4.0 and rep.margin_e3 > 25.0

    res = active_experiment(params, GAINS_STRONG, S0, IntegrationConfig(step=0.005, t_end=20.0))
    t = res.trajectory.times
    env2 = abs(res.e2[0]) * np.exp(-rep.margin_e2 * t)
    env3 = abs(res.e3[0]) * np.exp(-rep.margin_e3 * t)
    assert np.all(np.abs(res.e2) <= env2 * (1.0 + 1e-9) + 1e-290)
    assert np.all(np.abs(res.e3) <= env3 * (1.0 + 1e-9) + 1e-290)
    assert max(res.final_errors) < 1e-6
    # squared error sum decays monotonically while the condition holds
    L = 0.5 * (res.e2 ** 2 + res.e3 ** 2)
    assert np.all(np.diff(L) <= 1e-15)


def test_active_sync_reaches_tolerance_quickly(params):
    res = active_experiment(params, GAINS_STRONG, S0, IntegrationConfig(step=0.005, t_end=5.0))
    below2 = res.trajectory.times[np.abs(res.e2) < 1e-6]
    below3 = res.trajectory.times[np.abs(res.e3) < 1e-6]
    assert below2.size and below2[0] < 3.0
    assert below3.size and below3[0] < 1.0


def test_active_sync_demo_gain_identity(params):
    # closed form: e2(t) = e2(0) * (x2d(t)/x2d(0)) * exp(-mu1 t); the
    # middle-predator ratio is bounded, so e2 drifts to zero at rate mu1
    res = active_experiment(params, GAINS_DEMO, S0, IntegrationConfig(step=0.005, t_end=50.0))
    t = res.trajectory.times
    x2d = res.trajectory.states[:, 1]
    predicted = res.e2[0] * (x2d / x2d[0]) * np.exp(-GAINS_DEMO.mu1 * t)
    assert np.allclose(res.e2, predicted, rtol=1e-9, atol=1e-12)
    # e3 contracts at roughly mu2 + q - p<x1d^2> and is tiny by t = 50
    assert res.final_errors[1] < 1e-6


def test_conditional_spectrum_transverse_crosscheck(params):
    # the two most contracted exponents of the coupled system must match the
    # diagonal error-block time averages
    cfg = LyapunovConfig(step=0.005, t_total=1500.0, transient=200.0)
    spec = conditional_lyapunov_spectrum(params, GAINS_STRONG, S0, cfg)
    assert spec.exponents.shape == (5,)
    assert spec.transverse is not None
    bottom_two = np.sort(spec.exponents)[:2]
    expected = np.sort(spec.transverse)
    assert bottom_two == pytest.approx(expected, abs=0.01)


def test_conditional_transverse_monotone_in_gains(params):
    cfg = LyapunovConfig(step=0.005, t_total=300.0, transient=100.0)
    spec_lo = conditional_lyapunov_spectrum(params, SyncGains(1.0, 5.0), S0, cfg)
    spec_hi = conditional_lyapunov_spectrum(params, SyncGains(4.0, 12.0), S0, cfg)
    assert spec_hi.transverse[0] < spec_lo.transverse[0]
    assert spec_hi.transverse[1] < spec_lo.transverse[1]
    # same orbit, so the averages differ by exactly the gain increments
    assert spec_hi.transverse[0] - spec_lo.transverse[0] == pytest.approx(-3.0, abs=1e-9)
    assert spec_hi.transverse[1] - spec_lo.transverse[1] == pytest.approx(-7.0, abs=1e-9)


def test_frozen_eigenvalue_averages_single_state(params):
    # on a single sample the rank average is just that state's sorted
    # eigenvalue real parts; check against a direct eigensolve
    gains = SyncGains(0.5, 1.5)
    s = np.array([[1.1, 0.9, 0.8]])
    out = frozen_eigenvalue_averages(params, gains, s)
    p, q, r = params.p, params.q, params.r
    x1, x2, x3 = s[0]
    J = np.zeros((5, 5))
    J[0, :3] = [1 - x2 + 2 * (r - p * x3) * x1, -x1, -p * x1 ** 2]
    J[1, :2] = [x2, -1 + x1]
    J[2, 0] = 2 * p * x1 * x3
    J[2, 2] = -q + p * x1 ** 2
    J[3, 0] = x2
    J[3, 1] = gains.mu1
    J[3, 3] = -1 + x1 - gains.mu1
    J[4, 0] = 2 * p * x1 * x3
    J[4, 2] = gains.mu2
    J[4, 4] = -q + p * x1 ** 2 - gains.mu2
    expected = np.sort(np.linalg.eigvals(J).real)[::-1]
    assert out == pytest.approx(expected, abs=1e-12)
    assert np.all(np.diff(out) <= 0.0)


# ---------------------------------------------------------------------------
# adaptive scheme

ADAPT_S0 = np.array([4.0, 1.4, 1.41, 1.0, 1.414, 3.9, 4.0])
ADAPT_GAINS = SyncGains(0.0038, 2.0)


def test_adaptive_closed_loop_error_identity(params, rng):
    # substituting the controller gives e2' = -mu1 e2 exactly
    gains = SyncGains(0.25, 1.5)
    for _ in range(100):
        s = rng.uniform(0.2, 3.0, 7)
        f = adaptive_coupled_field(params, gains, s)
        e2 = s[3] - s[1]
        assert f[3] - f[1] == pytest.approx(-gains.mu1 * e2, abs=1e-12)


def test_adaptive_field_respects_update_law_flag(params, rng):
    gains = SyncGains(0.25, 1.5)
    for _ in range(20):
        s = rng.uniform(0.2, 3.0, 7)
        e3 = s[4] - s[2]
        f_lyap = adaptive_coupled_field(params, gains, s, update_law="lyapunov")
        f_lit = adaptive_coupled_field(params, gains, s, update_law="paper-literal")
        assert f_lyap[5] == pytest.approx(s[0] ** 2 * e3 ** 2, rel=1e-12)
        assert f_lit[5] == pytest.approx(s[0] ** 2 * e3, rel=1e-12)
        assert f_lyap[6] == f_lit[6] == pytest.approx(-e3 ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        adaptive_coupled_field(params, gains, np.zeros(7), update_law="bogus")


def test_adaptive_on_manifold_estimates_frozen(params, x0):
    s0 = np.array([x0[0], x0[1], x0[2], x0[1], x0[2], 3.9, 4.0])
    res = adaptive_experiment(params, ADAPT_GAINS, s0, IntegrationConfig(step=0.005, t_end=50.0))
    assert np.all(res.e2 == 0.0)
    assert np.all(res.e3 == 0.0)
    assert np.all(res.p_estimate == 3.9)
    assert np.all(res.q_estimate == 4.0)


def test_adaptive_run_boundedness_and_energy_decay(params):
    cfg = IntegrationConfig(step=0.005, t_end=100.0, record_every=4)
    res = adaptive_experiment(params, ADAPT_GAINS, ADAPT_S0, cfg)
    # the quadratic energy is nonincreasing along the run
    assert np.all(np.diff(res.lyapunov) <= 1e-9)
    # all error components stay bounded by the initial energy level
    L0 = res.lyapunov[0]
    for series in (res.e2, res.e3, params.p - res.p_estimate, params.q - res.q_estimate):
        assert np.max(series ** 2) <= 2.0 * L0 * (1.0 + 1e-12)
        assert np.max(np.abs(series)) < 10.0 * L0
    # e2 follows its exact closed-loop decay
    t = res.trajectory.times
    assert np.allclose(res.e2, res.e2[0] * np.exp(-ADAPT_GAINS.mu1 * t), rtol=1e-6, atol=1e-12)
    # e3 collapses quickly
    assert abs(res.e3[-1]) < 1e-10


def test_adaptive_estimates_freeze_once_e3_small(params):
    # P and Q move only with e3; once |e3| < 1e-8 they are frozen in place
    cfg = IntegrationConfig(step=0.005, t_end=100.0)
    res = adaptive_experiment(params, ADAPT_GAINS, ADAPT_S0, cfg)
    idx = np.nonzero(np.abs(res.e3) < 1e-8)[0]
    assert idx.size > 0
    i0 = idx[0]
    dP = np.abs(np.diff(res.p_estimate[i0:])) / cfg.step
    dQ = np.abs(np.diff(res.q_estimate[i0:])) / cfg.step
    assert dP.max() < 1e-12
    assert dQ.max() < 1e-12


def test_adaptive_literal_law_also_runs(params):
    cfg = IntegrationConfig(step=0.005, t_end=50.0, record_every=4)
    res = adaptive_experiment(params, ADAPT_GAINS, ADAPT_S0, cfg, update_law="paper-literal")
    assert np.all(np.isfinite(res.trajectory.states))
    assert abs(res.e3[-1]) < 1e-8
