import warnings

import numpy as np
import pytest

from glvsync import (
    FeedbackGains,
    IntegrationConfig,
    ModelKind,
    NotAnEquilibriumError,
    SystemParams,
    controlled_field,
    jacobian,
    make_controlled_field,
    stabilize_experiment,
    validate_gains,
    vector_field,
)

TARGET = np.array([1.0, 3.0, 0.0])


def test_gains_validation():
    with pytest.raises(ValueError):
        FeedbackGains(-1.0, 0.0, 0.0)
    FeedbackGains(0.0, 0.0, 0.0)  # zero gains are allowed (uncontrolled probe)


def test_field_is_zero_at_target(params):
    f = controlled_field(params, FeedbackGains(3.0, 2.0, 1.0), TARGET, TARGET)
    assert np.all(f == 0.0)


def test_zero_gains_reduce_to_uncontrolled(params, rng):
    gains = FeedbackGains(0.0, 0.0, 0.0)
    for _ in range(50):
        x = rng.uniform(0.0, 3.0, 3)
        assert np.array_equal(
            controlled_field(params, gains, TARGET, x),
            vector_field(ModelKind.LINEAR, params, x),
        )


def test_control_input_componentwise(params):
    # u = -gains*(x - target); at x = (1.1, 3.1, 0.05) with gains (3, 2, 1)
    # the correction is exactly (0.3, 0.2, 0.05)
    x = np.array([1.1, 3.1, 0.05])
    f = controlled_field(params, FeedbackGains(3.0, 2.0, 1.0), TARGET, x)
    free = vector_field(ModelKind.LINEAR, params, x)
    assert f - free == pytest.approx([-0.3, -0.2, -0.05], abs=1e-15)


def test_non_equilibrium_target_rejected(params):
    with pytest.raises(NotAnEquilibriumError):
        make_controlled_field(params, FeedbackGains(1.0, 1.0, 1.0), [1.0, 1.0, 1.0])
    # other equilibria are accepted
    make_controlled_field(params, FeedbackGains(1.0, 1.0, 1.0), [0.0, 0.0, 0.0])


def test_validate_gains_reference_cases(params):
    # (1,1,1): first inequality 1 > 2 fails
    rep = validate_gains(params, FeedbackGains(1.0, 1.0, 1.0))
    assert not rep.ok and not rep.satisfied[0]
    # (3,2,1): first two hold, third fails:
    # lhs = 3*2*(1+0.0149) = 6.0894, rhs = 2*(2+2.2528)+1.0149 = 9.5205
    rep = validate_gains(params, FeedbackGains(3.0, 2.0, 1.0))
    assert rep.satisfied[0] and rep.satisfied[1] and not rep.satisfied[2]
    assert rep.margins[2] == pytest.approx(6.0894 - 9.5205, abs=1e-10)
    assert not rep.ok
    # (10,5,5): all hold with margins (8, 39, 184.4661)
    rep = validate_gains(params, FeedbackGains(10.0, 5.0, 5.0))
    assert rep.ok
    assert rep.margins == pytest.approx((8.0, 39.0, 184.4661), abs=1e-10)


def test_validate_gains_matches_quadratic_form_definiteness(rng):
    # for non-reference parameters the validator must agree with negative
    # definiteness of the symmetrized error-system quadratic form
    for _ in range(300):
        p, q, r = rng.uniform(0.3, 4.0, 3)
        if abs(p - 2.9851) < 1e-6:
            continue
        sp = SystemParams(p, q, r)
        g = rng.uniform(0.0, 8.0, 3)
        rep = validate_gains(sp, FeedbackGains(*g))
        k = q - p
        M = np.array(
            [
                [r - g[0], r / 2.0, -p / 2.0],
                [r / 2.0, -g[1], 0.0],
                [-p / 2.0, 0.0, -(k + g[2])],
            ]
        )
        assert rep.ok == bool(np.linalg.eigvalsh(M).max() < 0.0)


def test_controlled_jacobian_is_shifted_by_gains(params, rng):
    # d(controlled)/dx at the target = J - diag(gains)
    gains = FeedbackGains(3.0, 2.0, 1.0)
    field = make_controlled_field(params, gains, TARGET)
    eps = 1e-7
    J_num = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = eps
        J_num[:, j] = (field(TARGET + e) - field(TARGET - e)) / (2 * eps)
    expected = jacobian(ModelKind.LINEAR, params, TARGET) - np.diag([3.0, 2.0, 1.0])
    assert np.allclose(J_num, expected, atol=1e-6)


def test_valid_gains_make_target_linearly_stable(params, rng):
    J = jacobian(ModelKind.LINEAR, params, TARGET)
    found = 0
    while found < 30:
        g = rng.uniform(0.0, 20.0, 3)
        if not validate_gains(params, FeedbackGains(*g)).ok:
            continue
        found += 1
        eigs = np.linalg.eigvals(J - np.diag(g))
        assert eigs.real.max() < 0.0, g


def test_stabilization_converges(params, x0):
    cfg = IntegrationConfig(step=0.005, t_end=200.0, record_every=10)
    res = stabilize_experiment(params, FeedbackGains(10.0, 5.0, 5.0), TARGET, x0, cfg)
    assert res.gain_report.ok
    assert res.final_error < 1e-6
    assert res.time_to_tolerance is not None and res.time_to_tolerance < 5.0
    # energy 0.5*err^2 decays monotonically over the final half of the run
    L = 0.5 * res.error_norms ** 2
    tail = L[len(L) // 2:]
    assert np.all(np.diff(tail) <= 1e-12)


def test_zero_gains_do_not_converge(params, x0):
    cfg = IntegrationConfig(step=0.005, t_end=200.0, record_every=10)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = stabilize_experiment(params, FeedbackGains(0.0, 0.0, 0.0), TARGET, x0, cfg)
    assert any("not guaranteed" in str(w.message) for w in caught)
    assert res.final_error > 0.1
    assert res.time_to_tolerance is None


def test_start_at_target_stays(params):
    cfg = IntegrationConfig(step=0.005, t_end=10.0)
    res = stabilize_experiment(params, FeedbackGains(10.0, 5.0, 5.0), TARGET, TARGET, cfg)
    assert np.all(res.error_norms == 0.0)
