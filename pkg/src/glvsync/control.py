"""Linear feedback stabilization of equilibria of the linear-response model.

The control input is u = -gains * (x - target) componentwise.  For the
reference parameter set (2.9851, 3, 2) the gain validator applies the
published sufficient inequalities verbatim (constants 0.0149 and 2.2528);
for any other parameters the analogous constants are recomputed from the
symmetrized quadratic form of the error system at the axial equilibrium
(1, 1+r, 0), whose pattern is

    mu1 > r
    mu1*mu2 > r*mu2 + r^2/4
    mu1*mu2*(mu3+k) > mu2*(r*mu3 + r*k + p^2/4) + (r^2/4)*(mu3+k),  k = q - p.

The inequalities are sufficient, not necessary, so a failing validation only
downgrades stabilization runs to a warning.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .integrators import IntegrationConfig, Trajectory, integrate
from .models import ModelKind, SystemParams, vector_field

__all__ = [
    "FeedbackGains",
    "GainReport",
    "NotAnEquilibriumError",
    "StabilizationResult",
    "controlled_field",
    "make_controlled_field",
    "validate_gains",
    "stabilize_experiment",
]

_EQUILIBRIUM_TOL = 1e-9
_REFERENCE_PARAMS = (2.9851, 3.0, 2.0)
_REFERENCE_K = 0.0149
_REFERENCE_CROSS = 2.2528


class NotAnEquilibriumError(ValueError):
    """The requested stabilization target is not a fixed point."""


@dataclass(frozen=True)
class FeedbackGains:
    mu1: float
    mu2: float
    mu3: float

    def __post_init__(self):
        if self.mu1 < 0 or self.mu2 < 0 or self.mu3 < 0:
            raise ValueError("feedback gains must be nonnegative")


@dataclass
class GainReport:
    """Outcome of the three sufficient inequalities, with margins (lhs-rhs)."""

    ok: bool
    satisfied: tuple
    margins: tuple


@dataclass
class StabilizationResult:
    trajectory: Trajectory
    error_norms: np.ndarray
    final_error: float
    time_to_tolerance: float | None
    gain_report: GainReport


def _check_target(params: SystemParams, target: np.ndarray) -> None:
    residual = np.abs(vector_field(ModelKind.LINEAR, params, target)).max()
    if residual > _EQUILIBRIUM_TOL:
        raise NotAnEquilibriumError(
            f"target {target.tolist()} has field residual {residual:.3g} > {_EQUILIBRIUM_TOL}"
        )


def make_controlled_field(params: SystemParams, gains: FeedbackGains, target):
    """Validated closure computing the controlled vector field (for integration)."""
    target = np.asarray(target, dtype=float)
    _check_target(params, target)
    g = np.array([gains.mu1, gains.mu2, gains.mu3])

    def field(x):
        return vector_field(ModelKind.LINEAR, params, x) - g * (x - target)

    return field


def controlled_field(params: SystemParams, gains: FeedbackGains, target, x) -> np.ndarray:
    """Controlled field at one state (validates the target on every call)."""
    return make_controlled_field(params, gains, target)(np.asarray(x, dtype=float))


def _is_reference_set(params: SystemParams) -> bool:
    return (params.p, params.q, params.r) == _REFERENCE_PARAMS


def validate_gains(params: SystemParams, gains: FeedbackGains) -> GainReport:
    """Check the sufficient stabilization inequalities for the axial point."""
    m1, m2, m3 = gains.mu1, gains.mu2, gains.mu3
    p, q, r = params.p, params.q, params.r
    if _is_reference_set(params):
        k, cross, quarter = _REFERENCE_K, _REFERENCE_CROSS, 1.0
        margin1 = m1 - 2.0
        margin2 = m1 * m2 - (1.0 + 2.0 * m2)
        margin3 = m1 * m2 * (m3 + k) - (m2 * (2.0 * m3 + cross) + m3 + k)
    else:
        k = q - p
        quarter = r * r / 4.0
        margin1 = m1 - r
        margin2 = m1 * m2 - (r * m2 + quarter)
        margin3 = m1 * m2 * (m3 + k) - (
            m2 * (r * m3 + r * k + p * p / 4.0) + quarter * (m3 + k)
        )
    sat = (margin1 > 0.0, margin2 > 0.0, margin3 > 0.0)
    return GainReport(ok=all(sat), satisfied=sat, margins=(margin1, margin2, margin3))


def stabilize_experiment(
    params: SystemParams,
    gains: FeedbackGains,
    target,
    x0,
    config: IntegrationConfig,
    tolerance: float = 1e-6,
) -> StabilizationResult:
    """Integrate the controlled system and report convergence to ``target``.

    Reports the error norm at the end of the run and the first recorded time
    at which it drops below ``tolerance`` (None if it never does).
    """
    target = np.asarray(target, dtype=float)
    report = validate_gains(params, gains)
    if not report.ok:
        warnings.warn(
            "feedback gains fail the sufficient stability inequalities "
            f"(margins {report.margins}); stabilization is not guaranteed",
            stacklevel=2,
        )
    field = make_controlled_field(params, gains, target)
    traj = integrate(
        field,
        x0,
        config,
        meta={"model": ModelKind.LINEAR.value, "params": params, "config": config},
    )
    errs = np.sqrt(((traj.states - target) ** 2).sum(axis=1))
    below = np.nonzero(errs < tolerance)[0]
    t_tol = float(traj.times[below[0]]) if below.size else None
    return StabilizationResult(
        trajectory=traj,
        error_norms=errs,
        final_error=float(errs[-1]),
        time_to_tolerance=t_tol,
        gain_report=report,
    )
