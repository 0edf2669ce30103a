"""Fixed-step classical RK4 integration with trajectory recording.

Works on autonomous vector fields of any dimension given as callables
``f(x) -> xdot``.  Integration aborts loudly (DivergenceError) as soon as a
state component leaves [-1e12, 1e12] or turns non-finite; the model family
this package targets is prone to explosive excursions and silent Inf
propagation must never reach the output files.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntegrationConfig", "Trajectory", "DivergenceError", "rk4_step", "integrate"]

_GUARD = 1.0e12


class DivergenceError(RuntimeError):
    """A state component exceeded the guard or became non-finite."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class IntegrationConfig:
    """Step size, horizon and recording policy.

    Recording runs from t = transient to t = t_end, keeping every
    ``record_every``-th step.  With transient = 0 the initial state is the
    first sample; otherwise the first sample is the state at the first step
    time >= transient.
    """

    step: float
    t_end: float
    record_every: int = 1
    transient: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not (self.t_end > self.transient >= 0):
            raise ValueError(
                f"need t_end > transient >= 0, got t_end={self.t_end}, transient={self.transient}"
            )
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.step))

    @property
    def first_recorded_step(self) -> int:
        return int(np.ceil(self.transient / self.step - 1e-9))


@dataclass
class Trajectory:
    """Uniformly sampled orbit: times[i] pairs with states[i]."""

    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def rk4_step(f, x, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of size h."""
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(f(x))
    k2 = np.asarray(f(x + 0.5 * h * k1))
    k3 = np.asarray(f(x + 0.5 * h * k2))
    k4 = np.asarray(f(x + h * k3))
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.abs(out) < np.inf):
        raise DivergenceError("RK4 step produced a non-finite state")
    return out


def integrate(f, x0, config: IntegrationConfig, meta: dict | None = None) -> Trajectory:
    """Integrate ``f`` from ``x0`` and record per ``config``.

    Raises DivergenceError (with the failure time attached) if any component
    exceeds 1e12 in magnitude or becomes non-finite.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.abs(x) < _GUARD):
        raise DivergenceError("initial state violates the divergence guard", time=0.0)
    h = config.step
    n_steps = config.n_steps
    i0 = config.first_recorded_step
    stride = config.record_every

    rec_idx = []
    rec_states = []
    for i in range(n_steps + 1):
        if i >= i0 and (i - i0) % stride == 0:
            rec_idx.append(i)
            rec_states.append(x.copy())
        if i == n_steps:
            break
        # inline RK4 so the guard below is the only per-step finiteness check
        k1 = np.asarray(f(x))
        k2 = np.asarray(f(x + 0.5 * h * k1))
        k3 = np.asarray(f(x + 0.5 * h * k2))
        k4 = np.asarray(f(x + h * k3))
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(x) < _GUARD):
            raise DivergenceError(
                f"state diverged at t={(i + 1) * h:.6g}", time=(i + 1) * h
            )
    times = np.array(rec_idx, dtype=float) * h
    return Trajectory(times=times, states=np.array(rec_states), meta=dict(meta or {}))
