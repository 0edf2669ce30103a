"""Equilibria, stability classification, Lyapunov spectra and related diagnostics.

Eigenvalues of the 3x3 Jacobians are obtained from the characteristic cubic
in closed form (trigonometric / Cardano branches) followed by one Newton
polish per root; no general eigensolver is involved.  Lyapunov spectra use
tangent-space (variational) integration with periodic Gram-Schmidt
reorthonormalization, running on compiled kernels.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .integrators import DivergenceError
from .models import ModelKind, SystemParams, divergence, jacobian, vector_field

__all__ = [
    "Classification",
    "StabilityReport",
    "LyapunovConfig",
    "LyapunovSpectrum",
    "SlowManifoldSample",
    "equilibria",
    "cubic_roots",
    "classify",
    "lyapunov_spectrum",
    "orbit_average_divergence",
    "slow_manifold_residual",
    "slow_manifold_residual_poly",
    "contraction_constant",
    "uniqueness_regime",
]

_MARGINAL_TOL = 1e-9


class Classification(Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS_NODE = "StableFocusNode"
    SADDLE = "Saddle"
    UNSTABLE_FOCUS = "UnstableFocus"
    MARGINAL = "Center-like/Marginal"


@dataclass
class StabilityReport:
    point: np.ndarray
    char_poly: tuple  # (c2, c1, c0) of lambda^3 + c2 lambda^2 + c1 lambda + c0
    eigenvalues: tuple  # 3 complex numbers, sorted by real part descending
    classification: Classification


@dataclass(frozen=True)
class LyapunovConfig:
    """Timing of a spectrum estimate: transient is discarded first, then the
    exponents are accumulated over t_total with a reorthonormalization every
    renorm_interval time units."""

    step: float = 0.005
    t_total: float = 5000.0
    transient: float = 200.0
    renorm_interval: float = 1.0

    def __post_init__(self):
        if not (self.step > 0 and self.t_total > 0 and self.transient >= 0):
            raise ValueError("invalid Lyapunov timing configuration")
        if self.renorm_interval < self.step:
            raise ValueError("renorm_interval must be at least one step")

    @property
    def steps_per_renorm(self) -> int:
        return max(1, int(round(self.renorm_interval / self.step)))

    @property
    def n_renorms(self) -> int:
        return max(1, int(round(self.t_total / self.renorm_interval)))

    @property
    def transient_steps(self) -> int:
        return int(round(self.transient / self.step))


@dataclass
class LyapunovSpectrum:
    """Exponent estimates (descending) with per-renormalization history.

    ``history`` rows are the running estimates after each renormalization, in
    tangent-frame (QR) order.  ``transverse`` is filled only by the coupled
    drive-response estimator: time averages of the two diagonal error-block
    rates.
    """

    exponents: np.ndarray
    history: np.ndarray
    config: LyapunovConfig
    transverse: np.ndarray | None = None


@dataclass
class SlowManifoldSample:
    point: np.ndarray
    fast_eigenvalue: float
    residual: float


def equilibria(params: SystemParams) -> list:
    """The five closed-form equilibria of the linear variant.

    Order: origin, axial (1, 1+r, 0), planar (sqrt(q/p), 0, .), and the two
    negative-prey points (-1/r, 0, 0) and (-sqrt(q/p), 0, .).
    """
    p, q, r = params.p, params.q, params.r
    s = math.sqrt(q / p)
    root_pq = math.sqrt(p * q)
    return [
        np.array([0.0, 0.0, 0.0]),
        np.array([1.0, 1.0 + r, 0.0]),
        np.array([s, 0.0, (1.0 + r * s) / root_pq]),
        np.array([-1.0 / r, 0.0, 0.0]),
        np.array([-s, 0.0, (-1.0 + r * s) / root_pq]),
    ]


def _char_poly_coeffs(J: np.ndarray) -> tuple:
    """(c2, c1, c0) = (-trace, sum of principal 2x2 minors, -det)."""
    c2 = -(J[0, 0] + J[1, 1] + J[2, 2])
    c1 = (
        (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        + (J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0])
        + (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    )
    det = (
        J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
        + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
    )
    return c2, c1, -det


def _newton_polish(z: complex, c2: float, c1: float, c0: float) -> complex:
    dp = 3.0 * z * z + 2.0 * c2 * z + c1
    if dp == 0:
        return z
    return z - (((z + c2) * z + c1) * z + c0) / dp


def cubic_roots(c2: float, c1: float, c0: float) -> tuple:
    """Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0, one Newton polish each.

    Real roots come out with an exactly-zero imaginary part; a complex pair is
    returned exactly conjugate.
    """
    shift = c2 / 3.0
    pd = c1 - c2 * c2 / 3.0
    qd = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (qd / 2.0) ** 2 + (pd / 3.0) ** 3
    if disc <= 0.0:
        # three real roots, trigonometric branch
        if pd == 0.0:  # triple root
            roots = [-shift, -shift, -shift]
        else:
            m = 2.0 * math.sqrt(-pd / 3.0)
            arg = 3.0 * qd / (pd * m)
            arg = min(1.0, max(-1.0, arg))
            theta = math.acos(arg) / 3.0
            roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
        roots = [complex(_newton_polish(complex(v, 0.0), c2, c1, c0).real, 0.0) for v in roots]
    else:
        sq = math.sqrt(disc)
        u = np.cbrt(-qd / 2.0 + sq)
        v = np.cbrt(-qd / 2.0 - sq)
        lam1 = u + v - shift
        lam1 = _newton_polish(complex(lam1, 0.0), c2, c1, c0).real
        # deflate: lambda^2 + B lambda + C
        B = c2 + lam1
        C = c1 + lam1 * B
        quad_disc = B * B / 4.0 - C
        if quad_disc >= 0.0:
            rq = math.sqrt(quad_disc)
            z2 = _newton_polish(complex(-B / 2.0 + rq, 0.0), c2, c1, c0)
            z3 = _newton_polish(complex(-B / 2.0 - rq, 0.0), c2, c1, c0)
            roots = [complex(lam1, 0.0), complex(z2.real, 0.0), complex(z3.real, 0.0)]
        else:
            z = _newton_polish(complex(-B / 2.0, math.sqrt(-quad_disc)), c2, c1, c0)
            roots = [complex(lam1, 0.0), z, z.conjugate()]
    roots.sort(key=lambda z: (-z.real, -z.imag))
    return tuple(roots)


def _classify_eigenvalues(eigs) -> Classification:
    re = [z.real for z in eigs]
    has_complex = any(z.imag != 0.0 for z in eigs)
    if any(abs(v) < _MARGINAL_TOL for v in re):
        return Classification.MARGINAL
    if all(v < 0 for v in re):
        return Classification.STABLE_FOCUS_NODE if has_complex else Classification.STABLE_NODE
    if all(v > 0 for v in re):
        return Classification.UNSTABLE_FOCUS
    return Classification.SADDLE


def classify(params: SystemParams, point, kind: ModelKind = ModelKind.LINEAR) -> StabilityReport:
    """Characteristic polynomial, eigenvalues and stability label at ``point``."""
    point = np.asarray(point, dtype=float)
    J = jacobian(kind, params, point)
    c2, c1, c0 = _char_poly_coeffs(J)
    eigs = cubic_roots(c2, c1, c0)
    return StabilityReport(
        point=point,
        char_poly=(c2, c1, c0),
        eigenvalues=eigs,
        classification=_classify_eigenvalues(eigs),
    )


def lyapunov_spectrum(
    kind: ModelKind,
    params: SystemParams,
    x0,
    config: LyapunovConfig | None = None,
    tangent0: np.ndarray | None = None,
) -> LyapunovSpectrum:
    """Lyapunov exponents along the orbit from ``x0`` (tangent-space method).

    The state and three tangent vectors are advanced jointly under the
    analytic Jacobian; tangents are reorthonormalized every
    ``config.renorm_interval`` and the accumulated log norms divided by the
    total time give the exponents (sorted descending).
    """
    from . import _kernels

    config = config or LyapunovConfig()
    x0 = np.asarray(x0, dtype=float)
    V0 = np.eye(3) if tangent0 is None else np.array(tangent0, dtype=float)
    if V0.shape != (3, 3):
        raise ValueError("tangent0 must be a 3x3 frame (one vector per row)")
    S, hist, _, status, fail_step = _kernels.benettin3(
        kind.code,
        params.p,
        params.q,
        params.r,
        params.d,
        x0,
        config.step,
        config.transient_steps,
        config.steps_per_renorm,
        config.n_renorms,
        V0,
    )
    if status == 1:
        raise DivergenceError(
            f"state diverged at t={fail_step * config.step:.6g}",
            time=fail_step * config.step,
        )
    if status == 2:
        raise RuntimeError("tangent norm underflow during reorthonormalization")
    total_t = config.n_renorms * config.steps_per_renorm * config.step
    exps = np.sort(S / total_t)[::-1]
    return LyapunovSpectrum(exponents=exps, history=hist, config=config)


def orbit_average_divergence(
    params: SystemParams, x0, config: LyapunovConfig | None = None
) -> float:
    """Time average of the field divergence along the same orbit the spectrum
    estimator uses (identical stepping); independent cross-check for the
    spectrum sum."""
    from . import _kernels

    config = config or LyapunovConfig()
    n_total = config.n_renorms * config.steps_per_renorm
    states, fail = _kernels.traj3(
        ModelKind.LINEAR.code,
        params.p,
        params.q,
        params.r,
        params.d,
        np.asarray(x0, dtype=float),
        config.step,
        config.transient_steps + n_total,
        config.transient_steps,
        1,
    )
    if fail >= 0:
        raise DivergenceError(f"state diverged at t={fail * config.step:.6g}")
    x1, x2, x3 = states[:, 0], states[:, 1], states[:, 2]
    p, q, r = params.p, params.q, params.r
    div = -q - x2 + (2.0 * r + 1.0 + p * x1 - 2.0 * p * x3) * x1
    return float(div.mean())


def _fast_eigenvalue(params: SystemParams, point) -> float:
    report = classify(params, point)
    real_eigs = [z.real for z in report.eigenvalues if z.imag == 0.0]
    if not real_eigs:
        raise RuntimeError("no real eigenvalue found (numerical failure)")
    return min(real_eigs)


def slow_manifold_residual(params: SystemParams, point) -> SlowManifoldSample:
    """Orthogonality defect between the flow and the fast left eigenvector.

    The fast eigenvalue is the most negative real eigenvalue of the Jacobian
    at ``point``; the left eigenvector for it is built in closed form from the
    Jacobian's sparsity.  A point lies on the slow manifold iff the returned
    residual vanishes.
    """
    point = np.asarray(point, dtype=float)
    lam = _fast_eigenvalue(params, point)
    p, q = params.p, params.q
    x1 = point[0]
    b = -1.0 + x1 - lam          # (2,2) entry minus lambda
    g = -q + p * x1 * x1 - lam   # (3,3) entry minus lambda
    Z = np.array([b * g, x1 * g, p * x1 * x1 * b])
    f = vector_field(ModelKind.LINEAR, params, point)
    return SlowManifoldSample(point=point, fast_eigenvalue=lam, residual=float(f @ Z))


# Expanded form of the slow-manifold residual for the reference parameter set
# (2.9851, 3, 2), as a polynomial in the fast eigenvalue.  Only valid there.
_POLY_PARAMS = (2.9851, 3.0, 2.0)


def slow_manifold_residual_poly(point, fast_eigenvalue: float) -> float:
    """Expanded-polynomial twin of :func:`slow_manifold_residual` for the
    reference parameter set; used as an independent cross-check."""
    x1, x2, x3 = float(point[0]), float(point[1]), float(point[2])
    lam = fast_eigenvalue
    c2 = x1 - x1 * x2 + 2.0 * x1 ** 2 - 2.9851 * x1 ** 2 * x3
    c1 = (
        4.0 * x1
        + 7.0 * x1 ** 2
        - 4.9851 * x1 ** 3
        - 3.0 * x1 * x2
        + 2.9851 * x1 ** 3 * x2
        - 5.9702 * x1 ** 4
        - 2.9851 * x1 ** 2 * x3
        + 2.9851 * x1 ** 3 * x3
    )
    c0 = 3.0 * x1 + 3.0 * x1 ** 2 - 8.9851 * x1 ** 3 - 2.9851 * x1 ** 4 + 5.9702 * x1 ** 5
    return (c2 * lam + c1) * lam + c0


def contraction_constant(params: SystemParams, M: float, T: float) -> float:
    """Lipschitz-type contraction constant of the time-T solution map on the
    box max|x_i| <= M; K < 1 guarantees uniqueness of the solution there."""
    if not (M > 0 and T > 0):
        raise ValueError("M and T must be positive")
    p, q, r = params.p, params.q, params.r
    return T * max(
        1.0 + 2.0 * M + 2.0 * r * M + 4.0 * p * M * M,
        1.0 + 2.0 * M,
        q + 2.0 * p * M * M,
    )


def uniqueness_regime(params: SystemParams, M: float, T: float) -> bool:
    """True iff the contraction constant is below 1."""
    return contraction_constant(params, M, T) < 1.0
