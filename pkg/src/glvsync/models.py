"""Three-species generalized Lotka-Volterra vector fields and their Jacobians.

State vectors are plain length-3 numpy arrays ``(x1, x2, x3)`` holding the
prey, middle-predator and top-predator densities.  Three functional-response
variants are provided:

* ``LINEAR``   - bilinear predation, top predator feeding at rate p*x1^2,
* ``HOLLING2`` - saturating (hyperbolic) prey/middle-predator interaction,
* ``HOLLING3`` - sigmoidal prey/top-predator interaction.

All densities and time are dimensionless.  Negative components are admissible
inputs (two of the closed-form equilibria have negative prey density), so no
positivity is enforced here.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ModelKind",
    "SystemParams",
    "vector_field",
    "make_field",
    "jacobian",
    "divergence",
    "is_dissipative_at",
]


class ModelKind(Enum):
    """Functional-response variant. Values double as the CLI tokens."""

    LINEAR = "linear"
    HOLLING2 = "ht2"
    HOLLING3 = "ht3"

    @property
    def code(self) -> int:
        """Integer code used by the compiled kernels."""
        return {"linear": 0, "ht2": 1, "ht3": 2}[self.value]


@dataclass(frozen=True)
class SystemParams:
    """Model constants.

    p : prey / top-predator coupling strength (> 0)
    q : top-predator mortality (> 0)
    r : prey self-growth (> 0)
    d : half-saturation constant, used only by the Holling variants
        (must be > 0 when one of those is evaluated; ignored otherwise)
    """

    p: float
    q: float
    r: float
    d: float = 0.0

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0 and self.r > 0):
            raise ValueError(f"p, q, r must be positive, got {(self.p, self.q, self.r)}")
        if self.d < 0:
            raise ValueError(f"d must be nonnegative, got {self.d}")


def _require_holling_d(params: SystemParams) -> None:
    if not params.d > 0:
        raise ValueError("Holling variants require d > 0")


def vector_field(kind: ModelKind, params: SystemParams, x) -> np.ndarray:
    """Time derivative (x1', x2', x3') at state ``x``.

    Raises ZeroDivisionError if a Holling denominator (x1+d or x1^2+d)
    vanishes at ``x``.
    """
    p, q, r, d = params.p, params.q, params.r, params.d
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    if kind is ModelKind.LINEAR:
        return np.array([
            x1 * (1.0 - x2 + r * x1 - p * x3 * x1),
            x2 * (-1.0 + x1),
            x3 * (-q + p * x1 * x1),
        ])
    _require_holling_d(params)
    if kind is ModelKind.HOLLING2:
        den = x1 + d
        if den == 0.0:
            raise ZeroDivisionError("Holling type-II denominator x1 + d is zero")
        return np.array([
            x1 - x1 * x2 / den + r * x1 * x1 - p * x1 * x1 * x3,
            -x2 + x1 * x2 / den,
            -q * x3 + p * x3 * x1 * x1,
        ])
    den = x1 * x1 + d
    if den == 0.0:
        raise ZeroDivisionError("Holling type-III denominator x1^2 + d is zero")
    return np.array([
        x1 - x1 * x2 + r * x1 * x1 - p * x1 * x1 * x3 / den,
        -x2 + x1 * x2,
        -q * x3 + p * x1 * x1 * x3 / den,
    ])


def make_field(kind: ModelKind, params: SystemParams):
    """Closure over ``vector_field`` suitable for the integrator."""
    def field(x):
        return vector_field(kind, params, x)

    return field


def jacobian(kind: ModelKind, params: SystemParams, x) -> np.ndarray:
    """Analytic 3x3 Jacobian of :func:`vector_field` at ``x``."""
    p, q, r, d = params.p, params.q, params.r, params.d
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    J = np.zeros((3, 3))
    if kind is ModelKind.LINEAR:
        J[0, 0] = 1.0 - x2 + 2.0 * r * x1 - 2.0 * p * x1 * x3
        J[0, 1] = -x1
        J[0, 2] = -p * x1 * x1
        J[1, 0] = x2
        J[1, 1] = -1.0 + x1
        J[2, 0] = 2.0 * p * x1 * x3
        J[2, 2] = -q + p * x1 * x1
        return J
    _require_holling_d(params)
    if kind is ModelKind.HOLLING2:
        den = x1 + d
        if den == 0.0:
            raise ZeroDivisionError("Holling type-II denominator x1 + d is zero")
        J[0, 0] = 1.0 - d * x2 / (den * den) + 2.0 * r * x1 - 2.0 * p * x1 * x3
        J[0, 1] = -x1 / den
        J[0, 2] = -p * x1 * x1
        J[1, 0] = d * x2 / (den * den)
        J[1, 1] = -1.0 + x1 / den
        J[2, 0] = 2.0 * p * x1 * x3
        J[2, 2] = -q + p * x1 * x1
        return J
    den = x1 * x1 + d
    if den == 0.0:
        raise ZeroDivisionError("Holling type-III denominator x1^2 + d is zero")
    J[0, 0] = 1.0 - x2 + 2.0 * r * x1 - 2.0 * p * d * x1 * x3 / (den * den)
    J[0, 1] = -x1
    J[0, 2] = -p * x1 * x1 / den
    J[1, 0] = x2
    J[1, 1] = -1.0 + x1
    J[2, 0] = 2.0 * p * d * x1 * x3 / (den * den)
    J[2, 2] = -q + p * x1 * x1 / den
    return J


def divergence(params: SystemParams, x) -> float:
    """Divergence of the linear-variant field; equals trace(jacobian)."""
    p, q, r = params.p, params.q, params.r
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    return -q - x2 + (2.0 * r + 1.0 + p * x1 - 2.0 * p * x3) * x1


def is_dissipative_at(params: SystemParams, x) -> bool:
    """True iff the linear-variant flow contracts phase volume at ``x``."""
    return divergence(params, x) < 0.0
