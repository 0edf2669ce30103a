"""Toolkit for the 3-species generalized Lotka-Volterra system: simulation,
equilibrium stability analysis, Lyapunov spectra, feedback stabilization, and
complete-replacement drive-response synchronization."""

from .analysis import (
    Classification,
    LyapunovConfig,
    LyapunovSpectrum,
    SlowManifoldSample,
    StabilityReport,
    classify,
    contraction_constant,
    cubic_roots,
    equilibria,
    lyapunov_spectrum,
    orbit_average_divergence,
    slow_manifold_residual,
    slow_manifold_residual_poly,
    uniqueness_regime,
)
from .control import (
    FeedbackGains,
    GainReport,
    NotAnEquilibriumError,
    StabilizationResult,
    controlled_field,
    make_controlled_field,
    stabilize_experiment,
    validate_gains,
)
from .integrators import (
    DivergenceError,
    IntegrationConfig,
    Trajectory,
    integrate,
    rk4_step,
)
from .models import (
    ModelKind,
    SystemParams,
    divergence,
    is_dissipative_at,
    jacobian,
    make_field,
    vector_field,
)
from .sync import (
    ActiveSyncResult,
    AdaptiveResult,
    SyncConditionReport,
    SyncErrors,
    SyncGains,
    active_coupled_field,
    active_experiment,
    adaptive_coupled_field,
    adaptive_experiment,
    conditional_lyapunov_spectrum,
    frozen_eigenvalue_averages,
    make_active_field,
    make_adaptive_field,
    sync_condition_check,
    sync_errors,
)

__version__ = "0.1.0"
