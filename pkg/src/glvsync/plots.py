"""Figure rendering for the CLI report path.

Each saver takes already-computed arrays and writes a PNG next to the CSV it
illustrates.  Rendering is entirely optional (the --plot flag); everything
here uses the Agg backend so it works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "save_timeseries",
    "save_attractor",
    "save_spectrum_history",
    "save_error_decay",
    "save_adaptive_report",
    "save_eigenvalue_map",
]

_DPI = 130


def save_timeseries(times, states, path, labels=None, pair=None):
    """Stacked per-component time series; a twin run overlays dashed."""
    n = states.shape[1]
    labels = labels or [f"x{i+1}" for i in range(n)]
    fig, axes = plt.subplots(n, 1, figsize=(9, 1.9 * n), sharex=True)
    axes = np.atleast_1d(axes)
    for i, ax in enumerate(axes):
        ax.plot(times, states[:, i], lw=0.8)
        if pair is not None:
            ax.plot(times, pair[:, i], lw=0.8, ls="--")
        ax.set_ylabel(labels[i])
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_attractor(states, path):
    """3-D orbit plus its three coordinate-plane projections."""
    fig = plt.figure(figsize=(9, 7))
    ax = fig.add_subplot(2, 2, 1, projection="3d")
    ax.plot(states[:, 0], states[:, 1], states[:, 2], lw=0.4)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_zlabel("x3")
    for k, (i, j) in enumerate([(0, 1), (0, 2), (1, 2)], start=2):
        ax2 = fig.add_subplot(2, 2, k)
        ax2.plot(states[:, i], states[:, j], lw=0.4)
        ax2.set_xlabel(f"x{i+1}")
        ax2.set_ylabel(f"x{j+1}")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_spectrum_history(times, history, path):
    """Running Lyapunov-exponent estimates per renormalization."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i in range(history.shape[1]):
        ax.plot(times, history[:, i], lw=0.9, label=f"L{i+1}")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("running exponent estimate")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_error_decay(times, errors, path, labels=None):
    """Error magnitudes on a log scale (floored at 1e-18 for plotting)."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    errors = np.atleast_2d(np.asarray(errors))
    labels = labels or [f"e{i}" for i in range(errors.shape[0])]
    for row, lab in zip(errors, labels):
        ax.semilogy(times, np.maximum(np.abs(row), 1e-18), lw=0.9, label=lab)
    ax.set_xlabel("t")
    ax.set_ylabel("|error|")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_adaptive_report(times, e2, e3, p_est, q_est, lyap, path):
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    axes[0].semilogy(times, np.maximum(np.abs(e2), 1e-18), lw=0.9, label="|e2|")
    axes[0].semilogy(times, np.maximum(np.abs(e3), 1e-18), lw=0.9, label="|e3|")
    axes[0].set_ylabel("|error|")
    axes[0].legend(fontsize=8)
    axes[1].plot(times, p_est, lw=0.9, label="P(t)")
    axes[1].plot(times, q_est, lw=0.9, label="Q(t)")
    axes[1].set_ylabel("estimates")
    axes[1].legend(fontsize=8)
    axes[2].plot(times, lyap, lw=0.9)
    axes[2].set_ylabel("L(t)")
    axes[2].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_eigenvalue_map(reports, path):
    """Eigenvalues of the stability reports on the complex plane."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for rep in reports:
        eigs = np.array(rep.eigenvalues, dtype=complex)
        ax.scatter(eigs.real, eigs.imag, s=24, label=f"({rep.point[0]:.3g}, {rep.point[1]:.3g}, {rep.point[2]:.3g})")
    ax.axvline(0.0, color="k", lw=0.5)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
