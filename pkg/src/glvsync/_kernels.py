"""Numba kernels for the integration-heavy loops.

These mirror the pure-Python field/Jacobian definitions in ``models`` and
``sync`` (a test pins the two implementations against each other).  Tangent
matrices store one tangent vector per row so every hot operation touches
contiguous memory.

Status codes returned by the long-running kernels:
0 = completed, 1 = state diverged (|component| >= 1e12 or non-finite),
2 = tangent norm underflow during reorthonormalization.
"""

import numpy as np
from numba import njit

GUARD = 1.0e12
TANGENT_FLOOR = 1.0e-300


@njit(cache=True)
def field3(kind, p, q, r, d, x):
    f = np.empty(3)
    x1, x2, x3 = x[0], x[1], x[2]
    if kind == 0:
        f[0] = x1 * (1.0 - x2 + r * x1 - p * x3 * x1)
        f[1] = x2 * (-1.0 + x1)
        f[2] = x3 * (-q + p * x1 * x1)
    elif kind == 1:
        den = x1 + d
        f[0] = x1 - x1 * x2 / den + r * x1 * x1 - p * x1 * x1 * x3
        f[1] = -x2 + x1 * x2 / den
        f[2] = -q * x3 + p * x3 * x1 * x1
    else:
        den = x1 * x1 + d
        f[0] = x1 - x1 * x2 + r * x1 * x1 - p * x1 * x1 * x3 / den
        f[1] = -x2 + x1 * x2
        f[2] = -q * x3 + p * x1 * x1 * x3 / den
    return f


@njit(cache=True)
def jac3(kind, p, q, r, d, x):
    J = np.zeros((3, 3))
    x1, x2, x3 = x[0], x[1], x[2]
    if kind == 0:
        J[0, 0] = 1.0 - x2 + 2.0 * r * x1 - 2.0 * p * x1 * x3
        J[0, 1] = -x1
        J[0, 2] = -p * x1 * x1
        J[1, 0] = x2
        J[1, 1] = -1.0 + x1
        J[2, 0] = 2.0 * p * x1 * x3
        J[2, 2] = -q + p * x1 * x1
    elif kind == 1:
        den = x1 + d
        J[0, 0] = 1.0 - d * x2 / (den * den) + 2.0 * r * x1 - 2.0 * p * x1 * x3
        J[0, 1] = -x1 / den
        J[0, 2] = -p * x1 * x1
        J[1, 0] = d * x2 / (den * den)
        J[1, 1] = -1.0 + x1 / den
        J[2, 0] = 2.0 * p * x1 * x3
        J[2, 2] = -q + p * x1 * x1
    else:
        den = x1 * x1 + d
        J[0, 0] = 1.0 - x2 + 2.0 * r * x1 - 2.0 * p * d * x1 * x3 / (den * den)
        J[0, 1] = -x1
        J[0, 2] = -p * x1 * x1 / den
        J[1, 0] = x2
        J[1, 1] = -1.0 + x1
        J[2, 0] = 2.0 * p * d * x1 * x3 / (den * den)
        J[2, 2] = -q + p * x1 * x1 / den
    return J


@njit(cache=True)
def rk4_step3(kind, p, q, r, d, x, h):
    k1 = field3(kind, p, q, r, d, x)
    k2 = field3(kind, p, q, r, d, x + 0.5 * h * k1)
    k3 = field3(kind, p, q, r, d, x + 0.5 * h * k2)
    k4 = field3(kind, p, q, r, d, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _bad3(x):
    for c in range(3):
        if not (abs(x[c]) < GUARD):
            return True
    return False


@njit(cache=True)
def traj3(kind, p, q, r, d, x0, h, n_steps, i0, stride):
    """Record states at steps i0, i0+stride, ... Returns (states, fail_step).

    fail_step is -1 on success, otherwise the first step index at which the
    state violated the guard (the recorded array stops before it).
    """
    n_rec = (n_steps - i0) // stride + 1 if n_steps >= i0 else 0
    out = np.empty((n_rec, 3))
    x = x0.copy()
    j = 0
    for i in range(n_steps + 1):
        if i >= i0 and (i - i0) % stride == 0:
            out[j] = x
            j += 1
        if i == n_steps:
            break
        x = rk4_step3(kind, p, q, r, d, x, h)
        if _bad3(x):
            return out[:j], i + 1
    return out[:j], -1


@njit(cache=True)
def min_component_run(kind, p, q, r, d, x0, h, n_steps):
    """Minimum state component visited over the run (guard-aware)."""
    x = x0.copy()
    lo = min(x[0], min(x[1], x[2]))
    for i in range(n_steps):
        x = rk4_step3(kind, p, q, r, d, x, h)
        if _bad3(x):
            return -np.inf
        m = min(x[0], min(x[1], x[2]))
        if m < lo:
            lo = m
    return lo


@njit(cache=True)
def _tangent_rhs(J, V, out):
    # row i of out = J @ (row i of V)
    k = V.shape[0]
    for i in range(k):
        for a in range(k):
            s = 0.0
            for b in range(k):
                s += J[a, b] * V[i, b]
            out[i, a] = s


@njit(cache=True)
def _gram_schmidt_rows(V, S):
    """Modified Gram-Schmidt on rows; accumulates log norms into S.

    Returns False if a row norm underflows below TANGENT_FLOOR.
    """
    k = V.shape[0]
    for j in range(k):
        for m in range(j):
            proj = 0.0
            for b in range(k):
                proj += V[j, b] * V[m, b]
            for b in range(k):
                V[j, b] -= proj * V[m, b]
        nrm = 0.0
        for b in range(k):
            nrm += V[j, b] * V[j, b]
        nrm = np.sqrt(nrm)
        if nrm < TANGENT_FLOOR:
            return False
        for b in range(k):
            V[j, b] /= nrm
        S[j] += np.log(nrm)
    return True


@njit(cache=True)
def benettin3(kind, p, q, r, d, x0, h, n_trans, spr, n_renorms, V0):
    """Tangent-space Lyapunov spectrum of a 3-D model.

    V0 holds the initial tangent frame, one vector per row.  Returns
    (log-sums, per-renorm running estimates, final state, status, fail_step).
    """
    x = x0.copy()
    for i in range(n_trans):
        x = rk4_step3(kind, p, q, r, d, x, h)
        if _bad3(x):
            return np.zeros(3), np.zeros((0, 3)), x, 1, i + 1
    V = V0.copy()
    S = np.zeros(3)
    hist = np.empty((n_renorms, 3))
    kV = np.empty((3, 3))
    K1 = np.empty((3, 3))
    K2 = np.empty((3, 3))
    K3 = np.empty((3, 3))
    K4 = np.empty((3, 3))
    step = 0
    for kk in range(n_renorms):
        for i in range(spr):
            k1 = field3(kind, p, q, r, d, x)
            _tangent_rhs(jac3(kind, p, q, r, d, x), V, K1)
            xs = x + 0.5 * h * k1
            k2 = field3(kind, p, q, r, d, xs)
            kV[:] = V + 0.5 * h * K1
            _tangent_rhs(jac3(kind, p, q, r, d, xs), kV, K2)
            xs = x + 0.5 * h * k2
            k3 = field3(kind, p, q, r, d, xs)
            kV[:] = V + 0.5 * h * K2
            _tangent_rhs(jac3(kind, p, q, r, d, xs), kV, K3)
            xs = x + h * k3
            k4 = field3(kind, p, q, r, d, xs)
            kV[:] = V + h * K3
            _tangent_rhs(jac3(kind, p, q, r, d, xs), kV, K4)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            V = V + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
            step += 1
            if _bad3(x):
                return S, hist[:kk], x, 1, n_trans + step
        if not _gram_schmidt_rows(V, S):
            return S, hist[:kk], x, 2, n_trans + step
        hist[kk] = S / ((kk + 1) * spr * h)
    return S, hist, x, 0, -1


@njit(cache=True)
def field5(p, q, r, mu1, mu2, s):
    # drive block evaluated by the 3-D kernel so one-way coupling is bitwise
    f = np.empty(5)
    fd = field3(0, p, q, r, 0.0, s[:3])
    x1d, x2d, x3d, x2r, x3r = s[0], s[1], s[2], s[3], s[4]
    f[0] = fd[0]
    f[1] = fd[1]
    f[2] = fd[2]
    f[3] = x2r * (-1.0 + x1d) - mu1 * (x2r - x2d)
    f[4] = x3r * (-q + p * x1d * x1d) - mu2 * (x3r - x3d)
    return f


@njit(cache=True)
def jac5(p, q, r, mu1, mu2, s):
    J = np.zeros((5, 5))
    x1d, x2d, x3d, x2r, x3r = s[0], s[1], s[2], s[3], s[4]
    J[0, 0] = 1.0 - x2d + 2.0 * (r - p * x3d) * x1d
    J[0, 1] = -x1d
    J[0, 2] = -p * x1d * x1d
    J[1, 0] = x2d
    J[1, 1] = -1.0 + x1d
    J[2, 0] = 2.0 * p * x1d * x3d
    J[2, 2] = -q + p * x1d * x1d
    J[3, 0] = x2r
    J[3, 1] = mu1
    J[3, 3] = -1.0 + x1d - mu1
    J[4, 0] = 2.0 * p * x1d * x3r
    J[4, 2] = mu2
    J[4, 4] = -q + p * x1d * x1d - mu2
    return J


@njit(cache=True)
def _bad5(s):
    for c in range(5):
        if not (abs(s[c]) < GUARD):
            return True
    return False


@njit(cache=True)
def rk4_step5(p, q, r, mu1, mu2, s, h):
    k1 = field5(p, q, r, mu1, mu2, s)
    k2 = field5(p, q, r, mu1, mu2, s + 0.5 * h * k1)
    k3 = field5(p, q, r, mu1, mu2, s + 0.5 * h * k2)
    k4 = field5(p, q, r, mu1, mu2, s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def traj5(p, q, r, mu1, mu2, s0, h, n_steps, i0, stride):
    """5-D twin of traj3 for the actively-coupled drive-response system."""
    n_rec = (n_steps - i0) // stride + 1 if n_steps >= i0 else 0
    out = np.empty((n_rec, 5))
    s = s0.copy()
    j = 0
    for i in range(n_steps + 1):
        if i >= i0 and (i - i0) % stride == 0:
            out[j] = s
            j += 1
        if i == n_steps:
            break
        s = rk4_step5(p, q, r, mu1, mu2, s, h)
        if _bad5(s):
            return out[:j], i + 1
    return out[:j], -1


@njit(cache=True)
def benettin5(p, q, r, mu1, mu2, s0, h, n_trans, spr, n_renorms, V0):
    """5-D drive-response Lyapunov spectrum plus transverse-rate averages.

    Alongside the QR bookkeeping, accumulates the time averages of the two
    diagonal error-block rates (-1-mu1+x1d) and (-q-mu2+p*x1d^2), which are
    the transverse exponents of the synchronization manifold.
    """
    s = s0.copy()
    for i in range(n_trans):
        s = rk4_step5(p, q, r, mu1, mu2, s, h)
        if _bad5(s):
            return np.zeros(5), np.zeros((0, 5)), 0.0, 0.0, s, 1, i + 1
    V = V0.copy()
    S = np.zeros(5)
    hist = np.empty((n_renorms, 5))
    kV = np.empty((5, 5))
    K1 = np.empty((5, 5))
    K2 = np.empty((5, 5))
    K3 = np.empty((5, 5))
    K4 = np.empty((5, 5))
    tsum2 = 0.0
    tsum3 = 0.0
    step = 0
    for kk in range(n_renorms):
        for i in range(spr):
            tsum2 += -1.0 - mu1 + s[0]
            tsum3 += -q - mu2 + p * s[0] * s[0]
            k1 = field5(p, q, r, mu1, mu2, s)
            _tangent_rhs(jac5(p, q, r, mu1, mu2, s), V, K1)
            ss = s + 0.5 * h * k1
            k2 = field5(p, q, r, mu1, mu2, ss)
            kV[:] = V + 0.5 * h * K1
            _tangent_rhs(jac5(p, q, r, mu1, mu2, ss), kV, K2)
            ss = s + 0.5 * h * k2
            k3 = field5(p, q, r, mu1, mu2, ss)
            kV[:] = V + 0.5 * h * K2
            _tangent_rhs(jac5(p, q, r, mu1, mu2, ss), kV, K3)
            ss = s + h * k3
            k4 = field5(p, q, r, mu1, mu2, ss)
            kV[:] = V + h * K3
            _tangent_rhs(jac5(p, q, r, mu1, mu2, ss), kV, K4)
            s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            V = V + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
            step += 1
            if _bad5(s):
                return S, hist[:kk], tsum2, tsum3, s, 1, n_trans + step
        if not _gram_schmidt_rows(V, S):
            return S, hist[:kk], tsum2, tsum3, s, 2, n_trans + step
        hist[kk] = S / ((kk + 1) * spr * h)
    n = n_renorms * spr
    return S, hist, tsum2 / n, tsum3 / n, s, 0, -1
