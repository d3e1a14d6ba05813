"""Hot loops: RK4 stepping, trapezoid moments, simplex pivoting.

Every kernel is registered twice: the plain numpy function (``python_version``)
and the dispatched one exported at module level, which is numba-compiled
unless ``NETRECON_DISABLE_NUMBA`` is set.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit

_PYTHON = {}

GLV = 0
LINEAR = 1

SIMPLEX_OPTIMAL = 0
SIMPLEX_UNBOUNDED = 1
SIMPLEX_ITERATION_LIMIT = 2


def _kernel(fn):
    _PYTHON[fn.__name__] = fn
    return njit(fn)


def python_version(name):
    """Return the uncompiled implementation of kernel ``name``."""
    return _PYTHON[name]


# -- ODE right-hand side and RK4 -------------------------------------------


@_kernel
def pairwise_rhs(A, coupling, r, amp, freq, phase, t, x):
    ax = A @ x
    drift = x * ax if coupling == 0 else ax
    u = r * x + (amp * np.sin(freq * t + phase)).sum(axis=1)
    return drift + u, u


@_kernel
def rk4_pairwise(A, coupling, r, amp, freq, phase, x0, t0, step, nsteps, bound):
    """Fixed-step RK4 for ``dx = A.f(x) + r*x + forcing(t)``.

    Returns (states, derivatives, inputs, bad) where ``bad`` is the index of
    the first sample that left the finite ball of radius ``bound`` (-1 if none).
    """
    n = x0.shape[0]
    X = np.zeros((nsteps + 1, n))
    DX = np.zeros((nsteps + 1, n))
    U = np.zeros((nsteps + 1, n))
    x = x0.copy()
    X[0] = x
    k1, u = pairwise_rhs(A, coupling, r, amp, freq, phase, t0, x)
    DX[0] = k1
    U[0] = u
    half = 0.5 * step
    for k in range(nsteps):
        t = t0 + k * step
        k2, _ = pairwise_rhs(A, coupling, r, amp, freq, phase, t + half, x + half * k1)
        k3, _ = pairwise_rhs(A, coupling, r, amp, freq, phase, t + half, x + half * k2)
        k4, _ = pairwise_rhs(A, coupling, r, amp, freq, phase, t + step, x + step * k3)
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
            return X[: k + 1], DX[: k + 1], U[: k + 1], k + 1
        X[k + 1] = x
        k1, u = pairwise_rhs(A, coupling, r, amp, freq, phase, t0 + (k + 1) * step, x)
        DX[k + 1] = k1
        U[k + 1] = u
    return X, DX, U, -1


# -- trapezoid moments ------------------------------------------------------


@_kernel
def trapezoid_moments(F, y, step):
    """Trapezoid-rule ``int f f^T``, ``int f y`` and ``int y^2`` on a uniform grid."""
    m = F.shape[0]
    wts = np.full(m, step)
    wts[0] = 0.5 * step
    wts[m - 1] = 0.5 * step
    Fw = F * wts.reshape((m, 1))
    FwT = np.ascontiguousarray(Fw.T)
    M = FwT @ F
    M = 0.5 * (M + M.T)
    w = FwT @ y
    yy = np.sum(wts * y * y)
    return M, w, yy


# -- simplex ----------------------------------------------------------------


@_kernel
def simplex_pivot(T, basis, row, col):
    T[row] = T[row] / T[row, col]
    for k in range(T.shape[0]):
        if k != row:
            f = T[k, col]
            if f != 0.0:
                T[k] = T[k] - f * T[row]
    basis[row] = col


@_kernel
def simplex_iterate(T, basis, ncols, tol, max_iter):
    """Primal simplex on tableau ``T`` with Bland's rule.

    Constraint rows are ``T[:-1]``, the reduced-cost row is ``T[-1]`` and the
    right-hand side is the last column. Only columns ``< ncols`` may enter.
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while it < max_iter:
        col = -1
        for j in range(ncols):
            if T[m, j] < -tol:
                col = j
                break
        if col < 0:
            return SIMPLEX_OPTIMAL, it
        row = -1
        best = np.inf
        for k in range(m):
            a = T[k, col]
            if a > tol:
                ratio = T[k, rhs] / a
                if row < 0 or ratio < best - 1e-12:
                    row = k
                    best = ratio
                elif ratio <= best + 1e-12 and basis[k] < basis[row]:
                    row = k
                    best = min(best, ratio)
        if row < 0:
            return SIMPLEX_UNBOUNDED, it
        simplex_pivot(T, basis, row, col)
        it += 1
    return SIMPLEX_ITERATION_LIMIT, it


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    A = -np.eye(2)
    z = np.zeros((2, 1))
    for coupling in (GLV, LINEAR):
        rk4_pairwise(A, coupling, np.zeros(2), z, z, z, np.ones(2), 0.0, 0.1, 2, 1e12)
    trapezoid_moments(np.ones((3, 2)), np.ones(3), 0.1)
    T = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 0.0]])
    simplex_iterate(T, np.array([1]), 1, 1e-9, 10)
    return NUMBA_ENABLED
