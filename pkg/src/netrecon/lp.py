"""Dense two-phase simplex with Bland's rule.

Solves ``min c.z  s.t.  A_ub z <= b_ub,  A_eq z = b_eq`` over free variables
(or non-negative ones where ``nonneg`` says so). Problems here have at most a
few dozen variables, so a dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NetReconError, ParameterError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray | None
    fun: float | None
    iterations: int

    @property
    def ok(self):
        return self.status == OPTIMAL


def _as_rows(A, b, n, name):
    if A is None:
        if b is not None and np.size(b):
            raise ParameterError(f"{name}: right-hand side given without a matrix")
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n or A.shape[0] != b.size:
        raise ParameterError(f"{name}: expected shape (m, {n}) with m right-hand sides, got {A.shape} and {b.size}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ParameterError(f"{name}: non-finite coefficients")
    return A, b


def lp_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonneg=None, tol=1e-9, max_iter=5000) -> LPResult:
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    if not np.all(np.isfinite(c)):
        raise ParameterError("objective has non-finite coefficients")
    Aub, bub = _as_rows(A_ub, b_ub, n, "A_ub")
    Aeq, beq = _as_rows(A_eq, b_eq, n, "A_eq")
    nonneg = np.zeros(n, dtype=bool) if nonneg is None else np.asarray(nonneg, dtype=bool).ravel()
    if nonneg.size != n:
        raise ParameterError("nonneg mask length does not match the objective")

    # z = S y with y >= 0; free variables split into a +/- pair
    cols = []
    for j in range(n):
        cols.append((j, 1.0))
        if not nonneg[j]:
            cols.append((j, -1.0))
    S = np.zeros((n, len(cols)))
    for k, (j, sgn) in enumerate(cols):
        S[j, k] = sgn
    ns = S.shape[1]
    m_ub, m_eq = bub.size, beq.size
    m = m_ub + m_eq

    rows = np.zeros((m, ns + m_ub))
    rows[:m_ub, :ns] = Aub @ S
    rows[:m_ub, ns:] = np.eye(m_ub)
    rows[m_ub:, :ns] = Aeq @ S
    rhs = np.concatenate([bub, beq])
    flip = rhs < 0
    rows[flip] *= -1.0
    rhs = np.where(flip, -rhs, rhs)

    need_art = [k for k in range(m) if k >= m_ub or flip[k]]
    art0 = ns + m_ub
    N = art0 + len(need_art)
    T = np.zeros((m + 1, N + 1))
    T[:m, :art0] = rows
    T[:m, -1] = rhs
    basis = np.zeros(m, dtype=np.int64)
    for k in range(m_ub):
        basis[k] = ns + k
    for a, k in enumerate(need_art):
        T[k, art0 + a] = 1.0
        basis[k] = art0 + a
        T[m] -= T[k]
    T[m, art0:N] = 0.0

    status, it1 = kernels.simplex_iterate(T, basis, N, tol, max_iter)
    if status == kernels.SIMPLEX_ITERATION_LIMIT:
        raise NetReconError("simplex iteration limit reached in phase 1")
    scale = 1.0 + (np.max(np.abs(rhs)) if m else 0.0)
    if -T[m, -1] > tol * scale * 10:
        return LPResult(INFEASIBLE, None, None, it1)

    keep = []
    for k in range(m):
        if basis[k] >= art0:
            piv = [j for j in range(art0) if abs(T[k, j]) > tol]
            if not piv:
                continue  # redundant equality
            kernels.simplex_pivot(T, basis, k, piv[0])
        keep.append(k)
    T2 = np.zeros((len(keep) + 1, art0 + 1))
    T2[:-1, :art0] = T[keep, :art0]
    T2[:-1, -1] = T[keep, -1]
    basis2 = basis[keep].copy()
    cost = np.zeros(art0)
    cost[:ns] = c @ S
    T2[-1, :art0] = cost
    for k, b in enumerate(basis2):
        T2[-1] -= cost[b] * T2[k]

    status, it2 = kernels.simplex_iterate(T2, basis2, art0, tol, max_iter)
    if status == kernels.SIMPLEX_ITERATION_LIMIT:
        raise NetReconError("simplex iteration limit reached in phase 2")
    if status == kernels.SIMPLEX_UNBOUNDED:
        return LPResult(UNBOUNDED, None, None, it1 + it2)
    y = np.zeros(art0)
    y[basis2] = T2[:-1, -1]
    z = S @ y[:ns]
    return LPResult(OPTIMAL, z, float(c @ z), it1 + it2)
