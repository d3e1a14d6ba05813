"""Gram matrix ``M_i = int f_i f_i^T dt``, its kernel, and persistent excitation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EvaluationError, ParameterError, PreconditionError
from .model import RegressorFamily, Trajectory, estimate_derivatives

DEFAULT_RANK_TOL = 1e-8


def _orient(V):
    # deterministic sign: largest-magnitude entry of each column positive
    V = V.copy()
    for k in range(V.shape[1]):
        j = int(np.argmax(np.abs(V[:, k])))
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return V


def check_rank_tol(tol):
    if not 0.0 < tol < 1.0:
        raise ParameterError(f"rank tolerance must lie in (0, 1), got {tol}")
    return float(tol)


@dataclass(frozen=True)
class GramSummary:
    """Gram matrix of one node with its spectral split under a rank tolerance.

    ``kernel`` and ``rowspace`` hold orthonormal bases as columns;
    ``target_energy`` is ``int (dx_i - u_i)^2 dt``. ``residual_energy`` is
    the least-squares misfit at the minimum-norm solution; when computed from
    the samples it avoids the cancellation in ``yy - w.v``.
    """

    node: int
    matrix: np.ndarray
    moment: np.ndarray
    target_energy: float
    singular_values: np.ndarray
    rank: int
    kernel: np.ndarray
    rowspace: np.ndarray
    tol: float = DEFAULT_RANK_TOL
    uncertainty: str = "exact"
    residual_energy: float | None = None

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def kernel_dim(self):
        return self.kernel.shape[1]

    def pinv_solve(self, rhs):
        """Minimum-norm solution of ``M v = rhs`` over the retained spectrum."""
        B = self.rowspace
        s = self.singular_values[: self.rank]
        return B @ ((B.T @ rhs) / s) if self.rank else np.zeros(self.n)

    def report(self):
        ok, margin = pe_check(self)
        return {
            "node": self.node,
            "rank": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
            "kernel_basis": [[float(v) for v in col] for col in self.kernel.T],
            "pe": ok,
            "margin": margin,
        }


def summarize(node, M, w=None, target_energy=0.0, tol=DEFAULT_RANK_TOL, uncertainty="exact",
              residual_energy=None) -> GramSummary:
    """Spectral summary of a symmetric PSD matrix ``M`` (and moment vector ``w``)."""
    tol = check_rank_tol(tol)
    M = np.array(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ParameterError("Gram matrix must be square")
    M = 0.5 * (M + M.T)
    w = np.zeros(n) if w is None else np.array(w, dtype=float)
    evals, evecs = np.linalg.eigh(M)
    order = np.argsort(-np.abs(evals), kind="stable")
    sv = np.abs(evals[order])
    evecs = evecs[:, order]
    smax = sv[0] if n else 0.0
    rank = int(np.sum(sv > tol * smax)) if smax > 0 else 0
    for arr in (M, w, sv):
        arr.setflags(write=False)
    B = _orient(evecs[:, :rank])
    Z = _orient(evecs[:, rank:])
    B.setflags(write=False)
    Z.setflags(write=False)
    g = GramSummary(int(node), M, w, float(target_energy), sv, rank, Z, B, tol, uncertainty)
    if residual_energy is None:
        residual_energy = max(g.target_energy - float(w @ g.pinv_solve(w)), 0.0)
    object.__setattr__(g, "residual_energy", float(residual_energy))
    return g


def compute_gram(traj: Trajectory, reg: RegressorFamily, i: int, tol: float = DEFAULT_RANK_TOL) -> GramSummary:
    """Trapezoid-rule ``M_i`` and ``w_i = int f_i (dx_i - u_i) dt`` from sampled data."""
    if not 0 <= i < traj.n:
        raise ParameterError(f"node index {i} out of range for n = {traj.n}")
    traj = estimate_derivatives(traj)
    F = reg.evaluate(i, traj.x)
    if F.shape != traj.x.shape:
        raise ParameterError(f"regressor returned shape {F.shape}, expected {traj.x.shape}")
    bad = ~np.all(np.isfinite(F), axis=1)
    if bad.any():
        raise EvaluationError(int(np.argmax(bad)))
    y = np.ascontiguousarray(traj.dx[:, i] - traj.u[:, i])
    F = np.array(F, dtype=float, order="C")  # writable, so numba reuses one specialization
    M, w, yy = kernels.trapezoid_moments(F, y, traj.step)
    g = summarize(i, M, w, yy, tol, reg.uncertainty)
    res = y - F @ g.pinv_solve(w)
    energy = traj.step * (res @ res - 0.5 * (res[0] ** 2 + res[-1] ** 2))
    object.__setattr__(g, "residual_energy", float(energy))
    return g


def compute_all(traj, reg, tol=DEFAULT_RANK_TOL):
    return [compute_gram(traj, reg, i, tol) for i in range(traj.n)]


def pe_check(g: GramSummary):
    """``(holds, margin)`` with margin ``sigma_min / sigma_max``."""
    smax = g.singular_values[0] if g.n else 0.0
    margin = float(g.singular_values[-1] / smax) if smax > 0 else 0.0
    return g.rank == g.n, margin


def gram_under_transform(g: GramSummary, G) -> GramSummary:
    """Summary of ``G^T M G`` (and ``G^T w``): the Gram of regressor ``G^T f``."""
    G = np.asarray(getattr(G, "matrix", G), dtype=float)
    if G.shape != g.matrix.shape:
        raise ParameterError("transform shape does not match the Gram matrix")
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= 1e-14 * s[0]:
        raise PreconditionError("transform is singular")
    return summarize(g.node, G.T @ g.matrix @ G, G.T @ g.moment, g.target_energy, g.tol, g.uncertainty,
                     g.residual_energy)
