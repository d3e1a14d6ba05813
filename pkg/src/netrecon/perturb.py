"""Small regressor deformations and adversarial network pairs.

Deformations act on the regressor output, ``f_hat = R f`` with ``R`` close
to the identity, so ``|f_hat - f| <= delta |f|`` along any trajectory and the
deformed Gram matrix is ``R M R^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ParameterError, PreconditionError
from .gram import DEFAULT_RANK_TOL, GramSummary, compute_gram, pe_check, summarize
from .group import CONTAINED, DEFAULT_ZERO_TOL, FULL_DIM, kernel_orbit_containment
from .model import RegressorFamily, check_interaction_matrix, glv_steady_state
from .properties import property_of

ROTATION = "rotation"
ADDITIVE = "additive"


@dataclass(frozen=True)
class DeformationSpec:
    size: float
    kind: str = ROTATION
    seed: int = 0

    def __post_init__(self):
        if self.size < 0 or not np.isfinite(self.size):
            raise ParameterError("deformation size must be a finite non-negative number")
        if self.kind not in (ROTATION, ADDITIVE):
            raise ParameterError(f"unknown deformation kind {self.kind!r}")


def deformation_matrix(spec: DeformationSpec, n: int, node: int) -> np.ndarray:
    """``R`` for one node: ``expm(size*S)`` with unit-norm skew ``S``, or ``I + size*L`` with unit-norm ``L``."""
    rng = np.random.default_rng([spec.seed, node])
    X = rng.normal(size=(n, n))
    if spec.kind == ROTATION:
        S = X - X.T
        norm = np.linalg.norm(S, 2)
        return expm(spec.size * S / norm) if norm > 0 else np.eye(n)
    return np.eye(n) + spec.size * X / np.linalg.norm(X, 2)


def deform(reg: RegressorFamily, spec: DeformationSpec) -> RegressorFamily:
    """Family with ``f_hat_i = R_i f_i`` for every node."""
    mats = {}
    base = reg.evaluator

    def evaluator(i, X):
        n = X.shape[1]
        R = mats.get((i, n))
        if R is None:
            R = mats[(i, n)] = deformation_matrix(spec, n, i)
        return base(i, X) @ R.T

    return RegressorFamily(f"{reg.name}~{spec.kind}({spec.size:g})", evaluator, reg.uncertainty)


def probe_pe_stability(traj, reg, i, deltas, trials=100, seed=0, kind=ADDITIVE, tol=DEFAULT_RANK_TOL):
    """Fraction of random deformations of each size under which PE survives.

    Trial ``k`` uses seed ``(seed, k)`` for every size, so tables are
    reproducible and monotone scans reuse the same directions.
    Rows are ``(delta, trials, survived, fraction)``.
    """
    g = compute_gram(traj, reg, i, tol)
    if not pe_check(g)[0]:
        raise PreconditionError(f"node {i} has no persistent excitation on this trajectory")
    rows = []
    for delta in deltas:
        survived = 0
        for k in range(trials):
            spec = DeformationSpec(float(delta), kind, int(np.random.SeedSequence([seed, k]).generate_state(1)[0]))
            gh = compute_gram(traj, deform(reg, spec), i, tol)
            survived += pe_check(gh)[0]
        rows.append((float(delta), trials, survived, survived / trials if trials else 1.0))
    return rows


def orbit_flip_rotation(g: GramSummary, delta, zero_tol=DEFAULT_ZERO_TOL) -> np.ndarray:
    """Rotation by ``delta`` in the plane of a kernel vector and the coordinates it misses."""
    cont = kernel_orbit_containment(g, zero_tol=zero_tol)
    if g.kernel_dim == 0 or cont.status != CONTAINED:
        raise PreconditionError("needs a nontrivial kernel contained in low-dimensional orbits")
    z = g.kernel[:, 0]
    u = np.zeros(g.n)
    u[list(cont.identifiable)] = 1.0
    u /= np.linalg.norm(u)
    gen = np.outer(u, z) - np.outer(z, u)
    return expm(delta * gen)


def probe_orbit_instability(g: GramSummary, deltas, zero_tol=DEFAULT_ZERO_TOL):
    """Does a rotation of size ``delta`` push the kernel into the full-dimensional orbit?

    Rows are ``(delta, before, after, flipped)``.
    """
    before = kernel_orbit_containment(g, zero_tol=zero_tol).status
    rows = []
    for delta in deltas:
        R = orbit_flip_rotation(g, float(delta), zero_tol)
        gh = summarize(g.node, R @ g.matrix @ R.T, R @ g.moment, g.target_energy, g.tol, g.uncertainty,
                       g.residual_energy)
        after = kernel_orbit_containment(gh, zero_tol=zero_tol).status
        rows.append((float(delta), before, after, before == CONTAINED and after == FULL_DIM))
    return rows


def indistinguishable_pair(A, r, seed=0, max_tries=100):
    """Second GLV matrix sharing the steady state ``x*`` of ``(A, r)``.

    Each row moves by a random vector orthogonal to ``x*``, so
    ``r + A' x* = 0`` still holds; draws are repeated (with growing size)
    until the sign patterns differ. Returns ``(A', x*)``.
    """
    A = check_interaction_matrix(A)
    x = glv_steady_state(A, r)
    if x is None or np.any(x <= 0):
        raise PreconditionError("(A, r) has no positive steady state")
    n = A.shape[0]
    if n < 2:
        raise PreconditionError("a single node has no direction orthogonal to x*")
    rng = np.random.default_rng(seed)
    xh = x / np.linalg.norm(x)
    S = property_of(A, "sign")
    scale = 1.0
    for _ in range(max_tries):
        D = rng.normal(size=(n, n))
        D -= np.outer(D @ xh, xh)
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        D *= scale * rng.uniform(0.5, 1.5, size=(n, 1)) * (1.0 + np.abs(A).max(axis=1, keepdims=True))
        A2 = A + D
        if not np.array_equal(property_of(A2, "sign"), S):
            return A2, x
        scale *= 1.5
    raise PreconditionError("could not find a sign-changing perturbation")
