"""Linear coupling uncertainty: the group of diagonal-plus-row-i matrices and its orbits.

An element acting on node ``i`` vectors is ``G = diag(d) + e_i g^T`` with
``g_i = 0``; it rescales every coordinate and may add a combination of the
others into coordinate ``i``. The orbit of ``v`` is determined by its
off-diagonal support, so adjacency survives while signs and weights do not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .gram import GramSummary

DEFAULT_ZERO_TOL = 1e-9

CONTAINED = "contained-in-low-dim"
FULL_DIM = "reaches-full-dim"

ORBITS_ONLY = "orbits-only"
ALL_INDISTINGUISHABLE = "all-indistinguishable"
STRUCTURALLY_UNSTABLE = "structurally-unstable"


@dataclass(frozen=True)
class GroupElement:
    node: int
    diag: np.ndarray
    row: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).ravel()
        g = np.array(self.row, dtype=float).ravel()
        if g.shape != d.shape or not 0 <= self.node < d.size:
            raise ParameterError("group element shape mismatch")
        if np.any(d == 0.0) or not np.all(np.isfinite(d)) or not np.all(np.isfinite(g)):
            raise ParameterError("group element needs finite entries and a nonzero diagonal")
        g[self.node] = 0.0
        d.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "row", g)

    @property
    def n(self):
        return self.diag.size

    @property
    def matrix(self):
        G = np.diag(self.diag)
        G[self.node] += self.row
        return G

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diag * v
        out[self.node] += self.row @ v
        return out

    def __matmul__(self, other):
        if isinstance(other, GroupElement):
            if other.node != self.node:
                raise ParameterError("cannot compose elements acting on different nodes")
            return GroupElement.from_matrix(self.matrix @ other.matrix, self.node)
        return self.apply(other)

    def inverse(self):
        i = self.node
        return GroupElement(i, 1.0 / self.diag, -self.row / (self.diag * self.diag[i]))

    @classmethod
    def identity(cls, n, i):
        return cls(i, np.ones(n), np.zeros(n))

    @classmethod
    def from_matrix(cls, G, i, tol=0.0):
        G = np.asarray(G, dtype=float)
        mask = np.eye(G.shape[0], dtype=bool)
        mask[i] = True
        off = np.abs(G[~mask])
        if off.size and off.max() > tol:
            raise ParameterError("matrix has entries outside the diagonal and row i")
        return cls(i, np.diag(G).copy(), G[i].copy())

    @classmethod
    def random(cls, n, i, rng, low=0.5, high=2.0):
        """Diagonal magnitudes in ``[low, high]`` with random signs; Gaussian row entries."""
        d = rng.uniform(low, high, size=n) * rng.choice([-1.0, 1.0], size=n)
        return cls(i, d, rng.normal(size=n))


@dataclass(frozen=True)
class OrbitLabel:
    support: frozenset
    self_flag: bool
    dimension: int


def _support_mask(v, zero_tol):
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v)) if v.size else 0.0
    return np.abs(v) > zero_tol * scale if scale > 0 else np.zeros(v.shape, dtype=bool)


def orbit_label(v, i, zero_tol=DEFAULT_ZERO_TOL) -> OrbitLabel:
    """Orbit of ``v`` under the node-``i`` group.

    Entries below ``zero_tol * max|v|`` are treated as zero.
    """
    if zero_tol < 0:
        raise ParameterError("zero tolerance must be non-negative")
    nz = _support_mask(v, zero_tol)
    S = frozenset(int(j) for j in np.flatnonzero(nz) if j != i)
    if S:
        return OrbitLabel(S, True, len(S) + 1)
    selfish = bool(nz[i])
    return OrbitLabel(S, selfish, 1 if selfish else 0)


def same_orbit(v1, v2, i, zero_tol=DEFAULT_ZERO_TOL):
    """Return ``(True, G)`` with ``G v2 = v1`` when both share an orbit, else ``(False, None)``."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    lab = orbit_label(v1, i, zero_tol)
    if lab != orbit_label(v2, i, zero_tol):
        return False, None
    n = v1.size
    d = np.ones(n)
    row = np.zeros(n)
    S = sorted(lab.support)
    for j in S:
        d[j] = v1[j] / v2[j]
    if S:
        k = S[0]
        row[k] = (v1[i] - v2[i]) / v2[k]
    elif lab.self_flag:
        d[i] = v1[i] / v2[i]
    return True, GroupElement(i, d, row)


def sign_flip_witness(v, i, zero_tol=DEFAULT_ZERO_TOL):
    """Element mapping ``v`` to a same-orbit vector with a different sign pattern.

    Exists whenever ``v`` has an off-diagonal nonzero; returns ``None`` otherwise.
    """
    lab = orbit_label(v, i, zero_tol)
    if not lab.support:
        return None
    d = np.ones(len(v))
    d[min(lab.support)] = -1.0
    return GroupElement(i, d, np.zeros(len(v)))


def kernel_support(g: GramSummary, zero_tol=DEFAULT_ZERO_TOL):
    """Coordinates where some kernel vector is nonzero."""
    if g.kernel_dim == 0:
        return frozenset()
    mask = np.zeros(g.n, dtype=bool)
    for z in g.kernel.T:
        mask |= _support_mask(z, zero_tol)
    return frozenset(int(j) for j in np.flatnonzero(mask))


@dataclass(frozen=True)
class Containment:
    status: str
    identifiable: tuple
    kernel_off_support: tuple
    zero_tol: float


def kernel_orbit_containment(g: GramSummary, i=None, zero_tol=DEFAULT_ZERO_TOL) -> Containment:
    """Does a generic kernel vector reach the full-dimensional orbit?

    The generic support of the kernel is the union of its basis supports.
    Off-diagonal coordinates outside it keep their adjacency identifiable.
    """
    i = g.node if i is None else i
    off = [j for j in range(g.n) if j != i]
    U = sorted(j for j in kernel_support(g, zero_tol) if j != i)
    if g.kernel_dim > 0 and len(U) == len(off):
        return Containment(FULL_DIM, (), tuple(U), zero_tol)
    ident = tuple(j for j in off if j not in U)
    return Containment(CONTAINED, ident, tuple(U), zero_tol)


def generic_verdict(g: GramSummary, zero_tol=DEFAULT_ZERO_TOL) -> str:
    """Classify into the two generic cases, flagging the unstable special case."""
    if g.kernel_dim == 0:
        return ORBITS_ONLY
    if kernel_orbit_containment(g, zero_tol=zero_tol).status == FULL_DIM:
        return ALL_INDISTINGUISHABLE
    return STRUCTURALLY_UNSTABLE
