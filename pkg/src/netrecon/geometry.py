"""Prior sets, fibers, and LP-based separation / intersection tests.

A fiber is an affine subspace ``base + span(Z)`` parallel to ``ker M_i``.
Two sets are separated by a fiber when some hyperplane with normal in the
row space of ``M_i`` leaves them on opposite sides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ParameterError, PreconditionError, ScaleError
from .gram import GramSummary
from .lp import OPTIMAL, lp_solve
from .properties import check_kind, label_of_sign, row_label

DEFAULT_PAIR_CAP = 100_000
FEAS_TOL = 1e-9
SEP_TOL = 1e-10


# -- pieces -----------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ParameterError("box bounds must be finite vectors of equal length")
        if np.any(lo > hi):
            raise ParameterError("box needs lower <= upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self):
        return self.lower.size

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def radius(self):
        return 0.5 * (self.upper - self.lower)

    def contains(self, v, tol=0.0):
        """Membership with slack ``tol * (1 + |bound|)``, matching the LP feasibility tests."""
        v = np.asarray(v, dtype=float)
        lo, hi = self.lower, self.upper
        return bool(np.all(v >= lo - tol * (1 + np.abs(lo))) and np.all(v <= hi + tol * (1 + np.abs(hi))))

    def vertices(self):
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))

    def halfspaces(self):
        I = np.eye(self.n)
        return np.vstack([I, -I]), np.concatenate([self.upper, -self.lower])


@dataclass(frozen=True)
class Polytope:
    """``{v : H v <= k}``; appears when a box prior is pulled through a group element."""

    H: np.ndarray
    k: np.ndarray

    @property
    def n(self):
        return self.H.shape[1]

    def contains(self, v, tol=0.0):
        return bool(np.all(self.H @ np.asarray(v, dtype=float) <= self.k + tol * (1 + np.abs(self.k))))

    def halfspaces(self):
        return np.asarray(self.H, dtype=float), np.asarray(self.k, dtype=float)


def _halfspaces(piece):
    if isinstance(piece, (Box, Polytope)):
        return piece.halfspaces()
    raise ParameterError(f"not a region piece: {type(piece).__name__}")


# -- prior sets -------------------------------------------------------------

DISCRETE = "discrete"
BOX_UNION = "box-union"
UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class PriorSet:
    """Known constraint on interconnection vectors.

    ``labels`` carry the sign pattern of each region piece; discrete points
    are labelled on demand. ``frame`` maps stored coordinates back to the
    original ones (set by :meth:`transformed`), so labels stay those of the
    untransformed vectors.
    """

    kind: str
    n: int
    pieces: tuple = ()
    labels: tuple | None = None
    frame: np.ndarray | None = None

    @classmethod
    def unconstrained(cls, n):
        return cls(UNCONSTRAINED, int(n))

    @classmethod
    def discrete(cls, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise ParameterError("discrete prior needs at least one point")
        uniq = {tuple(p) for p in pts}
        if len(uniq) != len(pts):
            raise ParameterError("discrete prior points must be distinct")
        pieces = []
        for p in pts:
            p = p.copy()
            p.setflags(write=False)
            pieces.append(p)
        return cls(DISCRETE, pts.shape[1], tuple(pieces))

    @classmethod
    def boxes(cls, boxes, sign_labels):
        boxes = tuple(boxes)
        labels = tuple(tuple(int(s) for s in y) for y in sign_labels)
        if len(boxes) != len(labels) or not boxes:
            raise ParameterError("need one sign label per box")
        return cls(BOX_UNION, boxes[0].n, boxes, labels)

    def __len__(self):
        return len(self.pieces) if self.kind != UNCONSTRAINED else 1

    def piece_label(self, idx, kind, node, zero_tol=1e-9):
        if self.kind == DISCRETE:
            p = self.pieces[idx]
            if self.frame is not None:
                p = self.frame @ p
            return row_label(p, kind, node, zero_tol)
        if kind == "identity":
            return None
        return label_of_sign(self.labels[idx], kind, node)

    def transformed(self, G):
        """Prior seen through regressor ``G^T f``: every piece is mapped by ``G^{-1}``."""
        G = np.asarray(getattr(G, "matrix", G), dtype=float)
        frame = G if self.frame is None else self.frame @ G
        if self.kind == UNCONSTRAINED:
            return PriorSet(UNCONSTRAINED, self.n, frame=frame)
        if self.kind == DISCRETE:
            pieces = tuple(np.linalg.solve(G, p) for p in self.pieces)
        else:
            pieces = []
            for piece in self.pieces:
                H, k = _halfspaces(piece)
                pieces.append(Polytope(H @ G, k))
            pieces = tuple(pieces)
        return PriorSet(self.kind, self.n, pieces, self.labels, frame)


def sign_boxes(n, epsilon, a_min, a_max) -> PriorSet:
    """The ``3^n`` boxes with coordinates in ``[-a_max,-a_min]``, ``[-eps,eps]`` or ``[a_min,a_max]``."""
    if not 0 <= epsilon < a_min < a_max:
        raise ParameterError("need 0 <= epsilon < a_min < a_max")
    intervals = {-1: (-a_max, -a_min), 0: (-epsilon, epsilon), 1: (a_min, a_max)}
    boxes, labels = [], []
    for y in itertools.product((-1, 0, 1), repeat=n):
        lo = [intervals[s][0] for s in y]
        hi = [intervals[s][1] for s in y]
        boxes.append(Box(lo, hi))
        labels.append(y)
    return PriorSet.boxes(boxes, labels)


# -- fibers -----------------------------------------------------------------


@dataclass(frozen=True)
class Fiber:
    base: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float).ravel()
        Z = np.array(self.directions, dtype=float).reshape(base.size, -1)
        if Z.shape[1] and not np.allclose(Z.T @ Z, np.eye(Z.shape[1]), atol=1e-8):
            raise ParameterError("fiber directions must be orthonormal")
        base.setflags(write=False)
        Z.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "directions", Z)

    @property
    def dim(self):
        return self.directions.shape[1]

    def distance(self, p):
        d = np.asarray(p, dtype=float) - self.base
        Z = self.directions
        return float(np.linalg.norm(d - Z @ (Z.T @ d)))


@dataclass(frozen=True)
class Separation:
    separable: bool
    normal: np.ndarray | None
    optimum: float


def separate_by_fiber(P1: Box, P2: Box, B, tol=SEP_TOL) -> Separation:
    """Is there ``w = B alpha != 0`` with ``max_{P1} w.v < min_{P2} w.v``?

    Solved as ``min c.w + r.t`` subject to ``t >= |w|`` and ``sum t = 1``,
    with ``(c, r)`` the centre and radius of ``P1 - P2``. The sets share no
    fiber exactly when the optimum is negative; an optimum within ``tol`` of
    zero means the closed boxes touch a common fiber.
    """
    B = np.asarray(B, dtype=float).reshape(P1.n, -1)
    n, k = B.shape
    c = P1.center - P2.center
    r = P1.radius + P2.radius
    if k == 0:
        return Separation(False, None, 0.0)
    I = np.eye(n)
    A_ub = np.block([[B, -I], [-B, -I]])
    b_ub = np.zeros(2 * n)
    A_eq = np.concatenate([np.zeros(k), np.ones(n)])[None, :]
    res = lp_solve(np.concatenate([B.T @ c, r]), A_ub, b_ub, A_eq, [1.0])
    if res.status != OPTIMAL:
        raise RuntimeError(f"separation LP ended {res.status}")
    scale = 1.0 + np.max(np.abs(c)) + np.max(r)
    if res.fun < -tol * scale:
        w = B @ res.x[:k]
        return Separation(True, w / np.linalg.norm(w), res.fun)
    return Separation(False, None, res.fun)


@dataclass(frozen=True)
class Intersection:
    hit: bool
    point: np.ndarray | None


def fiber_intersects(piece, fiber: Fiber, tol=FEAS_TOL) -> Intersection:
    """Does the fiber meet ``piece`` (a point, :class:`Box` or :class:`Polytope`)?

    For regions the witness minimises ``|beta|_1`` over ``base + Z beta`` in
    the piece, so it is the base point itself whenever possible.
    """
    if piece is None:
        return Intersection(True, fiber.base.copy())
    if isinstance(piece, np.ndarray):
        ok = fiber.distance(piece) <= tol * (1.0 + np.max(np.abs(piece)))
        return Intersection(ok, piece.copy() if ok else None)
    H, k = _halfspaces(piece)
    slack = k - H @ fiber.base + tol * (1.0 + np.abs(k))
    Z = fiber.directions
    d = Z.shape[1]
    if d == 0:
        ok = bool(np.all(slack >= 0))
        return Intersection(ok, fiber.base.copy() if ok else None)
    Id = np.eye(d)
    HZ = H @ Z
    A_ub = np.block([[HZ, np.zeros((HZ.shape[0], d))], [Id, -Id], [-Id, -Id]])
    b_ub = np.concatenate([slack, np.zeros(2 * d)])
    res = lp_solve(np.concatenate([np.zeros(d), np.ones(d)]), A_ub, b_ub)
    if res.status != OPTIMAL:
        return Intersection(False, None)
    return Intersection(True, fiber.base + Z @ res.x[:d])


def fiber_chord(piece, fiber: Fiber, tol=FEAS_TOL):
    """Two distinct points of ``piece`` on ``fiber`` (or ``None`` if the contact is a single point).

    The points lie a quarter of the way in from each end of a chord.
    """
    if piece is None or isinstance(piece, np.ndarray):
        if piece is None and fiber.dim:
            return fiber.base.copy(), fiber.base + fiber.directions[:, 0] * max(1.0, np.max(np.abs(fiber.base)))
        return None
    H, k = _halfspaces(piece)
    Z = fiber.directions
    d = Z.shape[1]
    if d == 0:
        return None
    HZ = H @ Z
    slack = k - H @ fiber.base + tol * (1.0 + np.abs(k))
    for m in range(d):
        e = np.zeros(d)
        e[m] = 1.0
        lo = lp_solve(e, HZ, slack)
        hi = lp_solve(-e, HZ, slack)
        if lo.status != OPTIMAL or hi.status != OPTIMAL:
            continue
        if hi.x[m] - lo.x[m] > 1e3 * tol * (1.0 + np.linalg.norm(lo.x)):
            # quarter points stay clear of the slack band around the boundary
            a, b = 0.75 * lo.x + 0.25 * hi.x, 0.25 * lo.x + 0.75 * hi.x
            return fiber.base + Z @ a, fiber.base + Z @ b
    return None


def common_fiber_pair(piece1, piece2, B, tol=FEAS_TOL):
    """Points ``v1`` in piece1 and ``v2`` in piece2 with ``B^T (v1 - v2) = 0``, if any."""
    B = np.asarray(B, dtype=float)
    H1, k1 = _halfspaces(piece1)
    H2, k2 = _halfspaces(piece2)
    n = H1.shape[1]
    A_ub = np.block([[H1, np.zeros((H1.shape[0], n))], [np.zeros((H2.shape[0], n)), H2]])
    b_ub = np.concatenate([k1 + tol * (1 + np.abs(k1)), k2 + tol * (1 + np.abs(k2))])
    A_eq = np.hstack([B.T, -B.T]) if B.shape[1] else None
    b_eq = np.zeros(B.shape[1]) if B.shape[1] else None
    res = lp_solve(np.zeros(2 * n), A_ub, b_ub, A_eq, b_eq)
    if res.status != OPTIMAL:
        return None
    return res.x[:n], res.x[n:]


def _within_piece_pair(piece, Z, tol=FEAS_TOL):
    # v and v + Z beta both in piece, beta != 0
    H, k = _halfspaces(piece)
    n, d = Z.shape
    if d == 0:
        return None
    HZ = H @ Z
    A_ub = np.block([[H, np.zeros((H.shape[0], d))], [H, HZ]])
    b_ub = np.concatenate([k, k])
    for m in range(d):
        for sgn in (1.0, -1.0):
            c = np.zeros(n + d)
            c[n + m] = -sgn
            res = lp_solve(c, A_ub, b_ub)
            if res.status == OPTIMAL and -res.fun > 1e3 * tol:
                v = res.x[:n]
                return v, v + Z @ res.x[n:]
    return None


# -- distinguishability -----------------------------------------------------


@dataclass(frozen=True)
class Distinguishability:
    distinguishable: bool
    pair: tuple | None
    labels: tuple | None
    pairs_checked: int


def property_distinguishable(prior: PriorSet, kind: str, g: GramSummary, cap=DEFAULT_PAIR_CAP,
                             zero_tol=1e-9, tol=FEAS_TOL) -> Distinguishability:
    """Can every two prior pieces with different property values be told apart?

    Valid only for exactly known coupling functions. Returns the first
    offending pair (lexicographic order) as two data-equivalent vectors.
    """
    check_kind(kind)
    if g.uncertainty != "exact":
        raise PreconditionError("fiber separation decides distinguishability only for exact coupling functions")
    i = g.node
    Z, B = g.kernel, g.rowspace

    if prior.kind == UNCONSTRAINED:
        if kind == "adjacency":
            cols = [z for z in Z.T if any(abs(z[j]) > zero_tol * np.max(np.abs(z)) for j in range(g.n) if j != i)]
        else:
            cols = list(Z.T)
        if not cols:
            return Distinguishability(True, None, None, 0)
        z = cols[0]
        pair = (np.zeros(g.n), z.copy())
        labs = (row_label(pair[0], kind, i, zero_tol), row_label(pair[1], kind, i, zero_tol))
        return Distinguishability(False, pair, labs, 1)

    N = len(prior.pieces)
    labels = [prior.piece_label(a, kind, i, zero_tol) for a in range(N)]
    if kind == "identity":
        n_pairs = comb(N, 2)
    else:
        counts = {}
        for y in labels:
            counts[y] = counts.get(y, 0) + 1
        n_pairs = comb(N, 2) - sum(comb(c, 2) for c in counts.values())
    if n_pairs > cap:
        raise ScaleError(f"{n_pairs} piece pairs exceed the cap of {cap}; restrict the prior")

    checked = 0
    if prior.kind != DISCRETE and kind == "identity":
        for a, piece in enumerate(prior.pieces):
            inner = _within_piece_pair(piece, Z, tol)
            checked += 1
            if inner is not None:
                return Distinguishability(False, inner, (tuple(inner[0]), tuple(inner[1])), checked)

    for a in range(N):
        for b in range(a + 1, N):
            if kind != "identity" and labels[a] == labels[b]:
                continue
            checked += 1
            P1, P2 = prior.pieces[a], prior.pieces[b]
            if prior.kind == DISCRETE:
                diff = B.T @ (P1 - P2)
                scale = 1.0 + max(np.max(np.abs(P1)), np.max(np.abs(P2)))
                if np.linalg.norm(diff) <= tol * scale:
                    return Distinguishability(False, (P1.copy(), P2.copy()), (labels[a], labels[b]), checked)
                continue
            if isinstance(P1, Box) and isinstance(P2, Box):
                if separate_by_fiber(P1, P2, B).separable:
                    continue
            pair = common_fiber_pair(P1, P2, B, tol)
            if pair is not None:
                return Distinguishability(False, pair, (labels[a], labels[b]), checked)
    return Distinguishability(True, None, None, checked)
