"""Reconstruction: intersect the data-consistent fiber with the prior and certify the result."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataInconsistent, ParameterError, PreconditionError, ScaleError
from .geometry import (DEFAULT_PAIR_CAP, DISCRETE, FEAS_TOL, UNCONSTRAINED, Fiber, PriorSet,
                       fiber_chord, fiber_intersects)
from .gram import GramSummary, compute_gram
from .group import DEFAULT_ZERO_TOL, kernel_orbit_containment
from .properties import KINDS, check_kind, property_of, row_label

__all__ = ["KINDS", "property_of", "Verdict", "solution_fiber", "reconstruct_property",
           "reconstruct_adjacency_under_uncertainty", "reconstruct_network", "fit_residual"]

DEFAULT_CONSISTENCY_TOL = 1e-6

UNIQUE = "unique"
AMBIGUOUS = "ambiguous"
INCONSISTENT = "inconsistent"


def _jsonable(x):
    if isinstance(x, (tuple, list, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


@dataclass(frozen=True)
class Verdict:
    node: int
    property: str
    status: str
    value: object = None
    witnesses: tuple = ()
    labels: tuple = ()
    residual: float = 0.0
    pieces_checked: int = 0
    witness_residuals: tuple = field(default=())

    def to_dict(self):
        out = {"node": self.node, "property": self.property, "status": self.status,
               "residual": float(self.residual), "pieces_checked": self.pieces_checked}
        if self.status == UNIQUE:
            out["value"] = _jsonable(self.value)
        if self.witnesses:
            out["witnesses"] = _jsonable(self.witnesses)
            out["witness_labels"] = _jsonable(self.labels)
            out["witness_residuals"] = _jsonable(self.witness_residuals)
        return out


def fit_residual(g: GramSummary, v) -> float:
    """Relative L2 misfit of ``int (dx_i - u_i - f_i^T v)^2 dt`` from the stored moments.

    Expanded around the minimum-norm solution, whose misfit is stored; the
    quadratic term only sees the retained spectrum, so kernel directions
    below the rank tolerance cost nothing.
    """
    base = g.pinv_solve(g.moment)
    d = np.asarray(v, dtype=float) - base
    p = g.rowspace.T @ d
    quad = float(np.sum(g.singular_values[: g.rank] * p * p))
    sq = g.residual_energy - 2.0 * d @ (g.moment - g.matrix @ base) + quad
    return float(np.sqrt(max(sq, 0.0)) / (1.0 + np.sqrt(max(g.target_energy, 0.0))))


def normal_residual(g: GramSummary, v) -> float:
    """``|M v - w| / (1 + |w|)``."""
    return float(np.linalg.norm(g.matrix @ v - g.moment) / (1.0 + np.linalg.norm(g.moment)))


def solution_fiber(g: GramSummary, consistency_tol=DEFAULT_CONSISTENCY_TOL):
    """Set of interconnection vectors that explain the data: ``v* + ker M_i``.

    ``v*`` is the minimum-norm solution of ``M_i v = w_i`` over the singular
    values kept by the rank tolerance. Returns ``(fiber, residual)``.
    """
    v = g.pinv_solve(g.moment)
    residual = max(fit_residual(g, v), normal_residual(g, v))
    if residual > consistency_tol:
        raise DataInconsistent(g.node, residual, consistency_tol)
    return Fiber(v, g.kernel), residual


def _label_changes_along_fiber(fiber, frame, kind, node, zero_tol):
    # probe points base + t z where coordinates cross zero or leave it
    base = fiber.base
    v0 = frame @ base
    lab0 = row_label(v0, kind, node, zero_tol)
    scale = 1.0 + np.max(np.abs(v0))
    for z in fiber.directions.T:
        d = frame @ z
        dmax = np.max(np.abs(d))
        if dmax == 0:
            continue
        ts = [-v0[j] / d[j] for j in range(d.size) if abs(d[j]) > zero_tol * dmax and v0[j] != 0]
        ts += [s * scale / dmax for s in (1.0, -1.0, 0.37, -0.37)]
        for t in ts:
            if t == 0:
                continue
            v = base + t * z
            lab = row_label(frame @ v, kind, node, zero_tol)
            if lab != lab0:
                return [(lab0, base.copy()), (lab, v)]
    return [(lab0, base.copy())]


def reconstruct_property(g: GramSummary, prior: PriorSet, kind: str, zero_tol=DEFAULT_ZERO_TOL,
                         consistency_tol=DEFAULT_CONSISTENCY_TOL, tol=FEAS_TOL,
                         cap=DEFAULT_PAIR_CAP) -> Verdict:
    """Which property values are compatible with the data and the prior?

    One value means a certified reconstruction; several come with one
    feasible witness vector each; none means the prior contradicts the data.
    """
    check_kind(kind)
    if g.uncertainty != "exact":
        raise PreconditionError("property reconstruction needs exactly known coupling functions")
    if len(prior) > cap:
        raise ScaleError(f"prior has {len(prior)} pieces, above the cap of {cap}")
    fiber, residual = solution_fiber(g, consistency_tol)
    frame = np.eye(g.n) if prior.frame is None else prior.frame
    i = g.node

    found = {}  # label -> witness list, insertion ordered
    if prior.kind == UNCONSTRAINED:
        checked = 1
        if kind == "identity":
            found[row_label(frame @ fiber.base, kind, i, zero_tol)] = [fiber.base.copy()]
            chord = fiber_chord(None, fiber, tol)
            if chord is not None:
                found[row_label(frame @ chord[1], kind, i, zero_tol)] = [chord[1]]
        else:
            for lab, v in _label_changes_along_fiber(fiber, frame, kind, i, zero_tol):
                found.setdefault(lab, [v])
    else:
        checked = 0
        for idx, piece in enumerate(prior.pieces):
            checked += 1
            hit = fiber_intersects(piece, fiber, tol)
            if not hit.hit:
                continue
            if kind == "identity" and prior.kind != DISCRETE:
                chord = fiber_chord(piece, fiber, tol)
                pts = list(chord) if chord is not None else [hit.point]
                for p in pts:
                    found.setdefault(row_label(frame @ p, kind, i, zero_tol), [p])
            else:
                found.setdefault(prior.piece_label(idx, kind, i, zero_tol), [hit.point])

    labels = tuple(found)
    witnesses = tuple(found[y][0] for y in labels)
    wres = tuple(normal_residual(g, v) for v in witnesses)
    if not labels:
        return Verdict(i, kind, INCONSISTENT, residual=residual, pieces_checked=checked)
    if len(labels) == 1:
        return Verdict(i, kind, UNIQUE, labels[0], residual=residual, pieces_checked=checked)
    return Verdict(i, kind, AMBIGUOUS, None, witnesses, labels, residual, checked, wres)


@dataclass(frozen=True)
class AdjacencyVerdict:
    node: int
    entries: tuple  # 0, 1 or None per coordinate; diagonal always None
    containment: str
    residual: float

    @property
    def resolved(self):
        return all(e is not None for j, e in enumerate(self.entries) if j != self.node)

    def to_dict(self):
        return {"node": self.node, "property": "adjacency", "entries": list(self.entries),
                "containment": self.containment, "residual": self.residual,
                "non_reconstructable": ["identity", "sign", "connectivity", "degree", "self-loop"]}


def reconstruct_adjacency_under_uncertainty(g: GramSummary, zero_tol=DEFAULT_ZERO_TOL,
                                            consistency_tol=DEFAULT_CONSISTENCY_TOL) -> AdjacencyVerdict:
    """Adjacency of node ``i`` when couplings are only known up to the linear group.

    Off-diagonal coordinates outside the kernel's support are constant on the
    fiber and, being orbit invariants, resolve to 0/1; the rest are unknown.
    """
    if g.uncertainty != "linear-group":
        raise PreconditionError("adjacency under uncertainty expects uncertainty level 'linear-group'")
    fiber, residual = solution_fiber(g, consistency_tol)
    cont = kernel_orbit_containment(g, zero_tol=zero_tol)
    v = fiber.base
    scale = np.max(np.abs(v)) if v.size else 0.0
    entries = []
    for j in range(g.n):
        if j == g.node or j not in cont.identifiable:
            entries.append(None)
        else:
            entries.append(int(abs(v[j]) > zero_tol * scale) if scale > 0 else 0)
    return AdjacencyVerdict(g.node, tuple(entries), cont.status, residual)


def reconstruct_network(traj, reg, prior, kind: str, tol_rank=1e-8, zero_tol=DEFAULT_ZERO_TOL,
                        consistency_tol=DEFAULT_CONSISTENCY_TOL):
    """Per-node verdicts plus the assembled property when every node is unique.

    ``prior`` is one :class:`PriorSet` shared by all nodes or a sequence with
    one per node. Degree verdicts assemble into the in-degree sequence, the
    rest into matrices.
    """
    priors = [prior] * traj.n if isinstance(prior, PriorSet) else list(prior)
    if len(priors) != traj.n:
        raise ParameterError(f"expected {traj.n} priors, got {len(priors)}")
    verdicts = []
    for i in range(traj.n):
        g = compute_gram(traj, reg, i, tol_rank)
        try:
            verdicts.append(reconstruct_property(g, priors[i], kind, zero_tol, consistency_tol))
        except DataInconsistent as exc:
            verdicts.append(Verdict(i, kind, INCONSISTENT, residual=exc.residual))
    assembled = None
    if all(v.status == UNIQUE for v in verdicts):
        assembled = np.array([v.value for v in verdicts])
    return verdicts, assembled
