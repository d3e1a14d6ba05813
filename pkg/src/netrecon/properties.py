"""Properties of an interaction matrix: identity, sign, connectivity, adjacency, in-degree."""

import numpy as np

from .errors import ParameterError

KINDS = ("identity", "sign", "connectivity", "adjacency", "degree")


def check_kind(kind):
    if kind not in KINDS:
        raise ParameterError(f"unknown property {kind!r}; expected one of {', '.join(KINDS)}")
    return kind


def _sign(a, zero_tol):
    s = np.sign(a).astype(int)
    s[np.abs(a) <= zero_tol] = 0
    return s


def property_of(A, kind, zero_tol=1e-9):
    """Whole-matrix property; entries with ``|a| <= zero_tol`` count as zero."""
    check_kind(kind)
    if zero_tol < 0:
        raise ParameterError("zero tolerance must be non-negative")
    A = np.asarray(A, dtype=float)
    if kind == "identity":
        return A.copy()
    S = _sign(A, zero_tol)
    if kind == "sign":
        return S
    C = np.abs(S)
    if kind == "connectivity":
        return C
    if kind == "adjacency":
        K = C.copy()
        np.fill_diagonal(K, 0)
        return K
    return C.sum(axis=1)


def label_of_sign(sign_label, kind, node):
    """Property label of a row ``node`` whose sign pattern is ``sign_label``."""
    s = np.asarray(sign_label, dtype=int)
    if kind == "sign":
        return tuple(int(v) for v in s)
    c = np.abs(s)
    if kind == "connectivity":
        return tuple(int(v) for v in c)
    if kind == "adjacency":
        c = c.copy()
        c[node] = 0
        return tuple(int(v) for v in c)
    if kind == "degree":
        return int(c.sum())
    raise ParameterError(f"property {kind!r} is not a function of the sign pattern")


def row_label(v, kind, node, zero_tol=1e-9):
    """Hashable property label of interconnection vector ``v`` of node ``node``."""
    check_kind(kind)
    v = np.asarray(v, dtype=float)
    if kind == "identity":
        return tuple(float(a) for a in v)
    return label_of_sign(_sign(v, zero_tol), kind, node)
