"""Trajectory files, prior specifications and deterministic report writing."""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import PriorSet, sign_boxes
from .model import GRID_JITTER, Trajectory


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_to_text(traj: Trajectory) -> str:
    n = traj.n
    header = ["t"] + [f"x{j + 1}" for j in range(n)] + [f"u{j + 1}" for j in range(n)]
    cols = [traj.t[:, None], traj.x, traj.u]
    if traj.has_derivatives:
        header += [f"dx{j + 1}" for j in range(n)]
        cols.append(traj.dx)
    data = np.hstack(cols)
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in data]
    return "\n".join(lines) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(trajectory_to_text(traj))


def _parse_header(fields, line):
    names = [f.strip() for f in fields]
    if not names or names[0] != "t":
        raise ParseError("header must start with 't'", line)
    rest = names[1:]
    for n_cols, has_dx in ((len(rest) // 2, False), (len(rest) // 3, True)):
        groups = ["x", "u"] + (["dx"] if has_dx else [])
        if n_cols < 1 or n_cols * len(groups) != len(rest):
            continue
        expected = [f"{g}{j + 1}" for g in groups for j in range(n_cols)]
        if rest == expected:
            return n_cols, has_dx
    raise ParseError("header must read t,x1..xn,u1..un[,dx1..dxn]", line)


def parse_trajectory(text: str, jitter: float = GRID_JITTER) -> Trajectory:
    """Parse the delimited trajectory format; errors carry 1-based line numbers."""
    rows = [(k + 1, r) for k, r in enumerate(csv.reader(_io.StringIO(text))) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty trajectory file", 1)
    line, header = rows[0]
    n, has_dx = _parse_header(header, line)
    width = 1 + n * (3 if has_dx else 2)
    data = np.empty((len(rows) - 1, width))
    for k, (line, fields) in enumerate(rows[1:]):
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, found {len(fields)}", line)
        try:
            data[k] = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(f"not a number: {exc}", line) from None
        if not np.all(np.isfinite(data[k])):
            raise ParseError("non-finite value", line)
    if data.shape[0] < 2:
        raise ParseError("a trajectory needs at least 2 samples", rows[-1][0])
    t = data[:, 0]
    h = t[1] - t[0]
    if h <= 0:
        raise ParseError("time must increase", rows[2][0])
    bad = np.nonzero(np.abs(np.diff(t) - h) > jitter * h)[0]
    if bad.size:
        raise ParseError("non-uniform time grid", rows[bad[0] + 2][0])
    x = data[:, 1:1 + n]
    u = data[:, 1 + n:1 + 2 * n]
    dx = data[:, 1 + 2 * n:] if has_dx else None
    return Trajectory(t, x, u, dx)


def read_trajectory(path) -> Trajectory:
    return parse_trajectory(Path(path).read_text())


def prior_from_spec(spec, n: int) -> PriorSet:
    """``{"discrete": [[...], ...]}``, ``{"bounds": {"epsilon", "a_min", "a_max"}}`` or ``None``."""
    if spec is None or spec == "unconstrained" or spec == {"unconstrained": True}:
        return PriorSet.unconstrained(n)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ParseError("prior must be an object with a single 'discrete' or 'bounds' key")
    if "discrete" in spec:
        pts = np.asarray(spec["discrete"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != n:
            raise ParseError(f"discrete prior points must have length {n}")
        return PriorSet.discrete(pts)
    if "bounds" in spec:
        b = spec["bounds"]
        try:
            return sign_boxes(n, float(b["epsilon"]), float(b["a_min"]), float(b["a_max"]))
        except KeyError as exc:
            raise ParseError(f"bounds prior is missing {exc}") from None
    raise ParseError(f"unknown prior kind {next(iter(spec))!r}")


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, shortest-repr floats."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def table_to_text(header, rows, sep="\t") -> str:
    out = [sep.join(header)]
    for row in rows:
        out.append(sep.join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(out) + "\n"
