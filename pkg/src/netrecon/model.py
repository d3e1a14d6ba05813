"""Networked dynamics ``dx_i = sum_j a_ij f_ij(x_i, x_j) + u_i(t)``.

Regressor families, trajectories, fixed-step simulation and GLV helpers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .errors import InsufficientData, ParameterError, SimulationBlowup

OVERFLOW_BOUND = 1e12
GRID_JITTER = 1e-9

Evaluator = Callable[[int, np.ndarray], np.ndarray]


def check_interaction_matrix(A) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"interaction matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("interaction matrix has non-finite entries")
    return A


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# -- regressors -------------------------------------------------------------


def _glv_eval(i, X):
    return X[:, i : i + 1] * X


def _linear_eval(i, X):
    return X.copy()


def pairwise_violation(evaluator: Evaluator, n: int, rng=None, probes: int = 8) -> float:
    """Largest change of ``f_ij`` caused by perturbing some ``x_k``, k not in {i, j}."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    if n < 3:
        return worst
    for _ in range(probes):
        x = rng.normal(size=(1, n))
        for i in range(n):
            base = np.asarray(evaluator(i, x), dtype=float)[0]
            for k in range(n):
                if k == i:
                    continue
                xp = x.copy()
                xp[0, k] += rng.normal() + 1.0
                moved = np.asarray(evaluator(i, xp), dtype=float)[0]
                others = [j for j in range(n) if j not in (i, k)]
                scale = 1.0 + np.abs(base[others]).max()
                worst = max(worst, float(np.abs(moved[others] - base[others]).max() / scale))
    return worst


@dataclass(frozen=True)
class RegressorFamily:
    """Coupling functions of every node plus the declared uncertainty level.

    ``evaluator(i, X)`` maps states ``X`` of shape (m, n) to the regressor
    samples of node ``i``, shape (m, n), column ``j`` holding ``f_ij(x_i, x_j)``.
    """

    name: str
    evaluator: Evaluator = field(repr=False)
    uncertainty: str = "exact"
    coupling: int | None = None

    def __post_init__(self):
        if self.uncertainty not in ("exact", "linear-group"):
            raise ParameterError(f"unknown uncertainty level {self.uncertainty!r}")

    @classmethod
    def glv(cls, uncertainty="exact"):
        return cls("glv", _glv_eval, uncertainty, kernels.GLV)

    @classmethod
    def linear(cls, uncertainty="exact"):
        return cls("linear", _linear_eval, uncertainty, kernels.LINEAR)

    @classmethod
    def preset(cls, name, uncertainty="exact"):
        presets = {"glv": cls.glv, "linear": cls.linear}
        if name not in presets:
            raise ParameterError(f"unknown regressor preset {name!r}")
        return presets[name](uncertainty)

    @classmethod
    def custom(cls, evaluator: Evaluator, n: int, name="custom", uncertainty="exact", tol=1e-12):
        """Register an arbitrary evaluator after probing that it is pairwise."""
        err = pairwise_violation(evaluator, n)
        if err > tol:
            raise ParameterError(
                f"regressor {name!r} is not pairwise: component j reacts to x_k (k not in {{i,j}}), "
                f"relative change {err:.3g}"
            )
        return cls(name, evaluator, uncertainty)

    @classmethod
    def from_pairwise(cls, func, name="pairwise", uncertainty="exact"):
        """Family with ``f_ij(x_i, x_j) = func(x_i, x_j)`` for all i, j (vectorised)."""

        def evaluator(i, X):
            return np.asarray(func(X[:, i : i + 1], X), dtype=float) * np.ones_like(X)

        return cls(name, evaluator, uncertainty)

    def with_uncertainty(self, level):
        return RegressorFamily(self.name, self.evaluator, level, self.coupling)

    def evaluate(self, i: int, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return np.asarray(self.evaluator(i, X[None, :]), dtype=float)[0]
        return np.asarray(self.evaluator(i, X), dtype=float)

    def transformed(self, groups: Mapping[int, np.ndarray]) -> "RegressorFamily":
        """Family ``f_bar_i = G_i^T f_i`` for the node matrices in ``groups``."""
        mats = {int(i): np.asarray(getattr(G, "matrix", G), dtype=float) for i, G in groups.items()}
        base = self.evaluator

        def evaluator(i, X):
            F = base(i, X)
            G = mats.get(i)
            return F if G is None else F @ G

        return RegressorFamily(self.name + "+G", evaluator, self.uncertainty)

    def drift(self, A, x) -> np.ndarray:
        """``sum_j a_ij f_ij(x_i, x_j)`` for every node at state ``x``."""
        X = np.asarray(x, dtype=float)[None, :]
        return np.array([self.evaluator(i, X)[0] @ A[i] for i in range(X.shape[1])])


# -- inputs -----------------------------------------------------------------


@dataclass(frozen=True)
class SinusoidalForcing:
    """``e_i(t) = sum_k amp[i,k] sin(freq[i,k] t + phase[i,k])``."""

    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amp = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        freq = np.atleast_2d(np.asarray(self.frequencies, dtype=float))
        phase = np.zeros_like(amp) if self.phases is None else np.atleast_2d(np.asarray(self.phases, dtype=float))
        if not amp.shape == freq.shape == phase.shape:
            raise ParameterError("forcing amplitudes, frequencies and phases must share a shape")
        object.__setattr__(self, "amplitudes", _frozen(amp))
        object.__setattr__(self, "frequencies", _frozen(freq))
        object.__setattr__(self, "phases", _frozen(phase))

    def __call__(self, t):
        return np.sum(self.amplitudes * np.sin(self.frequencies * t + self.phases), axis=1)

    @classmethod
    def random(cls, n, rng, amplitude=0.2, freq_range=(0.5, 3.0), components=2):
        amp = np.full((n, components), amplitude / components)
        freq = rng.uniform(*freq_range, size=(n, components))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(n, components))
        return cls(amp, freq, phase)


@dataclass(frozen=True)
class InputSignal:
    """Known input ``u_i(t) = r_i x_i(t) + e_i(t)``.

    The state-proportional part carries GLV growth rates; ``forcing`` is any
    callable ``t -> n-vector`` (a :class:`SinusoidalForcing` keeps the
    compiled integrator path).
    """

    growth: np.ndarray | None = None
    forcing: Callable | None = None

    def growth_for(self, n):
        return np.zeros(n) if self.growth is None else np.asarray(self.growth, dtype=float)

    def __call__(self, t, x):
        u = self.growth_for(len(x)) * x
        if self.forcing is not None:
            u = u + np.asarray(self.forcing(t), dtype=float)
        return u


# -- trajectories -----------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states, inputs and (optionally) derivatives."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    dx: np.ndarray | None = None

    def __post_init__(self):
        t = _frozen(self.t).ravel()
        x = _frozen(np.atleast_2d(self.x))
        u = _frozen(np.atleast_2d(self.u))
        if t.size < 2:
            raise InsufficientData("a trajectory needs at least 2 samples")
        if x.shape != (t.size, x.shape[1]) or u.shape != x.shape:
            raise ParameterError(f"shape mismatch: t {t.shape}, x {x.shape}, u {u.shape}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise ParameterError("trajectory contains non-finite samples")
        diffs = np.diff(t)
        h = (t[-1] - t[0]) / (t.size - 1)
        if h <= 0:
            raise ParameterError("t1 must exceed t0")
        if np.max(np.abs(diffs - h)) > GRID_JITTER * h:
            raise ParameterError("time grid is not uniform")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        if self.dx is not None:
            dx = _frozen(np.atleast_2d(self.dx))
            if dx.shape != x.shape or not np.all(np.isfinite(dx)):
                raise ParameterError("derivatives must be finite and shaped like the states")
            object.__setattr__(self, "dx", dx)

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t1(self):
        return float(self.t[-1])

    @property
    def step(self):
        return (self.t1 - self.t0) / (self.t.size - 1)

    @property
    def has_derivatives(self):
        return self.dx is not None


def estimate_derivatives(traj: Trajectory) -> Trajectory:
    """Second-order finite differences (central inside, one-sided at the ends)."""
    if traj.has_derivatives:
        return traj
    if traj.t.size < 3:
        raise InsufficientData("derivative estimation needs at least 3 samples")
    dx = np.gradient(traj.x, traj.step, axis=0, edge_order=2)
    return Trajectory(traj.t, traj.x, traj.u, dx)


# -- simulation -------------------------------------------------------------


def _rk4_python(A, reg, u, x0, t0, step, nsteps, bound):
    def rhs(t, x):
        ui = u(t, x)
        return reg.drift(A, x) + ui, ui

    n = x0.size
    X = np.zeros((nsteps + 1, n))
    DX = np.zeros_like(X)
    U = np.zeros_like(X)
    x = x0.copy()
    X[0] = x
    k1, U[0] = rhs(t0, x)
    DX[0] = k1
    h2 = 0.5 * step
    for k in range(nsteps):
        t = t0 + k * step
        k2, _ = rhs(t + h2, x + h2 * k1)
        k3, _ = rhs(t + h2, x + h2 * k2)
        k4, _ = rhs(t + step, x + step * k3)
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
            return X[: k + 1], DX[: k + 1], U[: k + 1], k + 1
        X[k + 1] = x
        k1, U[k + 1] = rhs(t0 + (k + 1) * step, x)
        DX[k + 1] = k1
    return X, DX, U, -1


def simulate(A, reg: RegressorFamily, x0, horizon: float, step: float, u: InputSignal | None = None,
             t0: float = 0.0, bound: float = OVERFLOW_BOUND) -> Trajectory:
    """Integrate the network with classical RK4 at a fixed step.

    Derivatives stored in the result are the exact right-hand side at each
    sample. Raises :class:`SimulationBlowup` when a state leaves ``|x| <= bound``.
    """
    A = check_interaction_matrix(A)
    x0 = np.array(x0, dtype=float).ravel()
    n = A.shape[0]
    if x0.size != n or not np.all(np.isfinite(x0)):
        raise ParameterError("x0 must be a finite vector matching A")
    if not (step > 0 and horizon > 0):
        raise ParameterError("step and horizon must be positive")
    nsteps = int(round(horizon / step))
    if nsteps < 1:
        raise ParameterError("horizon shorter than one step")
    u = InputSignal() if u is None else u
    growth = u.growth_for(n)
    forcing = u.forcing
    if reg.coupling is not None and (forcing is None or isinstance(forcing, SinusoidalForcing)):
        if forcing is None:
            amp = freq = phase = np.zeros((n, 1))
        else:
            amp, freq, phase = (np.array(a, dtype=float, order="C") for a in
                                (forcing.amplitudes, forcing.frequencies, forcing.phases))
        # writable C copies: read-only inputs would trigger a second numba specialization
        A_c, growth_c, x0_c = (np.array(a, dtype=float, order="C") for a in (A, growth, x0))
        X, DX, U, bad = kernels.rk4_pairwise(A_c, reg.coupling, growth_c, amp, freq, phase,
                                             x0_c, float(t0), float(step), nsteps, float(bound))
    else:
        X, DX, U, bad = _rk4_python(A, reg, u, x0, float(t0), float(step), nsteps, bound)
    if bad >= 0:
        raise SimulationBlowup(t0 + bad * step, bound)
    t = t0 + step * np.arange(nsteps + 1)
    return Trajectory(t, X, U, DX)


# -- GLV helpers ------------------------------------------------------------


@dataclass(frozen=True)
class GlvParameters:
    """Growth rates ``r``: ``dx_i = r_i x_i + sum_j a_ij x_i x_j``."""

    r: np.ndarray

    def __post_init__(self):
        r = _frozen(self.r).ravel()
        if not np.all(np.isfinite(r)):
            raise ParameterError("growth rates must be finite")
        object.__setattr__(self, "r", r)

    def inputs(self, forcing=None) -> InputSignal:
        return InputSignal(self.r, forcing)


def glv_steady_state(A, r, rcond: float = 1e-12):
    """Solve ``r + A x = 0``; ``None`` when ``A`` is numerically singular."""
    A = check_interaction_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= rcond * s[0]:
        return None
    return np.linalg.solve(A, -np.asarray(r, dtype=float))


def random_stable_glv(n, rng, coupling=0.6, x_range=(0.5, 2.0)):
    """Random GLV system with unit self-limitation and a positive, stable equilibrium.

    Off-diagonal rows have absolute sum below ``coupling`` < 1, so
    ``diag(x*) A`` is strictly diagonally dominant with a negative diagonal.
    Returns ``(A, r, x_star)``.
    """
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    np.fill_diagonal(A, 0.0)
    if n > 1:
        A *= coupling / np.maximum(np.abs(A).sum(axis=1, keepdims=True), 1e-300)
    np.fill_diagonal(A, -1.0)
    x_star = rng.uniform(*x_range, size=n)
    r = -A @ x_star
    return A, r, x_star
