"""Constant-input recursion producing reach-set under-approximations.

On the uniform grid t_i = t_lo + i (t_hi - t_lo)/N the recursion is

    S_0 = X0,    S_i = phi(t_i, t_{i-1}) S_{i-1}  +  L_i U,

where L_i = int_{t_{i-1}}^{t_i} phi(t_i, s) B(s) ds maps the constant
step-input value to its state contribution.  Every S_i is a subset of the
true reachable set at t_i (each point is hit by some initial state in X0
and some piecewise-constant input valued in U), and the list {S_i}
under-approximates the reachable tube.  All set arithmetic is exact
zonotope calculus; generators are never reduced, so the subset guarantee
is preserved and generator counts follow |gen(X0)| + i |gen(U)|.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quadrature import integrate_matrix
from .systems import SystemSpec
from .transition import TransitionOracle, matrix_exponential, matrix_norm_integral
from .zonotope import Zonotope, set_norm

__all__ = [
    "TimeGrid",
    "StepInputMap",
    "ReachResult",
    "step_input_map",
    "reach_sets",
    "tube",
    "growth_bound",
    "verify_growth_bound",
    "worker_count",
]

# closed-form segment integrals are skipped when A is this ill-conditioned
_COND_LIMIT = 1e8


def worker_count() -> int:
    """Worker cap from REACHUNDER_THREADS (default 1 = serial)."""
    raw = os.environ.get("REACHUNDER_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


class TimeGrid:
    """Uniform grid t_i = t_lo + i tau with tau = (t_hi - t_lo)/N."""

    def __init__(self, t_lo: float, t_hi: float, N: int):
        if N < 1:
            raise ValueError("grid needs N >= 1 steps")
        if not t_hi > t_lo:
            raise ValueError("grid needs t_lo < t_hi")
        self.N = int(N)
        self.tau = (t_hi - t_lo) / N
        pts = t_lo + np.arange(N + 1) * self.tau
        pts[0] = t_lo
        pts[-1] = t_hi  # pin the right endpoint against rounding drift
        pts.flags.writeable = False
        self.points = pts
        self._validate()

    def _validate(self):
        d = np.diff(self.points)
        if np.any(d <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.max(np.abs(d - self.tau)) > 1e-12 * max(1.0, abs(self.points[-1] - self.points[0])):
            raise ValueError("grid spacing is not uniform")

    @classmethod
    def from_points(cls, points) -> "TimeGrid":
        pts = np.asarray(points, dtype=float)
        if pts.size < 2:
            raise ValueError("grid needs at least two points")
        return cls(float(pts[0]), float(pts[-1]), pts.size - 1)

    def __repr__(self):
        return f"TimeGrid(N={self.N}, [{self.points[0]}, {self.points[-1]}])"


@dataclass(frozen=True)
class StepInputMap:
    """L_i = int phi(t_i, s) B(s) ds over one grid cell; maps input to state."""

    index: int
    L: np.ndarray


def _joint_constant_pieces(spec: SystemSpec, a: float, b: float):
    """Slices of [a, b] on which both A and B are constant, or None."""
    pa = spec.A.constant_pieces(a, b)
    pb = spec.B.constant_pieces(a, b)
    if pa is None or pb is None:
        return None
    edges = sorted({a, b} | {hi for _, hi, _ in pa[:-1]} | {hi for _, hi, _ in pb[:-1]})
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        MA = next(M for p, q, M in pa if p <= mid <= q)
        MB = next(M for p, q, M in pb if p <= mid <= q)
        out.append((lo, hi, MA, MB))
    return out


def _segment_input_integral(MA: np.ndarray, MB: np.ndarray, delta: float) -> Optional[np.ndarray]:
    """int_0^delta exp(MA s) MB ds in closed form, or None if MA is near-singular."""
    n = MA.shape[0]
    if not np.all(np.isfinite(MA)) or np.linalg.cond(MA) >= _COND_LIMIT:
        return None
    E = matrix_exponential(MA * delta)
    return np.linalg.solve(MA, E - np.eye(n)) @ MB


def step_input_map(spec: SystemSpec, orc: TransitionOracle, grid: TimeGrid,
                   i: int, *, nodes: int = 5, substeps: int = 4) -> StepInputMap:
    """Input-to-state map for grid cell i (1-based).

    Piecewise-constant A and B use the closed-form segment integral
    (quadrature fallback when A is singular or ill-conditioned on a
    segment); everything else uses composite Gauss-Legendre with panels
    split at declared breakpoints and refined at singular times.
    """
    if not 1 <= i <= grid.N:
        raise ValueError(f"step index {i} outside [1, {grid.N}]")
    a = float(grid.points[i - 1])
    b = float(grid.points[i])

    pieces = _joint_constant_pieces(spec, a, b)
    if pieces is not None:
        L = np.zeros((spec.n, spec.m))
        for lo, hi, MA, MB in pieces:
            inner = _segment_input_integral(MA, MB, hi - lo)
            if inner is None:
                inner = integrate_matrix(
                    lambda s: matrix_exponential(MA * (hi - s)) @ MB, lo, hi,
                    nodes=nodes, substeps=substeps, shape=(spec.n, spec.m))
            L += orc.transition(b, hi) @ inner
        return StepInputMap(i, L)

    L = integrate_matrix(
        lambda s: orc.transition(b, s) @ spec.B(s), a, b,
        nodes=nodes, substeps=substeps,
        breakpoints=[p for p in spec.breakpoints if a < p < b],
        singularities=spec.singularities,
        shape=(spec.n, spec.m),
    )
    return StepInputMap(i, L)


@dataclass(frozen=True)
class ReachResult:
    """Grid, the computed sets, and provenance metadata.

    `step_transitions` and `input_maps` hold the per-step phi and L
    matrices actually used by the recursion (absent on results re-read
    from JSON; validation recomputes them on demand).
    """

    grid: TimeGrid
    lambdas: tuple[Zonotope, ...]
    fingerprint: str
    accuracy_class: str
    step_transitions: Optional[tuple[np.ndarray, ...]] = None
    input_maps: Optional[tuple[np.ndarray, ...]] = None

    def tube(self) -> list[Zonotope]:
        """The tube under-approximation as its list of convex pieces (no merging)."""
        return list(self.lambdas)

    def to_json_dict(self) -> dict:
        return {
            "grid": [float(t) for t in self.grid.points],
            "sets": [z.to_json_dict() for z in self.lambdas],
            "accuracy_class": self.accuracy_class,
            "fingerprint": self.fingerprint,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ReachResult":
        grid = TimeGrid.from_points(d["grid"])
        lambdas = tuple(Zonotope.from_json_dict(z) for z in d["sets"])
        if len(lambdas) != grid.N + 1:
            raise ValueError("result must carry one set per grid point")
        return cls(grid=grid, lambdas=lambdas,
                   fingerprint=d.get("fingerprint", ""),
                   accuracy_class=d.get("accuracy_class", "unknown"))


def _step_data(spec, orc, grid, i):
    phi = orc.transition(float(grid.points[i]), float(grid.points[i - 1]))
    L = step_input_map(spec, orc, grid, i).L
    return np.asarray(phi, dtype=float), L


def compute_step_data(spec: SystemSpec, orc: TransitionOracle, grid: TimeGrid):
    """Per-step (phi_i, L_i) pairs; independent across i, optionally threaded."""
    workers = worker_count()
    indices = range(1, grid.N + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            data = list(ex.map(lambda i: _step_data(spec, orc, grid, i), indices))
    else:
        data = [_step_data(spec, orc, grid, i) for i in indices]
    phis = tuple(d[0] for d in data)
    maps = tuple(d[1] for d in data)
    return phis, maps


def reach_sets(spec: SystemSpec, orc: TransitionOracle, N: int) -> ReachResult:
    """Run the recursion on the uniform N-step grid."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    grid = TimeGrid(spec.t_lo, spec.t_hi, N)
    phis, maps = compute_step_data(spec, orc, grid)

    lambdas = [spec.X0]
    for i in range(1, N + 1):
        step_set = lambdas[-1].linear_map(phis[i - 1])
        w = spec.U.linear_map(maps[i - 1])
        lambdas.append(step_set.minkowski_sum(w))

    # bookkeeping invariant: generators only accumulate, never reduce
    gx, gu = spec.X0.num_generators, spec.U.num_generators
    assert all(z.num_generators == gx + i * gu for i, z in enumerate(lambdas))

    return ReachResult(
        grid=grid,
        lambdas=tuple(lambdas),
        fingerprint=spec.fingerprint(),
        accuracy_class=orc.accuracy_class,
        step_transitions=phis,
        input_maps=maps,
    )


def tube(result: ReachResult) -> list[Zonotope]:
    return result.tube()


def growth_bound(spec: SystemSpec, directions: int = 360) -> float:
    """A priori bound K with ||R(t)|| <= K for every t in the interval.

    K = exp(int ||A||) (||X0|| + ||U|| int ||B||); set norms estimated by
    direction sampling, matrix-norm integrals exact for piecewise-constant
    data and by quadrature otherwise.
    """
    M = matrix_norm_integral(spec.A, spec.t_lo, spec.t_hi, spec.singularities)
    beta = matrix_norm_integral(spec.B, spec.t_lo, spec.t_hi, spec.singularities)
    x0n = set_norm(spec.X0, directions)
    un = set_norm(spec.U, directions)
    return math.exp(M) * (x0n + un * beta)


def verify_growth_bound(spec: SystemSpec, result: ReachResult,
                        directions: int = 360, margin: float = 1e-6):
    """Check every computed set against the a priori growth bound.

    Returns (ok, worst_norm, K).  Failure indicates a defective transition
    oracle or input map, never valid data.
    """
    K = growth_bound(spec, directions)
    worst = max(set_norm(z, directions) for z in result.lambdas)
    return worst <= K * (1.0 + margin), worst, K
