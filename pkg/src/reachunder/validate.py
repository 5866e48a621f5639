"""Constructive certification and convergence measurement for reach results.

Every point of a computed set is, by construction, hit from a concrete
initial state and a concrete piecewise-constant input signal.  A Witness
materializes that certificate and scores it by re-simulating the
trajectory with a high-accuracy integrator; small simulation error is the
machine-checkable form of the under-approximation guarantee.

Hausdorff distances between convex sets are estimated from support
function differences over a direction grid (a lower bound converging to
the true distance as the grid refines); tube unions, being non-convex,
are compared through boundary point clouds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .reach import ReachResult, TimeGrid, compute_step_data, reach_sets
from .rk4 import integrate_rk4
from .systems import SystemSpec
from .transition import TransitionOracle
from .zonotope import Zonotope, _direction_grid

__all__ = [
    "Witness",
    "CertificationReport",
    "ConvergenceReport",
    "extract_witness",
    "simulate_step_inputs",
    "certify_under_approximation",
    "hausdorff_convex",
    "hausdorff_tube",
    "convergence_study",
]

SIM_STEPS_PER_CELL = 64  # simulator step: tau / 64


@dataclass(frozen=True)
class Witness:
    """Reachability certificate for one point of a computed set.

    x0 and the step-input values are produced through the coefficient
    parameterization of X0 and U, so their membership holds by
    construction; `error` is the distance between the claimed point and
    the independently simulated endpoint.
    """

    set_index: int
    target: np.ndarray
    x0: np.ndarray
    inputs: np.ndarray  # (set_index, m); row k is the value on [t_k, t_{k+1})
    simulated_endpoint: np.ndarray
    error: float


def simulate_step_inputs(spec: SystemSpec, grid: TimeGrid, x0, inputs,
                         upto_index: Optional[int] = None,
                         steps_per_cell: int = SIM_STEPS_PER_CELL) -> np.ndarray:
    """Integrate dx/dt = A(t) x + B(t) u(t) under piecewise-constant inputs.

    `x0` may be a single state (n,) or a batch (n, B); `inputs` one value
    per grid cell, shaped (i, m) or (i, m, B).  Classic 4th-order steps of
    size tau/steps_per_cell, panels split at grid points and declared
    breakpoints, refined near declared singular times.
    """
    x0 = np.asarray(x0, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    single = x0.ndim == 1
    X = x0.reshape(spec.n, 1) if single else x0.copy()
    if single and inputs.ndim == 2:
        inputs = inputs[:, :, None]
    i_max = upto_index if upto_index is not None else inputs.shape[0]
    if inputs.shape[0] < i_max:
        raise ValueError(f"need {i_max} input values, got {inputs.shape[0]}")
    h = grid.tau / steps_per_cell
    for k in range(i_max):
        a = float(grid.points[k])
        b = float(grid.points[k + 1])
        uk = inputs[k]

        def deriv(t, Y, _u=uk):
            return spec.A(t) @ Y + spec.B(t) @ _u

        X = integrate_rk4(deriv, a, b, X, h_max=h,
                          breakpoints=[p for p in spec.breakpoints if a < p < b],
                          singularities=spec.singularities)
    return X[:, 0] if single else X


def extract_witness(spec: SystemSpec, orc: TransitionOracle, result: ReachResult,
                    xi_x0, xi_u: Sequence, index: Optional[int] = None) -> Witness:
    """Materialize and score the witness for one coefficient assignment.

    The target point is the coefficient parameterization of the computed
    set itself (the generator matrix already carries the composed per-step
    maps), so the target is a member of the claimed set exactly.
    """
    i = result.grid.N if index is None else int(index)
    if not 1 <= i <= result.grid.N:
        raise ValueError(f"witness index {i} outside [1, {result.grid.N}]")
    xi_u = [np.asarray(x, dtype=float).reshape(-1) for x in xi_u]
    if len(xi_u) != i:
        raise ValueError(f"need {i} input coefficient blocks, got {len(xi_u)}")
    xi_x0 = np.asarray(xi_x0, dtype=float).reshape(-1)

    x0 = spec.X0.point_from_coefficients(xi_x0)
    inputs = np.array([spec.U.point_from_coefficients(x) for x in xi_u])
    xi_full = np.concatenate([xi_x0, *xi_u]) if xi_u else xi_x0
    target = result.lambdas[i].point_from_coefficients(xi_full)

    endpoint = simulate_step_inputs(spec, result.grid, x0, inputs, upto_index=i)
    return Witness(
        set_index=i, target=target, x0=x0, inputs=inputs,
        simulated_endpoint=endpoint,
        error=float(np.linalg.norm(target - endpoint)),
    )


@dataclass(frozen=True)
class CertificationReport:
    passed: bool
    tol: float
    seed: int
    trials: int
    checked_indices: tuple[int, ...]
    witness_count: int
    max_error: float
    max_error_index: int
    failures: tuple[dict, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "seed": self.seed,
            "trials": self.trials,
            "checked_indices": list(self.checked_indices),
            "witness_count": self.witness_count,
            "max_error": self.max_error,
            "max_error_index": self.max_error_index,
            "failures": [dict(f) for f in self.failures],
        }


def _checked_indices(N: int) -> tuple[int, ...]:
    """Final index plus up to three interior quartile indices."""
    cand = {max(1, round(N * q)) for q in (0.25, 0.5, 0.75)}
    cand.discard(N)
    return tuple(sorted(cand)) + (N,)


def _extreme_coefficients(k: int, rng: np.random.Generator, cap: int = 64) -> np.ndarray:
    """All-vertex sign patterns when 2^k <= cap, else `cap` seeded draws."""
    if k == 0:
        return np.zeros((1, 0))
    if 2 ** k <= cap:
        return np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
    return rng.choice(np.array([-1.0, 1.0]), size=(cap, k))


def certify_under_approximation(spec: SystemSpec, orc: TransitionOracle,
                                result: ReachResult, trials: int, tol: float,
                                seed: int = 0) -> CertificationReport:
    """Witness-check the final set and three interior sets of a reach result.

    Per checked set: `trials` coefficient vectors drawn uniformly from
    [-1, 1]^k plus extreme all-corner vectors (capped at 64), every one
    simulated against its target.  Failure is reported, never raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    gx = spec.X0.num_generators
    gu = spec.U.num_generators
    indices = _checked_indices(result.grid.N)

    worst = -1.0
    worst_index = -1
    count = 0
    failures: list[dict] = []
    for i in indices:
        k = gx + i * gu
        batch = np.vstack([
            rng.uniform(-1.0, 1.0, size=(trials, k)),
            _extreme_coefficients(k, rng),
        ])
        errors = _witness_errors_batch(spec, result, i, batch)
        count += batch.shape[0]
        emax = float(errors.max())
        if emax > worst:
            worst, worst_index = emax, i
        for row in np.nonzero(errors > tol)[0][:10]:
            failures.append({
                "set_index": i,
                "error": float(errors[row]),
                "coefficients": [float(v) for v in batch[row]],
            })
    return CertificationReport(
        passed=not failures, tol=tol, seed=seed, trials=trials,
        checked_indices=indices, witness_count=count,
        max_error=worst, max_error_index=worst_index,
        failures=tuple(failures),
    )


def _witness_errors_batch(spec: SystemSpec, result: ReachResult, i: int,
                          coeffs: np.ndarray) -> np.ndarray:
    """Simulation errors for a (B, k) block of coefficient vectors (one set)."""
    gx = spec.X0.num_generators
    gu = spec.U.num_generators
    B = coeffs.shape[0]
    lam = result.lambdas[i]

    targets = lam.center[:, None] + lam.generators @ coeffs.T  # (n, B)
    x0s = spec.X0.center[:, None] + spec.X0.generators @ coeffs[:, :gx].T
    inputs = np.empty((i, spec.m, B))
    for k in range(i):
        blk = coeffs[:, gx + k * gu: gx + (k + 1) * gu]
        inputs[k] = spec.U.center[:, None] + spec.U.generators @ blk.T

    ends = simulate_step_inputs(spec, result.grid, x0s, inputs, upto_index=i)
    return np.linalg.norm(targets - ends, axis=0)


# -- Hausdorff estimation ------------------------------------------------------


def hausdorff_convex(z1: Zonotope, z2: Zonotope, directions: int) -> float:
    """Support-difference estimate of the Hausdorff distance of two convex sets.

    max_d |h_1(d) - h_2(d)| over `directions` unit vectors; a lower bound
    that converges to the true distance as the grid refines (exact
    characterization holds for convex compact sets).
    """
    if z1.dim != z2.dim:
        raise ValueError("hausdorff_convex requires equal dimensions")
    if directions < 1:
        raise ValueError("need at least one direction")
    D = _direction_grid(z1.dim, directions)
    h1 = D @ z1.center + np.abs(D @ z1.generators).sum(axis=1)
    h2 = D @ z2.center + np.abs(D @ z2.generators).sum(axis=1)
    return float(np.max(np.abs(h1 - h2)))


def hausdorff_tube(tube_a: Sequence[Zonotope], tube_b: Sequence[Zonotope],
                   samples_per_set: int) -> float:
    """Symmetric Hausdorff distance between boundary clouds of two set unions.

    Each member set contributes its inscribed outline polygon vertices;
    the result estimates the distance between the (non-convex) unions and
    carries the sampling gap of the outlines.
    """
    if not tube_a or not tube_b:
        raise ValueError("hausdorff_tube requires non-empty tubes")
    cloud_a = np.vstack([z.outline_2d(samples_per_set) for z in tube_a])
    cloud_b = np.vstack([z.outline_2d(samples_per_set) for z in tube_b])
    d_ab = np.max(cKDTree(cloud_b).query(cloud_a)[0])
    d_ba = np.max(cKDTree(cloud_a).query(cloud_b)[0])
    return float(max(d_ab, d_ba))


# -- convergence studies -------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Self-convergence distances against a fine-grid reference run."""

    Ns: tuple[int, ...]
    distances: tuple[float, ...]
    reference_N: int
    mode: str
    doubling_pairs: tuple[tuple[int, int], ...]
    ratios: tuple[float, ...]
    directions: int = 720
    samples_per_set: int = 256

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "Ns": list(self.Ns),
            "distances": list(self.distances),
            "reference_N": self.reference_N,
            "doubling_pairs": [list(p) for p in self.doubling_pairs],
            "ratios": list(self.ratios),
            "directions": self.directions,
            "samples_per_set": self.samples_per_set,
        }


def convergence_study(spec: SystemSpec, orc: TransitionOracle, Ns: Sequence[int],
                      reference_N: int, mode: str = "final_set",
                      directions: int = 720, samples_per_set: int = 256) -> ConvergenceReport:
    """Distances from each N-step run to a fine reference run.

    The true reachable set has no closed form, so the reference is the
    same recursion at `reference_N` (required: at least 4x the largest N,
    and divisible by every N so tube grids align).
    """
    Ns = [int(N) for N in Ns]
    if not Ns or any(N < 1 for N in Ns):
        raise ValueError("Ns must be positive integers")
    if any(b <= a for a, b in zip(Ns[:-1], Ns[1:])):
        raise ValueError("Ns must be strictly increasing")
    if mode not in ("final_set", "tube"):
        raise ValueError("mode must be 'final_set' or 'tube'")
    if reference_N < 4 * max(Ns):
        raise ValueError("reference_N must be at least 4 * max(Ns)")
    if any(reference_N % N for N in Ns):
        raise ValueError("every N must divide reference_N")

    ref = reach_sets(spec, orc, reference_N)
    distances = []
    for N in Ns:
        res = reach_sets(spec, orc, N)
        if mode == "final_set":
            d = hausdorff_convex(res.lambdas[-1], ref.lambdas[-1], directions)
        else:
            d = hausdorff_tube(res.tube(), ref.tube(), samples_per_set)
        distances.append(d)

    by_n = dict(zip(Ns, distances))
    pairs = [(N, 2 * N) for N in Ns if 2 * N in by_n]
    ratios = [by_n[a] / by_n[b] if by_n[b] > 0 else float("inf") for a, b in pairs]
    return ConvergenceReport(
        Ns=tuple(Ns), distances=tuple(distances), reference_N=reference_N,
        mode=mode, doubling_pairs=tuple(pairs), ratios=tuple(ratios),
        directions=directions, samples_per_set=samples_per_set,
    )
