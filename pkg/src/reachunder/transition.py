"""State transition matrices phi(t, s) for the LTV flow and their norm bound.

phi maps the unforced state at time s to the state at time t >= s and
satisfies phi(s, s) = I and the cocycle phi(t, z) phi(z, s) = phi(t, s).
Three evaluation modes are offered:

  closed_form     analytic formula attached to the system (exact),
  expm_piecewise  time-ordered product of matrix exponentials over the
                  constant segments of A (exact up to the expm kernel),
  ode_numeric     fixed-step 4th-order integration of dPhi/dt = A(t) Phi,
                  panels split at declared breakpoints and refined near
                  declared singular times.

Backward transitions (t < s) are rejected; the recursion never needs them.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import integrate_scalar
from .rk4 import integrate_rk4
from .systems import SystemSpec

__all__ = ["matrix_exponential", "TransitionOracle", "matrix_norm_integral"]


# Pade order-13 coefficients for scaling-and-squaring
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def matrix_exponential(M) -> np.ndarray:
    """exp(M) by scaling-and-squaring with a 13th-order rational kernel.

    Relative error is at the rounding level for ||M|| up to desk scale
    (tested against an independent implementation to 1e-12 for norms <= 50).
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix_exponential requires a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix_exponential requires finite entries")
    n = A.shape[0]
    b = _PADE13

    nrm = np.linalg.norm(A, 1)
    squarings = max(0, int(math.ceil(math.log2(nrm / _THETA13)))) if nrm > _THETA13 else 0
    A = A / (2.0 ** squarings)

    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def matrix_norm_integral(provider, a: float, b: float, singularities=()) -> float:
    """Integral of the induced 2-norm ||P(z)|| over [a, b].

    Exact (segment sums) for piecewise-constant providers, composite Gauss
    quadrature with singularity refinement otherwise.
    """
    if b < a:
        raise ValueError("norm integral requires a <= b")
    if b == a:
        return 0.0
    pieces = provider.constant_pieces(a, b)
    if pieces is not None:
        return float(sum((hi - lo) * np.linalg.norm(M, 2) for lo, hi, M in pieces))
    return integrate_scalar(
        lambda z: np.linalg.norm(provider(z), 2), a, b,
        breakpoints=provider.breakpoints, singularities=singularities,
    )


class TransitionOracle:
    """Produces phi(t, s) for one system with a declared accuracy class.

    Pure-function semantics: evaluation has no observable side effects and
    instances may be shared across threads (the optional memo is
    append-only and keyed by the exact (s, t) floats).
    """

    MODES = ("closed_form", "expm_piecewise", "ode_numeric")

    def __init__(self, spec: SystemSpec, mode: str | None = None,
                 h_max: float | None = None, memoize: bool = True):
        if mode is None:
            if spec.phi_formula is not None:
                mode = "closed_form"
            elif spec.A.constant_pieces(spec.t_lo, spec.t_hi) is not None:
                mode = "expm_piecewise"
            else:
                mode = "ode_numeric"
        if mode not in self.MODES:
            raise ValueError(f"unknown oracle mode {mode!r}; choose from {self.MODES}")
        if mode == "closed_form" and spec.phi_formula is None:
            raise ValueError("closed_form mode requires a system with an analytic formula")
        if mode == "expm_piecewise" and spec.A.constant_pieces(spec.t_lo, spec.t_hi) is None:
            raise ValueError("expm_piecewise mode requires piecewise-constant A")
        self.spec = spec
        self.mode = mode
        self.h_max = float(h_max) if h_max is not None else 1e-3 * spec.span
        self._memo: dict[tuple[float, float], np.ndarray] | None = {} if memoize else None

    @property
    def accuracy_class(self) -> str:
        if self.mode in ("closed_form", "expm_piecewise"):
            return "exact"
        # singular data limits the fixed-step integrator near the singularity
        eps = 1e-5 if self.spec.singularities else 1e-9
        return f"tol({eps:g})"

    def _check_times(self, t: float, s: float):
        if s > t:
            raise ValueError("backward transition (t < s) unsupported")
        lo, hi = self.spec.t_lo, self.spec.t_hi
        if s < lo or t > hi:
            raise ValueError(f"transition times must lie in [{lo}, {hi}]")

    def transition(self, t: float, s: float) -> np.ndarray:
        """phi(t, s) for t_lo <= s <= t <= t_hi."""
        t = float(t)
        s = float(s)
        self._check_times(t, s)
        if t == s:
            return np.eye(self.spec.n)
        if self._memo is not None:
            hit = self._memo.get((s, t))
            if hit is not None:
                return hit
        phi = self._evaluate(t, s)
        if self._memo is not None:
            phi = np.asarray(phi, dtype=float)
            phi.flags.writeable = False
            self._memo[(s, t)] = phi
        return phi

    def _evaluate(self, t: float, s: float) -> np.ndarray:
        spec = self.spec
        if self.mode == "closed_form":
            return np.asarray(spec.phi_formula(t, s), dtype=float)
        if self.mode == "expm_piecewise":
            phi = np.eye(spec.n)
            # time-ordered product: later segments multiply from the left
            for lo, hi, M in spec.A.constant_pieces(s, t):
                phi = matrix_exponential(M * (hi - lo)) @ phi
            return phi
        return integrate_rk4(
            lambda z, Y: spec.A(z) @ Y, s, t, np.eye(spec.n),
            h_max=self.h_max,
            breakpoints=[p for p in spec.breakpoints if s < p < t],
            singularities=spec.singularities,
        )

    def norm_bound(self, t: float, s: float) -> float:
        """Growth estimate exp(int_s^t ||A(z)|| dz) >= ||phi(t, s)||."""
        t = float(t)
        s = float(s)
        self._check_times(t, s)
        return math.exp(matrix_norm_integral(
            self.spec.A, s, t, singularities=self.spec.singularities))
