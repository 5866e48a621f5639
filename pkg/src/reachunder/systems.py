"""System data for dx/dt = A(t) x + B(t) u(t) on a compact time interval.

Holds the time-varying matrices as providers (constant, piecewise constant,
or black-box callback with declared discontinuities), the initial set X0,
and the input set U, and validates the standing preconditions:

    (i)   the time interval is compact with non-zero length,
    (ii)  A(.) is integrable,
    (iii) ||B(.)||^p is integrable for some p in (1, inf],
    (iv)  initial and input values lie in X0 and U,
    (v)   X0 and U are non-empty, convex, and compact.

Conditions (ii) and (iii) cannot be checked for black-box callbacks; the
p exponent is carried as a user assertion in the spec metadata.  Zonotopic
X0 and U satisfy (v) by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .zonotope import Zonotope

__all__ = [
    "MatrixProvider",
    "ConstantProvider",
    "PiecewiseConstantProvider",
    "CallbackProvider",
    "SystemSpec",
    "SpecError",
    "builtin_system",
    "parse_spec_dict",
    "load_spec_file",
    "BUILTIN_NAMES",
]


class SpecError(ValueError):
    """Malformed or inconsistent system description (file- or dict-level)."""


def _check_matrix(M, rows=None, cols=None, what="matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise SpecError(f"{what} must be a 2-D array with positive dimensions")
    if not np.all(np.isfinite(M)):
        raise SpecError(f"{what} entries must be finite")
    if rows is not None and M.shape[0] != rows:
        raise SpecError(f"{what} must have {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise SpecError(f"{what} must have {cols} columns, got {M.shape[1]}")
    M.flags.writeable = False
    return M


class MatrixProvider:
    """Time -> matrix sampler with declared discontinuity structure."""

    kind = "callback"

    def __call__(self, t: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def shape(self) -> tuple[int, int]:
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior times where the matrix may jump."""
        return ()

    def constant_pieces(self, a: float, b: float):
        """Decomposition of [a, b] into (lo, hi, M) slices with M constant.

        Returns None when the provider is not piecewise constant.
        """
        return None

    def clipped(self, a: float, b: float) -> "MatrixProvider":
        """Provider restricted to the sub-window [a, b]."""
        return self

    def descriptor(self) -> dict:
        return {"kind": self.kind, "breakpoints": list(self.breakpoints)}

    def to_json_dict(self) -> dict:
        raise SpecError(f"provider of kind {self.kind!r} has no JSON form")


class ConstantProvider(MatrixProvider):
    kind = "constant"

    def __init__(self, M):
        self._M = _check_matrix(M)

    def __call__(self, t: float) -> np.ndarray:
        return self._M

    @property
    def shape(self):
        return self._M.shape

    def constant_pieces(self, a, b):
        return [(a, b, self._M)]

    def descriptor(self):
        return {"kind": self.kind, "matrix": self._M.tolist()}

    def to_json_dict(self):
        return {"kind": "constant", "matrix": self._M.tolist()}


class PiecewiseConstantProvider(MatrixProvider):
    """Constant on segments (t_{k-1}, t_k]; segments given as (t_end, M) pairs.

    Segment end times must be strictly increasing and the last one must
    equal the right end of the covered window.
    """

    kind = "piecewise_constant"

    def __init__(self, t_start: float, segments):
        if not segments:
            raise SpecError("piecewise_constant provider needs at least one segment")
        ends = [float(e) for e, _ in segments]
        if any(e2 <= e1 for e1, e2 in zip(ends[:-1], ends[1:])):
            raise SpecError("segment end times must be strictly increasing")
        if ends[0] <= t_start:
            raise SpecError("first segment must end after the window start")
        mats = [_check_matrix(M, what="segment matrix") for _, M in segments]
        if any(M.shape != mats[0].shape for M in mats):
            raise SpecError("segment matrices must share one shape")
        self._t_start = float(t_start)
        self._ends = tuple(ends)
        self._mats = tuple(mats)

    def __call__(self, t: float) -> np.ndarray:
        # right-continuous at the start, left-continuous at each switch
        idx = int(np.searchsorted(np.asarray(self._ends), t, side="left"))
        idx = min(idx, len(self._mats) - 1)
        return self._mats[idx]

    @property
    def shape(self):
        return self._mats[0].shape

    @property
    def t_end(self) -> float:
        return self._ends[-1]

    @property
    def breakpoints(self):
        return self._ends[:-1]

    def constant_pieces(self, a, b):
        pieces = []
        lo = a
        for end, M in zip(self._ends, self._mats):
            hi = min(end, b)
            if hi > lo:
                pieces.append((lo, hi, M))
                lo = hi
            if lo >= b:
                break
        if lo < b:
            # window extends past the declared segments; hold the last matrix
            pieces.append((lo, b, self._mats[-1]))
        return pieces

    def clipped(self, a, b):
        segs = [(min(end, b) if end < b else b, M)
                for end, M in zip(self._ends, self._mats) if end > a]
        segs = [(e, M) for e, M in segs if e > a]
        if not segs or segs[-1][0] < b:
            segs.append((b, self._mats[-1]))
        # drop duplicate end times produced by clipping
        dedup = []
        for e, M in segs:
            if dedup and e <= dedup[-1][0]:
                continue
            dedup.append((e, M))
        return PiecewiseConstantProvider(a, dedup)

    def descriptor(self):
        return {
            "kind": self.kind,
            "segments": [{"until": e, "matrix": M.tolist()}
                         for e, M in zip(self._ends, self._mats)],
        }

    def to_json_dict(self):
        return self.descriptor()


class CallbackProvider(MatrixProvider):
    kind = "callback"

    def __init__(self, fn: Callable[[float], np.ndarray], shape, breakpoints=()):
        self._fn = fn
        self._shape = (int(shape[0]), int(shape[1]))
        self._breakpoints = tuple(float(t) for t in breakpoints)

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t), dtype=float)

    @property
    def shape(self):
        return self._shape

    @property
    def breakpoints(self):
        return self._breakpoints

    def clipped(self, a, b):
        return CallbackProvider(
            self._fn, self._shape,
            [t for t in self._breakpoints if a < t < b],
        )


# -- built-in example systems --------------------------------------------------


def _academic_alpha(t: float) -> float:
    return 0.0 if t == 0.0 else 1.0 / (2.0 * np.sqrt(t))


class AcademicAProvider(CallbackProvider):
    """A(t) = alpha(t) * I with alpha(t) = 1/(2 sqrt(t)); integrable, unbounded at 0."""

    kind = "builtin_academic_A"

    def __init__(self):
        eye = np.eye(2)
        super().__init__(lambda t: _academic_alpha(t) * eye, (2, 2))

    def descriptor(self):
        return {"kind": "builtin", "name": "academic"}

    def to_json_dict(self):
        return self.descriptor()


class AcademicBProvider(CallbackProvider):
    """B(t) = exp(sqrt(t)) * rotation(t)."""

    kind = "builtin_academic_B"

    def __init__(self):
        def fn(t):
            c, s = np.cos(t), np.sin(t)
            return np.exp(np.sqrt(t)) * np.array([[c, -s], [s, c]])

        super().__init__(fn, (2, 2))

    def descriptor(self):
        return {"kind": "builtin", "name": "academic"}

    def to_json_dict(self):
        return self.descriptor()


@dataclass(frozen=True)
class SystemSpec:
    """Validated problem data for one reachability analysis."""

    n: int
    m: int
    t_lo: float
    t_hi: float
    A: MatrixProvider
    B: MatrixProvider
    X0: Zonotope
    U: Zonotope
    singularities: tuple[float, ...] = ()
    phi_formula: Optional[Callable[[float, float], np.ndarray]] = None
    name: Optional[str] = None
    # integrability exponent of ||B||, condition (iii); user assertion only
    b_power_exponent: float = float("inf")

    def __post_init__(self):
        if not (np.isfinite(self.t_lo) and np.isfinite(self.t_hi)):
            raise SpecError("time interval must be finite (condition (i))")
        if not self.t_hi > self.t_lo:
            raise SpecError(
                "time interval must have non-zero length (condition (i))")
        if self.n < 1 or self.m < 1:
            raise SpecError("state and input dimensions must be positive")
        if self.A.shape != (self.n, self.n):
            raise SpecError(f"A must be {self.n}x{self.n}, got {self.A.shape} (condition (ii))")
        if self.B.shape != (self.n, self.m):
            raise SpecError(f"B must be {self.n}x{self.m}, got {self.B.shape} (condition (iii))")
        if self.X0.dim != self.n:
            raise SpecError(f"X0 dimension {self.X0.dim} != n={self.n} (condition (v))")
        if self.U.dim != self.m:
            raise SpecError(f"U dimension {self.U.dim} != m={self.m} (condition (v))")
        if isinstance(self.A, PiecewiseConstantProvider) and self.A.t_end < self.t_hi:
            raise SpecError("A segments must cover the whole time interval")
        if isinstance(self.B, PiecewiseConstantProvider) and self.B.t_end < self.t_hi:
            raise SpecError("B segments must cover the whole time interval")

    @property
    def span(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior discontinuity times of A or B, sorted."""
        pts = {t for t in self.A.breakpoints if self.t_lo < t < self.t_hi}
        pts |= {t for t in self.B.breakpoints if self.t_lo < t < self.t_hi}
        return tuple(sorted(pts))

    def restricted(self, a: float, b: float, X0: Zonotope) -> "SystemSpec":
        """Same dynamics on the sub-window [a, b] with a new initial set."""
        if not (self.t_lo <= a < b <= self.t_hi):
            raise SpecError("restriction window must lie inside the time interval")
        return SystemSpec(
            n=self.n, m=self.m, t_lo=a, t_hi=b,
            A=self.A.clipped(a, b), B=self.B.clipped(a, b),
            X0=X0, U=self.U,
            singularities=tuple(s for s in self.singularities if a <= s <= b),
            phi_formula=self.phi_formula,
            name=self.name,
            b_power_exponent=self.b_power_exponent,
        )

    def descriptor(self) -> dict:
        return {
            "n": self.n, "m": self.m, "t": [self.t_lo, self.t_hi],
            "A": self.A.descriptor(), "B": self.B.descriptor(),
            "X0": self.X0.to_json_dict(), "U": self.U.to_json_dict(),
        }

    def to_json_dict(self) -> dict:
        d = self.descriptor()
        d["A"] = self.A.to_json_dict()
        d["B"] = self.B.to_json_dict()
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _academic() -> SystemSpec:
    def phi(t, s):
        return np.exp(np.sqrt(t) - np.sqrt(s)) * np.eye(2)

    return SystemSpec(
        n=2, m=2, t_lo=0.0, t_hi=1.0,
        A=AcademicAProvider(), B=AcademicBProvider(),
        X0=Zonotope.singleton([0.0, 0.0]),
        U=Zonotope.box([-1.0, -1.0], [1.0, 1.0]),
        singularities=(0.0,),
        phi_formula=phi,
        name="academic",
        b_power_exponent=float("inf"),
    )


# switched DC-DC converter matrices
_DCDC_A1 = np.array([[-1.0 / 3.0, 0.0], [0.0, -1.0 / 6.0]])
_DCDC_A2 = np.array([[-0.5, -1.0 / 6.0], [1.0 / 6.0, -1.0 / 6.0]])


def _dcdc() -> SystemSpec:
    A = PiecewiseConstantProvider(0.0, [
        (1.0, _DCDC_A1), (2.0, _DCDC_A2), (3.0, _DCDC_A1), (5.0, _DCDC_A2),
    ])
    return SystemSpec(
        n=2, m=2, t_lo=0.0, t_hi=5.0,
        A=A, B=ConstantProvider(np.eye(2)),
        X0=Zonotope.box([0.9, 4.9], [1.1, 5.1]),
        U=Zonotope.box([2.0 / 15.0, 0.0], [8.0 / 15.0, 0.0]),
        name="dcdc",
        b_power_exponent=float("inf"),
    )


BUILTIN_NAMES = ("academic", "dcdc")


def builtin_system(name: str) -> SystemSpec:
    if name == "academic":
        return _academic()
    if name == "dcdc":
        return _dcdc()
    raise SpecError(f"unknown builtin system {name!r}; choose from {BUILTIN_NAMES}")


# -- JSON spec files -----------------------------------------------------------


def _parse_provider(d: dict, slot: str, t_lo: float, source: str) -> MatrixProvider:
    if not isinstance(d, dict) or "kind" not in d:
        raise SpecError(f"{source}: {slot} must be an object with a 'kind' field")
    kind = d["kind"]
    if kind == "constant":
        return ConstantProvider(d["matrix"])
    if kind == "piecewise_constant":
        segs = [(seg["until"], seg["matrix"]) for seg in d["segments"]]
        return PiecewiseConstantProvider(t_lo, segs)
    if kind == "builtin":
        name = d.get("name")
        if name == "academic":
            return AcademicAProvider() if slot == "A" else AcademicBProvider()
        if name == "dcdc":
            return builtin_system("dcdc").A if slot == "A" else ConstantProvider(np.eye(2))
        raise SpecError(f"{source}: unknown builtin provider {name!r} for {slot}")
    raise SpecError(f"{source}: unknown provider kind {kind!r} for {slot}")


def parse_spec_dict(d: dict, source: str = "<spec>") -> SystemSpec:
    """Build a validated SystemSpec from its JSON object form."""
    try:
        n = int(d["n"])
        m = int(d["m"])
        t_lo, t_hi = (float(v) for v in d["t"])
        A = _parse_provider(d["A"], "A", t_lo, source)
        B = _parse_provider(d["B"], "B", t_lo, source)
        X0 = Zonotope.from_json_dict(d["X0"])
        U = Zonotope.from_json_dict(d["U"])
    except SpecError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"{source}: {exc}") from exc

    # built-in academic providers imply the known singular time and formula
    singular = ()
    phi = None
    if isinstance(A, AcademicAProvider):
        if abs(t_lo) > 0:
            raise SpecError(f"{source}: builtin academic A is defined from t=0")
        singular = (0.0,)
        phi = _academic().phi_formula
    try:
        return SystemSpec(n=n, m=m, t_lo=t_lo, t_hi=t_hi, A=A, B=B, X0=X0, U=U,
                          singularities=singular, phi_formula=phi,
                          b_power_exponent=float(d.get("p", float("inf"))))
    except SpecError as exc:
        raise SpecError(f"{source}: {exc}") from exc


def load_spec_file(path) -> SystemSpec:
    """Parse a JSON system file; errors carry file and line anchors."""
    text = open(path, "r", encoding="utf-8").read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_spec_dict(d, source=str(path))
