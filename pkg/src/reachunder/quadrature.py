"""Composite Gauss-Legendre quadrature over breakpoint-aware panels.

Integration intervals are first split at declared discontinuity times so
every panel sees analytic data, then each panel is split into equal
substeps carrying a fixed Gauss-Legendre rule.  Panels whose edge touches
a declared singular time are additionally refined geometrically (edges at
offset L * 4**-k) so integrable endpoint singularities such as 1/(2*sqrt(t))
are resolved without adaptive machinery.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["gauss_nodes", "panels", "integrate_matrix", "integrate_scalar"]

# geometric refinement: L * 4**-k for k = 1..GEO_LEVELS
GEO_LEVELS = 26
GEO_RATIO = 4.0


@lru_cache(maxsize=None)
def gauss_nodes(k: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(k)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _geometric_edges(anchor: float, length: float, sign: float) -> list[float]:
    """Edges anchor + sign * length * 4**-k, closest to the anchor first."""
    out = []
    for k in range(GEO_LEVELS, 0, -1):
        e = anchor + sign * length * GEO_RATIO ** (-k)
        out.append(e)
    return out


def panels(a: float, b: float, breakpoints=(), singularities=()) -> list[tuple[float, float, bool]]:
    """Split [a, b] into panels (lo, hi, is_geometric).

    Breakpoints strictly inside (a, b) become panel edges.  A singular time
    coinciding with a panel edge triggers geometric refinement of the
    adjacent panel(s); a singular time interior to a panel first splits it.
    Zero-length panels from coincident edges are dropped.
    """
    if b < a:
        raise ValueError("panel interval must satisfy a <= b")
    tol = 1e-14 * max(abs(a), abs(b), 1.0)
    cuts = sorted({float(t) for t in breakpoints if a + tol < t < b - tol}
                  | {float(s) for s in singularities if a + tol < s < b - tol})
    edges = [float(a)] + cuts + [float(b)]

    sing = sorted(float(s) for s in singularities if a - tol <= s <= b + tol)
    out: list[tuple[float, float, bool]] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= tol:
            continue
        left_sing = any(abs(s - lo) <= tol for s in sing)
        right_sing = any(abs(s - hi) <= tol for s in sing)
        length = hi - lo
        sub = [lo]
        if left_sing:
            sub.extend(e for e in _geometric_edges(lo, length if not right_sing else length / 2.0, +1.0))
        if right_sing:
            inner = _geometric_edges(hi, length if not left_sing else length / 2.0, -1.0)
            sub.extend(reversed(inner))
        sub.append(hi)
        sub = sorted(set(sub))
        geo = left_sing or right_sing
        for p, q in zip(sub[:-1], sub[1:]):
            if q - p > 0.0:
                out.append((p, q, geo))
    return out


def integrate_matrix(f, a: float, b: float, *, nodes: int = 5, substeps: int = 4,
                     breakpoints=(), singularities=(), shape=None) -> np.ndarray:
    """Integral of a matrix-valued f over [a, b] by composite Gauss-Legendre.

    Each panel is split into `substeps` equal slices with a `nodes`-point
    rule per slice.  `shape` may pre-declare the result shape; otherwise it
    is taken from the first evaluation.
    """
    if b == a:
        if shape is None:
            shape = np.asarray(f(a)).shape
        return np.zeros(shape)
    x, w = gauss_nodes(nodes)
    total = None if shape is None else np.zeros(shape)
    for lo, hi, _geo in panels(a, b, breakpoints, singularities):
        h = (hi - lo) / substeps
        for j in range(substeps):
            mid = lo + (j + 0.5) * h
            half = h / 2.0
            for xi, wi in zip(x, w):
                val = np.asarray(f(mid + half * xi), dtype=float)
                if total is None:
                    total = np.zeros(val.shape)
                total += (wi * half) * val
    if total is None:
        total = np.zeros(shape if shape is not None else ())
    return total


def integrate_scalar(f, a: float, b: float, **kw) -> float:
    g = lambda t: np.asarray([f(t)], dtype=float)
    return float(integrate_matrix(g, a, b, shape=(1,), **kw)[0])
