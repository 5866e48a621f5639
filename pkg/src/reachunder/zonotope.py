"""Zonotopes and the exact set algebra used by the reachability recursion.

A zonotope is the affine image of a hypercube,

    Z = { c + sum_j xi_j * g_j : xi_j in [-1, 1] },

stored as a center ``c`` (shape ``(n,)``) and a generator matrix ``G``
(shape ``(n, p)``, one generator per column, order preserved).  The class
is closed under exactly the two operations the recursion needs, linear
maps and Minkowski sums, so all set arithmetic here is exact up to
floating point rounding.  Instances are immutable and safe to share
across threads.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Zonotope", "set_norm"]


def _as_generator_matrix(generators, dim: int) -> np.ndarray:
    """Normalize generator input (matrix, list of vectors, or None) to (n, p)."""
    if generators is None:
        return np.zeros((dim, 0))
    G = np.asarray(generators, dtype=float)
    if G.ndim == 1:
        G = G.reshape(dim, 1) if G.size else G.reshape(dim, 0)
    if G.ndim != 2:
        raise ValueError("generators must form a 2-D array")
    return G


class Zonotope:
    """Convex compact set with center/generator representation.

    Parameters
    ----------
    center : array_like, shape (n,)
    generators : array_like, shape (n, p), optional
        One generator per column.  ``None`` or an empty matrix yields the
        singleton {center}.  Zero generators are legal and are never
        pruned, so coefficient indexing stays stable.
    """

    __slots__ = ("_c", "_G")

    def __init__(self, center, generators=None):
        c = np.asarray(center, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("center must be non-empty")
        if not np.all(np.isfinite(c)):
            raise ValueError("center entries must be finite")
        G = _as_generator_matrix(generators, c.size)
        if G.shape[0] != c.size:
            raise ValueError(
                f"generator dimension {G.shape[0]} does not match center dimension {c.size}"
            )
        if G.size and not np.all(np.isfinite(G)):
            raise ValueError("generator entries must be finite")
        c.flags.writeable = False
        G.flags.writeable = False
        self._c = c
        self._G = G

    # -- construction helpers -------------------------------------------------

    @classmethod
    def singleton(cls, point) -> "Zonotope":
        return cls(point, None)

    @classmethod
    def box(cls, lo, hi) -> "Zonotope":
        """Axis-aligned box as a zonotope with one (possibly zero) generator per axis."""
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        if np.any(hi < lo):
            raise ValueError("box requires lo <= hi componentwise")
        center = (lo + hi) / 2.0
        G = np.diag((hi - lo) / 2.0)
        return cls(center, G)

    @classmethod
    def from_json_dict(cls, d: dict) -> "Zonotope":
        center = d["center"]
        gens = d.get("generators", [])
        n = len(center)
        G = np.array(gens, dtype=float).reshape(len(gens), n).T if gens else None
        return cls(center, G)

    def to_json_dict(self) -> dict:
        return {
            "center": [float(v) for v in self._c],
            "generators": [[float(v) for v in self._G[:, j]] for j in range(self.num_generators)],
        }

    # -- basic queries ---------------------------------------------------------

    @property
    def center(self) -> np.ndarray:
        return self._c

    @property
    def generators(self) -> np.ndarray:
        """Generator matrix, shape (dim, num_generators), one generator per column."""
        return self._G

    @property
    def dim(self) -> int:
        return self._c.size

    @property
    def num_generators(self) -> int:
        return self._G.shape[1]

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, generators={self.num_generators})"

    def __eq__(self, other):
        if not isinstance(other, Zonotope):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.num_generators == other.num_generators
            and bool(np.array_equal(self._c, other._c))
            and bool(np.array_equal(self._G, other._G))
        )

    def __hash__(self):
        return hash((self._c.tobytes(), self._G.tobytes()))

    # -- set algebra -----------------------------------------------------------

    def linear_map(self, M) -> "Zonotope":
        """Exact image {M x : x in Z} under a linear map M (rows x dim)."""
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[1] != self.dim:
            raise ValueError(
                f"linear map expects {self.dim} columns, got shape {M.shape}"
            )
        return Zonotope(M @ self._c, M @ self._G)

    def __rmatmul__(self, M) -> "Zonotope":
        return self.linear_map(M)

    def minkowski_sum(self, other: "Zonotope") -> "Zonotope":
        """Exact Minkowski sum; generator lists concatenate in order."""
        if not isinstance(other, Zonotope):
            raise TypeError("minkowski_sum expects a Zonotope")
        if self.dim != other.dim:
            raise ValueError(
                f"dimension mismatch in Minkowski sum: {self.dim} vs {other.dim}"
            )
        return Zonotope(self._c + other._c, np.hstack([self._G, other._G]))

    def __add__(self, other):
        return self.minkowski_sum(other)

    def translate(self, v) -> "Zonotope":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size != self.dim:
            raise ValueError("translation vector dimension mismatch")
        return Zonotope(self._c + v, self._G)

    # -- support calculus --------------------------------------------------------

    def support(self, d) -> float:
        """Support function h(d) = d.c + sum_j |d.g_j|; d need not be normalized."""
        d = np.asarray(d, dtype=float).reshape(-1)
        if d.size != self.dim:
            raise ValueError("direction dimension mismatch")
        return float(d @ self._c + np.abs(d @ self._G).sum())

    def support_point(self, d) -> np.ndarray:
        """A point of Z attaining h(d); ties broken by sign(0) := +1."""
        d = np.asarray(d, dtype=float).reshape(-1)
        if d.size != self.dim:
            raise ValueError("direction dimension mismatch")
        # sign with sign(0) := +1 for deterministic outlines
        proj = d @ self._G
        signs = np.where(proj >= 0.0, 1.0, -1.0)
        return self._c + self._G @ signs

    def point_from_coefficients(self, xi) -> np.ndarray:
        """Member c + G xi for coefficients xi in [-1, 1]^p (membership by construction)."""
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if xi.size != self.num_generators:
            raise ValueError(
                f"expected {self.num_generators} coefficients, got {xi.size}"
            )
        if xi.size and np.max(np.abs(xi)) > 1.0:
            raise ValueError("coefficients must lie in [-1, 1]")
        return self._c + self._G @ xi

    def outline_2d(self, directions: int) -> np.ndarray:
        """Boundary polygon: support points along `directions` evenly spaced angles.

        Returns an (directions, 2) array in angular order.  Vertices lie on
        the boundary of Z, so the polygon is inscribed.
        """
        if self.dim != 2:
            raise ValueError("outline_2d requires a 2-D zonotope")
        if directions < 3:
            raise ValueError("need at least 3 directions")
        angles = 2.0 * math.pi * np.arange(directions) / directions
        D = np.column_stack([np.cos(angles), np.sin(angles)])  # (k, 2)
        proj = D @ self._G  # (k, p)
        signs = np.where(proj >= 0.0, 1.0, -1.0)
        return self._c + signs @ self._G.T


def _direction_grid(dim: int, directions: int) -> np.ndarray:
    """Unit directions: uniform angles in 2-D, seeded draws otherwise."""
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(directions) / directions
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(0)
    D = rng.standard_normal((directions, dim))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return D


def set_norm(z: Zonotope, directions: int = 360) -> float:
    """Estimate ||Z|| = sup_{x in Z} ||x||_2 as max of h(d) over unit directions.

    Exact in the limit directions -> inf; in 2-D the estimate is within a
    factor cos(pi/directions) of the true norm.
    """
    D = _direction_grid(z.dim, directions)
    vals = D @ z.center + np.abs(D @ z.generators).sum(axis=1)
    return float(np.max(vals))
