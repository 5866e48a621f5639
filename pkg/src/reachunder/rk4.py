"""Fixed-step classic Runge-Kutta integration over breakpoint-aware panels.

Shared by the numeric transition-matrix oracle and the witness simulator.
The derivative callback may return a matrix (fundamental solution) or a
batch of state columns; the stepper is shape-agnostic.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import panels

__all__ = ["integrate_rk4"]

# minimum steps inside a geometrically refined micro-panel; keeps the local
# error near integrable singularities below witness tolerances
GEO_MIN_STEPS = 24


def integrate_rk4(deriv, a: float, b: float, y0, *, h_max: float,
                  breakpoints=(), singularities=()) -> np.ndarray:
    """Integrate dY/dt = deriv(t, Y) from a to b (a <= b) with classic RK4.

    Panels are split at breakpoints so stage evaluations never straddle a
    discontinuity, and refined geometrically at declared singular times.
    """
    if b < a:
        raise ValueError("integrate_rk4 requires a <= b")
    y = np.array(y0, dtype=float)
    if b == a:
        return y
    for lo, hi, geo in panels(a, b, breakpoints, singularities):
        length = hi - lo
        n = max(1, math.ceil(length / h_max))
        if geo:
            n = max(n, GEO_MIN_STEPS)
        h = length / n
        t = lo
        for _ in range(n):
            k1 = deriv(t, y)
            k2 = deriv(t + h / 2.0, y + (h / 2.0) * k1)
            k3 = deriv(t + h / 2.0, y + (h / 2.0) * k2)
            k4 = deriv(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
    return y
