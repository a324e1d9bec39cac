"""Bounded one-dimensional minimization: Brent's method with golden-section fallback.

The search combines successive parabolic interpolation with golden-section
steps on a closed interval. Both interval endpoints are evaluated at the end,
so the returned point never loses to either bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidInputError, NumericError

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_SQRT_EPS = math.sqrt(2.220446049250313e-16)

DEFAULT_X_TOLERANCE = 1e-5
DEFAULT_MAX_ITERATIONS = 500


@dataclass(frozen=True)
class Bounds1D:
    """A finite search interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidInputError(f"bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo >= self.hi:
            raise InvalidInputError(f"bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")


@dataclass
class MinimizeResult:
    x: float
    f: float
    iterations: int
    converged: bool


def minimize_bounded(
    objective: Callable[[float], float],
    bounds: Bounds1D,
    x_tolerance: float = DEFAULT_X_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> MinimizeResult:
    """Minimize a scalar function on a closed interval.

    For a unimodal objective the returned ``x`` lies within ``x_tolerance`` of
    the minimizer. ``converged`` is False when the iteration budget ran out
    before the bracket collapsed. Raises ``NumericError`` if the objective
    produces a non-finite value.
    """
    if x_tolerance <= 0:
        raise InvalidInputError(f"x_tolerance must be > 0, got {x_tolerance}")
    if max_iterations < 1:
        raise InvalidInputError(f"max_iterations must be >= 1, got {max_iterations}")

    def evaluate(point: float) -> float:
        value = float(objective(point))
        if not math.isfinite(value):
            raise NumericError(f"objective returned non-finite value {value!r} at x={point!r}")
        return value

    a, b = bounds.lo, bounds.hi
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = evaluate(x)
    d = e = 0.0  # last and second-to-last step sizes
    iterations = 0
    converged = False

    for iterations in range(1, max_iterations + 1):
        mid = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + x_tolerance / 3.0
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            converged = True
            break

        use_golden = True
        if abs(e) > tol1:
            # Fit a parabola through (x, fx), (w, fw), (v, fv).
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            r, e = e, d
            # Accept only if the step is small and stays inside the bracket.
            if abs(p) < abs(0.5 * q * r) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if x < mid else -tol1
                use_golden = False
        if use_golden:
            e = (b - x) if x < mid else (a - x)
            d = _GOLDEN * e

        # Never probe closer than tol1 to the current best point.
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = evaluate(u)

        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

    # Endpoint check: the result never loses to a bound, and ties prefer the
    # lower bound (matching a dense grid scan's first-minimum convention).
    f_lo = evaluate(bounds.lo)
    if f_lo <= fx:
        x, fx = bounds.lo, f_lo
    f_hi = evaluate(bounds.hi)
    if f_hi < fx:
        x, fx = bounds.hi, f_hi

    x = min(max(x, bounds.lo), bounds.hi)
    return MinimizeResult(x=x, f=fx, iterations=iterations, converged=converged)
