"""Absolutely continuous functions represented through their derivatives.

An ACFunction stores a piecewise-polynomial derivative plus the value at
the left endpoint; evaluation integrates the derivative in closed form.
Derivative values exactly at the breakpoints are recorded separately
because a measure may place atoms there, while the primitive is blind to
values on a null set.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .measure import Interval

MAX_DERIVATIVE_DEGREE = 3


class PiecewisePoly:
    """Piecewise polynomial with explicit values at its knots.

    Piece ``i`` lives on ``[knots[i], knots[i+1]]`` with coefficients in
    ascending powers of the local variable ``x - knots[i]``. The value
    returned exactly at a knot comes from ``knot_values``; the default is
    the limit from the right (the last piece supplies the value at ``b``).
    """

    def __init__(self, knots, coeffs, knot_values=None):
        knots = np.asarray(knots, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if len(coeffs) != knots.size - 1:
            raise ValueError("need exactly one coefficient array per piece")
        self.knots = knots
        self.coeffs = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coeffs]
        for c in self.coeffs:
            if c.ndim != 1 or c.size == 0:
                raise ValueError("piece coefficients must be non-empty 1-D arrays")
        if knot_values is None:
            knot_values = self._limit_values("right")
        else:
            knot_values = np.asarray(knot_values, dtype=float)
            if knot_values.shape != knots.shape:
                raise ValueError("knot_values must match the knot array")
        self.knot_values = knot_values
        self._primitive: Optional["PiecewisePoly"] = None

    @property
    def num_pieces(self) -> int:
        return len(self.coeffs)

    @property
    def degree(self) -> int:
        return max(c.size - 1 for c in self.coeffs)

    def piece_value(self, i: int, x) -> np.ndarray:
        xi = np.asarray(x, dtype=float) - self.knots[i]
        out = np.zeros_like(xi)
        for c in self.coeffs[i][::-1]:
            out = out * xi + c
        return out

    def _limit_values(self, side: str) -> np.ndarray:
        vals = np.empty(self.knots.size)
        last = self.num_pieces - 1
        for j in range(self.knots.size):
            if side == "right":
                i = min(j, last)
            elif side == "left":
                i = max(j - 1, 0)
            else:
                raise ValueError(f"side must be 'left' or 'right', got {side!r}")
            vals[j] = float(self.piece_value(i, self.knots[j]))
        return vals

    def with_knot_values(self, values=None, side: Optional[str] = None) -> "PiecewisePoly":
        if (values is None) == (side is None):
            raise ValueError("give exactly one of values or side")
        new_vals = self._limit_values(side) if side is not None else values
        return PiecewisePoly(self.knots, self.coeffs, new_vals)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        idx = np.clip(np.searchsorted(self.knots, xs, side="right") - 1, 0, self.num_pieces - 1)
        out = np.empty_like(xs)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.piece_value(int(i), xs[mask])
        for j, kx in enumerate(self.knots):
            out[xs == kx] = self.knot_values[j]
        return float(out[0]) if scalar else out

    def antiderivative(self, value_at_start: float = 0.0) -> "PiecewisePoly":
        """Continuous primitive, exact per piece."""
        coeffs = []
        knot_vals = [value_at_start]
        running = value_at_start
        for i, c in enumerate(self.coeffs):
            anti = np.concatenate(([running], c / (1.0 + np.arange(c.size))))
            coeffs.append(anti)
            h = self.knots[i + 1] - self.knots[i]
            running = float(np.polynomial.polynomial.polyval(h, anti))
            knot_vals.append(running)
        return PiecewisePoly(self.knots, coeffs, np.asarray(knot_vals))

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi], no quadrature involved."""
        if self._primitive is None:
            self._primitive = self.antiderivative(0.0)
        prim = self._primitive
        return float(prim(hi)) - float(prim(lo))

    def roots(self) -> np.ndarray:
        """Real zeros inside the domain, one entry per isolated root."""
        found: List[float] = []
        scale = max(1.0, float(np.max(np.abs(self.knots))))
        for i, c in enumerate(self.coeffs):
            trimmed = np.trim_zeros(c, "b")
            if trimmed.size == 0:
                continue  # identically zero piece, nothing isolated to report
            if trimmed.size == 1:
                continue
            h = self.knots[i + 1] - self.knots[i]
            for r in np.polynomial.polynomial.polyroots(trimmed):
                if abs(r.imag) > 1e-10:
                    continue
                xr = r.real
                if -1e-12 * scale <= xr <= h + 1e-12 * scale:
                    found.append(self.knots[i] + min(max(xr, 0.0), h))
        if not found:
            return np.empty(0)
        out = np.unique(np.asarray(found))
        keep = [out[0]]
        for t in out[1:]:
            if t - keep[-1] > 1e-13 * scale:
                keep.append(t)
        return np.asarray(keep)

    def extremum_candidates(self) -> List[tuple]:
        """(x, limit value) pairs covering piece edges and interior critical points."""
        cands: List[tuple] = []
        for i, c in enumerate(self.coeffs):
            lo, hi = self.knots[i], self.knots[i + 1]
            cands.append((lo, float(self.piece_value(i, lo))))
            cands.append((hi, float(self.piece_value(i, hi))))
            if c.size > 1:
                dcoef = np.polynomial.polynomial.polyder(c)
                trimmed = np.trim_zeros(dcoef, "b")
                if trimmed.size >= 2:
                    for r in np.polynomial.polynomial.polyroots(trimmed):
                        if abs(r.imag) <= 1e-10 and 0.0 < r.real < hi - lo:
                            x = lo + r.real
                            cands.append((x, float(self.piece_value(i, x))))
        return cands

    @classmethod
    def from_linear_values(cls, knots, values) -> "PiecewisePoly":
        """Continuous piecewise-linear interpolant of nodal values."""
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != knots.shape:
            raise ValueError("one value per knot required")
        coeffs = []
        for i in range(knots.size - 1):
            h = knots[i + 1] - knots[i]
            coeffs.append(np.array([values[i], (values[i + 1] - values[i]) / h]))
        return cls(knots, coeffs, values)


class ACFunction:
    """f(x) = f(a) + integral of f' from a to x, with f' piecewise polynomial."""

    def __init__(self, interval: Interval, derivative: PiecewisePoly, value_at_a: float = 0.0):
        scale = max(1.0, abs(interval.a), abs(interval.b))
        if abs(derivative.knots[0] - interval.a) > 1e-12 * scale:
            raise ValueError("derivative must start at the interval's left endpoint")
        if abs(derivative.knots[-1] - interval.b) > 1e-12 * scale:
            raise ValueError("derivative must end at the interval's right endpoint")
        if derivative.degree > MAX_DERIVATIVE_DEGREE:
            raise ValueError(f"derivative degree capped at {MAX_DERIVATIVE_DEGREE}")
        self.interval = interval
        self.derivative = derivative
        self.value_at_a = float(value_at_a)
        self._primitive = derivative.antiderivative(self.value_at_a)

    def eval(self, x):
        xs = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.interval.a), abs(self.interval.b))
        if np.any(xs < self.interval.a - slack) or np.any(xs > self.interval.b + slack):
            bad = xs[(xs < self.interval.a - slack) | (xs > self.interval.b + slack)]
            raise ValueError(
                f"evaluation point {float(np.atleast_1d(bad)[0])} outside "
                f"[{self.interval.a}, {self.interval.b}]"
            )
        return self._primitive(x)

    __call__ = eval

    @property
    def primitive(self) -> PiecewisePoly:
        return self._primitive

    def derivative_breakpoints(self) -> tuple:
        return tuple(float(t) for t in self.derivative.knots[1:-1])

    def with_derivative_knot_values(self, values=None, side: Optional[str] = None) -> "ACFunction":
        """Same function a.e., different choice of f' on the breakpoint set."""
        return ACFunction(
            self.interval,
            self.derivative.with_knot_values(values=values, side=side),
            self.value_at_a,
        )

    def descriptor(self) -> dict:
        return {
            "breakpoints": [float(t) for t in self.derivative.knots[1:-1]],
            "pieces": [[float(c) for c in piece] for piece in self.derivative.coeffs],
            "value_at_a": self.value_at_a,
        }


def random_ac_family(
    interval: Interval,
    seed: int,
    count: int,
    zero_at_a: bool = True,
    piece_budget: int = 3,
) -> List[ACFunction]:
    """Deterministic-by-seed family of AC functions with bounded coefficients.

    Derivatives are piecewise linear or quadratic with breakpoints strictly
    inside the interval, so every norm used by the inequality suites is
    finite by construction.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if piece_budget < 1:
        raise ValueError("piece_budget must be >= 1")
    rng = np.random.default_rng(seed)
    a, b = interval.a, interval.b
    length = interval.length
    out: List[ACFunction] = []
    for _ in range(count):
        n_pieces = int(rng.integers(1, piece_budget + 1))
        for _attempt in range(100):
            cuts = np.sort(rng.uniform(a + 0.05 * length, b - 0.05 * length, n_pieces - 1))
            if cuts.size < 2 or np.min(np.diff(cuts)) > 0.02 * length:
                break
        knots = np.concatenate(([a], cuts, [b]))
        coeffs = []
        for _i in range(n_pieces):
            deg = int(rng.integers(0, 3))
            coeffs.append(rng.uniform(-2.0, 2.0, deg + 1))
        deriv = PiecewisePoly(knots, coeffs)
        value_at_a = 0.0 if zero_at_a else float(rng.uniform(-1.0, 1.0))
        out.append(ACFunction(interval, deriv, value_at_a))
    return out
