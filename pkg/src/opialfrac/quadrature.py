"""Quadrature engine for smooth pieces and endpoint power singularities.

Every integral in the toolkit reduces to sums of two primitives:

* adaptive Gauss-Legendre panels for smooth integrands, and
* a geometrically graded mesh toward one endpoint for integrands of the
  form ``phi(s) * |s - e|**lam`` with ``lam > -1``, where the terminal
  cell is integrated in closed form against the power weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .errors import ConvergenceError, DivergenceError, EvaluationError

DEFAULT_TOL = 1e-10
DEPTH_CAP = 40
GRADING_RATIO = 0.15
GRADING_LEVELS = 5
_TERMINAL_DEGREE = 6

_NODES15, _WEIGHTS15 = np.polynomial.legendre.leggauss(15)

# Chebyshev-interior nodes on (0, 1) used for the terminal-cell fits.
_FIT_NODES = {
    deg: 0.5 * (1.0 + np.cos(np.pi * (2.0 * np.arange(deg + 1) + 1.0) / (2.0 * (deg + 1))))
    for deg in (3, _TERMINAL_DEGREE)
}


def gamma_fn(x: float) -> float:
    """Euler gamma function for real ``x > 0``."""
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def _eval_vec(f: Callable, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.ndim == 0:
        y = np.full(np.shape(x), float(y))
    if not np.all(np.isfinite(y)):
        bad = np.asarray(x, dtype=float)[~np.isfinite(y)]
        raise EvaluationError("non-finite integrand sample", abscissa=float(bad.flat[0]))
    return y


def _panel15(f: Callable, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid + half * _NODES15
    return half * float(_WEIGHTS15 @ _eval_vec(f, x))


def _adaptive(f, lo, hi, abs_tol, depth):
    whole = _panel15(f, lo, hi)
    mid = 0.5 * (lo + hi)
    s2 = _panel15(f, lo, mid) + _panel15(f, mid, hi)
    diff = abs(whole - s2)
    if diff <= abs_tol or diff <= 1e-14 * (abs(whole) + abs(s2)):
        return s2, diff
    if hi - lo <= 1e-15 * (abs(lo) + abs(hi) + 1.0):
        return s2, diff
    if depth <= 0:
        raise ConvergenceError(
            "adaptive bisection exceeded the depth cap",
            best_estimate=s2,
            err_estimate=diff,
        )
    lv, le = _adaptive(f, lo, mid, 0.5 * abs_tol, depth - 1)
    rv, re = _adaptive(f, mid, hi, 0.5 * abs_tol, depth - 1)
    return lv + rv, le + re


def adaptive_gauss(
    f: Callable,
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    depth_cap: int = DEPTH_CAP,
) -> tuple[float, float]:
    """Integrate a smooth vectorized ``f`` over ``[lo, hi]``.

    Returns ``(value, err_estimate)``. Raises ConvergenceError when the
    bisection depth cap is reached before the tolerance is met.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if hi == lo:
        return 0.0, 0.0
    if hi < lo:
        v, e = adaptive_gauss(f, hi, lo, tol, depth_cap)
        return -v, e
    scale = _panel15(lambda x: np.abs(_eval_vec(f, x)), lo, hi)
    abs_tol = tol * max(abs(scale), 1e-300)
    return _adaptive(f, lo, hi, abs_tol, depth_cap)


@dataclass(frozen=True)
class SingularIntegralSpec:
    """One integral with an algebraic singularity at one endpoint.

    The integrand is ``smooth_factor(s) * weight(s) * |s - e|**exponent``
    where ``e`` is the singular endpoint. ``weight`` is an optional extra
    factor (a substitution Jacobian, typically) folded in verbatim.
    """

    interval: "object"  # anything exposing .a and .b, the measure Interval in practice
    singular_end: Literal["left", "right"]
    exponent: float
    smooth_factor: Callable
    weight: Optional[Callable] = None


def _is_polynomial_power(lam: float) -> bool:
    near = round(lam)
    return near >= 0 and abs(lam - near) <= 1e-12


def _terminal_closed_form(phi, a, h, lam, degree):
    """Exact integral of (interpolated phi) * (s-a)**lam over [a, a+h]."""
    zeta = _FIT_NODES[degree]
    v = np.vander(zeta, degree + 1, increasing=True)
    coeffs = np.linalg.solve(v, _eval_vec(phi, a + h * zeta))
    powers = lam + 1.0 + np.arange(degree + 1)
    return h ** (lam + 1.0) * float(np.sum(coeffs / powers))


def _graded_left(phi, a, b, lam, tol):
    full = lambda s: _eval_vec(phi, s) * (np.asarray(s, dtype=float) - a) ** lam
    length = b - a
    edges = [a + length * GRADING_RATIO**k for k in range(GRADING_LEVELS + 1)]
    # edges[0] == b, descending toward a; terminal cell is [a, edges[-1]].
    cell_bounds = [(edges[k + 1], edges[k]) for k in range(GRADING_LEVELS)]

    crude = [abs(_panel15(lambda s: np.abs(full(s)), lo, hi)) for lo, hi in cell_bounds]
    term_crude = abs(_terminal_closed_form(phi, a, edges[-1] - a, lam, 3))
    scale = sum(crude) + term_crude
    abs_target = tol * max(scale, 1e-300)
    floor = scale * 1e-3 / (GRADING_LEVELS + 1)
    shares = [c + floor for c in crude]
    share_sum = sum(shares) + term_crude + floor

    value = 0.0
    err = 0.0
    for (lo, hi), share in zip(cell_bounds, shares):
        v, e = _adaptive(full, lo, hi, abs_target * share / share_sum, DEPTH_CAP)
        value += v
        err += e

    h = edges[-1] - a
    v_hi = _terminal_closed_form(phi, a, h, lam, _TERMINAL_DEGREE)
    v_lo = _terminal_closed_form(phi, a, h, lam, 3)
    value += v_hi
    err += abs(v_hi - v_lo)
    return value, err


def integrate_endpoint_singular(
    spec: SingularIntegralSpec, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """Integrate ``phi(s) * |s - e|**lam`` over the spec interval.

    Returns ``(value, err_estimate)`` with the error estimate accumulated
    from per-cell bisection differences plus the terminal-cell fit
    difference. ``lam <= -1`` raises DivergenceError.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = spec.exponent
    if lam <= -1.0:
        raise DivergenceError(f"endpoint exponent {lam} is not integrable")
    a = float(spec.interval.a)
    b = float(spec.interval.b)
    if not b > a:
        raise ValueError("empty or inverted integration interval")

    if spec.weight is None:
        phi = spec.smooth_factor
    else:
        base, extra = spec.smooth_factor, spec.weight
        phi = lambda s: _eval_vec(base, s) * _eval_vec(extra, s)

    if spec.singular_end == "right":
        inner = phi
        phi = lambda u: _eval_vec(inner, a + b - np.asarray(u, dtype=float))
    elif spec.singular_end != "left":
        raise ValueError(f"unknown singular_end {spec.singular_end!r}")

    if _is_polynomial_power(lam):
        k = round(lam)
        if k == 0:
            return adaptive_gauss(phi, a, b, tol)
        full = lambda s: _eval_vec(phi, s) * (np.asarray(s, dtype=float) - a) ** k
        return adaptive_gauss(full, a, b, tol)

    return _graded_left(phi, a, b, lam, tol)
