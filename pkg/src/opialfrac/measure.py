"""Measures on a compact interval and the weighted norms built on them.

A measure is an absolutely continuous part (a nonnegative density,
piecewise smooth, with optionally declared power behavior at the two
endpoints) plus finitely many atoms. The degenerate exponents demanded by
the inequality machinery (``p = 1`` dual norms, essential suprema, the
``0 * inf = 0`` convention) are handled as first-class cases rather than
approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DivergenceError, EvaluationError
from .quadrature import (
    DEFAULT_TOL,
    SingularIntegralSpec,
    _is_polynomial_power,
    adaptive_gauss,
    integrate_endpoint_singular,
)
from .search import golden_section_max

ESS_SUP_SAMPLES = 4097


@dataclass(frozen=True)
class Interval:
    """Compact interval [a, b] with a < b, both finite."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x: float) -> bool:
        slack = 1e-12 * max(1.0, abs(self.a), abs(self.b))
        return self.a - slack <= x <= self.b + slack

    def require_inside(self, x: float, what: str = "point") -> None:
        if not self.contains(x):
            raise ValueError(f"{what} {x} outside [{self.a}, {self.b}]")


@dataclass(frozen=True)
class ExponentPair:
    """Exponents 1 <= p <= q < inf with their extended-real duals."""

    p: float
    q: float

    def __post_init__(self):
        if not (1.0 <= self.p <= self.q):
            raise ValueError(f"need 1 <= p <= q, got p={self.p}, q={self.q}")
        if not math.isfinite(self.q):
            raise ValueError("q must be finite")

    @property
    def p_dual(self) -> float:
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def q_dual(self) -> float:
        return math.inf if self.q == 1.0 else self.q / (self.q - 1.0)


def zero_product(*factors: float) -> float:
    """Product with the convention that an exact 0 factor wins over inf."""
    for f in factors:
        if f == 0.0:
            return 0.0
    out = 1.0
    for f in factors:
        out *= f
    return out


def _as_ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Measure:
    """Density-plus-atoms measure on a compact interval.

    ``density_exponents = (e_a, e_b)`` declares that the density behaves
    like ``(x-a)**e_a`` near ``a`` and ``(b-x)**e_b`` near ``b`` times a
    smooth factor; the quadrature uses graded meshes on those panels so
    integrable blowups (exponents in (-1, 0)) are handled at full accuracy.
    """

    interval: Interval
    density: Callable = _as_ones
    piece_breaks: tuple = ()
    atoms: tuple = ()
    density_exponents: tuple = (0.0, 0.0)
    no_mass_at_b: Optional[bool] = None
    kind: str = "custom"

    def __post_init__(self):
        a, b = self.interval.a, self.interval.b
        breaks = tuple(sorted(float(t) for t in self.piece_breaks if a < t < b))
        object.__setattr__(self, "piece_breaks", breaks)
        atoms = tuple((float(loc), float(m)) for loc, m in self.atoms)
        object.__setattr__(self, "atoms", tuple(sorted(atoms)))
        for loc, m in self.atoms:
            if not self.interval.contains(loc):
                raise ValueError(f"atom location {loc} outside [{a}, {b}]")
            if not m > 0:
                raise ValueError(f"atom mass must be positive, got {m}")
        flag = self.no_mass_at_b
        has_atom_at_b = any(loc == b for loc, _ in self.atoms)
        if flag is None:
            flag = not has_atom_at_b
        elif flag and has_atom_at_b:
            raise ValueError("no_mass_at_b is set but an atom sits at b")
        object.__setattr__(self, "no_mass_at_b", bool(flag))
        self._check_density_sign()

    def _check_density_sign(self):
        xs = self._offset_grid(self.interval.a, self.interval.b, 33)
        w = np.asarray(self.density(xs), dtype=float)
        if w.ndim == 0:
            w = np.full(xs.shape, float(w))
        if np.any(w < -1e-12 * (1.0 + np.max(np.abs(w)))):
            bad = xs[w < 0][0]
            raise ValueError(f"density is negative at x={bad}")

    @staticmethod
    def _offset_grid(lo: float, hi: float, n: int) -> np.ndarray:
        # Midpoint-style grid: never lands exactly on lo, hi or equispaced knots.
        return lo + (hi - lo) * (np.arange(n) + 0.5) / n

    @classmethod
    def lebesgue(cls, interval: Interval) -> "Measure":
        return cls(interval=interval, density=_as_ones, kind="lebesgue")

    @classmethod
    def power(
        cls,
        interval: Interval,
        coefficient: float = 1.0,
        gamma: float = 0.0,
        delta: float = 0.0,
        atoms: Sequence = (),
        no_mass_at_b: Optional[bool] = None,
    ) -> "Measure":
        """Density ``c * (x-a)**gamma * (b-x)**delta`` plus atoms."""
        if coefficient < 0:
            raise ValueError("power density coefficient must be nonnegative")
        if gamma <= -1 or delta <= -1:
            raise ValueError("power density exponents must exceed -1 for integrability")
        a, b = interval.a, interval.b
        if coefficient == 0.0:
            return cls(interval=interval, density=lambda x: np.zeros_like(np.asarray(x, float)),
                       atoms=tuple(atoms), no_mass_at_b=no_mass_at_b, kind="zero")

        def w(x, _c=coefficient, _g=gamma, _d=delta, _a=a, _b=b):
            x = np.asarray(x, dtype=float)
            out = np.full(x.shape, _c)
            if _g != 0.0:
                out = out * (x - _a) ** _g
            if _d != 0.0:
                out = out * (_b - x) ** _d
            return out

        kind = "lebesgue" if (gamma == 0.0 and delta == 0.0 and coefficient == 1.0 and not atoms) else "power"
        return cls(
            interval=interval,
            density=w,
            atoms=tuple(atoms),
            density_exponents=(gamma, delta),
            no_mass_at_b=no_mass_at_b,
            kind=kind,
        )

    @classmethod
    def from_density(
        cls,
        interval: Interval,
        density: Callable,
        piece_breaks: Sequence[float] = (),
        atoms: Sequence = (),
        density_exponents: tuple = (0.0, 0.0),
        no_mass_at_b: Optional[bool] = None,
        kind: str = "custom",
    ) -> "Measure":
        return cls(
            interval=interval,
            density=density,
            piece_breaks=tuple(piece_breaks),
            atoms=tuple(atoms),
            density_exponents=density_exponents,
            no_mass_at_b=no_mass_at_b,
            kind=kind,
        )

    @property
    def is_lebesgue(self) -> bool:
        return self.kind == "lebesgue"

    def atom_mass(self, lo: float, hi: float, include_hi: bool = False) -> float:
        total = 0.0
        for loc, m in self.atoms:
            if lo <= loc < hi or (include_hi and loc == hi):
                total += m
        return total

    def density_integral(self, lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
        val, _ = _weighted_integral(self, None, 1.0, lo, hi, tol)
        return val

    def tail_mass(self, x: float, tol: float = DEFAULT_TOL) -> float:
        """Mass of the half-open tail [x, b)."""
        a, b = self.interval.a, self.interval.b
        if x >= b:
            return 0.0
        x = max(x, a)
        return self.density_integral(x, b, tol) + self.atom_mass(x, b)

    def total_mass(self, tol: float = DEFAULT_TOL) -> float:
        a, b = self.interval.a, self.interval.b
        return self.density_integral(a, b, tol) + self.atom_mass(a, b, include_hi=True)


def _merge_points(lo: float, hi: float, *groups) -> list:
    pts = {lo, hi}
    for group in groups:
        for t in group:
            t = float(t)
            if lo < t < hi:
                pts.add(t)
    out = sorted(pts)
    # Drop near-duplicates that would create degenerate panels.
    span = hi - lo
    cleaned = [out[0]]
    for t in out[1:]:
        if t - cleaned[-1] > 1e-14 * max(span, 1.0):
            cleaned.append(t)
    if cleaned[-1] != hi:
        cleaned[-1] = hi
    return cleaned


def _weighted_integral(
    mu: Measure,
    extra: Optional[Callable],
    power: float,
    lo: float,
    hi: float,
    tol: float,
    extra_breaks: Sequence[float] = (),
) -> tuple[float, float]:
    """Integral of ``extra(s) * density(s)**power`` over [lo, hi].

    Density panels adjacent to a declared singular endpoint are handled by
    the graded-mesh integrator with the endpoint exponent scaled by
    ``power``. Raises DivergenceError when the scaled exponent is <= -1.
    """
    a, b = mu.interval.a, mu.interval.b
    if hi <= lo:
        return 0.0, 0.0
    e_a, e_b = mu.density_exponents
    lam_a = e_a * power if lo == a else 0.0
    lam_b = e_b * power if hi == b else 0.0
    sing_a = not _is_polynomial_power(lam_a)
    sing_b = not _is_polynomial_power(lam_b)

    w = mu.density

    if extra is None and power == 1.0:
        integrand = w
    elif extra is None:
        integrand = lambda s: np.asarray(w(s), dtype=float) ** power
    elif power == 1.0:
        integrand = lambda s: np.asarray(extra(s), dtype=float) * np.asarray(w(s), dtype=float)
    else:
        integrand = lambda s: (
            np.asarray(extra(s), dtype=float) * np.asarray(w(s), dtype=float) ** power
        )

    pts = _merge_points(lo, hi, mu.piece_breaks, extra_breaks)
    if sing_a and sing_b and len(pts) == 2:
        pts = [lo, 0.5 * (lo + hi), hi]

    total = 0.0
    err = 0.0
    for p0, p1 in zip(pts[:-1], pts[1:]):
        if sing_a and p0 == a:
            phi = lambda s: (
                np.asarray(integrand(s), dtype=float)
                * (np.asarray(s, dtype=float) - a) ** (-lam_a)
            )
            spec = SingularIntegralSpec(Interval(p0, p1), "left", lam_a, phi)
            v, e = integrate_endpoint_singular(spec, tol)
        elif sing_b and p1 == b:
            phi = lambda s: (
                np.asarray(integrand(s), dtype=float)
                * (b - np.asarray(s, dtype=float)) ** (-lam_b)
            )
            spec = SingularIntegralSpec(Interval(p0, p1), "right", lam_b, phi)
            v, e = integrate_endpoint_singular(spec, tol)
        else:
            v, e = adaptive_gauss(integrand, p0, p1, tol)
        total += v
        err += e
    return total, err


def _atom_sum(mu: Measure, u: Callable) -> float:
    total = 0.0
    for loc, m in mu.atoms:
        val = float(np.asarray(u(loc), dtype=float).reshape(()))
        if not math.isfinite(val):
            raise EvaluationError("non-finite value at atom", abscissa=loc)
        total += m * val
    return total


def integrate_with_error(
    u: Callable,
    mu: Measure,
    tol: float = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    a, b = mu.interval.a, mu.interval.b
    val, err = _weighted_integral(mu, u, 1.0, a, b, tol, breakpoints)
    return val + _atom_sum(mu, u), err


def integrate(
    u: Callable,
    mu: Measure,
    tol: float = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integral of ``u`` against the measure, atoms included."""
    return integrate_with_error(u, mu, tol, breakpoints)[0]


def _support_probe(mu: Measure, x: float) -> bool:
    """True when the density is positive at or arbitrarily near ``x``."""
    a, b = mu.interval.a, mu.interval.b
    eps = 1e-9 * mu.interval.length
    xs = np.clip(np.array([x - eps, x, x + eps]), a, b)
    w = np.asarray(mu.density(xs), dtype=float)
    return bool(np.any(w > 0.0))


def ess_sup(u: Callable, mu: Measure, n_per_piece: int = ESS_SUP_SAMPLES) -> float:
    """Essential supremum of ``|u|`` with respect to the measure.

    Computed over the support of the density (dense per-piece sampling with
    golden-section refinement, or exact candidates when ``u`` exposes
    ``extremum_candidates``) plus the atom locations.
    """
    best = 0.0
    for loc, _ in mu.atoms:
        best = max(best, abs(float(np.asarray(u(loc), dtype=float).reshape(()))))

    candidates = getattr(u, "extremum_candidates", None)
    if candidates is not None:
        for x, v in candidates():
            if _support_probe(mu, x):
                best = max(best, abs(v))
        return best

    a, b = mu.interval.a, mu.interval.b
    edges = _merge_points(a, b, mu.piece_breaks)
    for p0, p1 in zip(edges[:-1], edges[1:]):
        xs = Measure._offset_grid(p0, p1, n_per_piece)
        w = np.asarray(mu.density(xs), dtype=float)
        if w.ndim == 0:
            w = np.full(xs.shape, float(w))
        vals = np.abs(np.asarray(u(xs), dtype=float))
        mask = w > 0.0
        if not np.any(mask):
            continue
        idx = int(np.argmax(np.where(mask, vals, -np.inf)))
        spacing = (p1 - p0) / n_per_piece
        lo = max(p0, xs[idx] - spacing)
        hi = min(p1, xs[idx] + spacing)
        _, refined = golden_section_max(
            lambda t: abs(float(np.asarray(u(t), dtype=float).reshape(()))), lo, hi
        )
        best = max(best, float(vals[idx]), refined)
    return best


def lp_norm_with_error(
    u: Callable,
    p: float,
    mu: Measure,
    tol: float = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    if p == math.inf:
        return ess_sup(u, mu), 0.0
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1 or p = inf, got {p}")
    powered = lambda s: np.abs(np.asarray(u(s), dtype=float)) ** p
    a, b = mu.interval.a, mu.interval.b
    base, err = _weighted_integral(mu, powered, 1.0, a, b, tol, breakpoints)
    base += _atom_sum(mu, powered)
    if base <= 0.0:
        return 0.0, 0.0
    val = base ** (1.0 / p)
    return val, err * val / (p * base)


def lp_norm(
    u: Callable,
    p: float,
    mu: Measure,
    tol: float = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> float:
    """Weighted L^p norm, with p = inf meaning the essential supremum."""
    return lp_norm_with_error(u, p, mu, tol, breakpoints)[0]


def _sup_inverse_density(mu: Measure, lo: float, hi: float, n_per_piece: int = ESS_SUP_SAMPLES) -> float:
    huge = 1e100
    best = 0.0
    edges = _merge_points(lo, hi, mu.piece_breaks)
    for p0, p1 in zip(edges[:-1], edges[1:]):
        xs = Measure._offset_grid(p0, p1, n_per_piece)
        w = np.asarray(mu.density(xs), dtype=float)
        if w.ndim == 0:
            w = np.full(xs.shape, float(w))
        if np.any(w <= 0.0):
            return math.inf
        vals = 1.0 / w
        idx = int(np.argmax(vals))
        spacing = (p1 - p0) / n_per_piece
        g_lo = max(p0, xs[idx] - spacing)
        g_hi = min(p1, xs[idx] + spacing)

        def inv(t):
            wt = float(np.asarray(mu.density(t), dtype=float).reshape(()))
            return huge if wt <= 0.0 else 1.0 / wt

        _, refined = golden_section_max(inv, g_lo, g_hi)
        best = max(best, float(vals[idx]), refined)
        if best >= huge:
            return math.inf
    return best


def inverse_density_norm(
    mu: Measure,
    p: float,
    sub: Interval,
    tol: float = DEFAULT_TOL,
) -> float:
    """The L^{1/(p-1)}([a, x]) norm of 1/density, extended reals included.

    For ``p > 1`` this is ``(integral of density**(-1/(p-1)))**(p-1)``; for
    ``p = 1`` it is the essential supremum of ``1/density`` on ``[a, x]``.
    Divergent cases return ``inf`` rather than raising.
    """
    a, b = mu.interval.a, mu.interval.b
    if abs(sub.a - a) > 1e-12 * max(1.0, abs(a)):
        raise ValueError("sub-interval must start at the left endpoint of the measure")
    if sub.b > b * (1 + 1e-15) + 1e-15:
        mu.interval.require_inside(sub.b, "sub-interval end")
    x = min(sub.b, b)
    if p < 1:
        raise ValueError(f"inverse_density_norm requires p >= 1, got {p}")
    e_a, e_b = mu.density_exponents
    if p == 1.0:
        # A density vanishing at an endpoint of [a, x] makes 1/density unbounded.
        if e_a > 0:
            return math.inf
        if x == b and e_b > 0:
            return math.inf
        return _sup_inverse_density(mu, a, x)
    r = 1.0 / (p - 1.0)
    try:
        base, _ = _weighted_integral(mu, None, -r, a, x, tol)
    except (DivergenceError, ConvergenceError, EvaluationError, OverflowError):
        return math.inf
    if not math.isfinite(base):
        return math.inf
    return base ** (p - 1.0)
