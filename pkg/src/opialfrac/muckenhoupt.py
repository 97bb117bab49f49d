"""Muckenhoupt-type constants for the weighted primitive embedding.

``compute_B`` evaluates the supremum over interior points x of

    mu0([x, b)) ** (1/q) * || (dmu1/dx)**-1 ||_{L^{1/(p-1)}([a, x])} ** (1/p)

with the conventions that 0 * inf = 0 and that an unbounded product is
reported as +inf. The constant C of the embedding follows from B by the
closed-form multiplier, and Lebesgue measure admits fully closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import (
    ExponentPair,
    Interval,
    Measure,
    _weighted_integral,
    inverse_density_norm,
    zero_product,
)
from .quadrature import DEFAULT_TOL, _NODES15, _WEIGHTS15
from .errors import ConvergenceError, DivergenceError, EvaluationError
from .search import golden_section_max

SCAN_POINTS = 2049
GOLDEN_XTOL = 1e-12
_LADDER_DECADES = range(4, 14)


@dataclass(frozen=True)
class MuckenhouptConstants:
    """The pair (B, C) with the location where the supremum was attained."""

    B: float
    C: float
    argmax_x: float
    pq: ExponentPair


def embedding_constant(B: float, pq: ExponentPair) -> float:
    """C as a function of B: B itself for p = 1, else the displayed multiplier."""
    if pq.p == 1.0:
        return B
    return B * (pq.q / (pq.q - 1.0)) ** ((pq.p - 1.0) / pq.p) * pq.q ** (1.0 / pq.q)


def power_product_sup(
    interval: Interval, alpha_exp: float, beta_exp: float
) -> tuple[float, float]:
    """Supremum and argmax of (b-x)**alpha_exp * (x-a)**beta_exp on [a, b]."""
    if not alpha_exp > 0:
        raise ValueError("alpha_exp must be positive")
    if beta_exp < 0:
        raise ValueError("beta_exp must be nonnegative")
    a, b = interval.a, interval.b
    if beta_exp == 0.0:
        return (b - a) ** alpha_exp, a
    s = alpha_exp + beta_exp
    sup = (
        alpha_exp**alpha_exp
        * beta_exp**beta_exp
        / s**s
        * (b - a) ** s
    )
    argmax = (a * alpha_exp + b * beta_exp) / s
    return sup, argmax


def lebesgue_B_closed_form(interval: Interval, pq: ExponentPair) -> float:
    """B for Lebesgue measure on both slots, in closed form."""
    if pq.p == 1.0:
        return interval.length ** (1.0 / pq.q)
    return power_product_sup(interval, 1.0 / pq.q, (pq.p - 1.0) / pq.p)[0]


def _panel_values(fn, edges: np.ndarray) -> np.ndarray:
    """One 15-point Gauss panel per cell of ``edges`` (no adaptivity)."""
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * _NODES15[None, :]
    vals = np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (vals @ _WEIGHTS15)


def _scan_grid(mu0: Measure, mu1: Measure) -> np.ndarray:
    a, b = mu0.interval.a, mu0.interval.b
    pts = set(np.linspace(a, b, SCAN_POINTS + 2).tolist())
    for mu in (mu0, mu1):
        pts.update(t for t in mu.piece_breaks)
        pts.update(loc for loc, _ in mu.atoms if a < loc < b)
    return np.asarray(sorted(pts))


def _suffix_density(mu: Measure, edges: np.ndarray, tol: float) -> np.ndarray:
    """Density mass of [x_j, b] for every grid point x_j."""
    panel = _panel_values(mu.density, edges)
    e_a, e_b = mu.density_exponents
    if e_a != 0.0:
        panel[0] = _weighted_integral(mu, None, 1.0, edges[0], edges[1], tol)[0]
    if e_b != 0.0:
        panel[-1] = _weighted_integral(mu, None, 1.0, edges[-2], edges[-1], tol)[0]
    out = np.zeros(edges.size)
    out[:-1] = np.cumsum(panel[::-1])[::-1]
    return out


def _suffix_atoms(mu: Measure, edges: np.ndarray) -> np.ndarray:
    b = mu.interval.b
    locs = np.asarray([loc for loc, _ in mu.atoms if loc < b])
    masses = np.asarray([m for loc, m in mu.atoms if loc < b])
    if locs.size == 0:
        return np.zeros(edges.size)
    order = np.argsort(locs)
    locs, masses = locs[order], masses[order]
    suffix = np.concatenate((np.cumsum(masses[::-1])[::-1], [0.0]))
    idx = np.searchsorted(locs, edges, side="left")
    return suffix[idx]


def _prefix_inverse_power(mu: Measure, edges: np.ndarray, r: float, tol: float) -> np.ndarray:
    """Prefix integrals of density**(-r), +inf from any divergent panel on."""
    with np.errstate(divide="ignore", over="ignore"):
        dens = lambda s: np.asarray(mu.density(s), dtype=float) ** (-r)
        panel = _panel_values(dens, edges)
    panel = np.where(np.isfinite(panel), panel, np.inf)
    e_a, e_b = mu.density_exponents
    for pos, active in ((0, e_a != 0.0), (panel.size - 1, e_b != 0.0)):
        if not active:
            continue
        try:
            v, _ = _weighted_integral(
                mu, None, -r, edges[pos], edges[pos + 1], tol
            )
        except (DivergenceError, ConvergenceError, EvaluationError, OverflowError):
            v = math.inf
        panel[pos] = v
    out = np.zeros(edges.size)
    out[1:] = np.cumsum(panel)
    return out


def _prefix_inverse_sup(mu: Measure, edges: np.ndarray) -> np.ndarray:
    """Running max of 1/density sampled at the panel Gauss nodes."""
    lo, hi = edges[:-1], edges[1:]
    nodes = 0.5 * (hi + lo)[:, None] + 0.5 * (hi - lo)[:, None] * _NODES15[None, :]
    w = np.asarray(mu.density(nodes.ravel()), dtype=float).reshape(nodes.shape)
    with np.errstate(divide="ignore"):
        inv = np.where(w > 0.0, 1.0 / w, np.inf)
    panel_max = inv.max(axis=1)
    out = np.zeros(edges.size)
    out[0] = panel_max[0]
    out[1:] = np.maximum.accumulate(panel_max)
    return out


def compute_B(
    mu0: Measure,
    mu1: Measure,
    pq: ExponentPair,
    tol: float = DEFAULT_TOL,
) -> MuckenhouptConstants:
    """Numerical supremum defining B, plus C and the attaining location.

    Scans a dense grid, refines the winning bracket by golden section, and
    probes geometric ladders toward both open endpoints (the supremum may
    be approached there). Unbounded products yield B = +inf.
    """
    if not mu0.no_mass_at_b:
        raise ValueError("compute_B requires mu0 with no_mass_at_b (mu0({b}) = 0)")
    if mu0.interval != mu1.interval:
        raise ValueError("both measures must live on the same interval")
    a, b = mu0.interval.a, mu0.interval.b
    length = b - a
    p, q = pq.p, pq.q
    r = None if p == 1.0 else 1.0 / (p - 1.0)

    edges = _scan_grid(mu0, mu1)
    dens_suffix = _suffix_density(mu0, edges, tol)
    atom_suffix = _suffix_atoms(mu0, edges)
    tail = dens_suffix + atom_suffix
    total_density = dens_suffix[0]

    if p == 1.0:
        e_a = mu1.density_exponents[0]
        if e_a > 0:
            inv_fac = np.full(edges.size, math.inf)
        else:
            inv_fac = _prefix_inverse_sup(mu1, edges)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            base = _prefix_inverse_power(mu1, edges, r, tol)
            inv_fac = base ** ((p - 1.0) / p)
        inv_fac = np.where(np.isfinite(inv_fac), inv_fac, np.inf)

    with np.errstate(invalid="ignore"):
        tail_fac = tail ** (1.0 / q)
    scan = np.where(tail <= 0.0, 0.0, tail_fac * inv_fac)
    scan[0] = 0.0  # x = a is outside the open supremum range
    scan[-1] = 0.0

    def tail_exact(x: float) -> float:
        atoms = mu0.atom_mass(x, b)
        # Pick the subtraction-free side to avoid cancellation at either end.
        if x - a <= b - x:
            head, _ = _weighted_integral(mu0, None, 1.0, a, x, tol)
            return max(total_density - head, 0.0) + atoms
        direct, _ = _weighted_integral(mu0, None, 1.0, x, b, tol)
        return max(direct, 0.0) + atoms

    def inv_exact(x: float) -> float:
        if p == 1.0:
            return inverse_density_norm(mu1, 1.0, Interval(a, x), tol)
        val = inverse_density_norm(mu1, p, Interval(a, x), tol)
        return val ** (1.0 / p) if math.isfinite(val) else math.inf

    def product_exact(x: float) -> float:
        t = tail_exact(x)
        if t <= 0.0:
            return 0.0
        inv = inv_exact(x)
        if not math.isfinite(inv):
            return math.inf
        return t ** (1.0 / q) * inv

    candidates: list[tuple[float, float]] = []
    best_idx = int(np.argmax(scan))
    if scan[best_idx] > 0.0:
        candidates.append((float(edges[best_idx]), float(scan[best_idx])))
        if math.isfinite(scan[best_idx]):
            lo = float(edges[max(best_idx - 1, 0)])
            hi = float(edges[min(best_idx + 1, edges.size - 1)])
            x_ref, v_ref = golden_section_max(product_exact, lo, hi, GOLDEN_XTOL)
            candidates.append((x_ref, v_ref))

    ladder_growth = False
    for endpoint in ("left", "right"):
        prev = None
        growth_run = 0
        for k in _LADDER_DECADES:
            x = a + length * 10.0**-k if endpoint == "left" else b - length * 10.0**-k
            if not (a < x < b):
                continue
            v = product_exact(x)
            candidates.append((x, v))
            if prev is not None and math.isfinite(prev) and v > prev * 1.2:
                growth_run += 1
            else:
                growth_run = 0
            prev = v
        if growth_run >= 3 and prev is not None:
            scan_best = float(scan[best_idx]) if math.isfinite(scan[best_idx]) else 0.0
            if not math.isfinite(prev) or prev > 50.0 * max(scan_best, 1e-12):
                ladder_growth = True

    if not candidates:
        B, argmax = 0.0, math.nan
    else:
        argmax, B = max(candidates, key=lambda xv: xv[1])
    if ladder_growth or not math.isfinite(B):
        return MuckenhouptConstants(math.inf, math.inf, math.nan, pq)
    C = embedding_constant(B, pq)
    return MuckenhouptConstants(B, C, argmax, pq)


def compute_conjugate_B(
    mu: Measure, p: float, tol: float = DEFAULT_TOL
) -> tuple[float, float, float]:
    """B with the tail raised to (p-1)/p instead of 1/q, for 1 <= p <= 2.

    For p > 1 this is the standard B at the conjugate pair (p, p/(p-1));
    for p = 1 the tail factor degenerates to the indicator of a positive
    tail and B is the supremum of the running essential sup of 1/density.
    Returns ``(B, C, argmax_x)`` with C the matching closed-form multiplier.
    """
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"the conjugate form needs 1 <= p <= 2, got {p}")
    if p > 1.0:
        mc = compute_B(mu, mu, ExponentPair(p, p / (p - 1.0)), tol)
        return mc.B, mc.C, mc.argmax_x

    if not mu.no_mass_at_b:
        raise ValueError("compute_conjugate_B requires no_mass_at_b")
    a, b = mu.interval.a, mu.interval.b
    if mu.density_exponents[0] > 0:
        return math.inf, math.inf, math.nan

    # The running ess sup of 1/density is nondecreasing in x, so the sup
    # sits at the largest x whose tail still carries mass; approach it by
    # a geometric ladder to catch an unbounded limit.
    edges = _scan_grid(mu, mu)
    tail = _suffix_density(mu, edges, tol) + _suffix_atoms(mu, edges)
    positive = np.nonzero(tail > 0.0)[0]
    if positive.size == 0:
        return 0.0, 0.0, math.nan
    x_sup = float(edges[min(positive[-1] + 1, edges.size - 1)])

    best = 0.0
    argmax = math.nan
    prev = None
    growth_run = 0
    for k in _LADDER_DECADES:
        x = x_sup - (x_sup - a) * 10.0**-k
        if not a < x < b:
            continue
        v = inverse_density_norm(mu, 1.0, Interval(a, x), tol)
        if not math.isfinite(v):
            return math.inf, math.inf, math.nan
        if v > best:
            best, argmax = v, x
        if prev is not None and v > prev * 1.2:
            growth_run += 1
        else:
            growth_run = 0
        prev = v
    if growth_run >= 3:
        return math.inf, math.inf, math.nan
    return best, best, argmax
