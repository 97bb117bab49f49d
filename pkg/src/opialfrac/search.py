"""One-dimensional direct search helpers."""

from __future__ import annotations

import math
from typing import Callable


def golden_section_max(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 400,
) -> tuple[float, float]:
    """Maximize a continuous unimodal ``fn`` on ``[lo, hi]``.

    Returns ``(argmax, value)``. On a monotone function the search drifts
    to the better bracket end, so callers should also compare endpoint
    candidates when the maximum may sit on the boundary.
    """
    if hi < lo:
        lo, hi = hi, lo
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    it = 0
    while hi - lo > xtol and it < max_iter:
        if f1 < f2:
            lo = x1
            x1, f1 = x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = fn(x2)
        else:
            hi = x2
            x2, f2 = x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = fn(x1)
        it += 1
    xm = 0.5 * (lo + hi)
    fm = fn(xm)
    best = max((f1, x1), (f2, x2), (fm, xm))
    return best[1], best[0]
