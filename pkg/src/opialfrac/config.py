"""Problem-configuration parsing for the command line front end.

Configs are single JSON documents. Unknown fields are rejected with a
JSON-path anchor so typos fail loudly instead of silently changing the
campaign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .functions import ACFunction, PiecewisePoly, random_ac_family
from .measure import ExponentPair, Interval, Measure
from .operators import MonotoneMap, TKernel, make_specialization
from .opial import (
    LEBESGUE_P_LE_2,
    LEBESGUE_PQ,
    PROP_FRACTIONAL_P_LE_2,
    PROP_FRACTIONAL_PQ,
    THEOREM_TWO_MEASURE,
    VARIANTS,
    OpialProblem,
    induced_boundary_measure,
)

_PROP_VARIANTS = (PROP_FRACTIONAL_PQ, PROP_FRACTIONAL_P_LE_2)
_LEBESGUE_VARIANTS = (LEBESGUE_PQ, LEBESGUE_P_LE_2)


def _require_keys(doc: dict, allowed: set, required: set, path: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(path, f"expected an object, got {type(doc).__name__}")
    for key in doc:
        if key not in allowed:
            raise ConfigError(path, f"unknown field {key!r}")
    for key in required:
        if key not in doc:
            raise ConfigError(path, f"missing required field {key!r}")


def _number(doc, key, path, default=None):
    if key not in doc:
        if default is None:
            raise ConfigError(path, f"missing required field {key!r}")
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}", "expected a number")
    return float(val)


def parse_interval(doc, path: str) -> Interval:
    _require_keys(doc, {"a", "b"}, {"a", "b"}, path)
    try:
        return Interval(_number(doc, "a", path), _number(doc, "b", path))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_atoms(raw, path: str) -> tuple:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(path, "atoms must be a list of [location, mass] pairs")
    atoms = []
    for i, item in enumerate(raw):
        if not (isinstance(item, list) and len(item) == 2):
            raise ConfigError(f"{path}[{i}]", "expected a [location, mass] pair")
        atoms.append((float(item[0]), float(item[1])))
    return tuple(atoms)


def parse_measure(doc, path: str, interval: Interval) -> Measure:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(path, "measure descriptor needs a 'type' field")
    kind = doc["type"]
    try:
        if kind == "lebesgue":
            _require_keys(doc, {"type"}, {"type"}, path)
            return Measure.lebesgue(interval)
        if kind == "zero":
            _require_keys(doc, {"type", "atoms"}, {"type"}, path)
            return Measure.power(interval, 0.0, atoms=_parse_atoms(doc.get("atoms"), f"{path}.atoms"))
        if kind == "power":
            _require_keys(doc, {"type", "c", "gamma", "delta", "atoms"}, {"type"}, path)
            return Measure.power(
                interval,
                coefficient=_number(doc, "c", path, 1.0),
                gamma=_number(doc, "gamma", path, 0.0),
                delta=_number(doc, "delta", path, 0.0),
                atoms=_parse_atoms(doc.get("atoms"), f"{path}.atoms"),
            )
        if kind == "piecewise":
            _require_keys(doc, {"type", "breakpoints", "pieces", "atoms"}, {"type", "pieces"}, path)
            breaks = [float(t) for t in doc.get("breakpoints", [])]
            knots = np.concatenate(([interval.a], breaks, [interval.b]))
            poly = PiecewisePoly(knots, [np.asarray(c, dtype=float) for c in doc["pieces"]])
            return Measure.from_density(
                interval,
                poly,
                piece_breaks=breaks,
                atoms=_parse_atoms(doc.get("atoms"), f"{path}.atoms"),
                kind="piecewise",
            )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.type", f"unknown measure type {kind!r}")


_G_MAPS = {"identity": MonotoneMap.identity, "log": MonotoneMap.logarithm}


def parse_kernel(doc, path: str, interval: Interval) -> TKernel:
    _require_keys(doc, {"tag", "alpha", "g"}, {"tag", "alpha"}, path)
    g = None
    if "g" in doc:
        gdoc = doc["g"]
        _require_keys(gdoc, {"name", "exponent"}, {"name"}, f"{path}.g")
        name = gdoc["name"]
        if name == "power":
            g = MonotoneMap.power_map(_number(gdoc, "exponent", f"{path}.g"))
        elif name in _G_MAPS:
            g = _G_MAPS[name]()
        else:
            raise ConfigError(f"{path}.g.name", f"unknown map {name!r}")
    try:
        return make_specialization(doc["tag"], _number(doc, "alpha", path), interval, g)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_function(doc, path: str, interval: Interval) -> ACFunction:
    _require_keys(doc, {"breakpoints", "pieces", "value_at_a"}, {"pieces"}, path)
    breaks = [float(t) for t in doc.get("breakpoints", [])]
    knots = np.concatenate(([interval.a], breaks, [interval.b]))
    try:
        deriv = PiecewisePoly(knots, [np.asarray(c, dtype=float) for c in doc["pieces"]])
        return ACFunction(interval, deriv, float(doc.get("value_at_a", 0.0)))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_exponents(raw, path: str) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(path, "expected a non-empty list of {p, q} objects")
    pairs = []
    for i, doc in enumerate(raw):
        here = f"{path}[{i}]"
        _require_keys(doc, {"p", "q"}, {"p", "q"}, here)
        try:
            pairs.append(ExponentPair(_number(doc, "p", here), _number(doc, "q", here)))
        except ValueError as exc:
            raise ConfigError(here, str(exc)) from exc
    return tuple(pairs)


@dataclass(frozen=True)
class ProblemConfig:
    """Validated campaign description ready to expand into problem instances."""

    interval: Interval
    variant: str
    exponents: tuple
    mu0: Measure
    mu1: Measure
    kernel: Optional[TKernel]
    functions: tuple
    tol: float
    slack: float
    seed: int
    search: Optional[dict]
    csv_out: Optional[str]

    def problems(self):
        for f in self.functions:
            for pq in self.exponents:
                yield OpialProblem(
                    f=f,
                    mu0=self.mu0,
                    mu1=self.mu1,
                    pq=pq,
                    variant=self.variant,
                    kernel=self.kernel,
                )


_TOP_KEYS = {
    "interval",
    "variant",
    "exponents",
    "mu",
    "mu0",
    "mu1",
    "kernel",
    "functions",
    "tol",
    "slack",
    "seed",
    "search",
    "output",
}


def parse_config(doc: dict) -> ProblemConfig:
    _require_keys(doc, _TOP_KEYS, {"interval", "variant", "exponents", "functions"}, "$")
    interval = parse_interval(doc["interval"], "$.interval")
    variant = doc["variant"]
    if variant not in VARIANTS:
        raise ConfigError("$.variant", f"unknown variant {variant!r}; valid: {', '.join(VARIANTS)}")
    exponents = parse_exponents(doc["exponents"], "$.exponents")
    seed = int(doc.get("seed", 0))
    tol = _number(doc, "tol", "$", 1e-10)
    slack = _number(doc, "slack", "$", 1e-6)

    kernel = None
    if variant in _PROP_VARIANTS:
        if "kernel" not in doc:
            raise ConfigError("$", f"variant {variant!r} requires a kernel descriptor")
        for key in ("mu", "mu0", "mu1"):
            if key in doc:
                raise ConfigError(f"$.{key}", "fractional variants derive their measure from the kernel")
        kernel = parse_kernel(doc["kernel"], "$.kernel", interval)
        mu0 = mu1 = induced_boundary_measure(kernel)
    elif variant == THEOREM_TWO_MEASURE:
        if "kernel" in doc:
            raise ConfigError("$.kernel", "only fractional variants take a kernel")
        if "mu" in doc:
            raise ConfigError("$.mu", "the two-measure variant needs mu0 and mu1")
        if "mu0" not in doc or "mu1" not in doc:
            raise ConfigError("$", "the two-measure variant needs mu0 and mu1")
        mu0 = parse_measure(doc["mu0"], "$.mu0", interval)
        mu1 = parse_measure(doc["mu1"], "$.mu1", interval)
    else:
        if "kernel" in doc:
            raise ConfigError("$.kernel", "only fractional variants take a kernel")
        if "mu0" in doc or "mu1" in doc:
            raise ConfigError("$", f"variant {variant!r} takes a single 'mu' descriptor")
        if variant in _LEBESGUE_VARIANTS:
            if "mu" in doc:
                mu0 = parse_measure(doc["mu"], "$.mu", interval)
                if not mu0.is_lebesgue:
                    raise ConfigError("$.mu", "Lebesgue variants require the Lebesgue measure")
            else:
                mu0 = Measure.lebesgue(interval)
        else:
            if "mu" not in doc:
                raise ConfigError("$", f"variant {variant!r} needs a 'mu' descriptor")
            mu0 = parse_measure(doc["mu"], "$.mu", interval)
        mu1 = mu0

    if not mu0.no_mass_at_b:
        raise ConfigError(
            "$.mu0" if variant == THEOREM_TWO_MEASURE else "$.mu",
            "no_mass_at_b violated: the inequality hypotheses forbid an atom at b",
        )

    fdoc = doc["functions"]
    if not isinstance(fdoc, dict) or "type" not in fdoc:
        raise ConfigError("$.functions", "functions descriptor needs a 'type' field")
    if fdoc["type"] == "random":
        _require_keys(fdoc, {"type", "seed", "count", "piece_budget", "zero_at_a"}, {"type", "count"}, "$.functions")
        functions = tuple(
            random_ac_family(
                interval,
                seed=int(fdoc.get("seed", seed)),
                count=int(fdoc["count"]),
                zero_at_a=bool(fdoc.get("zero_at_a", True)),
                piece_budget=int(fdoc.get("piece_budget", 3)),
            )
        )
    elif fdoc["type"] == "explicit":
        _require_keys(fdoc, {"type", "items"}, {"type", "items"}, "$.functions")
        items = fdoc["items"]
        if not isinstance(items, list) or not items:
            raise ConfigError("$.functions.items", "expected a non-empty list")
        functions = tuple(
            parse_function(item, f"$.functions.items[{i}]", interval) for i, item in enumerate(items)
        )
        for i, f in enumerate(functions):
            if f.value_at_a != 0.0:
                raise ConfigError(f"$.functions.items[{i}].value_at_a", "the inequalities require f(a) = 0")
    else:
        raise ConfigError("$.functions.type", f"unknown functions type {fdoc['type']!r}")

    search = None
    if "search" in doc:
        sdoc = doc["search"]
        _require_keys(sdoc, {"family", "pieces", "budget"}, set(), "$.search")
        family = sdoc.get("family", "piecewise_linear")
        if family not in ("piecewise_linear", "explicit"):
            raise ConfigError("$.search.family", f"unknown family {family!r}")
        search = {
            "family": family,
            "pieces": int(sdoc.get("pieces", 4)),
            "budget": int(sdoc.get("budget", 500)),
        }

    csv_out = None
    if "output" in doc:
        odoc = doc["output"]
        _require_keys(odoc, {"csv"}, set(), "$.output")
        csv_out = odoc.get("csv")

    return ProblemConfig(
        interval=interval,
        variant=variant,
        exponents=exponents,
        mu0=mu0,
        mu1=mu1,
        kernel=kernel,
        functions=functions,
        tol=tol,
        slack=slack,
        seed=seed,
        search=search,
        csv_out=csv_out,
    )
