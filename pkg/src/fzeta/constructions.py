"""Builders for quasiperiodic and hyperfractal drums made of stacked Cantor-like strips."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .drums import (CantorInfinity, DrumSpec, Norm, as_norm, cantor, disjoint_union, make_tube,
                    scaled, translated, tube_volume)
from .errors import ConfigError, DrumError
from .minkowski import exact_dimension, geometric_grid, periodic_profile

MAX_ORDER = 16
MAX_PERIODS = 5
MAX_COEF = 12
PROPER = "proper"
SUP_PROFILE = "sup-norm-profile"


def primes(count: int) -> list[int]:
    """The first `count` primes by trial division (count is tiny here)."""
    out: list[int] = []
    k = 2
    while len(out) < count:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return out


@dataclass(frozen=True)
class IndependenceResult:
    passed: bool
    max_coef: int
    tol: float
    witness: tuple[int, ...] | None = None
    candidates: int = 0

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_coef": self.max_coef, "tol": self.tol,
                "witness": list(self.witness) if self.witness else None,
                "candidates": self.candidates}


@dataclass(frozen=True)
class QuasiperiodicReport:
    order: int | None
    truncation: int
    target_dimension: float
    parameters: tuple[tuple[float, float], ...]
    quasiperiods: tuple[float, ...]
    oscillatory_periods: tuple[float, ...]
    classification: str
    independence: IndependenceResult
    profile_label: str = PROPER
    offsets: tuple[float, ...] = ()
    tail_bound: float = 0.0

    @property
    def period_ratios(self) -> tuple[float, ...]:
        return tuple(t / self.quasiperiods[0] for t in self.quasiperiods)

    def to_dict(self) -> dict:
        return {"order": self.order if self.order is not None else "infinity",
                "truncation": self.truncation,
                "target_dimension": self.target_dimension,
                "parameters": [list(p) for p in self.parameters],
                "quasiperiods": list(self.quasiperiods),
                "oscillatory_periods": list(self.oscillatory_periods),
                "classification": self.classification,
                "independence_probe": self.independence.to_dict(),
                "profile_label": self.profile_label,
                "offsets": list(self.offsets),
                "tail_bound": self.tail_bound}


@dataclass(frozen=True)
class HyperfractalReport:
    n_levels: int
    target_dimension: float
    parameters: tuple[tuple[float, float], ...]
    ordinate_bound: float
    ordinates: tuple[float, ...] = field(repr=False)
    min_gap: float

    def to_dict(self) -> dict:
        return {"order": "infinity", "truncation": self.n_levels,
                "target_dimension": self.target_dimension,
                "parameters": [list(p) for p in self.parameters],
                "ordinate_bound": self.ordinate_bound,
                "pole_count": len(self.ordinates), "min_gap": self.min_gap}


def _check_dimension(D: float, allow_sup_profile: bool) -> str:
    if not math.isfinite(D) or D >= -2.0:
        raise ConfigError(f"target dimension must satisfy D < -2, got {D}")
    if -3.0 < D:
        return PROPER
    if not allow_sup_profile:
        raise ConfigError("D outside (-3, -2) is allowed only with the sup-norm-profile flag")
    return SUP_PROFILE


def exponent_for(a: float, D: float) -> float:
    """b with the Cantor drum (a, b) of dimension D."""
    return math.log(2.0) / math.log(1.0 / a) - D - 1.0


def stacked_union(params: Sequence[tuple[float, float]]) -> tuple[DrumSpec, tuple[float, ...]]:
    """Union of 2^-n scaled copies of Cantor(a_n, b_n), stacked vertically.

    Offsets are the running sums of the scaled strip heights.
    """
    members, offsets = [], []
    level = 0.0
    for n, (a, b) in enumerate(params, start=1):
        comp = scaled(cantor(a, b), 2.0 ** -n)
        members.append(translated(comp, (0.0, level)))
        offsets.append(level)
        level += comp.strip_height
    return disjoint_union(members), tuple(offsets)


def _build(alist: Sequence[float], D: float, label: str, kind: str, order: int | None,
           max_coef: int = 10, tol: float = 1e-9):
    params = tuple((a, exponent_for(a, D)) for a in alist)
    for a, b in params:
        if not 0.0 < a < 0.5:
            raise DrumError(f"component ratio {a} outside (0, 1/2)")
    drum, offsets = stacked_union(params)
    periods = tuple(math.log(1.0 / a) for a in alist)
    probe = independence_probe(periods[:MAX_PERIODS], max_coef, tol)
    report = QuasiperiodicReport(order, len(alist), D, params, periods,
                                 tuple(2.0 * math.pi / t for t in periods), kind, probe,
                                 label, offsets)
    return drum, report


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_ORDER:
        raise ConfigError(f"order must be an integer in [2, {MAX_ORDER}]")


def build_algebraic_qp(n: int, D: float, a1: float = 0.25, allow_sup_profile: bool = False):
    """n-quasiperiodic drum with a_(i+1) = a1^sqrt(p_i); quasiperiod ratios are square roots of primes."""
    _check_order(n)
    label = _check_dimension(D, allow_sup_profile)
    if not 0.0 < a1 < 0.5:
        raise ConfigError("a1 must lie in (0, 1/2)")
    alist = [a1] + [a1 ** math.sqrt(p) for p in primes(n - 1)]
    return _build(alist, D, label, "Algebraic", n)


def build_transcendental_qp(n: int, D: float, allow_sup_profile: bool = False):
    """n-quasiperiodic drum with a_i = 1/p_(i+1): periods log 3, log 5, log 7, ..."""
    _check_order(n)
    label = _check_dimension(D, allow_sup_profile)
    alist = [1.0 / p for p in primes(n + 1)[1:]]
    return _build(alist, D, label, "Transcendental", n)


def _ordinates(period: float, bound: float) -> np.ndarray:
    step = 2.0 * math.pi / period
    k = np.arange(-math.floor(bound / step), math.floor(bound / step) + 1)
    return k * step


def build_hyperfractal(D: float, n_levels: int, a_sequence: Sequence[float] | None = None,
                       ordinate_bound: float = 20.0):
    if not math.isfinite(D) or D >= -2.0:
        raise ConfigError(f"target dimension must satisfy D < -2, got {D}")
    if not 1 <= n_levels <= MAX_ORDER:
        raise ConfigError(f"n_levels must lie in [1, {MAX_ORDER}]")
    if a_sequence is None:
        a_sequence = [1.0 / (k + 2.0) for k in range(1, n_levels + 1)]
    a_sequence = [float(a) for a in a_sequence]
    if len(a_sequence) != n_levels:
        raise ConfigError("a_sequence must have n_levels entries")
    if any(not 0.0 < a < 0.5 for a in a_sequence):
        raise ConfigError("every a_k must lie in (0, 1/2)")
    if any(y > x for x, y in zip(a_sequence, a_sequence[1:])):
        raise ConfigError("a_sequence must be nonincreasing")
    params = tuple((a, exponent_for(a, D)) for a in a_sequence)
    drum, _ = stacked_union(params)
    ords = np.sort(np.concatenate([_ordinates(math.log(1.0 / a), ordinate_bound)
                                   for a in a_sequence]))
    # every lattice contains 0 and shared ordinates repeat: merge near-duplicates
    ords = ords[np.concatenate([[True], np.diff(ords) > 1e-9])]
    gap = float(np.min(np.diff(ords))) if ords.size > 1 else math.inf
    return drum, HyperfractalReport(n_levels, D, params, ordinate_bound, tuple(ords.tolist()), gap)


def components(drum: DrumSpec) -> list[tuple[CantorInfinity, float]]:
    """(base Cantor family, scale factor) for each member of a builder drum."""
    out = []
    for m in drum.family.members:
        base = m.base()
        if not isinstance(base, CantorInfinity):
            raise ConfigError("composite tubes need a union of Cantor strips")
        out.append((base, m.scale_factor()))
    return out


def composite_tube(drum: DrumSpec, t, norm: Norm | str = Norm.SUP):
    """Tube of a builder drum as a sum of per-component scaled tubes."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ConfigError("t must be positive")
    if not drum.sup_is_horizontal(float(t.min())):
        raise ConfigError("t must exceed the height of the stacked strips")
    total = np.zeros_like(t)
    for base, lam in components(drum):
        total += lam ** 2 * base.tube_sup(t / lam)
    if as_norm(norm) is Norm.EUCLID:
        total += tube_volume(make_tube(drum, Norm.EUCLID), t) - tube_volume(make_tube(drum), t)
    return total


@dataclass(frozen=True)
class NondegeneracyReport:
    dimensions: tuple[float, ...]
    t_window: tuple[float, float]
    observed_min: float
    observed_max: float
    lower_bound: float
    upper_bound: float

    @property
    def passed(self) -> bool:
        return self.lower_bound <= self.observed_min and self.observed_max <= self.upper_bound


def nondegeneracy(drum: DrumSpec, decades: float = 3.0, points: int = 4000,
                  norm: Norm | str = Norm.SUP) -> NondegeneracyReport:
    """Normalized composite tube over a late window against the component-wise bounds."""
    comps = components(drum)
    d = drum.dimension
    dims = tuple(float(exact_dimension(m)[0]) for m in drum.family.members)
    first = periodic_profile(drum.family.members[0])
    lower = first.min_value
    upper = math.fsum(periodic_profile(m).max_value for m in drum.family.members)
    # start late enough that the strip corrections of the slowest component are negligible
    base, lam = max(comps, key=lambda c: c[0].a)
    t0 = lam / base.a ** math.ceil(math.log(1e6) / math.log(2.0))
    t = geometric_grid(t0, t0 * 10.0 ** decades, points)
    ratio = composite_tube(drum, t, norm) / t ** (2.0 + d)
    return NondegeneracyReport(dims, (t0, t0 * 10.0 ** decades), float(ratio.min()),
                               float(ratio.max()), lower, upper)


def _probe_block(args):
    first, rest, T, tol = args
    combo = first * T[0] + rest @ T[1:]
    scale = abs(first * T[0]) + np.abs(rest) @ np.abs(T[1:])
    nonzero = (first != 0) | np.any(rest != 0, axis=1)
    bad = nonzero & (np.abs(combo) <= tol * scale)
    if not np.any(bad):
        return None
    vecs = np.column_stack([np.full(int(bad.sum()), first), rest[bad]])
    return vecs


def independence_probe(periods: Sequence[float], max_coef: int = 10,
                       tol: float = 1e-9) -> IndependenceResult:
    """Exhaustive search for small integer relations among the periods.

    Fails with the witness of least L1 norm (ties broken lexicographically).
    """
    T = np.asarray(periods, dtype=float)
    if not 1 <= T.size <= MAX_PERIODS:
        raise ConfigError(f"the probe takes 1 to {MAX_PERIODS} periods")
    if not 1 <= max_coef <= MAX_COEF:
        raise ConfigError(f"max_coef must lie in [1, {MAX_COEF}]")
    rng = np.arange(-max_coef, max_coef + 1)
    combos = list(itertools.product(rng, repeat=T.size - 1))
    rest = np.array(combos, dtype=float).reshape(len(combos), T.size - 1)
    hits = ordered_map(_probe_block, [(float(f), rest, T, tol) for f in rng])
    hits = [h for h in hits if h is not None]
    total = rng.size ** T.size - 1
    if not hits:
        return IndependenceResult(True, max_coef, tol, None, total)
    vecs = np.concatenate(hits).astype(int)
    best = min(map(tuple, vecs.tolist()), key=lambda v: (sum(abs(x) for x in v), v))
    return IndependenceResult(False, max_coef, tol, best, total)
