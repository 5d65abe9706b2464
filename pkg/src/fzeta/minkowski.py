"""Minkowski dimension and content at infinity: closed forms and tube-based estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, stats

from .drums import (CantorInfinity, DrumSpec, IntervalFamily, PowerTail, ScaledCopy,
                    TranslatedCopy, TubeFunction, make_tube)
from .errors import ConfigError, ToleranceError, UnsupportedError

POINTS_PER_DECADE = 16
POINTS_PER_PERIOD = 2 ** 12


@dataclass(frozen=True)
class MinkowskiReport:
    dimension: float
    dimension_estimate: float
    half_width: float
    lower_content: float
    upper_content: float
    measurable: bool


@dataclass(frozen=True)
class PeriodicProfile:
    """The log-periodic profile G with tube(t) ~ t^(N+D) G(log t)."""

    period: float
    sampler: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...]
    min_value: float
    max_value: float
    argmin: float

    def __call__(self, tau):
        return self.sampler(tau)

    def samples(self, n: int = 512) -> tuple[np.ndarray, np.ndarray]:
        tau = np.linspace(0.0, self.period, n, endpoint=False)
        return tau, self.sampler(tau)


def _unwrap(drum: DrumSpec) -> tuple[object, float]:
    fam, lam = drum.family, 1.0
    while isinstance(fam, (ScaledCopy, TranslatedCopy)):
        if isinstance(fam, ScaledCopy):
            lam *= fam.factor
        fam = fam.inner.family
    return fam, lam


def cantor_profile_fraction(a: float, b: float, u):
    """G as a function of the fractional variable u = {tau / log(1/a)}."""
    r = a ** (1.0 - b)
    u = np.asarray(u, dtype=float)
    return 2.0 ** -u / (b - 1.0) * (1.0 + r ** u / (r - 2.0))


def closed_form_argmin_fraction(a: float, b: float) -> float | None:
    """Explicit minimiser of G in the fractional variable, when it is a real number in [0, 1).

    Read as the logarithm of a ratio; returns None if the ratio is not positive.
    """
    num = 1.0 + (b - 1.0) * math.log2(a)
    den = 2.0 - a ** (1.0 - b)
    if den == 0.0 or num / den <= 0.0:
        return None
    u = math.log(num / den) / ((b - 1.0) * math.log(a))
    return u if 0.0 <= u < 1.0 else None


def periodic_profile(drum: DrumSpec) -> PeriodicProfile:
    fam, lam = _unwrap(drum)
    if not isinstance(fam, CantorInfinity):
        raise UnsupportedError("periodic profiles exist for CantorInfinity drums")
    a, b = fam.a, fam.b
    T = fam.period
    d = fam.dimension
    shift = math.log(lam)
    amp = lam ** -d

    def g_frac(u):
        return amp * cantor_profile_fraction(a, b, u)

    def sampler(tau):
        tau = np.asarray(tau, dtype=float)
        u = np.mod((tau - shift) / T, 1.0)
        return g_frac(u)

    seed = closed_form_argmin_fraction(a, b)
    bracket = (0.0, seed if seed is not None and 0.0 < seed < 1.0 else 0.5, 1.0)
    res = optimize.minimize_scalar(lambda u: float(g_frac(u)), bracket=bracket,
                                   method="golden", tol=1e-12)
    u_min = float(res.x) % 1.0
    max_val = amp * (a ** (1.0 - b) - 1.0) / ((b - 1.0) * (a ** (1.0 - b) - 2.0))
    kink = shift % T
    return PeriodicProfile(T, sampler, (kink,), float(g_frac(u_min)), float(max_val),
                           (shift + u_min * T) % T)


def exact_dimension(drum: DrumSpec):
    """(D, content): a float for measurable families, (min G, max G) for Cantor drums."""
    fam, lam = _unwrap(drum)
    d = fam.dimension if hasattr(fam, "dimension") else None
    if isinstance(fam, IntervalFamily):
        content = 1.0 / (fam.beta - 1.0)
    elif isinstance(fam, PowerTail):
        content = 1.0 / (fam.alpha - 1.0)
    elif isinstance(fam, CantorInfinity):
        prof = periodic_profile(drum)
        return d, (prof.min_value, prof.max_value)
    else:
        raise UnsupportedError(f"no closed-form dimension for {drum.tag}")
    return d, content * lam ** -d


def is_measurable(drum: DrumSpec) -> bool:
    fam, _ = _unwrap(drum)
    return isinstance(fam, (IntervalFamily, PowerTail))


def geometric_grid(t_min: float, t_max: float, n_points: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(t_min), math.log(t_max), n_points))


def estimate_dimension(tube: TubeFunction, t_min: float, t_max: float,
                       n_points: int | None = None) -> tuple[float, float]:
    """OLS slope of log|tube| against log t, minus N; returns (D_hat, standard error)."""
    if not (t_min > 0 and t_max / t_min >= 1e3):
        raise ConfigError("dimension estimate needs t_max / t_min >= 1e3")
    if n_points is None:
        n_points = int(math.ceil(POINTS_PER_DECADE * math.log10(t_max / t_min))) + 1
    if n_points < 16:
        raise ConfigError("dimension estimate needs at least 16 grid points")
    t = geometric_grid(t_min, t_max, n_points)
    v = np.asarray(tube(t), dtype=float)
    if np.any(v < 1e-300):
        raise ToleranceError("tube values underflow; move the window closer in")
    fit = stats.linregress(np.log(t), np.log(v))
    return float(fit.slope - tube.drum.ambient_dim), float(fit.stderr)


def content_bounds(tube: TubeFunction, D: float, t_window: tuple[float, float],
                   period: float | None = None,
                   points_per_period: int = POINTS_PER_PERIOD) -> tuple[float, float]:
    """inf and sup of tube(t) / t^(N+D) on a dense geometric grid over the window."""
    t_lo, t_hi = t_window
    if not 0 < t_lo < t_hi:
        raise ConfigError("content window must satisfy 0 < t_lo < t_hi")
    if period is None:
        fam, _ = _unwrap(tube.drum)
        period = fam.period if isinstance(fam, CantorInfinity) else 1.0
    span = math.log(t_hi / t_lo)
    n = max(int(math.ceil(points_per_period * span / period)) + 1, 2)
    t = geometric_grid(t_lo, t_hi, n)
    ratio = np.asarray(tube(t), dtype=float) / t ** (tube.drum.ambient_dim + D)
    return float(ratio.min()), float(ratio.max())


def content_window(drum: DrumSpec, periods: int = 3, start: float | None = None):
    """A late window: several log-periods past the point where corrections fall below 1e-6."""
    fam, lam = _unwrap(drum)
    if isinstance(fam, CantorInfinity):
        # correction t^(-log_{1/a} 2) / (b-1) relative to the profile
        k = math.ceil(math.log(1e6 / (fam.b - 1.0)) / math.log(2.0))
        t0 = lam * fam.x_inner * (1.0 / fam.a) ** k if start is None else start
        return t0, t0 * math.exp(periods * fam.period)
    t0 = 1e6 if start is None else start
    return t0, t0 * 10.0 ** periods


def minkowski_report(drum: DrumSpec, tube: TubeFunction | None = None,
                     t_range: tuple[float, float] | None = None) -> MinkowskiReport:
    tube = tube or make_tube(drum)
    d, content = exact_dimension(drum)
    if t_range is None:
        t0 = max(drum.x_inner, 1.0)
        t_range = (t0, t0 * 1e6)
    d_hat, hw = estimate_dimension(tube, *t_range)
    lo, hi = content_bounds(tube, d, content_window(drum))
    return MinkowskiReport(d, d_hat, hw, lo, hi, is_measurable(drum))


def tube_table(tube: TubeFunction, t: np.ndarray, D: float) -> list[tuple[float, float, float, float]]:
    """Rows (t, volume, normalized, err) for export."""
    vals, errs = tube.evaluate(t)
    norm = vals / t ** (tube.drum.ambient_dim + D)
    return [(float(a), float(b), float(c), float(e)) for a, b, c, e in zip(t, vals, norm, errs)]
