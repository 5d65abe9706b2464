"""Complex dimensions: pole lattices, argument-principle pole search, residues, residue/content checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from ._parallel import ordered_map
from .drums import (CantorInfinity, DisjointUnion, DrumSpec, IntervalFamily, Norm, PowerTail,
                    inverted_near_ball_volume)
from .errors import (BoundaryPoleError, ConfigError, ExtrapolationError, PoleProximityError,
                     ToleranceError, UnsupportedError)
from .minkowski import _unwrap, exact_dimension, is_measurable, periodic_profile
from .quadrature import gauss_legendre
from .zeta import ZetaHandle, ZetaKind

BOUNDARY_GAP = 1e-3
WINDING_TOL = 1e-3
CAUCHY_POINTS = 64
RESIDUE_TOL = 1e-9
MAX_TRAPEZOID = 2 ** 14
SPLIT_OFFSET = 0.0137


class Provenance(str, Enum):
    LATTICE = "LatticePredicted"
    ARGUMENT = "ArgumentPrinciple"
    CONTOUR = "ContourResidue"


class BoundaryPoleWarning(UserWarning):
    """The search window was nudged because a pole sat on its edge."""


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("window bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ConfigError("window needs re_min < re_max and im_min < im_max")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def size(self) -> float:
        return min(self.width, self.height)

    def contains(self, z: complex) -> bool:
        return self.re_min <= z.real <= self.re_max and self.im_min <= z.imag <= self.im_max

    def boundary_distance(self, z: complex) -> float:
        """Distance from z to the rectangle's boundary (inside or outside)."""
        dx = max(self.re_min - z.real, 0.0, z.real - self.re_max)
        dy = max(self.im_min - z.imag, 0.0, z.imag - self.im_max)
        if dx > 0 or dy > 0:
            return math.hypot(dx, dy)
        return min(z.real - self.re_min, self.re_max - z.real,
                   z.imag - self.im_min, self.im_max - z.imag)

    def grown(self, pad: float) -> "Window":
        return Window(self.re_min - pad, self.re_max + pad, self.im_min - pad, self.im_max + pad)

    def to_dict(self) -> dict:
        return {"re_min": self.re_min, "re_max": self.re_max,
                "im_min": self.im_min, "im_max": self.im_max}


@dataclass(frozen=True)
class ComplexDimension:
    location: complex
    order: int
    residue: complex
    provenance: Provenance

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError("pole order must be at least 1")

    def to_dict(self) -> dict:
        return {"re": self.location.real, "im": self.location.imag, "order": self.order,
                "res_re": self.residue.real, "res_im": self.residue.imag,
                "provenance": self.provenance.value}


# ---------------------------------------------------------------- lattices


def _lattice_members(drum: DrumSpec, window: Window, kind: ZetaKind) -> list[tuple[complex, complex]]:
    if isinstance(drum.family, DisjointUnion):
        acc: dict[complex, complex] = {}
        for m in drum.family.members:
            for w, r in _lattice_members(m, window, kind):
                key = complex(round(w.real, 12), round(w.imag, 12))
                acc[key] = acc.get(key, 0.0) + r
        return list(acc.items())
    fam, lam = _unwrap(drum)
    n = drum.ambient_dim
    out: list[tuple[complex, complex]] = []
    if isinstance(fam, CantorInfinity):
        b, L = fam.b, fam.period
        p = 2.0 * math.pi / L
        d = fam.dimension
        out.append((complex(-(b + 1.0)), complex(-1.0)))
        if window.re_min - 1.0 <= d <= window.re_max + 1.0:
            for k in range(math.floor((window.im_min - 1.0) / p), math.ceil((window.im_max + 1.0) / p) + 1):
                w = complex(d, p * k)
                out.append((w, 1.0 / (2.0 * L * (w + b + 1.0))))
    elif isinstance(fam, PowerTail):
        out.append((complex(-1.0 - fam.alpha), complex(1.0)))
    elif isinstance(fam, IntervalFamily):
        out.extend((complex(w), complex(1.0 / fam.alpha)) for w in fam.poles(window.re_min - 1.0))
    else:
        raise UnsupportedError(f"no predicted poles for {drum.tag}")
    scaled = [(w, lam ** (-w) * r) for w, r in out]
    if ZetaKind(kind) is ZetaKind.TUBE:
        scaled = [(w, -r / (w + n)) for w, r in scaled]
    return scaled


def predicted_poles(drum: DrumSpec, window: Window, kind: ZetaKind | str = ZetaKind.DISTANCE):
    """Closed-form poles and residues near the window (includes a unit margin outside it)."""
    return _lattice_members(drum, window, ZetaKind(kind))


def pole_lattice(drum: DrumSpec, window: Window,
                 kind: ZetaKind | str = ZetaKind.DISTANCE) -> list[ComplexDimension]:
    """Predicted complex dimensions inside the window, sorted by (Re, Im)."""
    found = []
    for w, r in predicted_poles(drum, window, kind):
        if window.boundary_distance(w) < BOUNDARY_GAP:
            raise ConfigError(f"window boundary passes within {BOUNDARY_GAP} of the pole {w}")
        if window.contains(w):
            found.append(ComplexDimension(w, 1, complex(r), Provenance.LATTICE))
    return sorted(found, key=lambda c: (c.location.real, c.location.imag))


def pole_gap(drum: DrumSpec, center: complex, default: float = 1.0) -> float:
    """Distance from center to the nearest other predicted pole."""
    box = Window(center.real - 20.0, center.real + 20.0, center.imag - 20.0, center.imag + 20.0)
    gaps = [abs(w - center) for w, _ in predicted_poles(drum, box) if abs(w - center) > 1e-9]
    return min(gaps) if gaps else default


# ---------------------------------------------------------------- evaluators


@dataclass(frozen=True)
class ArrayFunction:
    """Wraps an array-in, array-out callable so it skips per-point dispatch."""

    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, s):
        return self.fn(np.asarray(s, dtype=complex))

    def vectorized(self):
        return self.fn


def as_vectorized(zeta) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(zeta, "vectorized"):
        return zeta.vectorized()

    def f(s):
        s = np.asarray(s, dtype=complex)
        return np.vectorize(lambda z: complex(zeta(z)), otypes=[complex])(s)

    return f


def residue_contour(zeta, center: complex, radius: float, tol: float = RESIDUE_TOL,
                    m_start: int = 32, m_max: int = MAX_TRAPEZOID) -> complex:
    """(1/2 pi i) times the circle integral of zeta, by trapezoid rule with M doubled."""
    if radius <= 0:
        raise ConfigError("contour radius must be positive")
    f = as_vectorized(zeta)
    c = complex(center)

    def partial_sum(m, offset):
        # points offset, offset + 1, ... of the m-point grid, spaced by 2 pi / m
        theta = 2.0 * math.pi * (np.arange(m) + offset) / m
        e = radius * np.exp(1j * theta)
        return complex(np.sum(f(c + e) * e))

    m = m_start
    total = partial_sum(m, 0.0)
    value = total / m
    while m < m_max:
        total += partial_sum(m, 0.5)
        m *= 2
        new = total / m
        if abs(new - value) <= tol * max(1.0, abs(new)):
            return new
        value = new
    raise ToleranceError(f"contour residue at {c} did not settle by M = {m_max}")


def residue_from_right(zeta, D: float, delta: float = 0.5, levels: int = 10,
                       tol: float = 1e-8) -> float:
    """Limit of eps * zeta(D + eps) as eps -> 0+, by Richardson extrapolation over eps = delta 2^-k."""
    eps = delta * 2.0 ** -np.arange(levels)
    margin = getattr(zeta, "margin", 0.0) if getattr(zeta, "method", None) == "quadrature" else 0.0
    eps = eps[eps > margin]
    if eps.size < 3:
        raise ConfigError("too few extrapolation levels to the right of the pole")
    vals = [e * complex(zeta(complex(D + e, 0.0))) for e in eps]
    table = [vals[0]]
    best, prev_best = vals[0], None
    for i in range(1, len(vals)):
        row = [vals[i]]
        for j in range(1, i + 1):
            f = 2.0 ** j
            row.append((f * row[j - 1] - table[j - 1]) / (f - 1.0))
        table = row
        prev_best, best = best, row[-1]
    if abs(best - prev_best) > tol * max(1.0, abs(best)):
        raise ExtrapolationError(
            f"extrapolation from the right did not settle ({abs(best - prev_best):.3g})")
    return float(best.real)


# ---------------------------------------------------------------- argument principle


def _log_derivative(f, z: np.ndarray, radius: float) -> np.ndarray:
    """zeta'/zeta at z, with zeta' from a Cauchy circle halved until it is trustworthy.

    A radius is accepted once r and r/2 agree and the circle mean reproduces
    zeta(z); the second test catches circles that swallow a pole.
    """
    theta = 2.0 * math.pi * np.arange(CAUCHY_POINTS) / CAUCHY_POINTS
    e = np.exp(1j * theta)

    def cauchy(pts, r):
        vals = f(pts[:, None] + r[:, None] * e[None, :])
        return (vals * np.conj(e)[None, :]).mean(axis=1) / r, vals.mean(axis=1)

    fz = f(z)
    r = np.full(z.shape, radius)
    d, mean = cauchy(z, r)
    pending = np.arange(z.size)
    for _ in range(40):
        half, half_mean = cauchy(z[pending], r[pending] / 2.0)
        scale = np.abs(half) + np.abs(fz[pending]) / r[pending]
        bad = np.abs(half - d[pending]) > 1e-10 * scale
        bad |= np.abs(mean[pending] - fz[pending]) > 1e-9 * np.abs(fz[pending])
        d[pending], mean[pending] = half, half_mean
        r[pending] /= 2.0
        pending = pending[bad]
        if pending.size == 0:
            break
    return d / fz


@dataclass(frozen=True)
class _Moments:
    count: complex
    first: complex
    second: complex


def _edge_moments(f, a: complex, b: complex, radius: float) -> np.ndarray:
    x, w = gauss_legendre(16)
    panels = 8
    prev = None
    scale = 1.0 + max(abs(a), abs(b))
    while panels <= 4096:
        t = (np.arange(panels)[:, None] + (x[None, :] + 1.0) / 2.0) / panels
        z = (a + (b - a) * t).ravel()
        wt = np.tile(w, panels) * (b - a) / (2.0 * panels)
        g = _log_derivative(f, z, radius) * wt
        cur = np.array([g.sum(), (z * g).sum(), (z * z * g).sum()]) / (2j * math.pi)
        if prev is not None:
            tol = 1e-9 * np.array([1.0, scale, scale * scale])
            if np.all(np.abs(cur - prev) < tol):
                return cur
        prev = cur
        panels *= 2
    raise BoundaryPoleError(f"edge integral from {a} to {b} did not settle")


def _moments(f, cell: Window, radius: float | None = None) -> _Moments:
    r = cell.size / 4.0 if radius is None else radius
    c = [complex(cell.re_min, cell.im_min), complex(cell.re_max, cell.im_min),
         complex(cell.re_max, cell.im_max), complex(cell.re_min, cell.im_max)]
    m = sum(_edge_moments(f, c[i], c[(i + 1) % 4], r) for i in range(4))
    return _Moments(*m)


def _winding(m: _Moments) -> int:
    w = round(m.count.real)
    if abs(m.count - w) > WINDING_TOL:
        raise BoundaryPoleError(f"winding number {m.count:.6g} is not near an integer")
    return int(w)


def _split(cell: Window, frac: float) -> tuple[Window, Window]:
    if cell.height >= cell.width:
        cut = cell.im_min + frac * cell.height
        return (Window(cell.re_min, cell.re_max, cell.im_min, cut),
                Window(cell.re_min, cell.re_max, cut, cell.im_max))
    cut = cell.re_min + frac * cell.width
    return (Window(cell.re_min, cut, cell.im_min, cell.im_max),
            Window(cut, cell.re_max, cell.im_min, cell.im_max))


def _single(m: _Moments, w: int, cell: Window) -> complex | None:
    """Location if the cell holds one singular point (pole or zero) of multiplicity |w|."""
    c = m.first / w
    tol = 1e-6 * (1.0 + abs(c) ** 2)
    if abs(m.second - w * c * c) < tol and cell.boundary_distance(c) > 0 and cell.contains(c):
        return c
    return None


def _refine(f, guess: complex, order: int, cell: Window) -> ComplexDimension:
    rho = 0.5 * cell.boundary_distance(guess)
    if order == 1:
        den = residue_contour(ArrayFunction(f), guess, rho)
        num = residue_contour(ArrayFunction(lambda s: s * f(s)), guess, rho)
        loc = num / den
        rho = min(rho, 0.5 * cell.boundary_distance(loc)) if cell.contains(loc) else rho
        res = residue_contour(ArrayFunction(f), loc, rho)
    else:
        loc = guess
        res = residue_contour(ArrayFunction(f), loc, rho)
    return ComplexDimension(complex(loc), order, complex(res), Provenance.ARGUMENT)


def _search(f, cell: Window, m: _Moments, depth: int, min_cell: float) -> list[ComplexDimension]:
    w = _winding(m)
    if w == 0 and abs(m.first) < 1e-6 and abs(m.second) < 1e-6:
        return []
    if w != 0:
        c = _single(m, w, cell)
        if c is not None:
            return [] if w > 0 else [_refine(f, c, -w, cell)]
    if depth <= 0 or cell.size < min_cell:
        raise ToleranceError(f"could not isolate the singularities of {cell}")
    for attempt in range(8):
        frac = 0.5 + SPLIT_OFFSET + 0.01 * attempt * (-1) ** attempt
        kids = _split(cell, frac)
        try:
            kid_moments = ordered_map(lambda k: _moments(f, k), kids)
            counts = [_winding(km) for km in kid_moments]
        except BoundaryPoleError:
            continue
        if sum(counts) != w:
            continue
        out: list[ComplexDimension] = []
        for k, km in zip(kids, kid_moments):
            out.extend(_search(f, k, km, depth - 1, min_cell))
        return out
    raise BoundaryPoleError(f"no clean split found for {cell}")


def locate_poles(zeta, window: Window, max_depth: int = 40,
                 min_cell: float = 1e-6) -> list[ComplexDimension]:
    """Poles of a closed-form zeta inside the window by the argument principle.

    Zeros are recognised by their winding sign and dropped.  If the window's
    edge runs through a pole the window is nudged outward, then inward, and a
    BoundaryPoleWarning is issued.
    """
    f = as_vectorized(zeta)
    cell = window
    for attempt in range(5):
        try:
            m = _moments(f, cell)
            _winding(m)
            break
        except (BoundaryPoleError, PoleProximityError):
            pad = 1e-2 * window.size * (attempt // 2 + 1) * (1 if attempt % 2 == 0 else -1)
            cell = window.grown(pad)
            warnings.warn(f"window boundary meets a pole; retrying with padding {pad:g}",
                          BoundaryPoleWarning)
    else:
        raise BoundaryPoleError("window boundary meets a pole and nudging did not help")
    poles = _search(f, cell, m, max_depth, min_cell)
    return sorted(poles, key=lambda c: (round(c.location.real, 9), c.location.imag))


def match_poles(found: Sequence[ComplexDimension], expected: Sequence[ComplexDimension]) -> float:
    """Largest distance from an expected pole to its nearest found pole (inf if counts differ)."""
    if len(found) != len(expected):
        return math.inf
    worst = 0.0
    for e in expected:
        worst = max(worst, min(abs(e.location - f.location) for f in found))
    return worst


# ---------------------------------------------------------------- residue / content checks


def _closed(drum: DrumSpec, kind: ZetaKind) -> ZetaHandle:
    return ZetaHandle(drum, kind, Norm.SUP)


@dataclass(frozen=True)
class ResidueContentReport:
    dimension: float
    distance_residue: float
    tube_residue: float
    right_limit: float | None
    lower_content: float
    upper_content: float
    measurable: bool
    relation_residual: float
    sandwich_ok: bool
    equality_ok: bool
    methods_agree: bool

    @property
    def passed(self) -> bool:
        return self.sandwich_ok and self.equality_ok and self.relation_residual < 1e-9 \
            and self.methods_agree


def residue_content_check(drum: DrumSpec) -> ResidueContentReport:
    n, d = drum.ambient_dim, drum.dimension
    radius = 0.5 * pole_gap(drum, complex(d))
    dist = residue_contour(_closed(drum, ZetaKind.DISTANCE), d, radius)
    tube = residue_contour(_closed(drum, ZetaKind.TUBE), d, radius)
    _, content = exact_dimension(drum)
    lo, hi = content if isinstance(content, tuple) else (content, content)
    measurable = is_measurable(drum)
    try:
        right = residue_from_right(_closed(drum, ZetaKind.TUBE), d, delta=min(0.5, radius))
    except ExtrapolationError:
        right = None
    rt = tube.real
    if measurable:
        sandwich = lo - 1e-9 <= rt <= hi + 1e-9
        equality = abs(rt - lo) <= 1e-8 * max(1.0, abs(lo))
    else:
        sandwich = lo < rt < hi
        equality = True
    agree = right is None or abs(right - rt) <= 1e-6 * max(1.0, abs(rt))
    return ResidueContentReport(d, dist.real, rt, right, lo, hi, measurable,
                                abs(dist + (n + d) * tube), sandwich, equality, agree)


@dataclass(frozen=True)
class FourierResidueReport:
    ks: tuple[int, ...]
    coefficients: tuple[complex, ...]
    residues: tuple[complex, ...]
    mean_profile: float
    max_deviation: float
    bounded: bool
    envelope_decreasing: bool

    @property
    def passed(self) -> bool:
        return self.max_deviation < 1e-8 and self.bounded and self.envelope_decreasing


def fourier_coefficients(profile, ks: Sequence[int], panels: int = 4, order: int = 64) -> np.ndarray:
    """(1/T) times the integral over one period of exp(-2 pi i k tau / T) G(tau), split at the kink."""
    T = profile.period
    start = profile.breakpoints[0] if profile.breakpoints else 0.0
    x, w = gauss_legendre(order)
    t = (np.arange(panels)[:, None] + (x[None, :] + 1.0) / 2.0) / panels
    tau = (start + T * t).ravel()
    wt = np.tile(w, panels) / (2.0 * panels)
    g = np.asarray(profile(tau), dtype=float)
    k = np.asarray(ks, dtype=float)[:, None]
    return (np.exp(-2j * math.pi * k * tau[None, :] / T) * (g * wt)[None, :]).sum(axis=1)


def fourier_residue_link(drum: DrumSpec, k_range: Sequence[int] = range(-8, 9),
                         profile=None) -> FourierResidueReport:
    ks = tuple(int(k) for k in k_range)
    if sorted(ks) != sorted(-k for k in ks):
        raise ConfigError("k_range must be symmetric about 0")
    fam, _ = _unwrap(drum)
    if not isinstance(fam, CantorInfinity):
        raise UnsupportedError("the Fourier link is defined for CantorInfinity drums")
    profile = profile or periodic_profile(drum)
    p = 2.0 * math.pi / profile.period
    d = drum.dimension
    coef = fourier_coefficients(profile, ks)
    handle = _closed(drum, ZetaKind.TUBE)
    radius = 0.5 * min(p, fam.log_ratio)

    def res_at(k):
        return residue_contour(handle, complex(d, p * k), radius)

    res = np.array(ordered_map(res_at, ks))
    mean = float(fourier_coefficients(profile, [0])[0].real)
    dev = float(np.max(np.abs(coef - res)))
    bounded = bool(np.all(np.abs(res) <= mean * (1.0 + 1e-12)))
    mags = {k: abs(r) for k, r in zip(ks, res)}
    env = [max(mags[j], mags[-j]) for j in sorted({abs(k) for k in ks}) if j > 0]
    decreasing = all(b < a for a, b in zip(env, env[1:]))
    return FourierResidueReport(ks, tuple(complex(c) for c in coef), tuple(complex(r) for r in res),
                                mean, dev, bounded, decreasing)


@dataclass(frozen=True)
class UpperBoundReport:
    gap: float
    constant: float
    residue: float
    upper_content: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.upper_content <= self.bound


def upper_content_bound(n: int, d: float, gap: float, residue: float, constant: float = 3.0) -> float:
    x = 2.0 * math.pi * (n + d) / gap
    return -(n + d) * constant * gap / (2.0 * math.pi * (1.0 - math.exp(x))) * residue


def content_upper_bound_check(drum: DrumSpec, constant: float = 3.0) -> UpperBoundReport:
    fam, _ = _unwrap(drum)
    if not isinstance(fam, CantorInfinity):
        raise UnsupportedError("the upper-content bound needs a lattice of principal poles")
    n, d = drum.ambient_dim, drum.dimension
    gap = 2.0 * math.pi / fam.period
    radius = 0.5 * min(gap, fam.log_ratio)
    res = residue_contour(_closed(drum, ZetaKind.TUBE), d, radius).real
    _, (_, hi) = exact_dimension(drum)
    return UpperBoundReport(gap, constant, res, hi, upper_content_bound(n, d, gap, res, constant))


@dataclass(frozen=True)
class InversionReport:
    predicted: float
    estimate: float
    relative_error: float
    slope: float
    expected_slope: float
    eps: tuple[float, ...]
    volumes: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.relative_error < 0.1 and abs(self.slope - self.expected_slope) < 0.1


def inverted_content_relation(drum: DrumSpec, eps_grid: Sequence[float] | None = None,
                              norm: Norm | str = Norm.EUCLID) -> InversionReport:
    if not is_measurable(drum):
        raise UnsupportedError("the inversion relation is stated for measurable drums")
    n, d = drum.ambient_dim, drum.dimension
    _, content = exact_dimension(drum)
    predicted = -(n + d) / (n - d) * content
    if eps_grid is None:
        top = 0.1 / max(drum.x_inner, 1.0)
        eps_grid = top * np.logspace(0.0, -4.0, 17)
    eps = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    vol = np.array(ordered_map(lambda e: inverted_near_ball_volume(drum, float(e), norm), eps))
    fit = stats.linregress(np.log(eps), np.log(vol))
    estimate = float(vol[-1] / eps[-1] ** (n - d))
    return InversionReport(predicted, estimate, abs(estimate - predicted) / abs(predicted),
                           float(fit.slope), float(n - d), tuple(eps.tolist()), tuple(vol.tolist()))
