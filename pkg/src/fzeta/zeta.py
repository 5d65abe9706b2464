"""Distance and tube zeta functions at infinity: closed forms, quadrature, identities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from .drums import (MAX_PIECES, DrumSpec, Norm, as_norm, make_tube, scaled,
                    sliver_kinks, sliver_knots, tube_envelope, tube_volume, _euclid_correction)
from .errors import AbscissaError, ConfigError, ToleranceError, UnsupportedError
from .quadrature import (gauss_legendre, gauss_segment, integrate_adaptive, integrate_panels,
                         panel_edges)

MARGIN = 0.05


class ZetaKind(str, Enum):
    DISTANCE = "distance"
    TUBE = "tube"


class ZetaMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class ZetaHandle:
    """Evaluator of zeta(s; T) for one drum, kind, norm and method."""

    drum: DrumSpec
    kind: ZetaKind = ZetaKind.DISTANCE
    norm: Norm = Norm.SUP
    T: float | None = None
    method: ZetaMethod = ZetaMethod.CLOSED_FORM
    tol: float = 1e-12
    margin: float = MARGIN
    abscissa: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ZetaKind(self.kind))
        object.__setattr__(self, "norm", as_norm(self.norm))
        object.__setattr__(self, "method", ZetaMethod(self.method))
        if self.T is None:
            object.__setattr__(self, "T", self.drum.reference_radius)
        if not self.T > 0:
            raise ConfigError("reference radius T must be positive")
        if self.margin < MARGIN:
            raise ConfigError(f"quadrature margin must be at least {MARGIN}")
        object.__setattr__(self, "abscissa", self.drum.dimension)

    def with_(self, **changes) -> "ZetaHandle":
        kw = dict(drum=self.drum, kind=self.kind, norm=self.norm, T=self.T,
                  method=self.method, tol=self.tol, margin=self.margin)
        kw.update(changes)
        return ZetaHandle(**kw)

    def __call__(self, s) -> complex:
        return self.evaluate(s)[0]

    def evaluate(self, s) -> tuple[complex, float]:
        s = complex(s)
        if self.method is ZetaMethod.CLOSED_FORM:
            if self.kind is ZetaKind.DISTANCE:
                return zeta_closed_form(self.drum, s, self.T, self.norm), 0.0
            return tube_zeta_closed_form(self.drum, s, self.T, self.norm), 0.0
        return zeta_quadrature(self, s)

    def batch(self, s_values) -> np.ndarray:
        return np.array([self(s) for s in np.ravel(s_values)], dtype=complex)

    def vectorized(self):
        """Array-in, array-out evaluator (fast path for closed forms)."""
        if self.method is ZetaMethod.CLOSED_FORM:
            return lambda s: closed_form_array(self.drum, s, self.T, self.kind, self.norm)
        return lambda s: self.batch(s).reshape(np.shape(s))


# ---------------------------------------------------------------- closed forms


def _horizontal_check(drum: DrumSpec, T: float) -> None:
    if not drum.sup_is_horizontal(T):
        raise UnsupportedError("reference radius falls inside the strip height")


def zeta_closed_form(drum: DrumSpec, s: complex, T: float | None = None,
                     norm: Norm | str = Norm.SUP) -> complex:
    """Exact distance zeta; sup norm for planar drums (any norm on the line)."""
    T = drum.reference_radius if T is None else float(T)
    if drum.ambient_dim == 2 and as_norm(norm) is not Norm.SUP:
        raise UnsupportedError("closed forms are available in the sup norm only")
    _horizontal_check(drum, T)
    try:
        return complex(drum.family.zeta_closed(complex(s), T))
    except AttributeError as exc:
        raise UnsupportedError(f"no closed form for {drum.tag}") from exc


def tube_zeta_closed_form(drum: DrumSpec, s: complex, T: float | None = None,
                          norm: Norm | str = Norm.SUP) -> complex:
    """Tube zeta from the distance closed form through the functional equation."""
    T = drum.reference_radius if T is None else float(T)
    n = drum.ambient_dim
    s = complex(s)
    vol = tube_volume(make_tube(drum, norm), T)

    def via_fe(z):
        return (T ** (-z - n) * vol - zeta_closed_form(drum, z, T, norm)) / (z + n)

    if abs(s + n) < 1e-6:
        # removable singularity at s = -N: symmetric average
        h = 1e-4
        return 0.5 * (via_fe(s + h) + via_fe(s - h))
    return via_fe(s)


def closed_form_array(drum: DrumSpec, s, T: float | None = None,
                      kind: ZetaKind = ZetaKind.DISTANCE, norm: Norm | str = Norm.SUP):
    """Closed-form distance or tube zeta on an array of s values."""
    T = drum.reference_radius if T is None else float(T)
    if drum.ambient_dim == 2 and as_norm(norm) is not Norm.SUP:
        raise UnsupportedError("closed forms are available in the sup norm only")
    _horizontal_check(drum, T)
    s = np.asarray(s, dtype=complex)
    try:
        dist = np.asarray(drum.family.zeta_closed(s, T), dtype=complex)
    except TypeError:
        dist = np.vectorize(lambda z: complex(drum.family.zeta_closed(z, T)),
                            otypes=[complex])(s)
    if ZetaKind(kind) is ZetaKind.DISTANCE:
        return dist
    n = drum.ambient_dim
    vol = tube_volume(make_tube(drum, norm), T)
    return (T ** (-s - n) * vol - dist) / (s + n)


def closed_form_available(drum: DrumSpec, norm: Norm | str = Norm.SUP) -> bool:
    if drum.ambient_dim == 2 and as_norm(norm) is not Norm.SUP:
        return False
    try:
        drum.family.zeta_closed(complex(drum.dimension + 1.0, 0.3), drum.reference_radius)
    except (AttributeError, UnsupportedError):
        return False
    return True


# ---------------------------------------------------------------- quadrature


def _panel_width(s: complex) -> float:
    return 1.0 / max(1.0, abs(s.imag) / 4.0)


def _require_margin(handle: ZetaHandle, s: complex) -> None:
    if s.real <= handle.abscissa + handle.margin:
        raise AbscissaError(
            f"Re s = {s.real:g} is within {handle.margin} of the abscissa {handle.abscissa:g}")


def zeta_quadrature(handle: ZetaHandle, s: complex) -> tuple[complex, float]:
    """Numerical zeta value and an error bound (panel estimate plus tail)."""
    s = complex(s)
    _require_margin(handle, s)
    if handle.kind is ZetaKind.TUBE:
        return _tube_zeta_quadrature(handle, s)
    drum = handle.drum
    if drum.ambient_dim != 2:
        raise UnsupportedError("distance quadrature is implemented for planar graph drums")
    _horizontal_check(drum, handle.T)
    val, err = _sup_distance_quadrature(drum, s, handle.T, handle.tol)
    if handle.norm is Norm.EUCLID:
        dv, de = euclid_distance_correction(drum, s, handle.T, handle.tol)
        val, err = val + dv, err + de
    if not (math.isfinite(abs(val)) and math.isfinite(err)):
        raise ToleranceError(f"quadrature produced a non-finite value at s={s}")
    if err > max(handle.tol, 1e-9 * abs(val)) * 100:
        raise ToleranceError(f"quadrature error {err:g} exceeds tolerance at s={s}")
    return val, err


def _tail_target(tol: float, envelope: float) -> float:
    """Absolute tail budget: tol, tightened to tol * envelope when the whole integral is small."""
    return tol * min(1.0, envelope)


def _sup_distance_quadrature(drum: DrumSpec, s: complex, T: float, tol: float):
    fam = drum.family
    d, sig = drum.dimension, s.real
    x0 = max(T, drum.x_inner)
    c_h = fam.cross_envelope()
    # |H(x) x^(-s-1)| <= c_h x^(D - sigma): tail past X is c_h X^(D-sigma)/(sigma-D)
    target = _tail_target(tol, c_h * x0 ** (d - sig) / (sig - d))
    x_end = (target * (sig - d) / (10.0 * c_h)) ** (1.0 / (d - sig))
    x_end = max(x_end, 2.0 * x0)
    v_end = math.log(x_end / x0)
    brk = [math.log(b / x0) for b in fam.breaks(x0, x_end)]
    edges = panel_edges(0.0, v_end, _panel_width(s), brk)

    def integrand(v):
        x = x0 * np.exp(v)
        h = fam.cross_section(x)
        # combine in log space: near the abscissa x reaches 1e200 and beyond
        with np.errstate(divide="ignore"):
            logs = np.log(h) + (-s - 1.0) * np.log(x)
        return np.where(h > 0, np.exp(logs), 0.0)

    val, err = integrate_panels(integrand, edges)
    tail = c_h * x_end ** (d - sig) / (sig - d)
    return complex(val), err + tail


def _tube_zeta_quadrature(handle: ZetaHandle, s: complex) -> tuple[complex, float]:
    drum, T, n = handle.drum, handle.T, handle.drum.ambient_dim
    d, sig = drum.dimension, s.real
    tube = make_tube(drum, handle.norm)
    c_v = tube_envelope(drum)
    if handle.norm is Norm.EUCLID:
        c_v *= 1.0 + 1e-6
    # integrand bound T^(D-sigma) c_v e^{-(sigma-D) v}
    scale = c_v * T ** (d - sig)
    target = _tail_target(handle.tol, scale / (sig - d))
    v_end = max(math.log(10.0 * scale / (target * (sig - d))) / (sig - d), 1.0)
    if n == 2:
        brk = [math.log(b / T) for b in drum.family.breaks(T, T * math.exp(v_end))]
    else:
        fam = drum.base()
        lam = drum.scale_factor()
        j = np.arange(1, 20_001, dtype=float)
        kinks = lam * np.concatenate([j ** fam.alpha, j ** fam.alpha + j ** -fam.beta])
        kinks = kinks[(kinks > T) & (kinks < T * math.exp(v_end))]
        brk = list(np.log(kinks / T))
    if drum.x_inner > T:
        brk.append(math.log(drum.x_inner / T))
    edges = panel_edges(0.0, v_end, _panel_width(s), brk)

    def integrand(v):
        t = T * np.exp(v)
        vol, _ = tube.evaluate(t.ravel())
        return np.exp(-(s + n) * v) * vol.reshape(t.shape)

    val, err = integrate_panels(integrand, edges)
    tail = scale * math.exp(-(sig - d) * v_end) / (sig - d)
    return complex(T ** (-s - n) * val), (err + tail) * T ** (-sig - n)


def euclid_distance_correction(drum: DrumSpec, s: complex, T: float, tol: float = 1e-12):
    """Euclidean minus sup-norm distance zeta for a planar graph drum."""
    s = complex(s)
    p = s + 2.0
    d, sig = drum.dimension, s.real
    y_top = drum.y_range[1]
    c_h = drum.family.cross_envelope()
    # |r^-p - x^-p| <= |p| q x^-sigma-2 with q = y^2/x^2 (up to a factor near 1)
    amp = 1.5 * abs(p) * y_top ** 2 * c_h
    expo = d - sig - 2.0
    x0 = max(T, drum.x_inner)
    target = _tail_target(tol, c_h * x0 ** (d - sig) / (sig - d))
    x_end = (target * (-expo) / (10.0 * amp)) ** (1.0 / expo)
    x_end = max(x_end, 2.0 * x0)
    if drum.family.piece_count(x_end) > MAX_PIECES:
        raise ToleranceError("Euclidean correction needs too many pieces at this tolerance")
    pcs = drum.family.pieces(x_end)
    yn, yw = gauss_legendre(8)
    width = _panel_width(s)
    total, err = 0.0 + 0.0j, amp * x_end ** expo / (-expo)
    for st in np.unique(pcs.start):
        sel = pcs.start == st
        c, e, o = pcs.coef[sel], pcs.expo[sel], pcs.offset[sel]
        x_lo = max(st, T)
        if x_lo < x_end:
            edges = panel_edges(0.0, math.log(x_end / x_lo), width)

            def integrand(v, c=c, e=e, o=o, x_lo=x_lo):
                x = x_lo * np.exp(v)[..., None, None]
                h = c[:, None] * x ** -e[:, None]
                y = o[:, None] + 0.5 * h * (1.0 + yn)
                q = (y / x) ** 2
                f = np.exp(-p * np.log(x)) * np.expm1(-0.5 * p * np.log1p(q))
                return x[..., 0, 0] * np.sum(0.5 * h * f * yw, axis=(-2, -1))

            val, e_ = integrate_panels(integrand, edges)
            total += val
            err += e_
        if st < T:
            total += _euclid_sliver_zeta(c, e, o, st, T, p)
    return complex(total), float(err)


def _euclid_sliver_zeta(c, e, o, st, T, p, order=24):
    """Integral of r^-p over points of the pieces with x < T <= r."""
    yn, yw = gauss_legendre(8)

    def make(lower_is_circle):
        def f(u):
            x = np.maximum(T - u * u, st)[..., None]
            h = c[:, None, None] * x ** -e[:, None, None]
            ylo = np.where(lower_is_circle, (u * np.sqrt(2 * T - u * u))[..., None],
                           o[:, None, None])
            yhi = o[:, None, None] + h
            ylo = np.minimum(ylo, yhi)
            y = ylo + 0.5 * (yhi - ylo) * (1.0 + yn)
            r2 = x * x + y * y
            g = np.exp(-0.5 * p * np.log(r2))
            return 2.0 * u * np.sum(0.5 * (yhi - ylo) * g * yw, axis=-1)
        return f

    u_o, knots, active = sliver_knots(c, e, o, st, T)
    total = np.sum(gauss_segment(make(False), np.zeros_like(u_o), u_o, order))
    for k in range(active.shape[1]):
        seg = gauss_segment(make(True), knots[:, k], knots[:, k + 1], order)
        total += np.sum(np.where(active[:, k], seg, 0.0))
    return complex(total)


# ---------------------------------------------------------------- identities


def best_handle(drum: DrumSpec, T: float | None = None, norm: Norm | str = Norm.SUP,
                kind: ZetaKind = ZetaKind.DISTANCE) -> ZetaHandle:
    method = ZetaMethod.CLOSED_FORM if closed_form_available(drum, norm) else ZetaMethod.QUADRATURE
    return ZetaHandle(drum, kind, norm, T=T, method=method)


def functional_equation_sides(drum: DrumSpec, s: complex, T: float | None = None,
                              norm: Norm | str = Norm.SUP) -> tuple[complex, complex]:
    """(zeta(s;T), T^(-s-N)|_T Omega| - (s+N) tube_zeta(s;T)) with the tube zeta by quadrature."""
    s = complex(s)
    lhs_h = best_handle(drum, T, norm)
    T = lhs_h.T
    n = drum.ambient_dim
    tube_h = ZetaHandle(drum, ZetaKind.TUBE, norm, T=T, method=ZetaMethod.QUADRATURE)
    vol = tube_volume(make_tube(drum, norm), T)
    lhs = lhs_h(s)
    rhs = T ** (-s - n) * vol - (s + n) * tube_h(s)
    return lhs, rhs


def functional_equation_residual(drum: DrumSpec, s: complex, T: float | None = None,
                                 norm: Norm | str = Norm.SUP) -> float:
    lhs, rhs = functional_equation_sides(drum, s, T, norm)
    return abs(lhs - rhs)


def scaling_identity_sides(drum: DrumSpec, lam: float, s: complex, T: float | None = None,
                           lhs_method: ZetaMethod = ZetaMethod.QUADRATURE,
                           norm: Norm | str = Norm.SUP) -> tuple[complex, complex]:
    """(zeta_{lam Omega}(s; lam T), lam^-s zeta_Omega(s; T))."""
    s = complex(s)
    T = drum.reference_radius if T is None else float(T)
    big = scaled(drum, lam)
    lhs = ZetaHandle(big, ZetaKind.DISTANCE, norm, T=lam * T, method=lhs_method)(s)
    rhs = lam ** (-s) * best_handle(drum, T, norm)(s)
    return lhs, rhs


def scaling_identity_residual(drum: DrumSpec, lam: float, s: complex, T: float | None = None,
                              lhs_method: ZetaMethod = ZetaMethod.QUADRATURE) -> float:
    lhs, rhs = scaling_identity_sides(drum, lam, s, T, lhs_method)
    return abs(lhs - rhs)


def point_drum_zeta(drum: DrumSpec, s: complex, delta: float,
                    norm: Norm | str = Norm.SUP, tol: float = 1e-13) -> complex:
    """zeta of the inverted drum at the origin, int_{B_delta ∩ Phi(Omega)} |y|^(s-N) dy.

    Evaluated on Omega itself with the inversion Jacobian |x|^(-2N), using
    adaptive QUADPACK integration (independent of the panel scheme above).
    """
    s = complex(s)
    if drum.ambient_dim != 2:
        raise UnsupportedError("point-drum zeta is implemented for planar graph drums")
    T = 1.0 / delta
    _horizontal_check(drum, T)
    n = 2
    fam = drum.family
    d, sig, tau = drum.dimension, s.real, s.imag
    x0 = max(T, drum.x_inner)
    c_h = fam.cross_envelope()
    # weighted integrand H(x) x^(N-s) x^(-2N) x in log variable u = log x
    x_end = max((tol * (sig - d) / (10.0 * c_h)) ** (1.0 / (d - sig)), 2.0 * x0)
    cuts = [x0] + [b for b in fam.breaks(x0, x_end)] + [x_end]
    u = np.log(cuts)

    def amp(uu):
        x = math.exp(uu)
        return float(fam.cross_section(np.array([x]))[0]) * x ** (n - sig) * x ** (-2 * n) * x

    re_part = im_part = 0.0
    for lo, hi in zip(u[:-1], u[1:]):
        if tau == 0.0:
            re_part += integrate.quad(amp, lo, hi, epsabs=tol, epsrel=1e-13, limit=200)[0]
            continue
        re_part += integrate.quad(amp, lo, hi, weight="cos", wvar=tau,
                                  epsabs=tol, epsrel=1e-13, limit=200)[0]
        im_part -= integrate.quad(amp, lo, hi, weight="sin", wvar=tau,
                                  epsabs=tol, epsrel=1e-13, limit=200)[0]
    val = complex(re_part, im_part)
    if as_norm(norm) is Norm.EUCLID:
        val += euclid_distance_correction(drum, s, T, tol)[0]
    return val


def inversion_identity_residual(drum: DrumSpec, s: complex, T: float | None = None,
                                norm: Norm | str = Norm.SUP) -> float:
    """|zeta_{inf,Omega}(s;T) - zeta_{0,Phi(Omega)}(s;1/T)|."""
    s = complex(s)
    T = drum.reference_radius if T is None else float(T)
    if T < drum.x_inner:
        raise ConfigError("inversion identity needs T above the drum's inner radius")
    lhs = best_handle(drum, T, norm)(s)
    rhs = point_drum_zeta(drum, s, 1.0 / T, norm)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class AbscissaReport:
    s_real: float
    abscissa: float
    ladder: tuple[float, ...]
    partial_integrals: tuple[float, ...]
    ratio: float
    strictly_increasing: bool
    diverges: bool
    approach_values: tuple[float, ...] = ()


def _partial_distance_integral(drum: DrumSpec, s_real: float, T: float, X: float) -> float:
    """int over T <= |x| < X of |x|^(-s-N) (sup norm), QUADPACK on break-split pieces."""
    if drum.ambient_dim == 1:
        fam, lam = drum.base(), drum.scale_factor()
        j = np.arange(1, int((X / lam) ** (1 / fam.alpha)) + 2, dtype=float)
        lo = np.clip(lam * j ** fam.alpha, T, X)
        hi = np.clip(lam * (j ** fam.alpha + j ** -fam.beta), T, X)
        if abs(s_real) < 1e-14:
            return float(math.fsum(np.log(hi / lo)))
        return float(math.fsum((lo ** -s_real - hi ** -s_real) / s_real))
    fam = drum.family
    x0 = max(T, drum.x_inner)
    if X <= x0:
        return 0.0
    cuts = np.log([x0] + fam.breaks(x0, X) + [X])

    def f(u):
        x = math.exp(u)
        return float(fam.cross_section(np.array([x]))[0]) * x ** (-s_real - 1.0)

    return math.fsum(integrate.quad(f, lo, hi, epsrel=1e-12, limit=200)[0]
                     for lo, hi in zip(cuts[:-1], cuts[1:]))


def abscissa_probe(handle: ZetaHandle, s_real: float, ladder=None,
                   halvings: int = 8) -> AbscissaReport:
    """Partial integrals over [T, X_k] and, right of the abscissa, values as s - D halves."""
    d = handle.abscissa
    T = handle.T
    if ladder is None:
        ladder = tuple(T * 10.0 ** k for k in range(1, 7))
    parts = tuple(_partial_distance_integral(handle.drum, s_real, T, X) for X in ladder)
    inc = all(b > a for a, b in zip(parts[:-1], parts[1:]))
    ratio = parts[-1] / parts[0] if parts[0] > 0 else math.inf
    approach: tuple[float, ...] = ()
    if s_real > d and closed_form_available(handle.drum, handle.norm):
        h = handle.with_(method=ZetaMethod.CLOSED_FORM)
        approach = tuple(h(d + (s_real - d) * 2.0 ** -k).real for k in range(halvings + 1))
    return AbscissaReport(s_real, d, tuple(ladder), parts, ratio, inc,
                          diverges=bool(inc and ratio > 10.0), approach_values=approach)


def norm_change_difference(drum: DrumSpec, s: complex, T: float | None = None,
                           tol: float = 1e-13) -> complex:
    """zeta_Euclid(s;T) - zeta_sup(s;T) via the functional equation.

    Only the sliver E(t) = |tube_Euclid(t) - tube_sup(t)| enters; it decays
    like t^D, so the formula is usable left of the abscissa as well.
    """
    s = complex(s)
    T = drum.reference_radius if T is None else float(T)
    n = drum.ambient_dim
    d, sig = drum.dimension, s.real
    rate = sig + n - d
    if rate <= 0.05:
        raise AbscissaError("difference integral diverges this far left")
    v_end = math.log(1e3 / tol) / rate
    t_end = T * math.exp(v_end)
    cuts = list(drum.family.breaks(T, t_end))
    if drum.family.piece_count(2.0 * T) <= MAX_PIECES:
        cuts += sliver_kinks(drum.family.pieces(2.0 * T)).tolist()
    cuts = [c for c in cuts if T < c < t_end]
    edges = panel_edges(0.0, v_end, _panel_width(s), [math.log(b / T) for b in cuts])

    def integrand(v):
        t = T * np.exp(v)
        e = np.array([_euclid_correction(drum, x)[0] for x in t.ravel()]).reshape(t.shape)
        return np.exp(-(s + n) * v) * e

    rough, _ = integrate_panels(integrand, edges)
    val, _ = integrate_adaptive(integrand, edges, max(tol, 1e-10 * abs(rough)))
    e_T = _euclid_correction(drum, T)[0]
    return T ** (-s - n) * e_T - (s + n) * T ** (-s - n) * complex(val)
