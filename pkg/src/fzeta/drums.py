"""Unbounded drums at infinity: parameter families, transforms and tube volumes.

Every two-dimensional family here is a union of graph regions
``{x > x0, c < y < c + k * x**-e}`` lying in a thin horizontal strip, so the
sup-norm distance to the origin is simply ``x`` as soon as ``t`` exceeds the
strip height.  All sup-norm quantities are therefore driven by the vertical
cross-section ``H(x)``; Euclidean quantities add a thin sliver correction
computed from the explicit list of graph pieces.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import mpmath
import numpy as np
from scipy import special

from .errors import DrumError, InversionRangeError, PoleProximityError, UnsupportedError
from .quadrature import gauss_segment, integrate_panels, panel_edges

POLE_EPS = 1e-12
SERIES_TOL = 1e-12
MAX_PIECES = 4096


class Norm(str, Enum):
    EUCLID = "euclid"
    SUP = "sup"


class TubeMethod(str, Enum):
    EXACT_SERIES = "exact"
    QUADRATURE = "quadrature"


def as_norm(norm: Norm | str) -> Norm:
    try:
        return Norm(norm)
    except ValueError as exc:
        raise DrumError(f"unknown norm {norm!r}") from exc


def _check_pole(w, what: str) -> None:
    if np.any(np.abs(w) < POLE_EPS):
        raise PoleProximityError(f"{what}: argument within {POLE_EPS:g} of a pole")


@dataclass(frozen=True)
class Pieces:
    """Graph pieces ``{x > start, offset < y < offset + coef * x**-expo}``."""

    start: np.ndarray
    coef: np.ndarray
    expo: np.ndarray
    offset: np.ndarray

    @staticmethod
    def concat(parts: Sequence["Pieces"]) -> "Pieces":
        if not parts:
            z = np.zeros(0)
            return Pieces(z, z, z, z)
        return Pieces(*(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("start", "coef", "expo", "offset")))

    def __len__(self) -> int:
        return int(self.start.size)


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class IntervalFamily:
    """Union of intervals (j**alpha, j**alpha + j**-beta), j >= 1, on the line."""

    alpha: float
    beta: float
    tag = "IntervalFamily"
    ambient_dim = 1

    def validate(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DrumError("IntervalFamily needs alpha > 0")
        if not (self.beta > 1 and math.isfinite(self.beta)):
            raise DrumError("IntervalFamily needs beta > 1")
        j = np.arange(1, 10_001, dtype=float)
        if np.any(j ** self.alpha + j ** -self.beta > (j + 1) ** self.alpha):
            raise DrumError("IntervalFamily intervals overlap for these parameters")

    def params(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}

    @property
    def volume(self) -> float:
        return float(special.zeta(self.beta, 1.0))

    @property
    def dimension(self) -> float:
        return (1.0 - (self.alpha + self.beta)) / self.alpha

    @property
    def x_inner(self) -> float:
        return 1.0

    def _first_index(self, t: np.ndarray) -> np.ndarray:
        """Smallest j with j**alpha >= t (t >= 1)."""
        j = np.ceil(t ** (1.0 / self.alpha))
        j = np.where((j - 1) ** self.alpha >= t, j - 1, j)
        j = np.where(j ** self.alpha < t, j + 1, j)
        return np.maximum(j, 1.0)

    def tube(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, 1.0)
        j = self._first_index(tt)
        full = special.zeta(self.beta, j)
        prev = j - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            partial = np.where(prev >= 1, prev ** self.alpha + prev ** -self.beta - tt, 0.0)
        out = full + np.clip(partial, 0.0, None)
        return np.where(t <= 1.0, self.volume, out)

    def tube_quadrature(self, t: float) -> tuple[float, float]:
        # direct sum up to J, Euler-Maclaurin tail with its next-term bound
        t = max(float(t), 1.0)
        j0 = int(self._first_index(np.array([t]))[0])
        big = max(j0 + 2000, 4000)
        js = np.arange(j0, big, dtype=float)
        head = float(np.sum(js[::-1] ** -self.beta))
        b = self.beta
        tail = big ** (1 - b) / (b - 1) + 0.5 * big ** -b + b * big ** (-b - 1) / 12.0
        err = b * (b + 1) * (b + 2) * big ** (-b - 3) / 720.0
        prev = j0 - 1
        partial = 0.0
        if prev >= 1:
            partial = max(0.0, prev ** self.alpha + prev ** -self.beta - t)
        return head + tail + partial, err

    def tube_envelope(self) -> float:
        nd = self.dimension + 1.0
        c_far = self.beta / (self.beta - 1.0) * 2.0 ** (-nd)
        return max(c_far, self.volume * 2.0 ** (-nd))

    def zeta_closed(self, s: complex, T: float) -> complex:
        """Distance zeta via exact near terms plus a Hurwitz-zeta expansion."""
        s = complex(s)
        T = max(float(T), 1.0)
        a, b = self.alpha, self.beta
        pole_k = round(((1.0 - a * s.real) / (a + b)))
        if pole_k >= 1 and abs(a * s + pole_k * (a + b) - 1.0) < POLE_EPS:
            raise PoleProximityError("IntervalFamily zeta: too close to a pole")
        jt = int(self._first_index(np.array([T]))[0])
        j0 = max(jt, 8)
        ms = mpmath.mpc(s.real, s.imag)
        total = mpmath.mpc(0)
        for j in range(max(jt - 1, 1), j0):
            lo, hi = j ** a, j ** a + j ** -b
            lo = max(lo, T)
            if hi <= lo:
                continue
            if abs(s) < 1e-14:
                total += mpmath.log(hi / lo)
            else:
                total += (mpmath.mpf(lo) ** (-ms) - mpmath.mpf(hi) ** (-ms)) / ms
        # sum_{j>=j0} j^{-a s} (1 - (1+z)^{-s}) / s with z = j^{-(a+b)}
        coef = mpmath.mpc(1)
        k = 1
        while True:
            term = coef * mpmath.zeta(a * ms + k * (a + b), j0)
            total += term
            if abs(term) < 1e-18 * max(abs(total), 1e-300) or k > 60:
                break
            coef *= (-ms - k) / (k + 1)
            k += 1
        return complex(total)

    def poles(self, re_min: float) -> list[float]:
        a, b = self.alpha, self.beta
        out, k = [], 1
        while (1.0 - k * (a + b)) / a >= re_min:
            out.append((1.0 - k * (a + b)) / a)
            k += 1
        return out


@dataclass(frozen=True)
class PowerTail:
    """Region under x**-alpha to the right of x = 1."""

    alpha: float
    tag = "PowerTail"
    ambient_dim = 2

    def validate(self) -> None:
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            raise DrumError("PowerTail needs alpha > 1")

    def params(self) -> dict:
        return {"alpha": self.alpha}

    @property
    def volume(self) -> float:
        return 1.0 / (self.alpha - 1.0)

    @property
    def dimension(self) -> float:
        return -1.0 - self.alpha

    @property
    def x_inner(self) -> float:
        return 1.0

    @property
    def y_range(self) -> tuple[float, float]:
        return 0.0, 1.0

    def cross_section(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x > 1.0, np.maximum(x, 1.0) ** -self.alpha, 0.0)

    def breaks(self, lo: float, hi: float) -> list[float]:
        return [1.0] if lo < 1.0 < hi else []

    def cross_envelope(self) -> float:
        return 1.0

    def tube_sup(self, t: np.ndarray) -> np.ndarray:
        t = np.maximum(np.asarray(t, dtype=float), 1.0)
        return t ** (1.0 - self.alpha) / (self.alpha - 1.0)

    def zeta_closed(self, s, T: float):
        w = np.asarray(s, dtype=complex) + self.alpha + 1.0
        _check_pole(w, "PowerTail zeta")
        return max(float(T), 1.0) ** (-w) / w

    def piece_count(self, x_cut: float) -> int:
        return 1 if x_cut > 1.0 else 0

    def pieces(self, x_cut: float) -> Pieces:
        n = self.piece_count(x_cut)
        one = np.ones(n)
        return Pieces(one.copy(), one.copy(), one * self.alpha, np.zeros(n))

    def poles(self, re_min: float) -> list[float]:
        return [-1.0 - self.alpha] if -1.0 - self.alpha >= re_min else []


@dataclass(frozen=True)
class CantorInfinity:
    """Stack of 2**(m-1) copies of {x > a**-m, 0 < y < x**-b} for every m >= 1.

    Copies are stacked bottom-up, level by level, each copy taking a slot
    of height a**(m b) (its height at the left end).
    """

    a: float
    b: float
    tag = "CantorInfinity"
    ambient_dim = 2

    def validate(self) -> None:
        if not (0.0 < self.a < 0.5):
            raise DrumError("CantorInfinity needs 0 < a < 1/2")
        if not math.isfinite(self.b) or self.b <= 1.0 + self.log_ratio:
            raise DrumError(
                f"CantorInfinity needs b > 1 + log_(1/a) 2 = {1.0 + self.log_ratio:.12g} "
                "(finite volume)")

    def params(self) -> dict:
        return {"a": self.a, "b": self.b}

    @property
    def log_ratio(self) -> float:
        return math.log(2.0) / math.log(1.0 / self.a)

    @property
    def period(self) -> float:
        return math.log(1.0 / self.a)

    @property
    def strip_height(self) -> float:
        ab = self.a ** self.b
        return ab / (1.0 - 2.0 * ab)

    @property
    def volume(self) -> float:
        return 1.0 / ((self.b - 1.0) * (self.a ** (1.0 - self.b) - 2.0))

    @property
    def dimension(self) -> float:
        return self.log_ratio - (self.b + 1.0)

    @property
    def x_inner(self) -> float:
        return 1.0 / self.a

    @property
    def y_range(self) -> tuple[float, float]:
        return 0.0, self.strip_height

    def levels_below(self, x: np.ndarray) -> np.ndarray:
        """Number of levels m >= 1 with a**-m < x (ties are irrelevant)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            n = np.floor(np.log(np.maximum(x, 1e-300)) / self.period)
        return np.maximum(n, 0.0)

    def cross_section(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.levels_below(x)
        return (2.0 ** n - 1.0) * np.maximum(x, 1e-300) ** -self.b

    def breaks(self, lo: float, hi: float) -> list[float]:
        m0 = max(1, int(math.floor(math.log(max(lo, 1e-300)) / self.period)))
        out = []
        m = m0
        while True:
            x = self.a ** -m
            if x >= hi:
                break
            if x > lo:
                out.append(x)
            m += 1
        return out

    def cross_envelope(self) -> float:
        return 1.0

    def level_sum(self, w, T: float):
        """sum_m 2**(m-1) max(T, a**-m)**(-w) / w, summed in closed form."""
        w = np.asarray(w, dtype=complex) if np.iscomplexobj(w) else np.asarray(w, dtype=float)
        n = self.levels_below(np.asarray(T, dtype=float))
        aw = self.a ** w
        denom = 1.0 - 2.0 * aw
        head = (2.0 ** n - 1.0) * np.asarray(T, dtype=float) ** (-w)
        tail = 2.0 ** n * aw ** (n + 1.0) / denom
        return (head + tail) / w

    def tube_sup(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.level_sum(self.b - 1.0, t)

    def tube_levels(self, t: float, tol: float = SERIES_TOL) -> tuple[float, float, int]:
        """Direct level-by-level sum; returns (value, tail_bound, last level)."""
        b1 = self.b - 1.0
        q = 2.0 * self.a ** b1
        total, m = 0.0, 0
        while True:
            m += 1
            total += 2.0 ** (m - 1) * max(t, self.a ** -m) ** -b1 / b1
            if self.a ** -m >= t:
                tail = 2.0 ** m * self.a ** ((m + 1) * b1) / (b1 * (1.0 - q))
                if tail < tol:
                    return total, tail, m

    def zeta_closed(self, s, T: float):
        s = np.asarray(s, dtype=complex)
        w = s + self.b + 1.0
        _check_pole(w, "CantorInfinity zeta")
        # distance to the lattice D + i p k
        p = 2.0 * math.pi / self.period
        k = np.round(s.imag / p)
        if np.any(np.abs(s - (self.dimension + 1j * p * k)) < POLE_EPS):
            raise PoleProximityError("CantorInfinity zeta: argument on the pole lattice")
        return self.level_sum(w, float(T))

    def piece_count(self, x_cut: float) -> int:
        n = int(self.levels_below(np.array(x_cut)))
        return 2 ** n - 1

    def pieces(self, x_cut: float) -> Pieces:
        n = int(self.levels_below(np.array(x_cut)))
        if 2 ** n - 1 > MAX_PIECES:
            raise UnsupportedError("too many Cantor pieces requested")
        starts, offs, base = [], [], 0.0
        for m in range(1, n + 1):
            slot = self.a ** (m * self.b)
            cnt = 2 ** (m - 1)
            starts.append(np.full(cnt, self.a ** -m))
            offs.append(base + slot * np.arange(cnt))
            base += cnt * slot
        if not starts:
            return Pieces.concat([])
        st = np.concatenate(starts)
        return Pieces(st, np.ones_like(st), np.full_like(st, self.b), np.concatenate(offs))

    def poles(self, re_min: float) -> list[float]:
        return [-(self.b + 1.0)] if -(self.b + 1.0) >= re_min else []


@dataclass(frozen=True)
class ScaledCopy:
    inner: "DrumSpec"
    factor: float
    tag = "ScaledCopy"

    @property
    def ambient_dim(self) -> int:
        return self.inner.ambient_dim

    def validate(self) -> None:
        if not (self.factor > 0 and math.isfinite(self.factor)):
            raise DrumError("ScaledCopy needs a positive factor")

    def params(self) -> dict:
        return {"factor": self.factor, "inner": self.inner.to_dict()}

    @property
    def volume(self) -> float:
        return self.factor ** self.ambient_dim * self.inner.volume

    @property
    def dimension(self) -> float:
        return self.inner.dimension

    @property
    def x_inner(self) -> float:
        return self.factor * self.inner.x_inner

    @property
    def y_range(self) -> tuple[float, float]:
        lo, hi = self.inner.y_range
        return self.factor * lo, self.factor * hi

    def tube(self, t):
        return self.factor * self.inner.family.tube(np.asarray(t, dtype=float) / self.factor)

    def tube_quadrature(self, t: float) -> tuple[float, float]:
        v, e = self.inner.family.tube_quadrature(t / self.factor)
        return self.factor * v, self.factor * e

    def tube_envelope(self) -> float:
        return self.factor ** -self.dimension * self.inner.family.tube_envelope()

    def cross_section(self, x):
        lam = self.factor
        return lam * self.inner.family.cross_section(np.asarray(x, dtype=float) / lam)

    def breaks(self, lo: float, hi: float) -> list[float]:
        lam = self.factor
        return [lam * x for x in self.inner.family.breaks(lo / lam, hi / lam)]

    def cross_envelope(self) -> float:
        return self.factor ** -self.dimension * self.inner.family.cross_envelope()

    def tube_sup(self, t):
        lam = self.factor
        return lam ** 2 * self.inner.family.tube_sup(np.asarray(t, dtype=float) / lam)

    def zeta_closed(self, s: complex, T: float) -> complex:
        lam = self.factor
        return lam ** (-np.asarray(s, dtype=complex)) * self.inner.family.zeta_closed(s, T / lam)

    def piece_count(self, x_cut: float) -> int:
        return self.inner.family.piece_count(x_cut / self.factor)

    def pieces(self, x_cut: float) -> Pieces:
        lam = self.factor
        p = self.inner.family.pieces(x_cut / lam)
        return Pieces(lam * p.start, lam ** (1.0 + p.expo) * p.coef, p.expo, lam * p.offset)

    def poles(self, re_min: float) -> list[float]:
        return self.inner.family.poles(re_min)


@dataclass(frozen=True)
class TranslatedCopy:
    """Vertical translation of a planar drum (keeps the strip in y >= 0)."""

    inner: "DrumSpec"
    offset: tuple[float, ...]
    tag = "TranslatedCopy"

    @property
    def ambient_dim(self) -> int:
        return self.inner.ambient_dim

    def validate(self) -> None:
        if len(self.offset) != self.ambient_dim:
            raise DrumError("translation offset length must equal ambient_dim")
        if self.ambient_dim != 2 or self.offset[0] != 0.0:
            raise DrumError("only vertical translations of planar drums are supported")
        if self.inner.y_range[0] + self.offset[1] < 0.0:
            raise DrumError("translated drum must stay in the upper half-plane")

    def params(self) -> dict:
        return {"offset": list(self.offset), "inner": self.inner.to_dict()}

    @property
    def volume(self) -> float:
        return self.inner.volume

    @property
    def dimension(self) -> float:
        return self.inner.dimension

    @property
    def x_inner(self) -> float:
        return self.inner.x_inner

    @property
    def y_range(self) -> tuple[float, float]:
        lo, hi = self.inner.y_range
        return lo + self.offset[1], hi + self.offset[1]

    def cross_section(self, x):
        return self.inner.family.cross_section(x)

    def breaks(self, lo, hi):
        return self.inner.family.breaks(lo, hi)

    def cross_envelope(self):
        return self.inner.family.cross_envelope()

    def tube_sup(self, t):
        return self.inner.family.tube_sup(t)

    def zeta_closed(self, s, T):
        return self.inner.family.zeta_closed(s, T)

    def piece_count(self, x_cut):
        return self.inner.family.piece_count(x_cut)

    def pieces(self, x_cut):
        p = self.inner.family.pieces(x_cut)
        return Pieces(p.start, p.coef, p.expo, p.offset + self.offset[1])

    def poles(self, re_min):
        return self.inner.family.poles(re_min)


@dataclass(frozen=True)
class DisjointUnion:
    """Union of drums; disjointness is the builder's responsibility."""

    members: tuple["DrumSpec", ...]
    tag = "DisjointUnion"

    @property
    def ambient_dim(self) -> int:
        return self.members[0].ambient_dim

    def validate(self) -> None:
        if not self.members:
            raise DrumError("DisjointUnion needs at least one member")
        if len({m.ambient_dim for m in self.members}) != 1:
            raise DrumError("DisjointUnion members must share ambient_dim")
        if self.ambient_dim != 2:
            raise DrumError("DisjointUnion is supported for planar drums only")

    def params(self) -> dict:
        return {"members": [m.to_dict() for m in self.members]}

    @property
    def volume(self) -> float:
        return math.fsum(m.volume for m in self.members)

    @property
    def dimension(self) -> float:
        return max(m.dimension for m in self.members)

    @property
    def x_inner(self) -> float:
        return min(m.x_inner for m in self.members)

    @property
    def y_range(self) -> tuple[float, float]:
        return (min(m.y_range[0] for m in self.members),
                max(m.y_range[1] for m in self.members))

    def cross_section(self, x):
        return sum(m.family.cross_section(x) for m in self.members)

    def breaks(self, lo, hi):
        out = set()
        for m in self.members:
            out.update(m.family.breaks(lo, hi))
            if lo < m.x_inner < hi:
                out.add(m.x_inner)
        return sorted(out)

    def cross_envelope(self):
        d = self.dimension
        return math.fsum(m.family.cross_envelope() * m.x_inner ** (m.dimension - d)
                         for m in self.members)

    def tube_sup(self, t):
        return sum(m.family.tube_sup(t) for m in self.members)

    def zeta_closed(self, s, T):
        return sum(m.family.zeta_closed(s, T) for m in self.members)

    def piece_count(self, x_cut):
        return sum(m.family.piece_count(x_cut) for m in self.members)

    def pieces(self, x_cut):
        return Pieces.concat([m.family.pieces(x_cut) for m in self.members])

    def poles(self, re_min):
        return sorted({p for m in self.members for p in m.family.poles(re_min)})


Family = IntervalFamily | PowerTail | CantorInfinity | ScaledCopy | TranslatedCopy | DisjointUnion
BASE_FAMILIES = {"IntervalFamily": IntervalFamily, "PowerTail": PowerTail,
                 "CantorInfinity": CantorInfinity}


# ---------------------------------------------------------------- DrumSpec


@dataclass(frozen=True)
class DrumSpec:
    ambient_dim: int
    family: Any
    volume: float = field(init=False, repr=False, compare=False)
    strip_height: float | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family.ambient_dim != self.ambient_dim:
            raise DrumError(f"{self.family.tag} lives in dimension {self.family.ambient_dim}, "
                            f"not {self.ambient_dim}")
        self.family.validate()
        object.__setattr__(self, "volume", float(self.family.volume))
        height = None
        if self.ambient_dim == 2:
            lo, hi = self.family.y_range
            height = hi - lo
            if isinstance(self.family, CantorInfinity):
                height = self.family.strip_height
        object.__setattr__(self, "strip_height", height)

    @property
    def tag(self) -> str:
        return self.family.tag

    @property
    def dimension(self) -> float:
        return float(self.family.dimension)

    @property
    def x_inner(self) -> float:
        return float(self.family.x_inner)

    @property
    def y_range(self) -> tuple[float, float]:
        if self.ambient_dim != 2:
            return 0.0, 0.0
        return self.family.y_range

    @property
    def reference_radius(self) -> float:
        """Default T: the inner radius, raised to the strip top when the strip is taller."""
        if self.ambient_dim == 2:
            return max(self.x_inner, self.y_range[1])
        return self.x_inner

    def sup_is_horizontal(self, t) -> bool:
        """True when |p|_inf >= t reduces to x >= t (or nothing is cut away)."""
        if self.ambient_dim == 1:
            return True
        t = np.asarray(t, dtype=float)
        return bool(np.all((t <= self.x_inner) | (t >= self.y_range[1])))

    def base(self):
        """Innermost family after unwrapping scale/translation (None for unions)."""
        fam = self.family
        while isinstance(fam, (ScaledCopy, TranslatedCopy)):
            fam = fam.inner.family
        return None if isinstance(fam, DisjointUnion) else fam

    def scale_factor(self) -> float:
        lam, fam = 1.0, self.family
        while isinstance(fam, (ScaledCopy, TranslatedCopy)):
            if isinstance(fam, ScaledCopy):
                lam *= fam.factor
            fam = fam.inner.family
        return lam

    def to_dict(self) -> dict:
        fam = {"tag": self.family.tag}
        fam.update(self.family.params())
        return {"ambient_dim": self.ambient_dim, "family": fam, "transforms": []}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def make_drum(tag: str, **params) -> DrumSpec:
    """Validated drum from a family tag and its parameters."""
    if tag in BASE_FAMILIES:
        cls = BASE_FAMILIES[tag]
        try:
            fam = cls(**{k: float(v) for k, v in params.items()})
        except (TypeError, ValueError) as exc:
            raise DrumError(f"bad parameters for {tag}: {exc}") from exc
        return DrumSpec(cls.ambient_dim, fam)
    if tag == "ScaledCopy":
        return scaled(params["inner"], params["factor"])
    if tag == "TranslatedCopy":
        return translated(params["inner"], params["offset"])
    if tag == "DisjointUnion":
        return disjoint_union(params["members"])
    raise DrumError(f"unknown drum family {tag!r}")


def interval_family(alpha: float, beta: float) -> DrumSpec:
    return make_drum("IntervalFamily", alpha=alpha, beta=beta)


def power_tail(alpha: float) -> DrumSpec:
    return make_drum("PowerTail", alpha=alpha)


def cantor(a: float, b: float) -> DrumSpec:
    return make_drum("CantorInfinity", a=a, b=b)


def scaled(drum: DrumSpec, factor: float) -> DrumSpec:
    fam = ScaledCopy(drum, float(factor))
    return DrumSpec(drum.ambient_dim, fam)


def translated(drum: DrumSpec, offset: Sequence[float]) -> DrumSpec:
    fam = TranslatedCopy(drum, tuple(float(x) for x in offset))
    return DrumSpec(drum.ambient_dim, fam)


def disjoint_union(members: Sequence[DrumSpec]) -> DrumSpec:
    members = tuple(members)
    if not members:
        raise DrumError("DisjointUnion needs at least one member")
    fam = DisjointUnion(members)
    return DrumSpec(members[0].ambient_dim, fam)


def drum_from_dict(doc: dict) -> DrumSpec:
    """Parse the JSON document {"ambient_dim", "family", "transforms"}."""
    if not isinstance(doc, dict) or "family" not in doc:
        raise DrumError("drum document must be an object with a 'family' entry")
    fam = doc["family"]
    if not isinstance(fam, dict) or "tag" not in fam:
        raise DrumError("family must be an object with a 'tag'")
    params = {k: v for k, v in fam.items() if k != "tag"}
    tag = fam["tag"]
    if tag in ("ScaledCopy", "TranslatedCopy"):
        params["inner"] = drum_from_dict(params.get("inner", {}))
    if tag == "DisjointUnion":
        params["members"] = [drum_from_dict(m) for m in params.get("members", [])]
    try:
        drum = make_drum(tag, **params)
    except KeyError as exc:
        raise DrumError(f"missing parameter {exc} for {tag}") from exc
    for tr in doc.get("transforms", []) or []:
        kind = tr.get("tag") if isinstance(tr, dict) else None
        if kind == "scale":
            drum = scaled(drum, tr["factor"])
        elif kind == "translate":
            drum = translated(drum, tr["offset"])
        else:
            raise DrumError(f"unknown transform {tr!r}")
    if "ambient_dim" in doc and int(doc["ambient_dim"]) != drum.ambient_dim:
        raise DrumError("ambient_dim does not match the family")
    return drum


def drum_from_json(text: str) -> DrumSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DrumError(f"malformed drum JSON: {exc}") from exc
    return drum_from_dict(doc)


# ---------------------------------------------------------------- tubes


@dataclass(frozen=True)
class TubeFunction:
    drum: DrumSpec
    norm: Norm = Norm.SUP
    method: TubeMethod = TubeMethod.EXACT_SERIES
    level_cutoff: int = 0
    tail_bound: float = 0.0

    def __call__(self, t):
        return tube_volume(self, t)

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        return _tube_with_error(self, np.atleast_1d(np.asarray(t, dtype=float)))


def _series_cutoff(drum: DrumSpec) -> tuple[int, float]:
    base = drum.base()
    if isinstance(base, CantorInfinity):
        b1 = base.b - 1.0
        q = 2.0 * base.a ** b1
        m = 0
        while True:
            tail = base.a ** b1 * q ** m / (b1 * (1.0 - q))
            if tail < SERIES_TOL:
                return m, tail * drum.scale_factor() ** drum.ambient_dim
            m += 1
    if isinstance(drum.family, DisjointUnion):
        parts = [_series_cutoff(m) for m in drum.family.members]
        return max(p[0] for p in parts), math.fsum(p[1] for p in parts)
    return 0, 0.0


def make_tube(drum: DrumSpec, norm: Norm | str = Norm.SUP,
              method: TubeMethod | str = TubeMethod.EXACT_SERIES) -> TubeFunction:
    norm = as_norm(norm)
    method = TubeMethod(method)
    cutoff, tail = _series_cutoff(drum)
    rounding = 4.0 * np.finfo(float).eps * drum.volume
    return TubeFunction(drum, norm, method, cutoff, tail + rounding)


def tube_envelope(drum: DrumSpec) -> float:
    """C with |_t Omega| <= C t**(N + D) for all t > 0 (sup norm)."""
    if drum.ambient_dim == 1:
        return drum.family.tube_envelope()
    return drum.family.cross_envelope() / (-(drum.dimension + 2.0))


def sliver_bound(drum: DrumSpec, t: float) -> float:
    """Upper bound on |Euclid tube - sup tube| at t (valid for t >= sqrt(2) * strip top)."""
    y = drum.y_range[1]
    d = drum.dimension
    return y * y * drum.family.cross_envelope() * 2.0 ** (-(d + 1.0) / 2.0) * t ** d


def circle_gap(y, t):
    """w with sqrt(w (2t - w)) = y: how far left of x = t the circle reaches height y."""
    return y * y / (t + np.sqrt(np.maximum(t * t - y * y, 0.0)))


def sliver_knots(c, e, o, st, t, samples: int = 64):
    """Breakpoints in u (x = t - u**2) of the region x < t <= |p|_2 for each piece.

    Returns (u_o, knots, active): below u_o the circle is under the piece's
    floor; between consecutive knots the circle is either under the graph
    (active) or above it. The circle can cut a graph twice; the crossings
    are bracketed on either side of the minimum of the vertical gap.
    """
    st = np.broadcast_to(np.asarray(st, dtype=float), np.shape(c))
    u_max = np.sqrt(t - st)
    u_o = np.sqrt(np.minimum(circle_gap(o, t), t - st))

    def gap(u):
        x = np.maximum(t - u * u, st)
        return o + c * x ** -e - u * np.sqrt(2.0 * t - u * u)

    frac = np.linspace(0.0, 1.0, samples)
    grid = u_o[:, None] + (u_max - u_o)[:, None] * frac
    k = np.argmin(gap(grid.T).T, axis=1)
    lo = grid[np.arange(c.size), np.maximum(k - 1, 0)]
    hi = grid[np.arange(c.size), np.minimum(k + 1, samples - 1)]
    inv = 0.5 * (math.sqrt(5.0) - 1.0)
    for _ in range(48):
        a, b = hi - inv * (hi - lo), lo + inv * (hi - lo)
        left = gap(a) < gap(b)
        lo, hi = np.where(left, lo, a), np.where(left, b, hi)
    u_min = 0.5 * (lo + hi)

    def crossing(a, b):
        # one sign change at most on [a, b]; returns b when there is none
        ga, gb = gap(a), gap(b)
        has = np.signbit(ga) != np.signbit(gb)
        for _ in range(54):
            m = 0.5 * (a + b)
            same = np.signbit(gap(m)) == np.signbit(ga)
            a, b = np.where(same, m, a), np.where(same, b, m)
        return np.where(has, 0.5 * (a + b), np.nan)

    r1 = crossing(u_o.copy(), u_min.copy())
    r2 = crossing(u_min.copy(), u_max.copy())
    r1 = np.where(np.isnan(r1), np.where(np.isnan(r2), u_max, u_o), r1)
    r2 = np.where(np.isnan(r2), u_max, r2)
    knots = np.column_stack([u_o, r1, r2, u_max])
    mids = 0.5 * (knots[:, :-1] + knots[:, 1:])
    active = gap(mids.T).T > 0
    return u_o, knots, active


def sliver_kinks(pieces: Pieces) -> np.ndarray:
    """Radii where the Euclidean sliver is not smooth.

    These are the distances of each piece's corners and the local minima of
    the distance from the origin to each graph, where the circle starts
    cutting the graph twice.
    """
    st, c, e, o = pieces.start, pieces.coef, pieces.expo, pieces.offset
    top = o + c * st ** -e
    out = [np.hypot(st, o), np.hypot(st, top)]

    def slope(x):
        # half the x-derivative of x^2 + (o + c x^-e)^2
        return x - (o + c * x ** -e) * e * c * x ** (-e - 1.0)

    inner = slope(st) < 0
    if np.any(inner):
        lo, hi = st.copy(), 2.0 * st
        for _ in range(64):
            grow = (slope(hi) < 0) & inner
            if not np.any(grow):
                break
            hi = np.where(grow, 2.0 * hi, hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            neg = slope(mid) < 0
            lo, hi = np.where(neg, mid, lo), np.where(neg, hi, mid)
        x = 0.5 * (lo + hi)
        out.append(np.hypot(x, o + c * x ** -e)[inner])
    return np.unique(np.concatenate(out))


def euclid_sliver(pieces: Pieces, t: float, order: int = 24) -> float:
    """Area of points with x < t <= |p|_2 inside the given graph pieces."""
    keep = pieces.start < t
    if not np.any(keep):
        return 0.0
    st, c, e, o = (pieces.start[keep], pieces.coef[keep], pieces.expo[keep], pieces.offset[keep])

    def h(x):
        return c[:, None] * x ** -e[:, None]

    def full(u):
        x = np.maximum(t - u * u, st[:, None])
        return 2.0 * u * h(x)

    def partial(u):
        x = np.maximum(t - u * u, st[:, None])
        ylow = u * np.sqrt(2.0 * t - u * u)
        return 2.0 * u * np.clip(o[:, None] + h(x) - ylow, 0.0, None)

    u_o, knots, active = sliver_knots(c, e, o, st, t)
    parts = [gauss_segment(full, np.zeros_like(u_o), u_o, order)]
    for k in range(active.shape[1]):
        seg = gauss_segment(partial, knots[:, k], knots[:, k + 1], order)
        parts.append(np.where(active[:, k], seg, 0.0))
    return float(math.fsum(np.concatenate(parts)))


def _euclid_correction(drum: DrumSpec, t: float) -> tuple[float, float]:
    if t <= drum.x_inner:
        return 0.0, 0.0
    if drum.family.piece_count(t) > MAX_PIECES:
        if t * t < 2.0 * drum.y_range[1] ** 2:
            raise UnsupportedError("Euclidean tube: too many pieces below the strip height")
        return 0.0, sliver_bound(drum, t)
    val = euclid_sliver(drum.family.pieces(t), t)
    return val, 1e-13 * val


def _sup_quadrature(drum: DrumSpec, t: float) -> tuple[float, float]:
    fam = drum.family
    d = drum.dimension
    x0 = max(t, drum.x_inner)
    c_h = fam.cross_envelope()
    target = 1e-15 * max(float(fam.tube_sup(np.array([x0]))[0]), 1e-300)
    # tail int_X^inf H <= c_h X^(D+2) / (-(D+2))
    x_end = (target * (-(d + 2.0)) / c_h) ** (1.0 / (d + 2.0))
    x_end = max(x_end, 2.0 * x0)
    v_end = math.log(x_end / x0)
    brk = [math.log(b / x0) for b in fam.breaks(x0, x_end)]
    edges = panel_edges(0.0, v_end, 0.5, brk)

    def integrand(v):
        x = x0 * np.exp(v)
        return fam.cross_section(x) * x

    val, err = integrate_panels(integrand, edges)
    tail = c_h * x_end ** (d + 2.0) / (-(d + 2.0))
    return float(np.real(val)), err + tail


def _tube_with_error(tube: TubeFunction, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    drum = tube.drum
    if np.any(t <= 0):
        raise DrumError("tube volume needs t > 0")
    fam = drum.family
    if drum.ambient_dim == 1:
        if tube.method is TubeMethod.EXACT_SERIES:
            v = np.asarray(fam.tube(t), dtype=float)
            return v, np.full_like(v, tube.tail_bound) + 1e-15 * v
        pairs = [fam.tube_quadrature(x) for x in t]
        return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])
    if not drum.sup_is_horizontal(t):
        raise UnsupportedError("sup-norm tube below the strip height of this drum")
    if tube.method is TubeMethod.EXACT_SERIES:
        vals = np.asarray(fam.tube_sup(t), dtype=float)
        errs = np.full_like(vals, tube.tail_bound) + 1e-14 * vals
    else:
        pairs = [_sup_quadrature(drum, x) for x in t]
        vals = np.array([p[0] for p in pairs])
        errs = np.array([p[1] for p in pairs])
        vals = np.where(t <= drum.x_inner, drum.volume, vals)
    if tube.norm is Norm.EUCLID:
        corr = [_euclid_correction(drum, x) for x in t]
        vals = vals + np.array([c[0] for c in corr])
        errs = errs + np.array([c[1] for c in corr])
    return vals, errs


def tube_volume(tube: TubeFunction, t):
    """|B_t(0)^c ∩ Omega| (or the sup-norm ball) at scalar or array t."""
    arr = np.asarray(t, dtype=float)
    vals, _ = _tube_with_error(tube, np.atleast_1d(arr))
    return float(vals[0]) if arr.ndim == 0 else vals


def norm_difference(drum: DrumSpec, t) -> np.ndarray:
    """|tube_Euclid(t) - tube_sup(t)| computed directly from the slivers."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.array([_euclid_correction(drum, x)[0] for x in t])


def scale_tube_identity(drum: DrumSpec, lam: float, t: float,
                        norm: Norm | str = Norm.SUP) -> tuple[float, float]:
    """(|B_t^c ∩ lam Omega|, lam**N |B_(t/lam)^c ∩ Omega|).

    The left side integrates the scaled drum's own cross-section numerically,
    the right side uses the exact series of the unscaled drum.
    """
    if lam <= 0 or t <= 0:
        raise DrumError("scaling identity needs lam > 0 and t > 0")
    big = scaled(drum, lam)
    lhs = tube_volume(make_tube(big, norm, TubeMethod.QUADRATURE), t)
    rhs = lam ** drum.ambient_dim * tube_volume(make_tube(drum, norm), t / lam)
    return lhs, rhs


def inverted_near_ball_volume(drum: DrumSpec, eps: float, norm: Norm | str = Norm.EUCLID) -> float:
    """|B_eps(0) ∩ Phi(Omega)| for the inversion Phi(x) = x/|x|^2.

    By the change of variables this is the integral of |x|**(-2N) over the
    part of Omega outside B_(1/eps), i.e. the distance zeta at s = N.
    """
    if eps <= 0:
        raise DrumError("eps must be positive")
    radius = 1.0 / eps
    if radius < drum.x_inner:
        raise InversionRangeError(
            f"1/eps = {radius:g} lies below the inner radius {drum.x_inner:g}")
    from .zeta import best_handle

    handle = best_handle(drum, radius, as_norm(norm))
    value, _ = handle.evaluate(complex(drum.ambient_dim, 0.0))
    return float(value.real)
