"""Identity suite for a single drum and the numbered acceptance checks.

Both the `verify` subcommand and tests/test_acceptance.py run these.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import complex_dims as cd
from .constructions import build_algebraic_qp, build_hyperfractal, nondegeneracy
from .drums import (CantorInfinity, DrumSpec, PowerTail, cantor, interval_family,
                    make_tube, norm_difference, power_tail)
from .errors import FzetaError
from .minkowski import (_unwrap, content_bounds, content_window, estimate_dimension,
                        exact_dimension, is_measurable)
from .zeta import (ZetaHandle, ZetaKind, ZetaMethod, closed_form_available,
                   functional_equation_sides, inversion_identity_residual, scaling_identity_sides)

SEED = 20240917
DRAWS = 20


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    seconds: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return (f"[{flag}] {self.name}: measured {self.measured:.3e} "
                f"(tolerance {self.tolerance:.1e}, {self.seconds:.2f} s){extra}")


def timed(name: str, fn: Callable[[], tuple[float, float, bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        measured, tol, ok, detail = fn()
    except FzetaError as exc:
        measured, tol, ok, detail = math.nan, math.nan, False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, float(measured), float(tol), bool(ok), time.perf_counter() - t0, detail)


def s_grid(drum: DrumSpec, offsets=(0.5, 1.375, 2.25, 3.125, 4.0), ims=(-10.0, -5.0, 0.0, 5.0, 10.0)):
    d = drum.dimension
    return [complex(d + o, y) for o in offsets for y in ims]


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- per-drum checks


def closed_vs_quadrature(drum: DrumSpec, grid=None) -> tuple[float, float, bool, str]:
    grid = grid or s_grid(drum)
    # distance quadrature covers planar drums; on the line compare the tube zetas
    kind = ZetaKind.DISTANCE if drum.ambient_dim == 2 else ZetaKind.TUBE
    closed = ZetaHandle(drum, kind)
    quad = closed.with_(method=ZetaMethod.QUADRATURE)
    worst = max(_rel(quad(s), closed(s)) for s in grid)
    return worst, 1e-6, worst <= 1e-6, f"{len(grid)} points"


def functional_equation(drum: DrumSpec, grid=None) -> tuple[float, float, bool, str]:
    grid = grid or s_grid(drum)
    worst = 0.0
    for s in grid:
        lhs, rhs = functional_equation_sides(drum, s)
        worst = max(worst, _rel(rhs, lhs))
    return worst, 1e-6, worst <= 1e-6, f"{len(grid)} points"


def _draws(drum: DrumSpec, rng: np.random.Generator, n: int = DRAWS):
    d, ref = drum.dimension, drum.reference_radius
    lam = rng.uniform(0.5, 4.0, n)
    s = d + rng.uniform(0.5, 3.0, n) + 1j * rng.uniform(-10.0, 10.0, n)
    T = ref * rng.uniform(1.0, 4.0, n)
    return list(zip(lam, s, T))


def scaling_draws(drum: DrumSpec, seed: int = SEED) -> tuple[float, float, bool, str]:
    rng = np.random.default_rng(seed)
    method = ZetaMethod.QUADRATURE if drum.ambient_dim == 2 else ZetaMethod.CLOSED_FORM
    worst = 0.0
    for lam, s, T in _draws(drum, rng):
        lhs, rhs = scaling_identity_sides(drum, float(lam), complex(s), float(T), method)
        worst = max(worst, _rel(lhs, rhs))
    return worst, 1e-6, worst <= 1e-6, f"{DRAWS} draws"


def inversion_draws(drum: DrumSpec, seed: int = SEED) -> tuple[float, float, bool, str]:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _, s, T in _draws(drum, rng):
        T = max(float(T), drum.x_inner)
        ref = abs(ZetaHandle(drum, T=T)(complex(s)))
        worst = max(worst, inversion_identity_residual(drum, complex(s), T) / ref)
    return worst, 1e-6, worst <= 1e-6, f"{DRAWS} draws"


def residue_content(drum: DrumSpec) -> tuple[float, float, bool, str]:
    r = cd.residue_content_check(drum)
    gap = abs(r.tube_residue - r.lower_content) if r.measurable else \
        min(r.tube_residue - r.lower_content, r.upper_content - r.tube_residue)
    measured = gap if r.measurable else r.relation_residual
    detail = (f"res={r.tube_residue:.12g} in [{r.lower_content:.12g}, {r.upper_content:.12g}]"
              f" relation={r.relation_residual:.1e}")
    return measured, 1e-8 if r.measurable else 1e-9, r.passed, detail


def fourier_link(drum: DrumSpec) -> tuple[float, float, bool, str]:
    r = cd.fourier_residue_link(drum, range(-8, 9))
    env = cd.fourier_residue_link(drum, range(-16, 17))
    ok = r.passed and env.envelope_decreasing
    return r.max_deviation, 1e-8, ok, f"mean G={r.mean_profile:.12g}"


def upper_bound(drum: DrumSpec) -> tuple[float, float, bool, str]:
    r = cd.content_upper_bound_check(drum)
    return r.bound - r.upper_content, 0.0, r.passed, f"upper={r.upper_content:.6g} bound={r.bound:.6g}"


def inverted_content(drum: DrumSpec) -> tuple[float, float, bool, str]:
    r = cd.inverted_content_relation(drum)
    return r.relative_error, 0.1, r.passed, \
        f"estimate={r.estimate:.6g} predicted={r.predicted:.6g} slope={r.slope:.4f}"


def norm_slope(drum: DrumSpec, t_range=(1e2, 1e5), points: int = 31) -> tuple[float, float, bool, str]:
    t = np.geomspace(*t_range, points)
    diff = norm_difference(drum, t)
    fit = stats.linregress(np.log(t), np.log(diff))
    return fit.slope, -0.9, fit.slope <= -0.9, f"{points} points"


def identity_suite(drum: DrumSpec, seed: int = SEED) -> list[CheckResult]:
    """Every identity that applies to this drum, with measured residuals."""
    fam, _ = _unwrap(drum)
    closed = closed_form_available(drum)
    out = []
    if closed:
        out.append(timed("closed form vs quadrature", lambda: closed_vs_quadrature(drum)))
    out.append(timed("functional equation", lambda: functional_equation(drum)))
    if closed and isinstance(fam, (PowerTail, CantorInfinity)) or drum.ambient_dim == 1:
        out.append(timed("scaling identity", lambda: scaling_draws(drum, seed)))
    if drum.ambient_dim == 2:
        out.append(timed("inversion identity", lambda: inversion_draws(drum, seed)))
        out.append(timed("norm difference slope", lambda: norm_slope(drum)))
    if closed:
        out.append(timed("residue and content", lambda: residue_content(drum)))
    if isinstance(fam, CantorInfinity):
        out.append(timed("fourier residue link", lambda: fourier_link(drum)))
        out.append(timed("upper content bound", lambda: upper_bound(drum)))
    if is_measurable(drum):
        out.append(timed("inverted content", lambda: inverted_content(drum)))
    return out


# ---------------------------------------------------------------- acceptance checks


def criterion_closed_form() -> tuple[float, float, bool, str]:
    worst = 0.0
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        worst = max(worst, closed_vs_quadrature(drum)[0])
    return worst, 1e-6, worst <= 1e-6, "PowerTail(2), CantorInfinity(1/4,2); 25 points each"


def criterion_functional_equation() -> tuple[float, float, bool, str]:
    worst = 0.0
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        worst = max(worst, functional_equation(drum)[0])
    # closed-form identity for PowerTail(2), T=1: 1 - (s+2)/(s+3) = 1/(s+3)
    alg = max(abs(1.0 - (s + 2.0) / (s + 3.0) - 1.0 / (s + 3.0))
              for s in s_grid(power_tail(2.0)))
    ok = worst <= 1e-6 and alg <= 1e-10
    return worst, 1e-6, ok, f"algebraic residual {alg:.1e}"


def criterion_dimension() -> tuple[float, float, bool, str]:
    cases = [(interval_family(1.0, 2.0), -2.0, (1.0, 1e6)),
             (power_tail(2.0), -3.0, (1.0, 1e6)),
             (cantor(0.25, 2.0), -2.5, (4.0, 4.0 ** 12))]
    worst, parts, slow = 0.0, [], 0.0
    for drum, d, rng in cases:
        t0 = time.perf_counter()
        d_hat, _ = estimate_dimension(make_tube(drum), *rng)
        slow = max(slow, time.perf_counter() - t0)
        worst = max(worst, abs(d_hat - d))
        parts.append(f"{drum.tag}={d_hat:.4f}")
    ok = worst <= 0.05 and slow <= 5.0
    return worst, 0.05, ok, ", ".join(parts) + f"; each under 5 s: {slow <= 5.0}"


def criterion_content() -> tuple[float, float, bool, str]:
    pt = cd.residue_content_check(power_tail(2.0))
    ct_drum = cantor(0.25, 2.0)
    ct = cd.residue_content_check(ct_drum)
    margin = min(ct.tube_residue - math.sqrt(2.0), 1.5 - ct.tube_residue)
    lo, hi = content_bounds(make_tube(ct_drum), -2.5, content_window(ct_drum))
    sample_err = max(abs(lo - math.sqrt(2.0)), abs(hi - 1.5))
    pt_err = abs(pt.tube_residue - 1.0)
    ok = pt_err <= 1e-6 and margin >= 1e-2 and sample_err <= 1e-3 \
        and abs(ct.tube_residue - 2.0 / math.log(4.0)) <= 1e-8
    return pt_err, 1e-6, ok, (f"cantor res={ct.tube_residue:.9f} margin={margin:.4f}"
                              f" sampled=({lo:.7f}, {hi:.7f})")


def criterion_fourier() -> tuple[float, float, bool, str]:
    drum = cantor(0.25, 2.0)
    r = cd.fourier_residue_link(drum, range(-8, 9))
    env = cd.fourier_residue_link(drum, range(-16, 17))
    k0 = abs(r.residues[r.ks.index(0)] - 2.0 / math.log(4.0))
    ok = r.max_deviation <= 1e-8 and k0 <= 1e-8 and env.envelope_decreasing
    return r.max_deviation, 1e-8, ok, f"k=0 error {k0:.1e}; envelope decreasing {env.envelope_decreasing}"


def criterion_pole_lattice() -> tuple[float, float, bool, str]:
    drum = cantor(0.25, 2.0)
    window = cd.Window(-3.5, -2.0, -10.0, 10.0)
    t0 = time.perf_counter()
    found = cd.locate_poles(ZetaHandle(drum), window)
    secs = time.perf_counter() - t0
    expected = cd.pole_lattice(drum, window)
    loc = cd.match_poles(found, expected)
    res = 0.0
    if math.isfinite(loc):
        for e in expected:
            f = min(found, key=lambda p: abs(p.location - e.location))
            res = max(res, abs(f.residue - e.residue))
    simple = all(p.order == 1 for p in found)
    ok = len(found) == 6 and loc <= 1e-8 and res <= 1e-8 and simple and secs <= 30.0
    return loc, 1e-8, ok, f"{len(found)} poles, residue error {res:.1e}, under 30 s: {secs <= 30.0}"


def criterion_scaling_inversion() -> tuple[float, float, bool, str]:
    worst = 0.0
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        worst = max(worst, scaling_draws(drum)[0], inversion_draws(drum)[0])
    return worst, 1e-6, worst <= 1e-6, f"{DRAWS} draws per family and identity"


def criterion_inverted_content() -> tuple[float, float, bool, str]:
    r = cd.inverted_content_relation(power_tail(2.0))
    return r.relative_error, 0.1, r.passed, f"estimate={r.estimate:.6g} slope={r.slope:.4f}"


def criterion_upper_bound() -> tuple[float, float, bool, str]:
    reports = [cd.content_upper_bound_check(cantor(a, b)) for a, b in ((0.25, 2.0), (1 / 3, 2.5))]
    slack = min(r.bound - r.upper_content for r in reports)
    detail = "; ".join(f"{r.upper_content:.4f} <= {r.bound:.4f}" for r in reports)
    return slack, 0.0, all(r.passed for r in reports), detail


def criterion_constructions() -> tuple[float, float, bool, str]:
    worst, notes, ok = 0.0, [], True
    for n in (2, 3):
        drum, rep = build_algebraic_qp(n, -2.5, 0.25)
        dims = [exact_dimension(m)[0] for m in drum.family.members]
        dim_err = max(abs(d + 2.5) for d in dims)
        target = [1.0] + [math.sqrt(p) for p in (2, 3)][: n - 1]
        ratio_err = max(abs(a - b) for a, b in zip(rep.period_ratios, target))
        nd = nondegeneracy(drum)
        worst = max(worst, ratio_err)
        ok &= dim_err <= 1e-12 and ratio_err <= 1e-12 and nd.passed and rep.independence.passed
        notes.append(f"n={n}: tube/t^(2+D) in [{nd.observed_min:.4f}, {nd.observed_max:.4f}]"
                     f" within [{nd.lower_bound:.4f}, {nd.upper_bound:.4f}]")
    gaps = [build_hyperfractal(-2.5, k)[1].min_gap for k in range(1, 5)]
    mono = all(b <= a for a, b in zip(gaps, gaps[1:]))
    ok &= mono
    notes.append("gaps " + ", ".join(f"{g:.4f}" for g in gaps))
    return worst, 1e-12, ok, "; ".join(notes)


def criterion_norm_slope() -> tuple[float, float, bool, str]:
    drums = [power_tail(2.0), cantor(0.25, 2.0), build_algebraic_qp(2, -2.5)[0]]
    slopes = [norm_slope(d)[0] for d in drums]
    worst = max(slopes)
    return worst, -0.9, worst <= -0.9, "slopes " + ", ".join(f"{s:.3f}" for s in slopes)


ACCEPTANCE = [
    ("1 closed-form agreement", criterion_closed_form),
    ("2 functional equation", criterion_functional_equation),
    ("3 dimension recovery", criterion_dimension),
    ("4 content identities", criterion_content),
    ("5 fourier-residue law", criterion_fourier),
    ("6 pole lattice", criterion_pole_lattice),
    ("7 scaling and inversion", criterion_scaling_inversion),
    ("8 inverted content", criterion_inverted_content),
    ("9 upper content bound", criterion_upper_bound),
    ("10 constructions", criterion_constructions),
    ("11 norm difference decay", criterion_norm_slope),
]


def run_acceptance() -> list[CheckResult]:
    return [timed(name, fn) for name, fn in ACCEPTANCE]


PRESETS: dict[str, Callable[[], DrumSpec]] = {
    "cantor-1/4-2": lambda: cantor(0.25, 2.0),
    "cantor-1/3-2.5": lambda: cantor(1 / 3, 2.5),
    "powertail-2": lambda: power_tail(2.0),
    "interval-1-2": lambda: interval_family(1.0, 2.0),
}
