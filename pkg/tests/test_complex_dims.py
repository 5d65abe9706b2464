import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fzeta.complex_dims import (BoundaryPoleWarning, ComplexDimension, Provenance, Window,
                                content_upper_bound_check, fourier_residue_link,
                                inverted_content_relation, locate_poles, match_poles, pole_gap,
                                pole_lattice, residue_content_check, residue_contour,
                                residue_from_right)
from fzeta.drums import cantor, interval_family, power_tail, scaled
from fzeta.errors import ConfigError, ExtrapolationError
from fzeta.zeta import ZetaHandle, ZetaKind, ZetaMethod

LN4 = math.log(4.0)
P = 2 * math.pi / LN4


def cantor_quarter_zeta(s):
    # Cantor(1/4, 2) at T = 4 summed by hand: a^w / (w (1 - 2 a^w)), w = s + 3
    w = np.asarray(s, dtype=complex) + 3.0
    q = 0.25 ** w
    return q / (w * (1.0 - 2.0 * q))


def expected_residue(k):
    return 1.0 / (2.0 * LN4 * (0.5 + 1j * P * k))


WINDOW = Window(-3.5 + 0.0123, -2.0 + 0.0123, -10.0, 10.0)


def test_hand_sum_agrees_with_handle():
    h = ZetaHandle(cantor(0.25, 2.0), T=4.0)
    for s in (-1.5, complex(-2.0, 3.0), complex(-2.7, -8.0)):
        assert h(s) == pytest.approx(complex(cantor_quarter_zeta(s)), rel=1e-13)


def test_pole_lattice_cantor():
    lat = pole_lattice(cantor(0.25, 2.0), WINDOW)
    assert len(lat) == 6
    assert lat[0].location == -3.0 and lat[0].residue == pytest.approx(-1.0)
    principal = sorted(lat[1:], key=lambda c: c.location.imag)
    for k, c in zip(range(-2, 3), principal):
        assert c.location == pytest.approx(complex(-2.5, P * k), abs=1e-14)
        assert c.residue == pytest.approx(expected_residue(k), rel=1e-13)
        assert c.provenance is Provenance.LATTICE


def test_located_poles_match_lattice():
    drum = cantor(0.25, 2.0)
    found = locate_poles(ZetaHandle(drum, T=4.0), WINDOW)
    lat = pole_lattice(drum, WINDOW)
    assert match_poles(found, lat) < 1e-8
    for f in found:
        want = min(lat, key=lambda c: abs(c.location - f.location))
        assert abs(f.residue - want.residue) < 1e-8
        assert f.order == 1


def test_located_poles_of_hand_sum():
    found = locate_poles(cantor_quarter_zeta, WINDOW)
    assert len(found) == 6
    by_im = {round(f.location.imag / P): f for f in found if abs(f.location.real + 2.5) < 1e-8}
    for k in range(-2, 3):
        assert by_im[k].residue == pytest.approx(expected_residue(k), abs=1e-9)


def test_conjugate_pairs_and_real_sum():
    found = locate_poles(ZetaHandle(cantor(1 / 3, 2.5), T=3.0),
                         Window(-3.0 + 0.0123, -1.5 + 0.0123, -12.0, 12.0))
    locs = [f.location for f in found]
    for z in locs:
        assert min(abs(z.conjugate() - w) for w in locs) < 1e-8
    total = sum(f.residue for f in found)
    assert abs(total.imag) < 1e-9


def test_empty_window():
    assert locate_poles(ZetaHandle(cantor(0.25, 2.0), T=4.0), Window(-2.2, -1.0, -3.0, 3.0)) == []


def test_boundary_pole_nudged():
    with pytest.warns(BoundaryPoleWarning):
        found = locate_poles(ZetaHandle(power_tail(2.0), T=1.0), Window(-3.0, -2.0, -1.0, 1.0))
    assert len(found) == 1 and found[0].location == pytest.approx(-3.0, abs=1e-8)


def test_lattice_refuses_boundary_pole():
    with pytest.raises(ConfigError):
        pole_lattice(cantor(0.25, 2.0), Window(-2.5, -2.0, -1.0, 1.0))


def test_regular_point_residue_vanishes():
    h = ZetaHandle(cantor(0.25, 2.0), T=4.0)
    assert abs(residue_contour(h, complex(-1.0, 1.0), 0.3)) < 1e-10


def test_half_gap_contours():
    h = ZetaHandle(cantor(0.25, 2.0), T=4.0)
    r = 0.5 * pole_gap(cantor(0.25, 2.0), complex(-2.5))
    assert r == pytest.approx(0.25)
    assert residue_contour(h, -2.5, r) == pytest.approx(1 / LN4, rel=1e-10)
    assert residue_contour(h, -3.0, r) == pytest.approx(-1.0, rel=1e-10)
    # a unit circle around -2.5 also encloses -3
    assert residue_contour(h, -2.5, 1.0) == pytest.approx(1 / LN4 - 1.0, rel=1e-10)


@pytest.mark.parametrize("drum, T", [(power_tail(2.0), 1.0), (cantor(0.25, 2.0), 4.0),
                                     (interval_family(1.0, 2.0), 1.0)])
def test_contour_agrees_with_right_limit(drum, T):
    h = ZetaHandle(drum, ZetaKind.TUBE, T=T)
    d = drum.dimension
    radius = 0.5 * pole_gap(drum, complex(d))
    c = residue_contour(h, d, radius)
    assert abs(residue_from_right(h, d, delta=min(0.5, radius)) - c.real) < 1e-6


def test_right_limit_with_quadrature():
    h = ZetaHandle(power_tail(2.0), T=1.0, method=ZetaMethod.QUADRATURE)
    assert residue_from_right(h, -3.0) == pytest.approx(1.0, abs=1e-6)


def test_right_limit_failure_is_reported():
    h = ZetaHandle(cantor(0.25, 2.0), ZetaKind.TUBE, T=4.0, method=ZetaMethod.QUADRATURE)
    with pytest.raises((ExtrapolationError, ConfigError)):
        residue_from_right(h, -2.5, delta=0.25)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0), st.integers(-2, 2))
def test_scaled_residues(lam, k):
    drum = cantor(0.25, 2.0)
    w = complex(-2.5, P * k)
    big = ZetaHandle(scaled(drum, lam), T=4.0 * lam)
    res = residue_contour(big, w, 0.25)
    assert res == pytest.approx(lam ** -w * expected_residue(k), rel=1e-8)


@pytest.mark.parametrize("drum", [cantor(0.25, 2.0), cantor(1 / 3, 2.5), power_tail(2.0),
                                  interval_family(1.0, 2.0), scaled(cantor(0.25, 2.0), 3.0)])
def test_residue_content(drum):
    rep = residue_content_check(drum)
    assert rep.passed


def test_cantor_tube_residue_value():
    rep = residue_content_check(cantor(0.25, 2.0))
    assert rep.tube_residue == pytest.approx(1 / math.log(2.0), rel=1e-10)
    assert rep.lower_content < rep.tube_residue < rep.upper_content


def test_fourier_link_and_upper_bound():
    drum = cantor(0.25, 2.0)
    assert fourier_residue_link(drum).passed
    ub = content_upper_bound_check(drum)
    assert ub.passed and ub.upper_content == pytest.approx(1.5)
    with pytest.raises(ConfigError):
        fourier_residue_link(drum, k_range=range(0, 3))


def test_inverted_content_powertail():
    rep = inverted_content_relation(power_tail(2.0))
    assert rep.passed
    assert rep.predicted == pytest.approx(0.2)


def test_value_types():
    with pytest.raises(ConfigError):
        Window(0.0, 0.0, -1.0, 1.0)
    with pytest.raises(ConfigError):
        ComplexDimension(0j, 0, 0j, Provenance.LATTICE)
    d = ComplexDimension(complex(-2.5, 1.0), 1, complex(0.1, 0.2), Provenance.CONTOUR).to_dict()
    assert d == {"re": -2.5, "im": 1.0, "order": 1, "res_re": 0.1, "res_im": 0.2,
                 "provenance": Provenance.CONTOUR.value}
