import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fzeta.drums import Norm, cantor, interval_family, make_tube, power_tail, scaled, tube_volume
from fzeta.errors import AbscissaError, ConfigError, UnsupportedError
from fzeta.zeta import (ZetaHandle, ZetaKind, ZetaMethod, abscissa_probe, best_handle,
                        functional_equation_sides, inversion_identity_residual,
                        norm_change_difference, scaling_identity_sides, tube_zeta_closed_form,
                        zeta_closed_form)

# oracles for Cantor(1/4, 2), sup norm: mpmath nsum over the level sums
CANTOR_ORACLES = [
    (-1.5, 4.0, 1.0 / 9.0),
    (complex(-2.0, 3.0), 4.0, complex(0.0214902692032496870, 0.0552988317583826804)),
    (-2.0, 4.0, 0.5),
    (-1.5, 16.0, 0.0381944444444444444),
]
# oracles for IntervalFamily(1, 2) at T = 1: Levin acceleration and a binomial / Riemann zeta series
INTERVAL_ORACLES = [(0.5, 0.704313278534973331576), (-1.5, 2.84477118157733685478)]
# oracle: scipy dblquad of |p|_2^-2 over {x > 1, 0 < y < x^-2}
POWERTAIL_EUCLID_AT_0 = 0.3053218647257397


@pytest.mark.parametrize("s, T, expected", CANTOR_ORACLES)
def test_cantor_closed_form(s, T, expected):
    assert zeta_closed_form(cantor(0.25, 2.0), s, T) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("s, expected", INTERVAL_ORACLES)
def test_interval_closed_form(s, expected):
    assert zeta_closed_form(interval_family(1.0, 2.0), s, 1.0) == pytest.approx(expected, rel=1e-13)


def test_powertail_closed_form_is_rational():
    for s in (0.0, -2.5, complex(1.0, 4.0)):
        assert zeta_closed_form(power_tail(2.0), s, 1.0) == pytest.approx(1 / (s + 3), rel=1e-14)


def test_powertail_euclid_quadrature():
    h = best_handle(power_tail(2.0), 1.0, Norm.EUCLID)
    assert h.method is ZetaMethod.QUADRATURE
    assert h(0.0) == pytest.approx(POWERTAIL_EUCLID_AT_0, rel=1e-10)


@pytest.mark.parametrize("s", [complex(-1.9, 0.0), complex(-1.0, 7.0), complex(0.5, -3.0)])
def test_quadrature_matches_closed_form(s):
    drum = cantor(0.25, 2.0)
    quad = ZetaHandle(drum, T=4.0, method=ZetaMethod.QUADRATURE)
    assert quad(s) == pytest.approx(zeta_closed_form(drum, s, 4.0), rel=1e-9, abs=1e-12)


def test_quadrature_margin():
    drum = cantor(0.25, 2.0)
    quad = ZetaHandle(drum, T=4.0, method=ZetaMethod.QUADRATURE)
    with pytest.raises(AbscissaError):
        quad(drum.dimension + 0.04)
    with pytest.raises(ConfigError):
        ZetaHandle(drum, margin=0.01)


def test_closed_form_unsupported_for_euclid():
    with pytest.raises(UnsupportedError):
        zeta_closed_form(cantor(0.25, 2.0), 0.0, 4.0, Norm.EUCLID)


def test_meromorphic_continuation_left_of_abscissa():
    # closed forms extend past D = -2.5 and the lattice pole at -3 shows up
    drum = cantor(0.25, 2.0)
    near = zeta_closed_form(drum, -3.0 + 1e-7, 4.0)
    assert abs(near) > 1e6


def test_functional_equation_powertail():
    lhs, rhs = functional_equation_sides(power_tail(2.0), complex(-1.0, 2.0), 1.0)
    assert abs(lhs - rhs) < 1e-10


def test_tube_zeta_closed_form_powertail():
    # tube zeta: int_1^inf t^(s-N+1) t^-1 dt/t ... equals (1 - zeta)/(s+2) = 1/(s+3)
    s = complex(-0.5, 1.0)
    assert tube_zeta_closed_form(power_tail(2.0), s, 1.0) == pytest.approx(1 / (s + 3), rel=1e-13)


def test_scaling_and_inversion_cantor():
    drum = cantor(0.25, 2.0)
    lhs, rhs = scaling_identity_sides(drum, 2.5, complex(-1.5, 3.0), 4.0)
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))
    assert inversion_identity_residual(drum, complex(-1.5, 3.0), 4.0) < 1e-9


def test_norm_change_difference_powertail():
    s = 0.0
    diff = norm_change_difference(power_tail(2.0), s, 1.0)
    assert diff == pytest.approx(POWERTAIL_EUCLID_AT_0 - 1.0 / 3.0, rel=1e-9)


def test_abscissa_probe_diverges_left():
    h = best_handle(cantor(0.25, 2.0), 4.0)
    left = abscissa_probe(h, -2.6)
    right = abscissa_probe(h, -2.4)
    assert left.diverges and not right.diverges
    assert right.approach_values[-1] > right.approach_values[0]


re_part = st.floats(-2.4, 3.0)
im_part = st.floats(-30.0, 30.0)


@given(re_part, im_part)
def test_conjugate_symmetry(x, y):
    drum = cantor(0.25, 2.0)
    s = complex(x, y)
    a = zeta_closed_form(drum, s, 4.0)
    b = zeta_closed_form(drum, s.conjugate(), 4.0)
    assert abs(a - b.conjugate()) <= 1e-13 * max(1.0, abs(a))


@given(st.floats(1.0, 1e4))
def test_value_at_minus_n_is_tube_volume(T):
    for drum in (cantor(0.25, 2.0), power_tail(2.0)):
        T0 = max(T, drum.reference_radius)
        v = zeta_closed_form(drum, -2.0, T0)
        assert v.real == pytest.approx(tube_volume(make_tube(drum), T0), rel=1e-12)


@given(st.floats(0.2, 8.0), re_part, im_part)
def test_scaled_closed_form(lam, x, y):
    drum = cantor(0.25, 2.0)
    s = complex(x, y)
    lhs = zeta_closed_form(scaled(drum, lam), s, 4.0 * lam)
    rhs = lam ** -s * zeta_closed_form(drum, s, 4.0)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(re_part, im_part)
def test_vectorized_matches_scalar(x, y):
    h = ZetaHandle(cantor(0.25, 2.0), ZetaKind.TUBE, T=4.0)
    s = np.array([complex(x, y), complex(x + 0.3, -y)])
    got = h.vectorized()(s)
    want = [h(v) for v in s]
    assert np.allclose(got, want, rtol=1e-12, atol=1e-15)


def test_modulus_decays_along_vertical_line():
    drum = power_tail(2.0)
    vals = [abs(zeta_closed_form(drum, complex(0.0, y), 1.0)) for y in (1, 10, 100)]
    assert vals == sorted(vals, reverse=True)
    assert cmath.isclose(zeta_closed_form(drum, 0.0, 1.0), 1 / 3)
