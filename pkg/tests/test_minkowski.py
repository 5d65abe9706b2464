import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fzeta.drums import cantor, interval_family, make_tube, power_tail, scaled
from fzeta.errors import ConfigError, UnsupportedError
from fzeta.minkowski import (closed_form_argmin_fraction, content_bounds, content_window,
                             estimate_dimension, exact_dimension, is_measurable, minkowski_report,
                             periodic_profile)


def cantor_tube_direct(a, b, t, levels=400):
    # level m holds 2^(m-1) copies of {x > a^-m, 0 < y < x^-b}
    total = 0.0
    for m in range(1, levels):
        x0 = max(t, a ** -m)
        total += 2 ** (m - 1) * x0 ** (1 - b) / (b - 1)
    return total


def test_cantor_profile_extremes():
    # G(u) = 2^-u + 2^u / 2 on the fractional variable: min sqrt(2) at u = 1/2, max 3/2 at u = 0
    prof = periodic_profile(cantor(0.25, 2.0))
    assert prof.min_value == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert prof.max_value == pytest.approx(1.5, rel=1e-14)
    assert prof.period == pytest.approx(math.log(4.0))
    assert closed_form_argmin_fraction(0.25, 2.0) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("a, b", [(0.25, 2.0), (1 / 3, 2.5), (0.2, 3.0)])
def test_profile_matches_direct_tube(a, b):
    drum = cantor(a, b)
    prof = periodic_profile(drum)
    d = drum.dimension
    tau = np.log(a ** -30) + np.linspace(0.0, prof.period, 9)
    for x in tau:
        t = math.exp(x)
        ratio = cantor_tube_direct(a, b, t) / t ** (2 + d)
        assert prof(x) == pytest.approx(ratio, rel=1e-7)


@given(st.floats(-50.0, 50.0), st.integers(-5, 5))
def test_profile_is_periodic(tau, k):
    prof = periodic_profile(cantor(1 / 3, 2.5))
    assert prof(tau + k * prof.period) == pytest.approx(prof(tau), rel=1e-9)


@given(st.floats(0.1, 20.0))
def test_dimension_and_content_under_scaling(lam):
    for base in (power_tail(2.0), cantor(0.25, 2.0)):
        d0, c0 = exact_dimension(base)
        d1, c1 = exact_dimension(scaled(base, lam))
        assert d1 == d0
        assert np.allclose(c1, np.asarray(c0) * lam ** -d0, rtol=1e-10)


def test_measurable_contents():
    assert exact_dimension(power_tail(3.0)) == (-4.0, 0.5)
    d, c = exact_dimension(interval_family(1.0, 2.0))
    assert (d, c) == (-2.0, 1.0)
    assert is_measurable(power_tail(2.0)) and not is_measurable(cantor(0.25, 2.0))


def test_estimated_dimensions():
    for drum, tol in ((power_tail(2.0), 1e-10), (cantor(0.25, 2.0), 0.05),
                      (interval_family(1.0, 2.0), 0.05)):
        d_hat, _ = estimate_dimension(make_tube(drum), 10.0, 1e7)
        assert abs(d_hat - drum.dimension) < tol


def test_estimate_requires_wide_window():
    with pytest.raises(ConfigError):
        estimate_dimension(make_tube(power_tail(2.0)), 10.0, 100.0)


def test_content_bounds_in_late_window():
    drum = cantor(0.25, 2.0)
    lo, hi = content_bounds(make_tube(drum), drum.dimension, content_window(drum))
    assert lo == pytest.approx(math.sqrt(2.0), rel=1e-5)
    assert hi == pytest.approx(1.5, rel=1e-5)
    rep = minkowski_report(power_tail(2.0))
    assert rep.measurable and rep.lower_content == pytest.approx(1.0, rel=1e-12)


def test_profile_unsupported_family():
    with pytest.raises(UnsupportedError):
        periodic_profile(power_tail(2.0))
