import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fzeta.constructions import (PROPER, SUP_PROFILE, build_algebraic_qp, build_hyperfractal,
                                 build_transcendental_qp, components, composite_tube,
                                 exponent_for, independence_probe, nondegeneracy, primes,
                                 stacked_union)
from fzeta.drums import Norm, cantor, make_tube, tube_volume
from fzeta.errors import ConfigError


def test_primes():
    assert primes(8) == [2, 3, 5, 7, 11, 13, 17, 19]


@given(st.floats(0.01, 0.49), st.floats(-2.99, -2.01))
def test_exponent_hits_target_dimension(a, d):
    b = exponent_for(a, d)
    assert cantor(a, b).dimension == pytest.approx(d, abs=1e-12)


def test_algebraic_ratios():
    drum, rep = build_algebraic_qp(3, -2.5)
    assert rep.period_ratios == pytest.approx((1.0, math.sqrt(2.0), math.sqrt(3.0)), rel=1e-12)
    assert rep.independence.passed
    assert rep.profile_label == PROPER
    assert drum.dimension == pytest.approx(-2.5)
    assert all(comp.dimension == pytest.approx(-2.5) for comp in drum.family.members)


def test_transcendental_periods():
    _, rep = build_transcendental_qp(2, -2.5)
    assert rep.quasiperiods == pytest.approx((math.log(3.0), math.log(5.0)))
    # log_5 3 is irrational: no small relation
    assert rep.quasiperiods[0] / rep.quasiperiods[1] == pytest.approx(0.6826061944859854, rel=1e-14)
    assert rep.independence.passed


def test_probe_finds_relation():
    res = independence_probe((math.log(4.0), 2.0 * math.log(4.0)))
    assert not res.passed and res.witness == (-2, 1)
    assert independence_probe((1.0,), max_coef=3).passed
    with pytest.raises(ConfigError):
        independence_probe(tuple(range(1, 7)))


def test_dimension_ranges():
    with pytest.raises(ConfigError):
        build_algebraic_qp(2, -1.5)
    with pytest.raises(ConfigError):
        build_algebraic_qp(2, -3.5)
    _, rep = build_algebraic_qp(2, -3.5, allow_sup_profile=True)
    assert rep.profile_label == SUP_PROFILE
    with pytest.raises(ConfigError):
        build_transcendental_qp(1, -2.5)
    with pytest.raises(ConfigError):
        build_algebraic_qp(17, -2.5)


def test_stacked_union_offsets():
    params = [(0.25, 2.0), (1 / 3, 2.5)]
    drum, offsets = stacked_union(params)
    h1 = 0.5 * cantor(0.25, 2.0).strip_height
    assert offsets == pytest.approx((0.0, h1))
    assert drum.volume == pytest.approx(0.25 * cantor(0.25, 2.0).volume
                                        + 0.0625 * cantor(1 / 3, 2.5).volume)
    assert [lam for _, lam in components(drum)] == [0.5, 0.25]


@settings(max_examples=15, deadline=None)
@given(st.floats(1.0, 6.0))
def test_composite_tube_matches_generic(log10_t):
    drum, _ = build_algebraic_qp(2, -2.5)
    t = 10.0 ** log10_t
    assert composite_tube(drum, t)[0] == pytest.approx(tube_volume(make_tube(drum), t), rel=1e-12)


def test_composite_euclid_above_sup():
    drum, _ = build_transcendental_qp(2, -2.5)
    t = np.array([10.0, 1e3])
    assert np.all(composite_tube(drum, t, Norm.EUCLID) >= composite_tube(drum, t))


@pytest.mark.parametrize("n", [2, 3])
def test_nondegeneracy(n):
    drum, _ = build_algebraic_qp(n, -2.5)
    rep = nondegeneracy(drum)
    assert rep.passed
    assert 0 < rep.lower_bound <= rep.observed_min <= rep.observed_max <= rep.upper_bound


def test_hyperfractal_ordinates():
    drum, rep = build_hyperfractal(-2.5, 4)
    assert rep.n_levels == 4 and len(drum.family.members) == 4
    ords = np.array(rep.ordinates)
    assert np.all(np.diff(ords) > 0)
    assert np.all(np.abs(ords) <= rep.ordinate_bound)
    assert 0.0 in rep.ordinates
    # lattices of 1/3 .. 1/6: spacing 2 pi / log(k)
    for k in (3, 4, 5, 6):
        step = 2 * math.pi / math.log(k)
        assert np.min(np.abs(ords - step)) < 1e-12
    assert rep.min_gap > 0


def test_hyperfractal_validation():
    with pytest.raises(ConfigError):
        build_hyperfractal(-2.5, 2, a_sequence=[0.2, 0.3])
    with pytest.raises(ConfigError):
        build_hyperfractal(-2.0, 2)
    with pytest.raises(ConfigError):
        build_hyperfractal(-2.5, 0)
