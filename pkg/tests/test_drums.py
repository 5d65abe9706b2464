import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fzeta.drums import (Norm, TubeMethod, cantor, disjoint_union, drum_from_json,
                         interval_family, inverted_near_ball_volume, make_drum, make_tube,
                         norm_difference, power_tail, scale_tube_identity, scaled, translated,
                         tube_volume)
from fzeta.errors import DrumError, InversionRangeError, UnsupportedError

# oracle: scipy dblquad over {|p|_2 > 10, x > 1, 0 < y < x^-2} of |p|^-4
NEAR_BALL_EUCLID_EPS_01 = 2.000001060605664e-06
# oracle: dblquad area of the same region with weight 1
EUCLID_TUBE_POWERTAIL_10 = 0.10000001666666888


def test_cantor_volume_and_strip():
    c = cantor(0.25, 2.0)
    assert c.volume == pytest.approx(0.5, rel=1e-15)
    assert c.strip_height == pytest.approx(1 / 14, rel=1e-15)
    assert c.dimension == -2.5


@pytest.mark.parametrize("t, expected", [(1.0, 0.5), (4.0, 0.5), (16.0, 0.3125)])
def test_cantor_tube_values(t, expected):
    assert tube_volume(make_tube(cantor(0.25, 2.0)), t) == pytest.approx(expected, rel=1e-13)


def test_cantor_tube_levels_match_series():
    fam = cantor(0.25, 2.0).family
    for t in (5.0, 77.0, 1e4, 3.3e7):
        direct, tail, _ = fam.tube_levels(t)
        assert float(fam.tube_sup(np.array([t]))[0]) == pytest.approx(direct, abs=tail + 1e-14)


def test_powertail_tube():
    tube = make_tube(power_tail(2.0))
    assert tube(3.0) == pytest.approx(1 / 3, rel=1e-15)
    assert tube(0.5) == pytest.approx(1.0, rel=1e-15)


def test_interval_tube_matches_hurwitz():
    # oracle: mpmath.zeta(2, 11), the lengths of intervals starting at j >= 11
    assert tube_volume(make_tube(interval_family(1.0, 2.0)), 10.5) == pytest.approx(
        0.0951663356816857, rel=1e-13)
    # t inside the interval (10, 10.01): partial piece plus the full ones
    assert tube_volume(make_tube(interval_family(1.0, 2.0)), 10.004) == pytest.approx(
        0.0951663356816857 + 0.006, rel=1e-12)


def test_exact_and_quadrature_agree_on_base_families():
    for drum, ts in ((power_tail(2.0), (2.0, 50.0)), (cantor(0.25, 2.0), (5.0, 300.0)),
                     (interval_family(1.0, 2.0), (3.5, 40.0))):
        ex = make_tube(drum)
        qu = make_tube(drum, method=TubeMethod.QUADRATURE)
        for t in ts:
            assert qu(t) == pytest.approx(ex(t), rel=1e-9)


def test_euclid_tube_against_dblquad():
    v = tube_volume(make_tube(power_tail(2.0), Norm.EUCLID), 10.0)
    assert v == pytest.approx(EUCLID_TUBE_POWERTAIL_10, rel=1e-12)


def test_norm_difference_powertail_scaling():
    t = np.array([100.0, 1000.0])
    assert norm_difference(power_tail(2.0), t) == pytest.approx(t ** -7 / 6, rel=1e-6)


def test_near_ball_volume_oracle():
    v = inverted_near_ball_volume(power_tail(2.0), 0.1)
    assert v == pytest.approx(NEAR_BALL_EUCLID_EPS_01, rel=1e-9)
    sup = inverted_near_ball_volume(power_tail(2.0), 0.1, Norm.SUP)
    assert sup == pytest.approx(2e-6, rel=1e-12)


def test_near_ball_range_error():
    with pytest.raises(InversionRangeError):
        inverted_near_ball_volume(cantor(0.25, 2.0), 0.5)


@pytest.mark.parametrize("tag, params", [
    ("PowerTail", {"alpha": 1.0}),
    ("CantorInfinity", {"a": 0.25, "b": 1.4}),
    ("CantorInfinity", {"a": 0.6, "b": 3.0}),
    ("IntervalFamily", {"alpha": 1.0, "beta": 0.5}),
])
def test_invalid_parameters(tag, params):
    with pytest.raises(DrumError):
        make_drum(tag, ambient_dim=1 if tag == "IntervalFamily" else 2, **params)


def test_json_round_trip():
    drum = translated(scaled(cantor(0.25, 2.0), 0.5), (0.0, 0.1))
    back = drum_from_json(drum.to_json())
    assert back == drum
    assert json.loads(back.to_json()) == json.loads(drum.to_json())


def test_json_transforms_and_errors():
    doc = {"ambient_dim": 2, "family": {"tag": "PowerTail", "alpha": 2},
           "transforms": [{"tag": "scale", "factor": 2.0}]}
    drum = drum_from_json(json.dumps(doc))
    assert drum.volume == pytest.approx(4.0)
    with pytest.raises(DrumError):
        drum_from_json('{"family": ')
    with pytest.raises(DrumError):
        drum_from_json('{"family": {"tag": "Nope"}}')


def test_union_volume_adds():
    u = disjoint_union([power_tail(2.0), translated(cantor(0.25, 2.0), (0.0, 1.0))])
    assert u.volume == pytest.approx(1.5)
    assert tube_volume(make_tube(u), 64.0) == pytest.approx(
        tube_volume(make_tube(power_tail(2.0)), 64.0) + tube_volume(make_tube(cantor(0.25, 2.0)), 64.0))


def test_sup_tube_below_strip_height_unsupported():
    tall = translated(power_tail(2.0), (0.0, 5.0))
    with pytest.raises(UnsupportedError):
        make_tube(tall)(2.0)


@given(st.floats(1.0, 1e6), st.floats(1.0001, 50.0))
def test_tube_monotone(t1, ratio):
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        tube = make_tube(drum)
        assert tube(t1 * ratio) <= tube(t1) * (1 + 1e-14)


@given(st.floats(0.3, 5.0), st.floats(5.0, 1e4))
def test_scaling_identity(lam, t):
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        lhs, rhs = scale_tube_identity(drum, lam, t)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-15)


@given(st.floats(2.0, 1e5))
def test_euclid_dominates_sup(t):
    drum = cantor(0.25, 2.0)
    assert tube_volume(make_tube(drum, Norm.EUCLID), t) >= tube_volume(make_tube(drum), t)


def test_norm_difference_slope():
    t = np.geomspace(1e2, 1e5, 31)
    for drum in (power_tail(2.0), cantor(0.25, 2.0)):
        slope = np.polyfit(np.log(t), np.log(norm_difference(drum, t)), 1)[0]
        assert slope <= -0.9
