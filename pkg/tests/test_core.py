import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from raman_egn.core import (Channel, ChannelPlan, ConfigError, Link, Span, Tabulated, attenuation_np_per_m,
                            db_to_linear, dbm_to_watt, dispersion_params, evaluate_response, linear_to_db, validate)


def test_db_conversions():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(20.0) == pytest.approx(100.0, rel=1e-15)
    assert dbm_to_watt(19.0) == pytest.approx(79.43282347242815e-3, rel=1e-12)


def test_linear_to_db_rejects_non_positive():
    with pytest.raises(ValueError):
        linear_to_db(0.0)
    with pytest.raises(ValueError):
        linear_to_db(-1.0)


@given(st.floats(-200, 200))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)


def test_attenuation_conversion():
    assert attenuation_np_per_m(0.0) == 0.0
    assert attenuation_np_per_m(0.2) == pytest.approx(4.60517018598809e-5, rel=1e-13)
    assert attenuation_np_per_m(10 * math.log10(math.e)) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ValueError):
        attenuation_np_per_m(-0.1)


def test_dispersion_parameters():
    assert dispersion_params(0.0, 0.0, 1550e-9) == (0.0, 0.0)
    b2, b3 = dispersion_params(17e-6, 0.0, 1550e-9)
    assert b2 == pytest.approx(-2.168261939141489e-26, rel=1e-12)
    _, b3 = dispersion_params(17e-6, 67.0, 1550e-9)
    assert b3 == pytest.approx(1.446774089726927e-40, rel=1e-12)
    with pytest.raises(ValueError):
        dispersion_params(17e-6, 0.0, 0.0)


def test_validate_overlap_names_both_channels():
    plan = ChannelPlan((Channel(1, 0.0, 10e9, 1e-3), Channel(2, 9e9, 10e9, 1e-3)))
    link = Link((Span(1e5, 4.6e-5, -2e-26, 0.0, 1.2e-3, 0.0),))
    with pytest.raises(ConfigError, match="channels 1 and 2"):
        validate(plan, link)


def test_validate_large_grid_is_valid():
    plan = ChannelPlan.uniform(101, 10.001e9, 10e9, 1e-3)
    link = Link((Span(1e5, 4.6e-5, -2e-26, 0.0, 1.2e-3, 0.0),))
    cfg = validate(plan, link)
    assert len(cfg.plan) == 101


def test_validate_reports_every_violation():
    plan = ChannelPlan.uniform(2, 10.001e9, 10e9, 1e-3)
    bad = Span(0.0, 4.6e-5, -2e-26, 0.0, -1.0, 0.0, amp_gain=Tabulated((-1e9, 1e9), (1.0, 1.0)))
    with pytest.raises(ConfigError) as exc:
        validate(plan, Link((bad,)))
    text = str(exc.value)
    assert "span 1: length" in text
    assert "gamma" in text
    assert "does not cover the band" in text
    assert len(exc.value.violations) == 3


def test_tabulated_interpolates_and_clamps():
    t = Tabulated((0.0, 10.0), (1.0, 3.0))
    assert t(5.0) == pytest.approx(2.0)
    with pytest.warns(RuntimeWarning):
        assert t(20.0) == 3.0
    assert np.allclose(evaluate_response(2.5, np.zeros(3)), 2.5)


def test_plan_accessors():
    plan = ChannelPlan.uniform(3, 10.001e9, 10e9, 2e-3, "16QAM")
    assert np.allclose(plan.freqs, [-10.001e9, 0.0, 10.001e9])
    assert plan.total_power == pytest.approx(6e-3)
    assert plan.band_edges == pytest.approx((-15.001e9, 15.001e9))
    assert plan[2].format_id == "16QAM"
    with pytest.raises(IndexError):
        plan[0]
