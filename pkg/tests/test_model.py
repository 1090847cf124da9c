import math

import numpy as np
import pytest

from raman_egn.core import Channel, ChannelPlan, Link, Span
from raman_egn.egn.model import NliModel, NliOptions, nli_power, nli_report, with_seed
from raman_egn.egn.montecarlo import McSettings
from raman_egn.egn.triplets import enumerate_triplets
from raman_egn.srs import effective_length

from conftest import ALPHA, GAMMA, desk_link, desk_plan

FAST = NliOptions(mc=McSettings(seed=4, batch=2**12, tol_db=0.05))


@pytest.fixture(scope="module")
def flat_reports():
    """3-channel plan without SRS at two launch powers, plus a Gaussian-format model."""
    plan = desk_plan(3, fmt="16QAM")
    link = desk_link(plan, raman=False)
    base = NliModel(plan, link, FAST).report()
    scaled = NliModel(plan.with_powers(plan.powers * 3.0), link, FAST).report()
    return plan, base, scaled


def test_zero_power_gives_zero_nli():
    plan = desk_plan(3, power=0.0)
    r = nli_power(plan, desk_link(plan, raman=False), 2, FAST)
    assert r.sigma2 == 0.0 and math.isnan(r.eta)


def test_cubic_power_scaling(flat_reports):
    _, base, scaled = flat_reports
    for a, b in zip(base.channels, scaled.channels):
        assert b.sigma2 / a.sigma2 == pytest.approx(27.0, rel=1e-12)
        assert b.eta == pytest.approx(a.eta, rel=1e-12)


def test_mirror_symmetry_without_srs(flat_reports):
    _, base, _ = flat_reports
    first, last = base.channels[0], base.channels[-1]
    assert abs(10 * math.log10(first.eta / last.eta)) < 0.1


def test_breakdown_sums_to_total(flat_reports):
    _, base, _ = flat_reports
    for c in base.channels:
        assert c.sigma2 >= 0
        assert sum(c.by_class.values()) == pytest.approx(c.sigma2, rel=1e-12)
        total = sum(c.group_sigma2(g) for g in ("SCI", "XCI", "MCI"))
        assert total == pytest.approx(c.sigma2, rel=1e-12)
        assert c.uniform_launch and c.net_gain == pytest.approx(1.0)


def test_gaussian_egn_equals_gn_and_d_only_sum():
    plan = desk_plan(3, fmt="GAUSSIAN")
    link = desk_link(plan)
    egn = NliModel(plan, link, FAST)
    gn = NliModel(plan, link, NliOptions(mode="gn", mc=FAST.mc))
    a, b = egn.channel(2), gn.channel(2)
    assert a.sigma2 == b.sigma2
    d_sum = 0.0
    for t in enumerate_triplets(plan, 2):
        d_sum += np.prod(plan.powers[np.array(t.indices) - 1]) * egn.term("D", t, 2).value
    assert a.sigma2 == pytest.approx(d_sum, rel=1e-12)


def test_format_reuse_and_ordering():
    plan = desk_plan(3, fmt="GAUSSIAN")
    link = desk_link(plan)
    gauss = NliModel(plan, link, FAST)
    eta_gauss = gauss.channel(2).eta
    qpsk = gauss.with_formats(plan.with_format("QPSK"))
    eta_qpsk = qpsk.channel(2).eta
    assert eta_qpsk < eta_gauss
    assert qpsk._terms is gauss._terms
    with pytest.raises(ValueError):
        gauss.with_formats(plan.with_powers(plan.powers * 2))


def test_non_uniform_launch_is_flagged():
    chans = (Channel(1, -10.001e9, 10e9, 1e-3), Channel(2, 0.0, 10e9, 2e-3))
    plan = ChannelPlan(chans)
    r = nli_report(plan, desk_link(plan, raman=False), [2], FAST)
    assert not r.channels[0].uniform_launch
    assert r.channels[0].eta == pytest.approx(r.channels[0].sigma2 / 8e-9)


def test_options_validation_and_seed():
    with pytest.raises(ValueError):
        NliOptions(mode="xgn")
    with pytest.raises(ValueError):
        NliOptions(triplet_bound="loose")
    assert with_seed(FAST, 99).mc.seed == 99


def test_paper_bound_is_a_subset_of_support_bound():
    plan = desk_plan(3)
    link = desk_link(plan, raman=False)
    tight = NliModel(plan, link, NliOptions(triplet_bound="paper", mc=FAST.mc)).channel(2)
    full = NliModel(plan, link, FAST).channel(2)
    assert full.sigma2 > tight.sigma2
    assert set(tight.by_class) <= set(full.by_class)


def test_zero_dispersion_terms_are_support_volumes():
    # with beta2 = 0 the link function is gamma * Leff everywhere, so each term is
    # its prefactor times the volume of its support in units of B
    plan = desk_plan(1)
    link = Link((Span(1e5, ALPHA, 0.0, 0.0, GAMMA, 0.0),))
    model = NliModel(plan, link, FAST)
    t = enumerate_triplets(plan, 1)[0]
    scale = (GAMMA * effective_length(1e5, ALPHA)) ** 2
    expected = {"D": 16 / 27 * 2 / 3, "E": 80 / 81 / 2, "F": 16 / 81 / 2, "G": 16 / 81 * 9 / 20}
    for kind, volume in expected.items():
        assert model.term(kind, t, 1).value / scale == pytest.approx(volume, rel=0.02)
