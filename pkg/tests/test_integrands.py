import numpy as np
import pytest

from raman_egn.core import Link
from raman_egn.egn.integrands import integrand, prefactor, term_layout
from raman_egn.egn.link import LinkFunctionContext
from raman_egn.egn.triplets import enumerate_triplets

from conftest import BANDWIDTH, GAMMA, desk_plan, desk_span


def context(plan, **kw):
    return LinkFunctionContext.build(plan, Link((desk_span(plan, **kw),)))


def triplet(plan, kappa, idx):
    return next(t for t in enumerate_triplets(plan, kappa) if t.indices == idx)


def test_zero_link_function_gives_zero():
    plan = desk_plan(3)
    ctx = context(plan, gamma=0.0)
    pts = np.random.default_rng(0).uniform(-5e9, 5e9, (100, 3))
    assert np.all(integrand("D", triplet(plan, 2, (2, 2, 2)), 2, pts, ctx) == 0)


def test_sci_integrand_at_channel_centre():
    plan = desk_plan(1)
    ctx = context(plan)
    t = triplet(plan, 1, (1, 1, 1))
    mu = ctx.mu(0, 0.0, 0.0, 0.0)
    expected = 16 / 27 * GAMMA**2 * abs(mu) ** 2 / BANDWIDTH**3
    assert integrand("D", t, 1, [[0.0, 0.0, 0.0]], ctx)[0] == pytest.approx(expected, rel=1e-13)


def test_e_integrand_on_the_diagonal():
    plan = desk_plan(3)
    ctx = context(plan)
    t = triplet(plan, 2, (1, 2, 1))
    rng = np.random.default_rng(1)
    p = rng.uniform(-5e9, 5e9, (200, 3))
    d = integrand("D", t, 2, p, ctx)
    e = integrand("E", t, 2, np.column_stack([p, p[:, 1]]), ctx)
    assert np.allclose(e, d * (80 / 81) / (16 / 27) / BANDWIDTH, rtol=1e-12)


def test_outside_support_is_zero():
    plan = desk_plan(3)
    ctx = context(plan)
    t = triplet(plan, 2, (2, 2, 2))
    outside = [[6e9, 0, 0], [0, -5.1e9, 0], [0, 0, 5.5e9]]
    assert np.all(integrand("D", t, 2, outside, ctx) == 0)
    assert np.all(integrand("G", t, 2, [[0, 0, 0, 0, 9e9]], ctx) == 0)
    # f3 = f1 + f2 - f leaves the band
    assert integrand("D", t, 2, [[-5e9, 4e9, 4e9]], ctx)[0] == 0


def test_prefactors():
    plan = desk_plan(3)
    t = triplet(plan, 2, (2, 2, 2))
    b = BANDWIDTH
    assert prefactor("D", t, plan) == pytest.approx(16 / 27 / b**3)
    assert prefactor("E", t, plan) == pytest.approx(80 / 81 / b**4)
    assert prefactor("G", t, plan) == pytest.approx(16 / 81 / b**5)
    with pytest.raises(ValueError):
        integrand("H", t, 2, [[0, 0, 0, 0]], ctx=context(plan))


@pytest.mark.parametrize("kind", ["E", "F", "G"])
def test_nested_amplitude_reproduces_plain_integrand(kind):
    """Re(Y(outer, a) conj(Y(outer, b))) from the layout equals the Table integrand."""
    plan = desk_plan(3)
    ctx = context(plan)
    t = triplet(plan, 2, (2, 2, 2))
    lay = term_layout(kind, t, 2, ctx)
    rng = np.random.default_rng(2)
    n = 50
    outer = lay.outer_lo + (lay.outer_hi - lay.outer_lo) * rng.random((n, lay.outer_lo.size))
    inner = lay.inner_lo + (lay.inner_hi - lay.inner_lo) * rng.random((n, 2, lay.inner_lo.size))
    y = lay.amplitude(outer, inner)
    nested = lay.prefactor * np.real(y[:, 0] * np.conj(y[:, 1]))
    if kind == "E":  # outer (f, f2), inner f1
        pts = np.column_stack([outer[:, 0], inner[:, 0, 0], outer[:, 1], inner[:, 1, 0]])
    elif kind == "F":  # outer (f, s), inner f1, f2 = s - f1
        pts = np.column_stack([outer[:, 0], inner[:, 0, 0], outer[:, 1] - inner[:, 0, 0], inner[:, 1, 0]])
    else:  # outer f, inner (f1, f2)
        pts = np.column_stack([outer[:, 0], inner[:, 0, 0], inner[:, 0, 1], inner[:, 1, 0], inner[:, 1, 1]])
    plain = integrand(kind, t, 2, pts, ctx)
    assert np.allclose(nested, plain, rtol=1e-12, atol=1e-12 * np.max(np.abs(plain)))
