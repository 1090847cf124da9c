import functools
import math

import pytest

from raman_egn.core import ChannelPlan, Link, Span, attenuation_np_per_m, dispersion_params

ALPHA = attenuation_np_per_m(0.2)
BETA2, BETA3 = dispersion_params(17e-6, 0.0, 1550e-9)
GAMMA = 1.2e-3
SPACING, BANDWIDTH = 10.001e9, 10e9
# C_r * P_tot * B_tot of a 1 THz, 19 dBm, 1.12 1/(W km THz) system, in 1/m
RAMAN_PRODUCT = 1.12e-15 * 10 ** (-1.1) * 1e12

ACCEPTANCE_LINES: dict = {}


def desk_plan(n=5, power=1e-3, fmt="QPSK"):
    return ChannelPlan.uniform(n, SPACING, BANDWIDTH, power, fmt)


def desk_span(plan, raman=True, length=1e5, gamma=GAMMA, gain="compensate"):
    lo, hi = plan.band_edges
    c_r = RAMAN_PRODUCT / (plan.total_power * (hi - lo)) if raman else 0.0
    return Span(length, ALPHA, BETA2, 0.0, gamma, c_r, gain)


def desk_link(plan, raman=True, **kw):
    return Link((desk_span(plan, raman, **kw),))


@functools.lru_cache(maxsize=None)
def desk_ssfm(fmt="QPSK", power=1e-3, phi_max=1e-4, n_symbols=2**13, seed=1):
    """Split-step eta of the desk scenario, cached for the session.

    As in the desk configs, C_r * P_tot * B_tot is held fixed, so the SRS
    profile is the same at every launch power.
    """
    from raman_egn.ssfm import run_link

    plan = desk_plan(power=power, fmt=fmt)
    return run_link(plan, desk_link(plan), n_symbols, phi_max, seed)


def db(x):
    return 10 * math.log10(x)


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, name, passed, detail):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"[{status}] criterion {number:>2}: {name}: {detail}"
        print(ACCEPTANCE_LINES[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
