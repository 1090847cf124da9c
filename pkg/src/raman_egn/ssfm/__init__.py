"""Split-step Manakov simulator used as the reference for the NLI model."""

from __future__ import annotations

import numpy as np

from ..core import ChannelPlan, Link
from ..srs import link_profiles
from .propagation import NumericalError, apply_amplifier, propagate_span, span_amplifier_gain
from .receiver import SsfmResult, estimate_snr, eta_from_snr, receive
from .waveform import Waveform, build_waveform, rrc_amplitude

__all__ = [
    "NumericalError", "SsfmResult", "Waveform", "apply_amplifier", "build_waveform", "estimate_snr",
    "eta_from_snr", "propagate_span", "receive", "rrc_amplitude", "run_link", "span_amplifier_gain",
]


def run_link(plan: ChannelPlan, link: Link, n_symbols: int = 2**13, phi_max: float = 1e-4, seed: int = 0,
             profile: str = "simplified", formats: dict | None = None, rolloff: float = 1e-4,
             channels=None) -> SsfmResult:
    """Transmit, propagate through every span and amplifier, receive and estimate eta."""
    profiles = link_profiles(plan, link, profile)
    w = build_waveform(plan, n_symbols, rolloff, seed, formats)
    for span, prof in zip(link, profiles):
        w = propagate_span(w, span, prof, phi_max)
        w = apply_amplifier(w, span_amplifier_gain(span, prof))
    idx = list(range(1, len(plan) + 1)) if channels is None else list(channels)
    snr = np.array([estimate_snr(*receive(w, k)) for k in idx])
    p = plan.powers[np.asarray(idx) - 1]
    eta = np.array([eta_from_snr(s, pk) for s, pk in zip(snr, p)])
    return SsfmResult(idx, plan.freqs[np.asarray(idx) - 1], snr, eta)
