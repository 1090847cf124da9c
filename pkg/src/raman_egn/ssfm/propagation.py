"""Symmetric split-step integration of the Manakov equation with SRS gain.

Linear step over [za, zb]: exp(i (2 pi^2 beta2 f^2 + 4/3 pi^3 beta3 f^3)(zb - za))
* sqrt(rho(zb, f) / rho(za, f)). Nonlinear step: exp(i gamma 8/9 (|Ex|^2 + |Ey|^2) dz)
on both polarizations. Consecutive linear half steps are merged, so a step
costs one forward and one inverse FFT.
"""

from __future__ import annotations

import logging

import numpy as np

from ..core import Span, Tabulated, evaluate_response
from ..srs import PowerProfile
from .waveform import Waveform

logger = logging.getLogger(__name__)

MANAKOV = 8.0 / 9.0


class NumericalError(RuntimeError):
    pass


def dispersion_rate(span: Span, f):
    return 2 * np.pi**2 * span.beta2 * f**2 + (4.0 / 3.0) * np.pi**3 * span.beta3 * f**3


def _step(w: Waveform, span: Span, peak: float, phi_max: float, remaining: float) -> float:
    if span.gamma == 0 or peak == 0:
        return remaining
    return min(phi_max / (span.gamma * MANAKOV * peak), remaining)


def propagate_span(w: Waveform, span: Span, profile: PowerProfile, phi_max: float = 1e-4,
                   max_steps: int = 10**7) -> Waveform:
    """Propagate ``w`` through ``span`` whose power profile is ``profile``."""
    out = w.copy()
    f = w.freqs
    beta = dispersion_rate(span, f)
    length = span.length

    def log_rho(z):
        return profile.log_rho(z, f)

    def linear(spec, za, zb, lra):
        lrb = log_rho(zb)
        spec *= np.exp(1j * beta * (zb - za) + 0.5 * (lrb - lra))
        return spec, lrb

    field = out.field
    peak = float(np.max(np.sum(np.abs(field) ** 2, axis=0)))
    dz = _step(w, span, peak, phi_max, length)
    spec = np.fft.fft(field, axis=1)
    spec, lr = linear(spec, 0.0, dz / 2, log_rho(0.0))
    z_lin, z, steps = dz / 2, 0.0, 0
    while True:
        field = np.fft.ifft(spec, axis=1)
        if span.gamma:
            inten = np.sum(np.abs(field) ** 2, axis=0)
            field *= np.exp(1j * span.gamma * MANAKOV * dz * inten)
        z += dz
        steps += 1
        if steps % 256 == 0 and not np.all(np.isfinite(field)):
            raise NumericalError(f"non-finite field at z = {z:.6g} m")
        if steps > max_steps:
            raise NumericalError(f"step budget exhausted at z = {z:.6g} m")
        spec = np.fft.fft(field, axis=1)
        if z >= length * (1 - 1e-14):
            spec, lr = linear(spec, z_lin, length, lr)
            break
        peak = float(np.max(inten)) if span.gamma else 0.0
        dz_next = _step(w, span, peak, phi_max, length - z)
        spec, lr = linear(spec, z_lin, z + dz_next / 2, lr)
        z_lin = z + dz_next / 2
        dz = dz_next
    out.field = np.fft.ifft(spec, axis=1)
    if not np.all(np.isfinite(out.field)):
        raise NumericalError(f"non-finite field at the end of the span (z = {length:.6g} m)")
    out.linear_phase = out.linear_phase + beta * length
    out.log_gain = out.log_gain + log_rho(length) - log_rho(0.0)
    out.distance = w.distance + length
    logger.debug("span of %.1f km in %d steps", length / 1e3, steps)
    return out


def apply_amplifier(w: Waveform, gain) -> Waveform:
    """Noise-free amplifier: spectrum times sqrt(g(f)).

    ``gain`` is a linear scalar, a :class:`Tabulated` response, a callable of
    frequency or an array of per-bin gains.
    """
    f = w.freqs
    if callable(gain) and not isinstance(gain, Tabulated):
        g = np.asarray(gain(f), dtype=float)
    elif isinstance(gain, np.ndarray):
        g = gain
    else:
        g = evaluate_response(gain, f)
    g = np.broadcast_to(g, f.shape)
    if np.any(g <= 0):
        raise ValueError("amplifier gain must be positive")
    out = w.copy()
    out.field = np.fft.ifft(np.fft.fft(w.field, axis=1) * np.sqrt(g), axis=1)
    out.log_gain = out.log_gain + np.log(g)
    return out


def span_amplifier_gain(span: Span, profile: PowerProfile):
    """Gain of the amplifier after ``span`` as a function of frequency."""
    if span.compensating:
        return lambda f: np.exp(-profile.log_rho(span.length, f))
    return lambda f: span.gain(f)
