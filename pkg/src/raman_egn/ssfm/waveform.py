"""Periodic dual-polarization WDM waveform built in the frequency domain."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import ChannelPlan, ConfigError
from ..modulation import get_format


def rrc_amplitude(f, symbol_rate: float, rolloff: float):
    """Root-raised-cosine amplitude response, 1 in the passband and 1/sqrt(2) at +-R/2."""
    f = np.abs(np.asarray(f, dtype=float))
    r = symbol_rate
    lo, hi = (1 - rolloff) * r / 2, (1 + rolloff) * r / 2
    out = np.where(f < lo, 1.0, 0.0)
    if rolloff > 0:
        roll = (f >= lo) & (f <= hi)
        out = np.where(roll, np.sqrt(0.5 * (1 + np.cos(np.pi / (rolloff * r) * (f - lo)))), out)
    else:
        out = np.where(np.isclose(f, r / 2, rtol=1e-12, atol=0), math.sqrt(0.5), out)
    return out


@dataclass
class Waveform:
    """Field samples ``field`` (2, N) in sqrt(W) on one signal period.

    ``linear_phase`` and ``log_gain`` track the accumulated linear transfer per
    FFT bin (dispersion phase and ln power gain) so the receiver can undo it.
    """

    field: np.ndarray
    sample_rate: float
    symbol_rate: float
    n_symbols: int
    rolloff: float
    channel_bins: np.ndarray
    symbols: list
    powers: np.ndarray
    linear_phase: np.ndarray
    log_gain: np.ndarray
    distance: float = 0.0

    @property
    def n_samples(self) -> int:
        return self.field.shape[1]

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_samples, 1 / self.sample_rate)

    @property
    def bin_spacing(self) -> float:
        return self.symbol_rate / self.n_symbols

    @property
    def power(self) -> float:
        return float(np.mean(np.sum(np.abs(self.field) ** 2, axis=0)))

    def copy(self, **changes) -> "Waveform":
        return replace(self, field=self.field.copy(), linear_phase=self.linear_phase.copy(),
                       log_gain=self.log_gain.copy(), **changes)


def samples_per_symbol(plan: ChannelPlan, symbol_rate: float, guard: float = 0.1) -> int:
    """Oversampling so the grid holds twice the occupied band plus ``guard``.

    Twice the band keeps first-order FWM products (which extend one band
    width beyond the signal on each side) from aliasing onto the channels.
    """
    lo, hi = plan.band_edges
    need = (1 + guard) * max(2 * (hi - lo), 2 * max(abs(lo), abs(hi)))
    return max(1, math.ceil(need / symbol_rate))


def channel_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x55F, int(index)])))


def build_waveform(plan: ChannelPlan, n_symbols: int = 2**13, rolloff: float = 1e-4, seed: int = 0,
                   formats: dict | None = None, sps: int | None = None, guard: float = 0.1) -> Waveform:
    """Sum of RRC-shaped, independently modulated x/y channels at their centres.

    Every channel must share one symbol rate (its bandwidth). Channel centres are
    snapped to the nearest multiple of the bin spacing R / n_symbols. Symbols of
    each channel are scaled so the realized mean power per polarization is
    exactly P_kappa / 2.
    """
    if n_symbols < 2**10 or n_symbols & (n_symbols - 1):
        raise ConfigError("n_symbols must be a power of two >= 1024")
    rates = plan.bandwidths
    if not np.allclose(rates, rates[0], rtol=1e-12):
        raise ConfigError("the split-step simulator needs one common symbol rate")
    r = float(rates[0])
    sps = samples_per_symbol(plan, r, guard) if sps is None else sps
    w = n_symbols
    n = w * sps
    f0 = r / w
    fs = n * f0
    half = math.ceil((1 + rolloff) * w / 2)
    offs = np.arange(-half, half + 1)
    shape = rrc_amplitude(offs * f0, r, rolloff)
    bins = np.rint(plan.freqs / f0).astype(int)
    if np.any(np.abs(bins) + half >= n // 2):
        raise ConfigError("a channel exceeds the simulation bandwidth (aliasing)")
    support = offs[shape > 0]
    edges = np.sort(bins)
    if np.any(edges[1:] + support.min() <= edges[:-1] + support.max()):
        raise ConfigError("channel spectra overlap after snapping to the bin grid; use more symbols")
    spec = np.zeros((2, n), dtype=complex)
    symbols = []
    for k, ch in enumerate(plan, start=0):
        fmt = get_format(ch.format_id, formats)
        rng = channel_rng(seed, ch.index)
        b = np.stack([fmt.sample(rng, w)[0] for _ in range(2)])
        if ch.launch_power > 0:
            b = b * math.sqrt(ch.launch_power / 2 / np.mean(np.abs(b) ** 2))
        else:
            b = b * 0.0
        symbols.append(b)
        dft = np.fft.fft(b, axis=1)
        np.add.at(spec, (slice(None), (bins[k] + offs) % n), shape * dft[:, offs % w] / w)
    field = n * np.fft.ifft(spec, axis=1)
    return Waveform(field, fs, r, w, rolloff, bins, symbols, plan.powers.copy(), np.zeros(n), np.zeros(n))
