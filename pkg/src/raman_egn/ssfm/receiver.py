"""Ideal coherent receiver and SNR-based NLI estimation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..core import ConfigError
from .waveform import Waveform, rrc_amplitude

logger = logging.getLogger(__name__)

DISCARD = 500


def receive(w: Waveform, channel: int, discard: int = DISCARD):
    """Symbol estimates of 1-based ``channel``: (rx, tx), each (2, n_symbols - 2 discard).

    Undoes the full accumulated linear transfer (dispersion and per-frequency
    power gain), then down-converts, matched-filters and samples at the symbol rate.
    """
    nsym = w.n_symbols
    if nsym < 3 * discard:
        raise ConfigError(f"need at least {3 * discard} symbols to discard {discard} at each end")
    n = w.n_samples
    spec = np.fft.fft(w.field, axis=1) / n
    spec *= np.exp(-1j * w.linear_phase - 0.5 * w.log_gain)
    half = math.ceil((1 + w.rolloff) * nsym / 2)
    offs = np.arange(-half, half + 1)
    h = rrc_amplitude(offs * w.bin_spacing, w.symbol_rate, w.rolloff)
    sel = spec[:, (w.channel_bins[channel - 1] + offs) % n] * h
    folded = np.zeros((2, nsym), dtype=complex)
    np.add.at(folded, (slice(None), offs % nsym), sel)
    rx = np.fft.ifft(folded * nsym, axis=1)
    tx = w.symbols[channel - 1]
    keep = slice(discard, nsym - discard)
    return rx[:, keep], tx[:, keep]


def estimate_snr(rx, tx, min_count: int = 100) -> float:
    """sum_i |E{Y | X = x_i}|^2 / sum_i E{|Y - E{Y | x_i}|^2 | x_i}, pooled over all samples.

    Samples are grouped by transmitted value. When the transmitted symbols do
    not repeat (Gaussian inputs) a single-tap linear fit y = h x is used instead.
    Returns ``inf`` when the received symbols are noiseless.
    """
    rx = np.asarray(rx).ravel()
    tx = np.asarray(tx).ravel()
    values, inverse, counts = np.unique(tx, return_inverse=True, return_counts=True)
    if values.size > tx.size // 2:
        h = np.vdot(tx, rx) / np.vdot(tx, tx)
        noise = np.mean(np.abs(rx - h * tx) ** 2)
        sig = abs(h) ** 2 * np.mean(np.abs(tx) ** 2)
        return math.inf if noise == 0 else float(sig / noise)
    if counts.min() < min_count:
        logger.warning("constellation point observed only %d times", counts.min())
    means = np.bincount(inverse, weights=rx.real) / counts + 1j * np.bincount(inverse, weights=rx.imag) / counts
    var = np.bincount(inverse, weights=np.abs(rx - means[inverse]) ** 2) / counts
    den = float(np.sum(var))
    if den <= 1e-20 * float(np.sum(np.abs(means) ** 2)):
        return math.inf
    return float(np.sum(np.abs(means) ** 2) / den)


def eta_from_snr(snr: float, power: float) -> float:
    """eta ~ 1 / (SNR P^2) [1/W^2]."""
    return 0.0 if math.isinf(snr) else 1.0 / (snr * power**2)


@dataclass
class SsfmResult:
    channels: list
    freqs: np.ndarray
    snr: np.ndarray
    eta: np.ndarray
    steps: int = 0
