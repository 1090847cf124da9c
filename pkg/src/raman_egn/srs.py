"""Signal power profile rho(z, f) under loss and stimulated Raman scattering.

Four fidelities share one interface, :meth:`PowerProfile.log_rho`:

* :class:`FlatProfile` -- loss only, ``rho = exp(-alpha(f) z)``;
* :class:`SimplifiedSRSProfile` -- closed form for frequency-flat loss and a
  triangular Raman gain ``g_r(df) = C_r * df``;
* :class:`GeneralSRSProfile` -- closed form with a frequency-dependent loss,
  normalizing integrals evaluated by Gauss-Legendre quadrature;
* :class:`OdeGridProfile` -- channel powers from integrating the coupled
  Raman ODEs (:func:`solve_srs_odes`).

Positive baseband frequencies are depleted: power flows from high to low
optical frequency.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import ChannelPlan, ConfigError, Link, Span, Tabulated, evaluate_response

logger = logging.getLogger(__name__)

DEFAULT_REFERENCE_FREQUENCY = 193.414489e12  # 1550 nm


class RefinementError(RuntimeError):
    """ODE step too coarse for the requested accuracy."""


def effective_length(z, alpha):
    """(1 - exp(-alpha z)) / alpha, continuous at alpha -> 0 where it equals z."""
    z = np.asarray(z, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    safe = np.where(alpha == 0, 1.0, alpha)
    out = np.where(alpha == 0, z, -np.expm1(-alpha * z) / safe)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# input spectrum

@dataclass(frozen=True, eq=False)
class InputSpectrum:
    """Piecewise-constant launch PSD G(0, f): ``psd[j]`` W/Hz on ``[lo[j], hi[j]]``."""

    lo: np.ndarray
    hi: np.ndarray
    psd: np.ndarray

    @classmethod
    def from_plan(cls, plan: ChannelPlan, scale=None) -> "InputSpectrum":
        powers = plan.powers if scale is None else plan.powers * np.asarray(scale, dtype=float)
        b = plan.bandwidths
        return cls(plan.freqs - b / 2, plan.freqs + b / 2, powers / b)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def total_power(self) -> float:
        return float(np.sum(self.psd * self.widths))

    @property
    def centers(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    def quadrature(self, breakpoints=None, n: int = 24):
        """Nodes and PSD-weighted weights integrating h(w) G(0, w) dw over the bands."""
        x, w = np.polynomial.legendre.leggauss(n)
        nodes, weights = [], []
        bp = np.asarray([] if breakpoints is None else breakpoints, dtype=float)
        for lo, hi, psd in zip(self.lo, self.hi, self.psd):
            if psd == 0:
                continue
            edges = np.concatenate(([lo], bp[(bp > lo) & (bp < hi)], [hi]))
            for a, b in zip(edges[:-1], edges[1:]):
                nodes.append((b - a) / 2 * x + (a + b) / 2)
                weights.append((b - a) / 2 * w * psd)
        if not nodes:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(nodes), np.concatenate(weights)


# --------------------------------------------------------------------------
# profiles

class PowerProfile:
    """Normalized power profile of one span; ``rho(0, f) == 1``."""

    variant = "base"
    length: float | None = None

    def log_rho(self, z, f):
        raise NotImplementedError

    def rho(self, z, f):
        return np.exp(self.log_rho(z, f))


class FlatProfile(PowerProfile):
    variant = "flat"

    def __init__(self, alpha, length: float | None = None):
        self.alpha = alpha
        self.length = length

    def log_rho(self, z, f):
        return -np.multiply(evaluate_response(self.alpha, f), z)


def _log_band_exp_integral(c, lo, hi, psd):
    """log of sum_j psd_j * int_{lo_j}^{hi_j} exp(-c w) dw for every c (exact)."""
    c = np.asarray(c, dtype=float)[..., None]
    width = hi - lo
    cw = c * width
    small = np.abs(cw) < 1e-8
    # log((1 - exp(-c w)) / c), with the series w (1 - cw/2) near c = 0
    safe_c = np.where(small, 1.0, c)
    ratio = np.where(small, width * (1 - cw / 2), -np.expm1(-cw) / safe_c)
    terms = np.log(psd) - c * lo + np.log(ratio)
    return logsumexp(terms, axis=-1)


class SimplifiedSRSProfile(PowerProfile):
    """Frequency-flat loss ``alpha`` and Raman slope ``raman_slope`` [1/(W m Hz)]."""

    variant = "simplified"

    def __init__(self, spectrum: InputSpectrum, alpha: float, raman_slope: float, length: float | None = None):
        if isinstance(alpha, Tabulated):
            raise ConfigError("the simplified SRS profile needs a frequency-flat attenuation")
        if not spectrum.total_power > 0:
            raise ValueError("total launch power must be positive")
        keep = spectrum.psd > 0
        self.spectrum = spectrum
        self._lo, self._hi, self._psd = spectrum.lo[keep], spectrum.hi[keep], spectrum.psd[keep]
        self.alpha = float(alpha)
        self.raman_slope = float(raman_slope)
        self.total_power = spectrum.total_power
        self.length = length

    def tilt_rate(self, z):
        """P_tot * C_r * L_eff(z), the exponent slope in 1/Hz."""
        return self.total_power * self.raman_slope * effective_length(z, self.alpha)

    def log_rho(self, z, f):
        z = np.asarray(z, dtype=float)
        c = self.tilt_rate(z)
        log_norm = _log_band_exp_integral(c, self._lo, self._hi, self._psd) - np.log(self.total_power)
        return -self.alpha * z - c * np.asarray(f) - log_norm


class GeneralSRSProfile(PowerProfile):
    """Frequency-dependent loss ``alpha(f)`` with triangular Raman gain."""

    variant = "general"

    def __init__(self, spectrum: InputSpectrum, alpha, raman_slope: float, length: float | None = None, nodes: int = 24):
        if not spectrum.total_power > 0:
            raise ValueError("total launch power must be positive")
        self.spectrum = spectrum
        self.alpha = alpha
        self.raman_slope = float(raman_slope)
        self.length = length
        bp = alpha.breakpoints if isinstance(alpha, Tabulated) else None
        self._w_nodes, self._w_weights = spectrum.quadrature(bp, n=nodes)
        self._alpha_nodes = evaluate_response(alpha, self._w_nodes)
        self._log_weights = np.log(self._w_weights)

    def _z_terms(self, z):
        z = np.asarray(z, dtype=float)
        zc = z[..., None]
        a = self._alpha_nodes
        leff = effective_length(zc, a)
        k = np.sum(self._w_weights * leff, axis=-1)
        log_num = logsumexp(self._log_weights - a * zc, axis=-1)
        log_den = logsumexp(self._log_weights - a * zc - self.raman_slope * self._w_nodes * k[..., None], axis=-1)
        return k, log_num - log_den

    def log_rho(self, z, f):
        z = np.asarray(z, dtype=float)
        k, log_ratio = self._z_terms(z)
        f = np.asarray(f, dtype=float)
        return log_ratio - evaluate_response(self.alpha, f) * z - self.raman_slope * f * k


class OdeGridProfile(PowerProfile):
    """Per-channel powers on a z grid; log-linear in z, nearest channel in f."""

    variant = "ode"

    def __init__(self, z_grid, freqs, powers, length: float | None = None):
        self.z_grid = np.asarray(z_grid, dtype=float)
        self.freqs = np.asarray(freqs, dtype=float)
        self.powers = np.asarray(powers, dtype=float)
        if self.powers.shape != (self.z_grid.size, self.freqs.size):
            raise ValueError("powers must have shape (len(z_grid), len(freqs))")
        self.length = float(self.z_grid[-1]) if length is None else length
        self._log = np.log(self.powers / self.powers[0])
        self._mid = (self.freqs[1:] + self.freqs[:-1]) / 2

    def _channel(self, f):
        return np.searchsorted(self._mid, np.asarray(f, dtype=float))

    def log_rho(self, z, f):
        z = np.asarray(z, dtype=float)
        ch = self._channel(f)
        zg = self.z_grid
        i = np.clip(np.searchsorted(zg, z, side="right") - 1, 0, zg.size - 2)
        t = (z - zg[i]) / (zg[i + 1] - zg[i])
        return (1 - t) * self._log[i, ch] + t * self._log[i + 1, ch]

    def to_csv(self, path, channel_indices=None):
        """Dump as ``z_m, channel_index, power_w`` rows."""
        idx = np.arange(1, self.freqs.size + 1) if channel_indices is None else channel_indices
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z_m", "channel_index", "power_w"])
            for zi, row in zip(self.z_grid, self.powers):
                for k, p in zip(idx, row):
                    w.writerow([repr(float(zi)), int(k), repr(float(p))])


# --------------------------------------------------------------------------
# functional entry points

def rho_simplified(z, f, spectrum: InputSpectrum, alpha: float, raman_slope: float):
    return SimplifiedSRSProfile(spectrum, alpha, raman_slope).rho(z, f)


def rho_general(z, f, spectrum: InputSpectrum, alpha, raman_slope: float):
    return GeneralSRSProfile(spectrum, alpha, raman_slope).rho(z, f)


def _ode_rhs(alpha, nu, nu_abs, c_r, exact_ratio):
    def rhs(p):
        s0 = p.sum()
        if not exact_ratio:
            return p * (c_r * (np.dot(nu, p) - nu * s0) - alpha)
        ap = nu_abs * p
        # exclusive cumulative sums over lower-frequency channels
        low1 = np.cumsum(ap) - ap
        low2 = np.cumsum(nu_abs * ap) - nu_abs * ap
        low0 = np.cumsum(p) - p
        high1 = ap.sum() - low1 - ap
        high0 = s0 - low0 - p
        gain = high1 - nu_abs * high0
        # sum_{i<k} (nu_i/nu_k)(nu_k - nu_i) P_i
        loss = low1 - low2 / nu_abs
        return p * (c_r * (gain - loss) - alpha)

    return rhs


def _rk4(rhs, p0, z_nodes):
    out = np.empty((z_nodes.size, p0.size))
    out[0] = p = p0
    for k in range(1, z_nodes.size):
        h = z_nodes[k] - z_nodes[k - 1]
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k] = p
    return out


def solve_srs_odes(plan: ChannelPlan, span: Span, z_grid=None, step: float = 100.0, exact_ratio: bool = False,
                   reference_frequency: float = DEFAULT_REFERENCE_FREQUENCY, rtol: float = 1e-7,
                   launch_powers=None) -> OdeGridProfile:
    """Integrate the coupled channel-power Raman equations with fixed-step RK4.

    The answer is checked against a half-step run; a relative discrepancy above
    ``rtol`` anywhere raises :class:`RefinementError`.
    """
    nu = plan.freqs
    if np.any(np.diff(nu) <= 0):
        raise ConfigError("channel plan must be sorted by frequency")
    p0 = plan.powers if launch_powers is None else np.asarray(launch_powers, dtype=float)
    length = span.length
    n = max(1, int(np.ceil(length / step)))
    base = np.linspace(0.0, length, n + 1)
    if z_grid is None:
        z_out = base
    else:
        z_out = np.asarray(z_grid, dtype=float)
        if z_out.min() < 0 or z_out.max() > length * (1 + 1e-12):
            raise ValueError("z_grid must lie inside the span")
        z_out = np.union1d([0.0], z_out)  # the profile is normalized at z = 0
    nodes = np.union1d(base, z_out)
    rhs = _ode_rhs(span.alpha(nu), nu, nu + reference_frequency, span.raman_slope, exact_ratio)
    coarse = _rk4(rhs, p0, nodes)
    fine_nodes = np.union1d(nodes, (nodes[1:] + nodes[:-1]) / 2)
    fine = _rk4(rhs, p0, fine_nodes)[np.searchsorted(fine_nodes, nodes)]
    pos = p0 > 0
    err = np.max(np.abs(coarse[:, pos] / fine[:, pos] - 1)) if pos.any() else 0.0
    if not err <= rtol:
        raise RefinementError(f"RK4 step {step} m too coarse: half-step discrepancy {err:.3g}")
    idx = np.searchsorted(nodes, z_out)
    return OdeGridProfile(z_out, nu, fine[idx], length=length)


def srs_gain_coefficient(profile: PowerProfile, z, f, length: float | None = None):
    """Local power gain d ln(rho)/dz [1/m] by finite differences."""
    length = profile.length if length is None else length
    z = np.asarray(z, dtype=float)
    if length is None:
        raise ValueError("span length unknown")
    if np.any(z < 0) or np.any(z > length):
        raise ValueError("z outside the span")
    if isinstance(profile, OdeGridProfile):
        zg = profile.z_grid
        ch = profile._channel(f)
        slope = np.gradient(profile._log, zg, axis=0)
        i = np.clip(np.searchsorted(zg, z, side="right") - 1, 0, zg.size - 2)
        t = (z - zg[i]) / (zg[i + 1] - zg[i])
        return (1 - t) * slope[i, ch] + t * slope[i + 1, ch]
    h = min(10.0, length / 1e4)
    lo = np.clip(z - h, 0, length)
    hi = np.clip(z + h, 0, length)
    central = (profile.log_rho(hi, f) - profile.log_rho(lo, f)) / (hi - lo)
    # second-order one-sided stencils at the span ends
    fwd = (-3 * profile.log_rho(z, f) + 4 * profile.log_rho(z + h, f) - profile.log_rho(z + 2 * h, f)) / (2 * h)
    bwd = (3 * profile.log_rho(z, f) - 4 * profile.log_rho(z - h, f) + profile.log_rho(z - 2 * h, f)) / (2 * h)
    return np.where(z - h < 0, fwd, np.where(z + h > length, bwd, central))


# --------------------------------------------------------------------------
# per-span profiles along a link

PROFILE_VARIANTS = ("flat", "simplified", "general", "ode")


def span_profile(plan: ChannelPlan, span: Span, variant: str = "simplified", spectrum: InputSpectrum | None = None,
                 **ode_kw) -> PowerProfile:
    spectrum = InputSpectrum.from_plan(plan) if spectrum is None else spectrum
    if variant == "flat" or span.raman_slope == 0 and variant != "ode":
        return FlatProfile(span.attenuation, span.length)
    if variant == "simplified":
        return SimplifiedSRSProfile(spectrum, span.attenuation, span.raman_slope, span.length)
    if variant == "general":
        return GeneralSRSProfile(spectrum, span.attenuation, span.raman_slope, span.length)
    if variant == "ode":
        return solve_srs_odes(plan, span, launch_powers=spectrum.psd * spectrum.widths, **ode_kw)
    raise ConfigError(f"unknown profile variant {variant!r}")


def output_log_gain(span: Span, profile: PowerProfile, f):
    """ln(g_s(f) rho_s(L_s, f)): net power gain of span plus amplifier."""
    if span.compensating:
        return np.zeros(np.shape(f)) if np.ndim(f) else 0.0
    return np.log(span.gain(f)) + profile.log_rho(span.length, f)


def link_profiles(plan: ChannelPlan, link: Link, variant: str = "simplified", **ode_kw) -> list:
    """One profile per span, each driven by the spectrum entering that span."""
    profiles = []
    scale = np.ones(len(plan))
    for span in link:
        spectrum = InputSpectrum.from_plan(plan, scale)
        prof = span_profile(plan, span, variant, spectrum, **ode_kw)
        profiles.append(prof)
        scale = scale * np.exp(output_log_gain(span, prof, plan.freqs))
    return profiles
