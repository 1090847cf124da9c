"""Units, WDM channel plan and fiber link data model.

Everything inside the package is SI: Hz, W, m, s and Np. Frequencies are
baseband, i.e. relative to the centre of the transmitted band. Engineering
units only appear when a configuration file is read (see :mod:`raman_egn.config`)
or when a report is written.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

logger = logging.getLogger(__name__)

COMPENSATE = "compensate"


class ConfigError(ValueError):
    """Invalid configuration; ``violations`` lists every problem found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# --------------------------------------------------------------------------
# unit conversions

def db_to_linear(x):
    return np.power(10.0, np.divide(x, 10.0))


def linear_to_db(r):
    if np.any(np.asarray(r) <= 0):
        raise ValueError("linear_to_db needs a strictly positive ratio")
    return 10.0 * np.log10(r)


def dbm_to_watt(p_dbm):
    return db_to_linear(p_dbm) * 1e-3


def watt_to_dbm(p):
    return linear_to_db(p) + 30.0


def attenuation_np_per_m(a_db_per_km: float) -> float:
    """Power attenuation in dB/km to the exponential coefficient in 1/m."""
    if a_db_per_km < 0:
        raise ValueError("attenuation must be non-negative")
    return a_db_per_km * math.log(10.0) / 10.0 / 1000.0


def dispersion_params(D: float, S: float, wavelength: float) -> tuple[float, float]:
    """Convert dispersion D [s/m^2] and slope S [s/m^3] at ``wavelength`` [m]
    into (beta2 [s^2/m], beta3 [s^3/m])."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    beta2 = -D * wavelength**2 / (2 * math.pi * SPEED_OF_LIGHT)
    beta3 = (2 * D + wavelength * S) * wavelength**3 / (2 * math.pi * SPEED_OF_LIGHT) ** 2
    return beta2, beta3


# --------------------------------------------------------------------------
# tabulated frequency responses

@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear function of baseband frequency, clamped outside the table."""

    freqs: tuple
    values: tuple

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.ndim != 1 or f.shape != v.shape or f.size < 1:
            raise ConfigError("tabulated response needs matching 1-D freqs/values")
        if np.any(np.diff(f) <= 0):
            raise ConfigError("tabulated frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", tuple(float(x) for x in f))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.asarray(self.freqs)

    def __call__(self, f):
        fa = np.asarray(f, dtype=float)
        xp = np.asarray(self.freqs)
        if fa.size and (fa.min() < xp[0] or fa.max() > xp[-1]):
            warnings.warn("frequency outside tabulated range, clamping to end values", RuntimeWarning, stacklevel=2)
        out = np.interp(fa, xp, np.asarray(self.values))
        return out if np.ndim(f) else float(out)

    def covers(self, lo: float, hi: float) -> bool:
        return self.freqs[0] <= lo and self.freqs[-1] >= hi


Response = Union[float, Tabulated]


def evaluate_response(resp: Response, f):
    """Evaluate a scalar-or-tabulated response at frequency/frequencies ``f``."""
    if isinstance(resp, Tabulated):
        return resp(f)
    if np.ndim(f):
        return np.full(np.shape(f), float(resp))
    return float(resp)


# --------------------------------------------------------------------------
# channel plan

@dataclass(frozen=True)
class Channel:
    index: int
    center_freq: float
    bandwidth: float
    launch_power: float
    format_id: str = "QPSK"

    @property
    def lower_edge(self) -> float:
        return self.center_freq - self.bandwidth / 2

    @property
    def upper_edge(self) -> float:
        return self.center_freq + self.bandwidth / 2


@dataclass(frozen=True)
class ChannelPlan:
    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))

    def __len__(self):
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def __getitem__(self, kappa: int) -> Channel:
        """1-based channel lookup."""
        if not 1 <= kappa <= len(self.channels):
            raise IndexError(f"channel index {kappa} outside 1..{len(self.channels)}")
        return self.channels[kappa - 1]

    @property
    def freqs(self) -> np.ndarray:
        return np.array([ch.center_freq for ch in self.channels])

    @property
    def bandwidths(self) -> np.ndarray:
        return np.array([ch.bandwidth for ch in self.channels])

    @property
    def powers(self) -> np.ndarray:
        return np.array([ch.launch_power for ch in self.channels])

    @property
    def total_power(self) -> float:
        return float(self.powers.sum())

    @property
    def band_edges(self) -> tuple[float, float]:
        return (min(ch.lower_edge for ch in self.channels), max(ch.upper_edge for ch in self.channels))

    @property
    def format_ids(self) -> list:
        return [ch.format_id for ch in self.channels]

    def with_powers(self, powers) -> "ChannelPlan":
        powers = np.broadcast_to(np.asarray(powers, dtype=float), (len(self),))
        return ChannelPlan(
            tuple(Channel(ch.index, ch.center_freq, ch.bandwidth, float(p), ch.format_id) for ch, p in zip(self.channels, powers))
        )

    def with_format(self, format_id: str) -> "ChannelPlan":
        return ChannelPlan(
            tuple(Channel(ch.index, ch.center_freq, ch.bandwidth, ch.launch_power, format_id) for ch in self.channels)
        )

    @classmethod
    def uniform(cls, n_channels: int, spacing: float, bandwidth: float, power: float, format_id: str = "QPSK") -> "ChannelPlan":
        """``n_channels`` equally spaced channels centred on 0 Hz."""
        offsets = (np.arange(n_channels) - (n_channels - 1) / 2) * spacing
        return cls(tuple(Channel(i + 1, float(f), bandwidth, power, format_id) for i, f in enumerate(offsets)))


# --------------------------------------------------------------------------
# link

@dataclass(frozen=True)
class Span:
    length: float
    attenuation: Response
    beta2: float
    beta3: float = 0.0
    gamma: float = 0.0
    raman_slope: float = 0.0
    amp_gain: Union[float, Tabulated, str] = COMPENSATE

    def alpha(self, f):
        return evaluate_response(self.attenuation, f)

    @property
    def flat_loss(self) -> bool:
        return not isinstance(self.attenuation, Tabulated)

    @property
    def compensating(self) -> bool:
        return isinstance(self.amp_gain, str) and self.amp_gain == COMPENSATE

    def gain(self, f):
        """Amplifier power gain; only meaningful for non-compensating amplifiers."""
        if self.compensating:
            raise ValueError("compensating amplifier gain depends on the power profile")
        return evaluate_response(self.amp_gain, f)


@dataclass(frozen=True)
class Link:
    spans: tuple

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(self.spans))

    @property
    def n_spans(self) -> int:
        return len(self.spans)

    def __len__(self):
        return len(self.spans)

    def __iter__(self):
        return iter(self.spans)

    @classmethod
    def repeat(cls, span: Span, n: int) -> "Link":
        return cls((span,) * n)


# --------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Configuration:
    """Validated, SI-normalized configuration shared by every module."""

    plan: ChannelPlan
    link: Link
    formats: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)


def _check_response(name, resp, lo, hi, where, violations, allow_compensate=False):
    if allow_compensate and isinstance(resp, str):
        if resp != COMPENSATE:
            violations.append(f"{where}: unknown gain keyword {resp!r}")
        return
    if isinstance(resp, Tabulated):
        if any(v <= 0 for v in resp.values):
            violations.append(f"{where}: {name} table must be strictly positive")
        if not resp.covers(lo, hi):
            violations.append(f"{where}: {name} table does not cover the band [{lo:.6g}, {hi:.6g}] Hz")
    else:
        try:
            val = float(resp)
        except (TypeError, ValueError):
            violations.append(f"{where}: {name} must be a number or a table")
            return
        if name == "attenuation" and val < 0:
            violations.append(f"{where}: attenuation must be non-negative")
        if name == "gain" and val <= 0:
            violations.append(f"{where}: gain must be positive")


def validate(plan: ChannelPlan, link: Link, formats: dict | None = None, run: dict | None = None) -> Configuration:
    """Check every invariant of the plan and link.

    Raises :class:`ConfigError` listing all violations with channel/span indices.
    """
    violations = []
    chans = list(plan.channels)
    if not chans:
        violations.append("channel plan is empty")
    for i, ch in enumerate(chans, start=1):
        if ch.index != i:
            violations.append(f"channel {i}: index {ch.index} is not consecutive 1-based")
        if not ch.bandwidth > 0:
            violations.append(f"channel {ch.index}: bandwidth must be positive")
        if not ch.launch_power >= 0:
            violations.append(f"channel {ch.index}: launch power must be non-negative")
        if formats is not None and ch.format_id not in formats:
            violations.append(f"channel {ch.index}: unknown format {ch.format_id!r}")
    for a, b in zip(chans, chans[1:]):
        if b.center_freq <= a.center_freq:
            violations.append(f"channels {a.index} and {b.index}: not sorted by frequency")
        elif a.upper_edge > b.lower_edge:
            violations.append(f"channels {a.index} and {b.index}: overlapping bands")
    if link.n_spans < 1:
        violations.append("link needs at least one span")
    lo, hi = plan.band_edges if chans else (0.0, 0.0)
    for s, span in enumerate(link.spans, start=1):
        where = f"span {s}"
        if not span.length > 0:
            violations.append(f"{where}: length must be positive")
        if span.gamma < 0:
            violations.append(f"{where}: gamma must be non-negative")
        if span.raman_slope < 0:
            violations.append(f"{where}: Raman gain slope must be non-negative")
        _check_response("attenuation", span.attenuation, lo, hi, where, violations)
        _check_response("gain", span.amp_gain, lo, hi, where, violations, allow_compensate=True)
    if violations:
        raise ConfigError(violations)
    return Configuration(plan=plan, link=link, formats=dict(formats or {}), run=dict(run or {}))
