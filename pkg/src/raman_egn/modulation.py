"""Modulation formats and their normalized moment factors.

``phi`` is the excess kurtosis E|b|^4/E^2|b|^2 - 2 and ``psi`` the sixth-order
factor E|b|^6/E^3|b|^2 - 9 E|b|^4/E^2|b|^2 + 12. Both vanish for a circular
complex Gaussian, so every modulation-dependent NLI correction vanishes too.
Moments are per polarization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigError


@dataclass(frozen=True, eq=False)
class ModulationFormat:
    """Either a uniform constellation (``points``) or explicit moments.

    A format with ``gaussian=True`` draws circular complex Gaussian symbols.
    """

    name: str
    points: Optional[np.ndarray] = None
    m2: Optional[float] = None
    m4: Optional[float] = None
    m6: Optional[float] = None
    gaussian: bool = False

    def __post_init__(self):
        if self.points is not None:
            pts = np.asarray(self.points, dtype=complex).ravel()
            if pts.size < 2:
                raise ConfigError(f"format {self.name!r}: constellation needs at least 2 points")
            rms = np.sqrt(np.mean(np.abs(pts) ** 2))
            if not rms > 0:
                raise ConfigError(f"format {self.name!r}: constellation has zero energy")
            if abs(pts.mean()) / rms > 1e-12:
                raise ConfigError(f"format {self.name!r}: constellation must have zero mean")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
            return
        if None in (self.m2, self.m4, self.m6):
            raise ConfigError(f"format {self.name!r}: need points or all of m2, m4, m6")
        m2, m4, m6 = float(self.m2), float(self.m4), float(self.m6)
        if not m2 > 0:
            raise ConfigError(f"format {self.name!r}: m2 must be positive")
        # Jensen and Cauchy-Schwarz style bounds on |b|^2 moments
        if m4 < m2**2 * (1 - 1e-12) or m6 < m4 * m2 * (1 - 1e-12):
            raise ConfigError(f"format {self.name!r}: moments violate m4 >= m2^2 or m6 >= m4*m2")

    @property
    def is_discrete(self) -> bool:
        return self.points is not None

    def normalized_points(self) -> np.ndarray:
        """Constellation scaled to unit average energy."""
        if self.points is None:
            raise ValueError(f"format {self.name!r} has no constellation")
        return self.points / np.sqrt(np.mean(np.abs(self.points) ** 2))

    def sample(self, rng: np.random.Generator, n: int):
        """Draw ``n`` unit-energy symbols.

        Returns ``(symbols, indices)``; indices are ``None`` for Gaussian formats.
        """
        if self.points is not None:
            idx = rng.integers(0, self.points.size, size=n)
            return self.normalized_points()[idx], idx
        if self.gaussian:
            z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
            return z, None
        raise ValueError(f"format {self.name!r} is defined by moments only and cannot be sampled")


def moments(fmt: ModulationFormat) -> tuple[float, float, float]:
    """(E|b|^2, E|b|^4, E|b|^6) under a uniform prior, or the explicit values."""
    if fmt.points is not None:
        p2 = np.abs(fmt.points) ** 2
        return float(np.mean(p2)), float(np.mean(p2**2)), float(np.mean(p2**3))
    return float(fmt.m2), float(fmt.m4), float(fmt.m6)


def phi(fmt: ModulationFormat) -> float:
    m2, m4, _ = moments(fmt)
    if m2 == 0:
        raise ValueError("m2 = 0")
    return m4 / m2**2 - 2.0


def psi(fmt: ModulationFormat) -> float:
    m2, m4, m6 = moments(fmt)
    if m2 == 0:
        raise ValueError("m2 = 0")
    return m6 / m2**3 - 9.0 * m4 / m2**2 + 12.0


def square_qam(order: int) -> np.ndarray:
    side = int(round(np.sqrt(order)))
    if side * side != order or side < 2:
        raise ValueError("square QAM needs a perfect-square order")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    re, im = np.meshgrid(levels, levels)
    return (re + 1j * im).ravel()


def _builtin_formats() -> dict:
    qpsk = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    return {
        "QPSK": ModulationFormat("QPSK", points=qpsk),
        "16QAM": ModulationFormat("16QAM", points=square_qam(16)),
        "64QAM": ModulationFormat("64QAM", points=square_qam(64)),
        "GAUSSIAN": ModulationFormat("GAUSSIAN", m2=1.0, m4=2.0, m6=6.0, gaussian=True),
    }


BUILTIN_FORMATS = _builtin_formats()

_ALIASES = {
    "PM-QPSK": "QPSK",
    "PM-16QAM": "16QAM",
    "PM-64QAM": "64QAM",
    "GAUSS": "GAUSSIAN",
    "2D-GAUSSIAN": "GAUSSIAN",
    "PM-2D-GAUSS": "GAUSSIAN",
}


def get_format(name: str, registry: dict | None = None) -> ModulationFormat:
    """Look ``name`` up in ``registry`` first, then among the built-ins."""
    if registry and name in registry:
        return registry[name]
    key = _ALIASES.get(name.upper(), name.upper())
    try:
        return BUILTIN_FORMATS[key]
    except KeyError:
        raise ConfigError(f"unknown modulation format {name!r}") from None


def format_from_config(name: str, entry: dict) -> ModulationFormat:
    """Build a format from a config ``formats`` entry (``points`` or ``moments``)."""
    if "points" in entry:
        pts = np.asarray(entry["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError(f"format {name!r}: points must be a list of [re, im] pairs")
        return ModulationFormat(name, points=pts[:, 0] + 1j * pts[:, 1])
    if "moments" in entry:
        m = entry["moments"]
        return ModulationFormat(name, m2=m["m2"], m4=m["m4"], m6=m["m6"], gaussian=bool(entry.get("gaussian", False)))
    raise ConfigError(f"format {name!r}: needs 'points' or 'moments'")
