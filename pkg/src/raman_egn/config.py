"""Configuration files: TOML or JSON with optional engineering-unit strings.

A plain number is always read as SI (Hz, W, m, Np/m, s^2/m, linear gain ...);
a string such as ``"0.2 dB/km"`` or ``"10.001 GHz"`` carries its unit. The
normalized form written by :func:`emit_normalized` uses plain SI numbers only,
so reading it back gives the same configuration.

Sections::

    [channels]          # grid shorthand ...
    count = 5
    spacing = "10.001 GHz"
    bandwidth = "10 GHz"
    power = "0 dBm"
    format = "QPSK"
    # ... or an explicit list: [[channels.list]] center, bandwidth, power, format

    [[spans]]
    length = "100 km"
    attenuation = "0.2 dB/km"          # or {freqs = [...], values = [...], unit = "dB/km"}
    dispersion = "17 ps/nm/km"          # with slope and wavelength, or beta2/beta3
    gamma = "1.2 1/W/km"
    raman_slope = "0.5 1/W/km/THz"      # or raman_product = "0.089 1/km" (C_r P_tot B_tot)
    gain = "compensate"                 # or "20 dB", a number, or a table
    repeat = 1

    [formats.NAME]
    points = [[1, 0], [-1, 0]]          # or moments = {m2 = 1, m4 = 2, m6 = 6}

    [run]
    seed = 1
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .core import (COMPENSATE, Channel, ChannelPlan, ConfigError, Configuration, Link, Span, Tabulated,
                   db_to_linear, dispersion_params, validate)
from .modulation import BUILTIN_FORMATS, ModulationFormat, format_from_config

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

_LN10_10 = math.log(10.0) / 10.0

# unit -> multiplier to SI, per quantity
_UNITS = {
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12},
    "power": {"w": 1.0, "mw": 1e-3, "uw": 1e-6},
    "length": {"m": 1.0, "km": 1e3},
    "wavelength": {"m": 1.0, "um": 1e-6, "nm": 1e-9},
    "attenuation": {"1/m": 1.0, "np/m": 1.0, "np/km": 1e-3, "db/km": _LN10_10 * 1e-3, "db/m": _LN10_10},
    "dispersion": {"s/m^2": 1.0, "s/m2": 1.0, "ps/nm/km": 1e-6, "ps/(nm*km)": 1e-6},
    "slope": {"s/m^3": 1.0, "s/m3": 1.0, "ps/nm^2/km": 1e3, "ps/nm2/km": 1e3, "ps/(nm^2*km)": 1e3},
    "beta2": {"s^2/m": 1.0, "s2/m": 1.0, "ps^2/km": 1e-27, "ps2/km": 1e-27},
    "beta3": {"s^3/m": 1.0, "s3/m": 1.0, "ps^3/km": 1e-39, "ps3/km": 1e-39},
    "gamma": {"1/w/m": 1.0, "1/(w*m)": 1.0, "1/w/km": 1e-3, "1/(w*km)": 1e-3},
    "raman": {"1/w/m/hz": 1.0, "1/w/km/thz": 1e-15, "1/(w*km*thz)": 1e-15},
    "inverse_length": {"1/m": 1.0, "1/km": 1e-3},
    "gain": {"": 1.0},
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(value, kind: str, where: str = "") -> float:
    """Convert a number (SI) or a ``"<number> <unit>"`` string to SI."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a number or unit string, got {value!r}")
    m = _NUMBER.match(value)
    if not m:
        raise ConfigError(f"{where}: cannot parse {value!r}")
    x, unit = float(m.group(1)), m.group(2).lower().replace(" ", "")
    if kind == "power" and unit in ("dbm", "dbw"):
        return float(db_to_linear(x) * (1e-3 if unit == "dbm" else 1.0))
    if kind == "gain" and unit == "db":
        return float(db_to_linear(x))
    table = {u.replace(" ", ""): f for u, f in _UNITS[kind].items()}
    if unit not in table:
        raise ConfigError(f"{where}: unknown unit {m.group(2)!r} for {kind}")
    return x * table[unit]


def _parse_table(entry, kind: str, where: str) -> Tabulated:
    freqs = [parse_quantity(f, "frequency", where) for f in entry["freqs"]]
    unit = entry.get("unit", "")
    vals = [parse_quantity(f"{v} {unit}" if unit and not isinstance(v, str) else v, kind, where) for v in entry["values"]]
    return Tabulated(tuple(freqs), tuple(vals))


def _parse_response(value, kind: str, where: str):
    if isinstance(value, dict):
        return _parse_table(value, kind, where)
    return parse_quantity(value, kind, where)


def _channels(sec: dict) -> ChannelPlan:
    if "list" in sec:
        chans = []
        for i, e in enumerate(sec["list"], start=1):
            w = f"channel {i}"
            chans.append(Channel(i, parse_quantity(e["center"], "frequency", w), parse_quantity(e["bandwidth"], "frequency", w),
                                 parse_quantity(e["power"], "power", w), e.get("format", "QPSK")))
        return ChannelPlan(tuple(chans))
    try:
        n = int(sec["count"])
        spacing = parse_quantity(sec["spacing"], "frequency", "channels")
        bw = parse_quantity(sec["bandwidth"], "frequency", "channels")
        power = parse_quantity(sec["power"], "power", "channels")
    except KeyError as exc:
        raise ConfigError(f"channels: missing key {exc.args[0]!r}") from None
    return ChannelPlan.uniform(n, spacing, bw, power, sec.get("format", "QPSK"))


def _span(e: dict, where: str, plan: ChannelPlan) -> Span:
    try:
        length = parse_quantity(e["length"], "length", where)
        alpha = _parse_response(e["attenuation"], "attenuation", where)
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None
    if "beta2" in e:
        beta2 = parse_quantity(e["beta2"], "beta2", where)
        beta3 = parse_quantity(e.get("beta3", 0.0), "beta3", where)
    elif "dispersion" in e:
        d = parse_quantity(e["dispersion"], "dispersion", where)
        s = parse_quantity(e.get("slope", 0.0), "slope", where)
        lam = parse_quantity(e.get("wavelength", "1550 nm"), "wavelength", where)
        beta2, beta3 = dispersion_params(d, s, lam)
    else:
        raise ConfigError(f"{where}: need beta2 or dispersion")
    gamma = parse_quantity(e.get("gamma", 0.0), "gamma", where)
    if "raman_product" in e:
        lo, hi = plan.band_edges
        ptot = plan.total_power
        if not ptot > 0:
            raise ConfigError(f"{where}: raman_product needs a positive total power")
        c_r = parse_quantity(e["raman_product"], "inverse_length", where) / (ptot * (hi - lo))
    else:
        c_r = parse_quantity(e.get("raman_slope", 0.0), "raman", where)
    gain = e.get("gain", COMPENSATE)
    if not (isinstance(gain, str) and gain.strip().lower() == COMPENSATE):
        gain = _parse_response(gain, "gain", where)
    else:
        gain = COMPENSATE
    return Span(length, alpha, beta2, beta3, gamma, c_r, gain)


def parse_config(data: dict) -> Configuration:
    """Build and validate a configuration from a parsed key-value tree."""
    if "channels" not in data or "spans" not in data:
        raise ConfigError("config needs 'channels' and 'spans' sections")
    plan = _channels(data["channels"])
    spans = []
    for s, e in enumerate(data["spans"], start=1):
        span = _span(e, f"span {s}", plan)
        spans.extend([span] * int(e.get("repeat", 1)))
    formats = dict(BUILTIN_FORMATS)
    for name, entry in data.get("formats", {}).items():
        formats[name] = format_from_config(name, entry)
    run = dict(data.get("run", {}))
    return validate(plan, Link(tuple(spans)), formats, run)


def load_config(path) -> Configuration:
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        try:
            data = tomllib.loads(text.decode())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)


def _response_si(r):
    if isinstance(r, Tabulated):
        return {"freqs": list(r.freqs), "values": list(r.values)}
    return r


def normalized(cfg: Configuration) -> dict:
    """SI, number-only representation of ``cfg`` (custom formats included)."""
    formats = {}
    for name, fmt in cfg.formats.items():
        if name in BUILTIN_FORMATS and fmt is BUILTIN_FORMATS[name]:
            continue
        formats[name] = _format_si(fmt)
    return {
        "channels": {"list": [{"center": ch.center_freq, "bandwidth": ch.bandwidth, "power": ch.launch_power,
                               "format": ch.format_id} for ch in cfg.plan]},
        "spans": [{"length": s.length, "attenuation": _response_si(s.attenuation), "beta2": s.beta2, "beta3": s.beta3,
                   "gamma": s.gamma, "raman_slope": s.raman_slope, "gain": _response_si(s.amp_gain)} for s in cfg.link],
        "formats": formats,
        "run": cfg.run,
    }


def _format_si(fmt: ModulationFormat) -> dict:
    if fmt.points is not None:
        return {"points": [[float(p.real), float(p.imag)] for p in np.asarray(fmt.points)]}
    out = {"moments": {"m2": float(fmt.m2), "m4": float(fmt.m4), "m6": float(fmt.m6)}}
    if fmt.gaussian:
        out["gaussian"] = True
    return out


def emit_normalized(cfg: Configuration, path=None) -> str:
    text = json.dumps(normalized(cfg), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
