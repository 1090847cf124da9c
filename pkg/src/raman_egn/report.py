"""CSV / JSON emission of model, split-step and comparison results.

dB columns use 10 log10(x * 1 W^2) rounded to 3 decimals; raw SI values keep
full precision (``repr`` of the float).
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .egn.model import ChannelNli, NliOptions, NliReport
from .egn.montecarlo import McSettings
from .srs import PowerProfile

NLI_COLUMNS = ["channel", "freq_hz", "eta_db", "sigma2_w2", "sci_db", "xci_db", "mci_db", "samples", "converged"]
SSFM_COLUMNS = ["channel", "freq_hz", "snr_db", "eta_db"]
COMPARE_COLUMNS = ["channel", "freq_hz", "eta_model_db", "eta_ssfm_db", "delta_db"]
PROFILE_COLUMNS = ["z_m", "channel_index", "power_w"]


def db(x) -> float:
    """10 log10(x) rounded to 3 decimals; nan for x <= 0 or non-finite x."""
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        return math.nan
    return round(10 * math.log10(x), 3)


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def nli_rows(report: NliReport) -> list[dict]:
    rows = []
    for c in report.channels:
        rows.append({
            "channel": c.channel,
            "freq_hz": float(c.freq_hz),
            "eta_db": db(c.eta),
            "sigma2_w2": float(c.sigma2),
            "sci_db": db(c.group_sigma2("SCI") / c.sigma2 * c.eta) if c.sigma2 > 0 else math.nan,
            "xci_db": db(c.group_sigma2("XCI") / c.sigma2 * c.eta) if c.sigma2 > 0 else math.nan,
            "mci_db": db(c.group_sigma2("MCI") / c.sigma2 * c.eta) if c.sigma2 > 0 else math.nan,
            "samples": int(c.samples),
            "converged": bool(c.converged),
        })
    return rows


def ssfm_rows(result) -> list[dict]:
    return [{"channel": int(k), "freq_hz": float(f), "snr_db": db(s), "eta_db": db(e)}
            for k, f, s, e in zip(result.channels, result.freqs, result.snr, result.eta)]


def compare_rows(report: NliReport, result) -> list[dict]:
    """Per-channel eta of model and split-step run, and their difference in dB."""
    ssfm = {int(k): float(e) for k, e in zip(result.channels, result.eta)}
    rows = []
    for c in report.channels:
        if c.channel not in ssfm:
            continue
        m, s = db(c.eta), db(ssfm[c.channel])
        rows.append({"channel": c.channel, "freq_hz": float(c.freq_hz), "eta_model_db": m, "eta_ssfm_db": s,
                     "delta_db": round(m - s, 3)})
    return rows


def gap_summary(rows: list[dict]) -> dict:
    gaps = np.abs([r["delta_db"] for r in rows])
    if gaps.size == 0:
        return {"max_gap_db": math.nan, "mean_gap_db": math.nan}
    return {"max_gap_db": round(float(np.max(gaps)), 3), "mean_gap_db": round(float(np.mean(gaps)), 3)}


def profile_rows(plan, profile: PowerProfile, z_grid, scale=None) -> list[dict]:
    """Channel powers P_k * scale_k * rho(z, nu_k) on ``z_grid``."""
    z = np.asarray(z_grid, dtype=float)
    p0 = plan.powers * (1.0 if scale is None else np.asarray(scale))
    rho = profile.rho(z[:, None], plan.freqs[None, :])
    return [{"z_m": float(zi), "channel_index": k + 1, "power_w": float(p0[k] * r)}
            for zi, row in zip(z, rho) for k, r in enumerate(row)]


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    """Read a report CSV back; numbers become float/int, booleans bool."""
    def conv(v):
        if v in ("true", "false"):
            return v == "true"
        try:
            return int(v)
        except ValueError:
            return float(v)

    with open(path, newline="") as fh:
        return [{k: conv(v) for k, v in row.items()} for row in csv.DictReader(fh)]


# --------------------------------------------------------------------------
# JSON

def report_to_dict(report: NliReport) -> dict:
    o = report.options
    return {
        "seed": report.seed,
        "options": {"mode": o.mode, "profile": o.profile, "mu_kernel": o.mu_kernel, "panels": o.panels,
                    "triplet_bound": o.triplet_bound, "mc": vars(o.mc).copy()},
        "channels": [{"channel": c.channel, "freq_hz": c.freq_hz, "sigma2": c.sigma2, "eta": c.eta,
                      "by_class": dict(c.by_class), "samples": c.samples, "converged": c.converged,
                      "half_width_db": c.half_width_db, "uniform_launch": c.uniform_launch, "net_gain": c.net_gain}
                     for c in report.channels],
    }


def report_from_dict(data: dict) -> NliReport:
    o = dict(data["options"])
    options = NliOptions(mc=McSettings(**o.pop("mc")), **o)
    return NliReport([ChannelNli(**c) for c in data["channels"]], data["seed"], options)


def emit_report(report: NliReport, path=None, fmt: str = "csv") -> str:
    """Serialize ``report`` as CSV (stable column order) or JSON; write to ``path`` if given."""
    if fmt == "csv":
        text = rows_to_csv(nli_rows(report), NLI_COLUMNS)
    elif fmt == "json":
        text = json.dumps(report_to_dict(report), indent=2, allow_nan=True) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_report(path) -> NliReport:
    return report_from_dict(json.loads(Path(path).read_text()))
