"""Per-channel NLI power and the NLI coefficient eta.

sigma^2_kappa = sum over triplets of P1 P2 P3 (D + [k1 = k3] Phi E
+ [k1 = k2] Phi F + [k1 = k2 = k3] Psi G). The D, E, F, G integrals depend on
the launch spectrum only through the SRS power profiles, never on the formats,
so each distinct term is integrated once and reused.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import ChannelPlan, Link
from ..modulation import get_format, phi, psi
from .integrands import term_layout
from .link import LinkFunctionContext
from .montecarlo import McResult, McSettings, mc_integrate
from .triplets import BOUNDS, GROUPS, enumerate_triplets

logger = logging.getLogger(__name__)

_KIND_CODE = {"D": 0, "E": 1, "F": 2, "G": 3}


@dataclass(frozen=True)
class NliOptions:
    mode: str = "egn"  # or "gn": D terms only
    profile: str = "simplified"
    mu_kernel: str = "table"
    panels: int = 128
    triplet_bound: str = "support"  # or "paper"
    mc: McSettings = field(default_factory=McSettings)

    def __post_init__(self):
        if self.mode not in ("egn", "gn"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.triplet_bound not in BOUNDS:
            raise ValueError(f"unknown triplet bound {self.triplet_bound!r}")


@dataclass
class ChannelNli:
    channel: int
    freq_hz: float
    sigma2: float
    eta: float
    by_class: dict
    samples: int
    converged: bool
    half_width_db: float
    uniform_launch: bool
    net_gain: float

    def group_sigma2(self, group: str) -> float:
        return sum(v for k, v in self.by_class.items() if GROUPS[k] == group)


@dataclass
class NliReport:
    channels: list
    seed: int
    options: NliOptions

    @property
    def converged(self) -> bool:
        return all(c.converged for c in self.channels)


class NliModel:
    """Link context plus a cache of integrated terms, shared across channels and formats."""

    def __init__(self, plan: ChannelPlan, link: Link, options: NliOptions = NliOptions(), formats: dict | None = None):
        self.plan = plan
        self.link = link
        self.options = options
        self.formats = formats or {}
        self.ctx = LinkFunctionContext.build(plan, link, options.profile, mode=options.mu_kernel, panels=options.panels)
        self._terms: dict = {}

    def term(self, kind: str, t, kappa: int, ref_scale: float | None = None) -> McResult:
        k1, k2 = (min(t.k1, t.k2), max(t.k1, t.k2)) if kind == "D" else (t.k1, t.k2)
        key = (_KIND_CODE[kind], kappa, k1, k2, t.k3)
        if key not in self._terms:
            layout = term_layout(kind, t, kappa, self.ctx)
            self._terms[key] = mc_integrate(layout, key, self.options.mc, ref_scale)
            r = self._terms[key]
            logger.debug("term %s%s kappa=%d: %.6g (%d samples, converged=%s)", kind, t.indices, kappa, r.value,
                         r.samples, r.converged)
        return self._terms[key]

    def _factors(self, k: int):
        fmt = get_format(self.plan[k].format_id, self.formats)
        return phi(fmt), psi(fmt)

    def channel(self, kappa: int) -> ChannelNli:
        plan, egn = self.plan, self.options.mode == "egn"
        powers = plan.powers
        sigma2 = 0.0
        var = 0.0
        by_class: dict = {}
        samples, converged = 0, True
        for t in enumerate_triplets(plan, kappa, self.options.triplet_bound):
            w = powers[t.k1 - 1] * powers[t.k2 - 1] * powers[t.k3 - 1]
            if w == 0:
                continue
            d = self.term("D", t, kappa)
            parts = [(1.0, d)]
            if egn:
                ph, ps = self._factors(t.k1)
                ref = abs(d.value)
                if t.k1 == t.k3 and ph != 0:
                    parts.append((ph, self.term("E", t, kappa, ref)))
                if t.k1 == t.k2 and ph != 0:
                    parts.append((ph, self.term("F", t, kappa, ref)))
                if t.k1 == t.k2 == t.k3 and ps != 0:
                    parts.append((ps, self.term("G", t, kappa, ref)))
            contrib = w * sum(c * r.value for c, r in parts)
            sigma2 += contrib
            var += sum((w * c * r.std_error) ** 2 for c, r in parts)
            by_class[t.cls] = by_class.get(t.cls, 0.0) + contrib
            samples += sum(r.samples for _, r in parts)
            converged &= all(r.converged for _, r in parts)
        p = powers[kappa - 1]
        uniform = bool(np.all(powers == powers[0]))
        net = float(self.ctx.net_gain(plan[kappa].center_freq))
        eta = sigma2 / (p**3 * net) if p > 0 else math.nan
        hw = 10 * math.log10(1 + 1.96 * math.sqrt(var) / abs(sigma2)) if sigma2 else 0.0
        return ChannelNli(kappa, plan[kappa].center_freq, sigma2, eta, by_class, samples, converged, hw, uniform, net)

    def report(self, channels="all") -> NliReport:
        idx = range(1, len(self.plan) + 1) if channels == "all" else [int(c) for c in np.atleast_1d(channels)]
        return NliReport([self.channel(k) for k in idx], self.options.mc.seed, self.options)

    def with_formats(self, plan: ChannelPlan) -> "NliModel":
        """Same link, powers and cached terms, different channel formats."""
        if not np.array_equal(plan.powers, self.plan.powers) or not np.array_equal(plan.freqs, self.plan.freqs):
            raise ValueError("only formats may differ")
        other = object.__new__(NliModel)
        other.__dict__.update(self.__dict__)
        other.plan = plan
        return other


def nli_power(plan: ChannelPlan, link: Link, kappa: int, options: NliOptions = NliOptions(), formats=None) -> ChannelNli:
    return NliModel(plan, link, options, formats).channel(kappa)


def nli_report(plan: ChannelPlan, link: Link, channels="all", options: NliOptions = NliOptions(), formats=None) -> NliReport:
    return NliModel(plan, link, options, formats).report(channels)


def with_seed(options: NliOptions, seed: int) -> NliOptions:
    return replace(options, mc=replace(options.mc, seed=seed))
