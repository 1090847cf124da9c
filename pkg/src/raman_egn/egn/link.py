"""Phase mismatch, per-span kernel mu_s and the coherent link function Upsilon.

All frequencies are absolute baseband frequencies (Hz). Functions broadcast
over ``f1, f2, f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ChannelPlan, Link, Span
from ..srs import PowerProfile, link_profiles, output_log_gain

FOUR_PI2 = 4 * np.pi**2
MU_KERNELS = ("table", "exact")


class QuadratureError(RuntimeError):
    """Gauss-Legendre doubling hit the node cap; ``estimates`` holds the last two results."""

    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


def phase_rate(f1, f2, f, span: Span):
    """d(phi_s)/dz [rad/m]."""
    f1, f2, f = np.asarray(f1), np.asarray(f2), np.asarray(f)
    return FOUR_PI2 * (f1 - f) * (f2 - f) * (span.beta2 + np.pi * span.beta3 * (f1 + f2))


def phase_mismatch(f1, f2, f, span: Span, z):
    """Accumulated FWM phase mismatch phi_s(f1, f2, f, z) [rad]."""
    return phase_rate(f1, f2, f, span) * np.asarray(z)


def kernel_log_power(profile: PowerProfile, z, f1, f2, f, mode: str = "table"):
    """Log of the real power kernel inside mu_s.

    ``table`` uses rho(z, f1 + f2 - f); ``exact`` uses
    sqrt(rho(f1) rho(f2) rho(f1 + f2 - f) / rho(f)). The two agree whenever
    ln(rho) is affine in f.
    """
    f3 = f1 + f2 - f
    if mode == "table":
        return profile.log_rho(z, f3)
    if mode == "exact":
        lr = profile.log_rho
        return 0.5 * (lr(z, f1) + lr(z, f2) + lr(z, f3) - lr(z, f))
    raise ValueError(f"unknown mu kernel {mode!r}")


def _exprel(d):
    """(exp(d) - 1) / d for complex d, with its Taylor series near 0."""
    small = np.abs(d) < 1e-3
    safe = np.where(small, 1.0, d)
    series = 1 + d / 2 * (1 + d / 3 * (1 + d / 4))
    return np.where(small, series, np.expm1(safe) / safe)


def panel_nodes(span: Span, panels: int = 128) -> np.ndarray:
    """z breakpoints for the log-linear panel rule.

    Half the panels are uniform in z, half uniform in effective length, so the
    high-power start of the span is resolved finely.
    """
    length = span.length
    alpha = float(np.mean(span.attenuation.values)) if not span.flat_loss else float(span.attenuation)
    uniform = np.linspace(0.0, length, panels // 2 + 1)
    if alpha * length < 1e-6:
        return np.linspace(0.0, length, panels + 1)
    u = np.linspace(0.0, 1.0, panels - panels // 2 + 1)
    leff = -np.log1p(-u * -np.expm1(-alpha * length)) / alpha
    nodes = np.union1d(uniform, leff)
    nodes[-1] = length
    return nodes[nodes <= length]


def _mu_panel(f1, f2, f, span, profile, mode, nodes):
    f1, f2, f = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f1, f2, f)))
    a = phase_rate(f1, f2, f, span)[..., None]
    z = nodes
    y = kernel_log_power(profile, z, f1[..., None], f2[..., None], f[..., None], mode) + 1j * a * z
    h = np.diff(z)
    d = np.diff(y, axis=-1)
    return np.sum(h * np.exp(y[..., :-1]) * _exprel(d), axis=-1)


def _mu_gauss(f1, f2, f, span, profile, mode, nodes, max_nodes, rtol):
    f1, f2, f = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f1, f2, f)))
    a = phase_rate(f1, f2, f, span)[..., None]
    half = span.length / 2
    prev = None
    n = nodes
    while True:
        x, w = np.polynomial.legendre.leggauss(n)
        z = half * (x + 1)
        k = kernel_log_power(profile, z, f1[..., None], f2[..., None], f[..., None], mode)
        est = half * np.sum(w * np.exp(k + 1j * a * z), axis=-1)
        if prev is not None:
            scale = np.maximum(np.abs(est), 1e-300)
            if np.all(np.abs(est - prev) <= rtol * scale):
                return est
        if 2 * n > max_nodes:
            raise QuadratureError(f"mu_s did not converge with {n} Gauss-Legendre nodes", (prev, est))
        prev, n = est, 2 * n


def mu_span(f1, f2, f, span: Span, profile: PowerProfile, mode: str = "table", method: str = "gauss",
            nodes: int = 64, max_nodes: int = 1024, rtol: float = 1e-6, panels: int = 128):
    """Span kernel mu_s = int_0^L kernel(z) exp(i phi_s(z)) dz [m].

    ``method="gauss"`` doubles the Gauss-Legendre order from ``nodes`` until the
    relative change is below ``rtol`` (cap ``max_nodes``). ``method="panel"``
    integrates exp(ln kernel + i phi) exactly on each panel after linear
    interpolation of ln kernel; the phase is linear in z, so only the profile
    curvature contributes error. This is the fast path used inside Monte Carlo.
    """
    if method == "gauss":
        return _mu_gauss(f1, f2, f, span, profile, mode, nodes, max_nodes, rtol)
    if method == "panel":
        return _mu_panel(f1, f2, f, span, profile, mode, panel_nodes(span, panels))
    raise ValueError(f"unknown quadrature method {method!r}")


@dataclass
class LinkFunctionContext:
    """Everything the link function needs, precomputed once per link."""

    link: Link
    profiles: list
    plan: ChannelPlan | None = None
    mode: str = "table"
    method: str = "panel"
    panels: int = 128
    rtol: float = 1e-6  # Gauss-Legendre path only
    nodes: list = field(init=False)
    identical: bool = field(init=False)

    def __post_init__(self):
        if self.mode not in MU_KERNELS:
            raise ValueError(f"unknown mu kernel {self.mode!r}")
        if len(self.profiles) != self.link.n_spans:
            raise ValueError("need one power profile per span")
        self.nodes = [panel_nodes(s, self.panels) for s in self.link]
        first = self.link.spans[0]
        self.identical = all(s == first and s.compensating for s in self.link)

    @classmethod
    def build(cls, plan: ChannelPlan, link: Link, profile: str = "simplified", **kw) -> "LinkFunctionContext":
        return cls(link, link_profiles(plan, link, profile), plan=plan, **kw)

    def mu(self, s: int, f1, f2, f):
        span, prof = self.link.spans[s], self.profiles[s]
        if self.method == "panel":
            return _mu_panel(f1, f2, f, span, prof, self.mode, self.nodes[s])
        return mu_span(f1, f2, f, span, prof, self.mode, self.method, max_nodes=4096, rtol=self.rtol)

    def log_net_gain(self, s: int, f):
        return output_log_gain(self.link.spans[s], self.profiles[s], f)

    def net_gain(self, f):
        """End-to-end power transfer of the link at ``f``."""
        return np.exp(sum(self.log_net_gain(s, f) for s in range(self.link.n_spans)))


def geometric_factor(x, n: int):
    """(1 - exp(i n x)) / (1 - exp(i x)), continuous through x = 2 pi k."""
    x = np.asarray(x, dtype=float)
    half = x / 2
    s = np.sin(half)
    near = np.abs(s) < 1e-9
    ratio = np.where(near, n * np.cos(n * half) / np.where(near, np.cos(half), 1.0),
                     np.sin(n * half) / np.where(near, 1.0, s))
    return np.exp(0.5j * (n - 1) * x) * ratio


def link_function(f1, f2, f, link: Link, ctx: LinkFunctionContext):
    """Coherent sum over spans of gamma_s mu_s with inter-span dispersion phases
    and the square-root gain-profile products of the spans traversed."""
    f1, f2, f = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f1, f2, f)))
    f3 = f1 + f2 - f
    dfp = FOUR_PI2 * (f1 - f) * (f2 - f)
    n = link.n_spans
    lg_f = [0.5 * ctx.log_net_gain(s, f) for s in range(n)]
    log_after = sum(lg_f)
    log_before = 0.0
    phase = 0.0
    total = np.zeros(f.shape, dtype=complex)
    for s, span in enumerate(link):
        if span.gamma:
            total = total + span.gamma * ctx.mu(s, f1, f2, f) * np.exp(log_before + log_after + 1j * phase)
        log_after = log_after - lg_f[s]
        lg = ctx.log_net_gain
        log_before = log_before + 0.5 * (lg(s, f1) + lg(s, f2) + lg(s, f3))
        phase = phase + dfp * span.length * (span.beta2 + np.pi * (f1 + f2) * span.beta3)
    return total


def link_function_identical(f1, f2, f, span: Span, n_spans: int, ctx: LinkFunctionContext):
    """Phased-array form for ``n_spans`` identical, fully compensated spans."""
    f1, f2, f = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (f1, f2, f)))
    x = phase_rate(f1, f2, f, span) * span.length
    return span.gamma * ctx.mu(0, f1, f2, f) * geometric_factor(x, n_spans)


def evaluate_link_function(f1, f2, f, ctx: LinkFunctionContext):
    """Dispatch to the phased-array form when the link allows it."""
    if ctx.identical and ctx.link.n_spans > 1:
        return link_function_identical(f1, f2, f, ctx.link.spans[0], ctx.link.n_spans, ctx)
    return link_function(f1, f2, f, ctx.link, ctx)
