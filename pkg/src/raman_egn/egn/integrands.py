"""The D, E, F, G integrals for rectangular channel spectra |S_k|^2 = 1/B_k^2.

Coordinates are relative to channel centres: ``f`` in the channel of interest,
``f1``/``f2`` in channels k1/k2; f3 = f1 + f2 - f + Omega - nu_kappa is then
relative to channel k3.

E, F and G are each an outer integral of the squared modulus of an inner
integral of Y = ind(f3 in k3) * Upsilon:

* E: outer (f, f2), inner f1;
* F: outer (f, s = f1 + f2), inner f1 with f2 = s - f1;
* G: outer f, inner (f1, f2).

:class:`TermLayout` exposes that structure so the Monte Carlo engine can use an
unbiased estimator of |inner|^2 built from several inner samples per outer one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import ChannelPlan
from .link import LinkFunctionContext, evaluate_link_function
from .triplets import Triplet

KINDS = ("D", "E", "F", "G")
PREFACTOR = {"D": 16 / 27, "E": 80 / 81, "F": 16 / 81, "G": 16 / 81}


def _band(b):
    return -b / 2, b / 2


def _inside(x, b):
    return (x >= -b / 2) & (x <= b / 2)


class _Geometry:
    def __init__(self, t: Triplet, kappa: int, plan: ChannelPlan):
        c1, c2, c3, ck = plan[t.k1], plan[t.k2], plan[t.k3], plan[kappa]
        self.nu1, self.nu2, self.nuk = c1.center_freq, c2.center_freq, ck.center_freq
        self.b1, self.b2, self.b3, self.bk = c1.bandwidth, c2.bandwidth, c3.bandwidth, ck.bandwidth
        self.shift3 = t.omega - ck.center_freq

    def amplitude(self, ctx, f, f1, f2):
        """ind(f3 in k3) * Upsilon at absolute frequencies."""
        f3 = f1 + f2 - f + self.shift3
        ind = _inside(f3, self.b3)
        ups = evaluate_link_function(f1 + self.nu1, f2 + self.nu2, f + self.nuk, ctx)
        return np.where(ind, ups, 0.0)


def prefactor(kind: str, t: Triplet, plan: ChannelPlan) -> float:
    if kind not in KINDS:
        raise ValueError(f"unknown term {kind!r}")
    b1, b2, b3 = plan[t.k1].bandwidth, plan[t.k2].bandwidth, plan[t.k3].bandwidth
    den = {"D": b1 * b2 * b3, "E": b1 * b2 * b3**2, "F": b1 * b2**2 * b3, "G": b1 * b2**2 * b3**2}[kind]
    return PREFACTOR[kind] / den


def integrand(kind: str, t: Triplet, kappa: int, points, ctx: LinkFunctionContext):
    """Table integrand at ``points`` (shape (n, dims)); real part for E, F, G.

    dims: D (f, f1, f2); E and F (f, f1, f2, f1'); G (f, f1, f2, f1', f2').
    Points outside a channel band give 0.
    """
    g = _Geometry(t, kappa, ctx.plan)
    p = np.atleast_2d(np.asarray(points, dtype=float))
    f, f1, f2 = p[:, 0], p[:, 1], p[:, 2]
    inside = _inside(f, g.bk) & _inside(f1, g.b1) & _inside(f2, g.b2)
    y = g.amplitude(ctx, f, f1, f2)
    pre = prefactor(kind, t, ctx.plan)
    if kind == "D":
        return np.where(inside, pre * np.abs(y) ** 2, 0.0)
    f1p = p[:, 3]
    inside &= _inside(f1p, g.b1)
    if kind == "E":
        yp = g.amplitude(ctx, f, f1p, f2)
    elif kind == "F":
        f2p = f1 + f2 - f1p
        inside &= _inside(f2p, g.b2)
        yp = g.amplitude(ctx, f, f1p, f2p)
    else:
        f2p = p[:, 4]
        inside &= _inside(f2p, g.b2)
        yp = g.amplitude(ctx, f, f1p, f2p)
    return np.where(inside, pre * np.real(y * np.conj(yp)), 0.0)


@dataclass
class TermLayout:
    """Outer box, inner box and amplitude Y(outer, inner) of one term.

    The term equals ``prefactor * int_outer |int_inner Y|^2``; for D the inner
    box is empty and the term is ``prefactor * int |Y|^2``.
    """

    kind: str
    outer_lo: np.ndarray
    outer_hi: np.ndarray
    inner_lo: np.ndarray
    inner_hi: np.ndarray
    prefactor: float
    amplitude: Callable
    geometry: _Geometry

    @property
    def nested(self) -> bool:
        return self.inner_lo.size > 0

    @property
    def outer_volume(self) -> float:
        return float(np.prod(self.outer_hi - self.outer_lo))

    @property
    def inner_volume(self) -> float:
        return float(np.prod(self.inner_hi - self.inner_lo))


def term_layout(kind: str, t: Triplet, kappa: int, ctx: LinkFunctionContext) -> TermLayout:
    g = _Geometry(t, kappa, ctx.plan)
    pre = prefactor(kind, t, ctx.plan)
    amp = g.amplitude
    arr = np.asarray
    if kind == "D":
        lo, hi = zip(_band(g.bk), _band(g.b1), _band(g.b2))

        def y(outer, inner):
            return amp(ctx, outer[:, 0], outer[:, 1], outer[:, 2])[:, None]

        return TermLayout(kind, arr(lo), arr(hi), arr([]), arr([]), pre, y, g)
    if kind == "E":
        lo, hi = zip(_band(g.bk), _band(g.b2))

        def y(outer, inner):
            return amp(ctx, outer[:, 0:1], inner[..., 0], outer[:, 1:2])

        return TermLayout(kind, arr(lo), arr(hi), arr([-g.b1 / 2]), arr([g.b1 / 2]), pre, y, g)
    if kind == "F":
        lo = arr([-g.bk / 2, -(g.b1 + g.b2) / 2])
        hi = -lo

        def y(outer, inner):
            f1 = inner[..., 0]
            f2 = outer[:, 1:2] - f1
            val = amp(ctx, outer[:, 0:1], f1, f2)
            return np.where(_inside(f2, g.b2), val, 0.0)

        return TermLayout(kind, lo, hi, arr([-g.b1 / 2]), arr([g.b1 / 2]), pre, y, g)
    if kind == "G":
        inner_lo, inner_hi = zip(_band(g.b1), _band(g.b2))

        def y(outer, inner):
            return amp(ctx, outer[:, 0:1], inner[..., 0], inner[..., 1])

        return TermLayout(kind, arr([-g.bk / 2]), arr([g.bk / 2]), arr(inner_lo), arr(inner_hi), pre, y, g)
    raise ValueError(f"unknown term {kind!r}")
