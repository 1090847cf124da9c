"""Deterministic, doubling Monte Carlo integration.

Samples come in fixed-size batches. Batch ``b`` of the integral identified by
``key`` draws from its own counter-based stream ``Philox(SeedSequence([seed,
*key, b]))`` and batch means are combined in batch order, so the result does
not depend on how many worker threads evaluate the batches.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrands import TermLayout

THREADS_ENV = "RAMAN_EGN_THREADS"
SAMPLING_MODES = ("uniform", "hyperbolic")


@dataclass(frozen=True)
class McSettings:
    """Knobs of :func:`mc_integrate`.

    ``inner`` is the number of inner samples per outer sample for nested
    (E, F, G) terms; 2 reproduces plain uniform sampling of the Table integrand.
    ``extra_doublings`` keeps doubling after convergence was declared.
    """

    seed: int = 0
    tol_db: float = 0.05
    batch: int = 2**14
    max_samples: int = 2**24
    inner: int = 2
    threads: int | None = None
    extra_doublings: int = 0
    sampling: str = "uniform"

    def __post_init__(self):
        if not self.tol_db > 0:
            raise ValueError("tol_db must be positive")
        if self.inner < 2:
            raise ValueError("need at least 2 inner samples")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"unknown sampling mode {self.sampling!r}")
        if self.batch < self.inner:
            raise ValueError("batch smaller than inner sample count")


@dataclass(frozen=True)
class McResult:
    value: float
    std_error: float
    half_width_db: float
    samples: int
    converged: bool
    history: tuple


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    return max(1, int(threads))


def batch_stream(seed: int, key, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key), int(index)])))


def db_change(prev: float, est: float, ref_scale: float | None = None) -> float:
    """Size of the update prev -> est in dB.

    Positive quantities use |10 log10(est / prev)|. Signed correction terms
    (``ref_scale`` given) measure the change against max(|est|, ref_scale).
    """
    if ref_scale is None:
        if prev == est:
            return 0.0
        if prev > 0 and est > 0:
            return abs(10 * math.log10(est / prev))
        return math.inf
    scale = max(abs(est), abs(ref_scale))
    if scale == 0:
        return 0.0 if prev == est else math.inf
    return 10 * math.log10(1 + abs(est - prev) / scale)


def _half_width_db(value, std_error, ref_scale):
    scale = max(abs(value), abs(ref_scale or 0.0))
    if scale == 0:
        return 0.0 if std_error == 0 else math.inf
    return 10 * math.log10(1 + 1.96 * std_error / scale)


def run_doubling(batch_mean, key, settings: McSettings, ref_scale: float | None = None) -> McResult:
    """Drive ``batch_mean(rng) -> float`` through the doubling schedule."""
    workers = worker_count(settings.threads)
    means: list[float] = []

    def extend(count):
        idx = range(len(means), len(means) + count)
        if workers == 1 or count == 1:
            means.extend(batch_mean(batch_stream(settings.seed, key, i)) for i in idx)
        else:
            with ThreadPoolExecutor(workers) as pool:
                means.extend(pool.map(lambda i: batch_mean(batch_stream(settings.seed, key, i)), idx))

    max_batches = max(1, settings.max_samples // settings.batch)
    extend(1)
    history = [float(np.mean(means))]
    passes, extra, converged = 0, 0, False
    while True:
        if converged and extra >= settings.extra_doublings:
            break
        if 2 * len(means) > max_batches:
            break
        extend(len(means))
        est = float(np.mean(means))
        change = db_change(history[-1], est, ref_scale)
        history.append(est)
        if converged:
            extra += 1
            continue
        passes = passes + 1 if change < settings.tol_db else 0
        converged = passes >= 2
    arr = np.asarray(means)
    value = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.inf
    return McResult(value, se, _half_width_db(value, se, ref_scale), arr.size * settings.batch, converged, tuple(history))


def mc_integrate_box(func, lo, hi, key=(0,), settings: McSettings = McSettings(), ref_scale=None) -> McResult:
    """Integrate ``func(points)`` (points shape (n, dims)) over the box [lo, hi]."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    volume = float(np.prod(hi - lo))

    def batch_mean(rng):
        pts = lo + (hi - lo) * rng.random((settings.batch, lo.size))
        return volume * float(np.mean(func(pts)))

    return run_doubling(batch_mean, key, settings, ref_scale)


def _reciprocal_mass(lo, hi, c, eps):
    a = np.clip(c, lo, hi)
    m_left = np.log((c - lo + eps) / (c - a + eps))
    m_right = np.log((hi - c + eps) / (a - c + eps))
    return a, m_left, m_left + m_right


def _reciprocal_sample(u, lo, hi, c, eps):
    """Inverse-CDF draw from q(x) ~ 1 / (|x - c| + eps) on [lo, hi]; returns (x, q(x))."""
    a, m_left, mass = _reciprocal_mass(lo, hi, c, eps)
    t = u * mass
    x = np.where(t < m_left, c + eps - (c - lo + eps) * np.exp(-t), c - eps + (a - c + eps) * np.exp(t - m_left))
    x = np.clip(x, lo, hi)
    return x, 1.0 / ((np.abs(x - c) + eps) * mass)


def _hyperbolic_mean(layout: TermLayout, settings: McSettings, mix: float = 0.3):
    """Importance sampling of D concentrated on the phase-matched lines f1 = f and f2 = f.

    f1 and f2 are drawn from a mixture of the uniform density and one decaying
    like 1/|f_i - f| (absolute frequencies), i.e. towards the asymptotes of the
    hyperbolae of constant phase mismatch.
    """
    g = layout.geometry
    lo, hi = layout.outer_lo, layout.outer_hi
    width = hi - lo

    def draw(rng, n, dim, centre):
        u_pick, u = rng.random(n), rng.random(n)
        uni = lo[dim] + width[dim] * rng.random(n)
        eps = width[dim] * 1e-3
        rec, _ = _reciprocal_sample(u, lo[dim], hi[dim], centre, eps)
        x = np.where(u_pick < mix, uni, rec)
        _, _, mass = _reciprocal_mass(lo[dim], hi[dim], centre, eps)
        q = 1.0 / ((np.abs(x - centre) + eps) * mass)
        return x, mix / width[dim] + (1 - mix) * q

    def batch_mean(rng):
        n = settings.batch
        f = lo[0] + width[0] * rng.random(n)
        f1, p1 = draw(rng, n, 1, f + g.nuk - g.nu1)
        f2, p2 = draw(rng, n, 2, f + g.nuk - g.nu2)
        y = layout.amplitude(np.stack([f, f1, f2], axis=1), None)[:, 0]
        w = width[0] / (p1 * p2)
        return layout.prefactor * float(np.mean(w * np.abs(y) ** 2))

    return batch_mean


def _layout_mean(layout: TermLayout, settings: McSettings):
    if not layout.nested:
        return mc_batch_plain(layout, settings)
    k = settings.inner
    n = settings.batch // k
    v_out, v_in = layout.outer_volume, layout.inner_volume
    lo, hi, ilo, ihi = layout.outer_lo, layout.outer_hi, layout.inner_lo, layout.inner_hi

    def batch_mean(rng):
        outer = lo + (hi - lo) * rng.random((n, lo.size))
        inner = ilo + (ihi - ilo) * rng.random((n, k, ilo.size))
        y = layout.amplitude(outer, inner)
        s = np.sum(y, axis=1)
        # unbiased estimate of |inner integral|^2 from k samples
        sq = (np.abs(s) ** 2 - np.sum(np.abs(y) ** 2, axis=1)) / (k * (k - 1))
        return layout.prefactor * v_out * v_in**2 * float(np.mean(sq))

    return batch_mean


def mc_batch_plain(layout: TermLayout, settings: McSettings):
    lo, hi = layout.outer_lo, layout.outer_hi
    volume = layout.outer_volume

    def batch_mean(rng):
        pts = lo + (hi - lo) * rng.random((settings.batch, lo.size))
        y = layout.amplitude(pts, None)[:, 0]
        return layout.prefactor * volume * float(np.mean(np.abs(y) ** 2))

    return batch_mean


def mc_integrate(layout: TermLayout, key, settings: McSettings = McSettings(), ref_scale: float | None = None) -> McResult:
    """Monte Carlo value of one D/E/F/G term described by ``layout``."""
    if settings.sampling == "hyperbolic" and layout.kind == "D":
        fn = _hyperbolic_mean(layout, settings)
    else:
        fn = _layout_mean(layout, settings)
    return run_doubling(fn, key, settings, ref_scale)
