"""Seeded Monte Carlo SOP estimation.

Trials are grouped in fixed blocks of ``BLOCK`` consecutive trial indices.
Block ``b`` draws from ``Philox(key=seed, counter=[0, 0, b, 0])``, so the
normals behind any trial depend only on ``(seed, trial index)``; a short
final block draws a prefix of its full stream. Workers receive whole
blocks and return integer counts, which are summed.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .analytic import Method, SopEstimate
from .chanmodel import CorrelationSpec, SystemConfig
from .combine import CombinerKind, TasMode
from .errors import DomainError

BLOCK = 65536
_SQRT_HALF = math.sqrt(0.5)

_KIND_INDEX = {CombinerKind.MRC: 0, CombinerKind.SC: 1, CombinerKind.EGC: 2}
_MODE_INDEX = {TasMode.SIMO: 0, TasMode.TAS_NO_EVE_CSI: 1, TasMode.TAS_WITH_EVE_CSI: 2}


@dataclass(frozen=True)
class McPlan:
    trials: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1000:
            raise DomainError("trials must be an integer >= 1000")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must fit in 64 unsigned bits")
        if int(self.workers) != self.workers or self.workers < 1:
            raise DomainError("workers must be >= 1")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for trial block ``block``."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, int(block), 0]))


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise DomainError("n must be positive")
    p = k / n
    z2 = z * z
    den = 1.0 + z2 / n
    mid = (p + z2 / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


def _block_counts(cfg: SystemConfig, spec: CorrelationSpec, seed: int, block: int, n: int):
    gen = block_generator(seed, block)
    draws = gen.standard_normal((n, cfg.N_t, 1 + cfg.M + cfg.N_E, 2))
    draws *= _SQRT_HALF
    priv_b, shared_b, priv_e, shared_e = spec.weights()
    return np.asarray(_backend.count_outages(
        draws, priv_b, shared_b, priv_e, shared_e,
        cfg.gamma_bar_b, cfg.gamma_bar_e, cfg.two_rs,
    ))


def outage_counts(cfg: SystemConfig, spec: CorrelationSpec, plan: McPlan) -> np.ndarray:
    """Outage counts for every (combiner, selection mode) pair.

    Returns an int64 array indexed ``[kind, mode]`` in the orders
    (MRC, SC, EGC) and (SIMO, TAS_NO_EVE_CSI, TAS_WITH_EVE_CSI). The SIMO
    column uses transmit antenna 0 only.
    """
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    n_blocks = -(-plan.trials // BLOCK)
    sizes = [min(BLOCK, plan.trials - b * BLOCK) for b in range(n_blocks)]

    def run(b):
        return _block_counts(cfg, spec, plan.seed, b, sizes[b])

    total = np.zeros((3, 3), dtype=np.int64)
    if plan.workers == 1:
        for b in range(n_blocks):
            total += run(b)
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as ex:
            for c in ex.map(run, range(n_blocks)):
                total += c
    return total


def _estimate(count, plan, cfg, spec, kind, mode):
    lo, hi = wilson_interval(int(count), plan.trials)
    return SopEstimate(
        int(count) / plan.trials, Method.MONTE_CARLO, (lo, hi),
        dict(M=cfg.M, N_t=cfg.N_t, N_E=cfg.N_E, gamma_bar_b=cfg.gamma_bar_b,
             gamma_bar_e=cfg.gamma_bar_e, r_s=cfg.r_s, eta=spec.eta, lambda_e=spec.lambda_e,
             combiner=kind.value, tas_mode=mode.value, trials=plan.trials, seed=plan.seed,
             outages=int(count)),
    )


def estimate_all(cfg: SystemConfig, spec: CorrelationSpec, plan: McPlan) -> dict:
    """One simulation pass, every combiner and selection mode.

    SIMO entries are only included when ``N_t == 1``.
    """
    counts = outage_counts(cfg, spec, plan)
    out = {}
    for kind, i in _KIND_INDEX.items():
        for mode, j in _MODE_INDEX.items():
            if mode is TasMode.SIMO and cfg.N_t != 1:
                continue
            out[kind, mode] = _estimate(counts[i, j], plan, cfg, spec, kind, mode)
    return out


def estimate_sop(cfg: SystemConfig, spec: CorrelationSpec, kind, mode, plan: McPlan) -> SopEstimate:
    """Monte Carlo SOP with a Wilson 95% interval."""
    kind = CombinerKind.parse(kind)
    mode = TasMode.parse(mode)
    if mode is TasMode.SIMO and cfg.N_t != 1:
        raise DomainError("SIMO requires N_t = 1")
    return estimate_all(cfg, spec, plan)[kind, mode]


@dataclass(frozen=True)
class ConditionalCdf:
    """Empirical CDF: sorted samples and their plotting positions ``i / n``."""

    x: np.ndarray
    F: np.ndarray

    def __call__(self, v):
        return np.searchsorted(self.x, v, side="right") / self.x.size


def sample_conditional_snr(cfg: SystemConfig, spec: CorrelationSpec, kind, t: float, samples: int,
                           stream: np.random.Generator, phase: float | None = None) -> np.ndarray:
    """Combined legitimate SNRs with ``|z0|^2`` held at ``t``.

    The shared component has magnitude ``sqrt(t)`` and a uniform random
    phase per sample, or the fixed ``phase`` if given.
    """
    if not (math.isfinite(t) and t >= 0):
        raise DomainError("t must be finite and >= 0")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    kind = CombinerKind.parse(kind)
    if phase is None:
        ph = stream.uniform(0.0, 2.0 * np.pi, size=samples)
    else:
        ph = np.full(samples, float(phase))
    z0 = math.sqrt(t) * np.exp(1j * ph)
    g = stream.standard_normal((samples, cfg.M, 2)) * _SQRT_HALF
    w = g[..., 0] + 1j * g[..., 1]
    priv_b, shared_b, _, _ = spec.weights()
    h = priv_b * w + shared_b * z0[:, None]
    snr = cfg.gamma_bar_b * np.abs(h) ** 2
    if kind is CombinerKind.MRC:
        return snr.sum(axis=1)
    if kind is CombinerKind.SC:
        return snr.max(axis=1)
    return np.sqrt(snr).sum(axis=1) ** 2 / cfg.M


def estimate_conditional_cdf(cfg: SystemConfig, spec: CorrelationSpec, kind, t: float, samples: int,
                             stream: np.random.Generator, phase: float | None = None) -> ConditionalCdf:
    """Empirical CDF of the combined legitimate SNR given ``t``."""
    x = np.sort(sample_conditional_snr(cfg, spec, kind, t, samples, stream, phase))
    return ConditionalCdf(x, np.arange(1, x.size + 1) / x.size)
