"""Diversity combining, secrecy capacity and transmit antenna selection."""
from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError


class CombinerKind(enum.Enum):
    MRC = "MRC"
    SC = "SC"
    EGC = "EGC"

    def epsilon(self, M: int) -> int:
        """Effective gain of a fully correlated array: M for MRC/EGC, 1 for SC."""
        return 1 if self is CombinerKind.SC else int(M)

    @classmethod
    def parse(cls, name) -> "CombinerKind":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise DomainError(f"unknown combiner {name!r}") from None


class TasMode(enum.Enum):
    SIMO = "SIMO"
    TAS_NO_EVE_CSI = "TAS_NO_EVE_CSI"
    TAS_WITH_EVE_CSI = "TAS_WITH_EVE_CSI"

    @classmethod
    def parse(cls, name) -> "TasMode":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise DomainError(f"unknown TAS mode {name!r}") from None


def combined_snr(kind: CombinerKind, branch_snrs) -> float:
    """Post-combining SNR of ``M`` branch SNRs.

    MRC sums, SC takes the maximum, EGC gives ``(sum sqrt(g))**2 / M``.
    """
    g = np.asarray(branch_snrs, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("branch_snrs must be a nonempty vector")
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise DomainError("branch SNRs must be finite and nonnegative")
    kind = CombinerKind.parse(kind)
    if kind is CombinerKind.MRC:
        return float(g.sum())
    if kind is CombinerKind.SC:
        return float(g.max())
    return float(np.sqrt(g).sum() ** 2 / g.size)


def secrecy_capacity(gamma_b: float, gamma_e: float) -> float:
    """max(0, log2(1 + gamma_b) - log2(1 + gamma_e)) in bits/s/Hz."""
    if gamma_b < 0 or gamma_e < 0:
        raise DomainError("SNRs must be nonnegative")
    return max(0.0, math.log2(1.0 + gamma_b) - math.log2(1.0 + gamma_e))


def select_antenna(mode: TasMode, per_antenna_b_snrs, per_antenna_e_snrs) -> int:
    """Index of the transmit antenna picked by ``mode``; ties go to the lowest index."""
    b = np.asarray(per_antenna_b_snrs, dtype=float)
    e = np.asarray(per_antenna_e_snrs, dtype=float)
    if b.size == 0 or b.shape != e.shape or b.ndim != 1:
        raise DomainError("need two nonempty vectors of equal length")
    mode = TasMode.parse(mode)
    if mode is TasMode.SIMO:
        if b.size != 1:
            raise DomainError("SIMO requires N_t = 1")
        return 0
    if mode is TasMode.TAS_NO_EVE_CSI:
        return int(np.argmax(b))
    return int(np.argmax((1.0 + b) / (1.0 + e)))
