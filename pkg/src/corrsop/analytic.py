"""Exact, asymptotic and density-level SOP evaluations.

Notation used throughout: ``A = 2**r_s``, ``S = sum eta^2/(1-eta^2)``,
``S_lambda = S (1 - lambda_e^2)``, ``r = (1 + S_lambda)/(1 + S)`` and
``c = gamma_bar_e (1 - lambda_e^2)``. Conditioned on ``t = |z0|^2`` the
legitimate and eavesdropper branches are independent, so every SOP is

    int e^{-t} int F_B(A (y + 1) - 1 | t) f_E(y | t) dy dt.

The exact paths evaluate this double integral with nested Gauss-Laguerre
rules; the asymptotic paths keep the leading term of F_B near zero, which
makes the t-integral closed form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln, ive, logsumexp

from .chanmodel import DerivedFactors, SystemConfig
from .combine import CombinerKind, TasMode
from .errors import DegenerateCorrelation, DomainError, NonConvergence, SecrecyInfeasible
from .specfun import (
    DEFAULT,
    Precision,
    _node_schedule,
    hyp2f1,
    laguerre_rule,
    log_hyp1f1_1n,
    marcum_qp,
    quad_semi_infinite,
)


class Method(enum.Enum):
    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"
    MONTE_CARLO = "montecarlo"


@dataclass(frozen=True)
class SopEstimate:
    """An SOP value together with how it was obtained.

    Asymptotic values are kept raw and can exceed 1 outside the high-SNR
    regime; ``display_value`` clamps for presentation only.
    """

    value: float
    method: Method
    ci95: tuple | None = None
    meta: dict = field(default_factory=dict)

    @property
    def display_value(self) -> float:
        return min(max(self.value, 0.0), 1.0)


@dataclass(frozen=True)
class ConditionedState:
    """Value of the conditioning variable ``t = |z0|^2``."""

    t: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0):
            raise DomainError("t must be finite and >= 0")


def _meta(cfg: SystemConfig, **kw):
    d = dict(M=cfg.M, N_t=cfg.N_t, N_E=cfg.N_E, gamma_bar_b=cfg.gamma_bar_b,
             gamma_bar_e=cfg.gamma_bar_e, r_s=cfg.r_s)
    d.update(kw)
    return d


def _check_lambda(lambda_e, allow_one=False):
    if allow_one:
        if not abs(lambda_e) <= 1:
            raise DomainError("|lambda_e| must be <= 1")
    elif not abs(lambda_e) < 1:
        raise DegenerateCorrelation("|lambda_e| = 1 has a dedicated formula")


# ---------------------------------------------------------------------------
# conditional densities

def _log_eve_density(u, t, lambda_e, N_E):
    """log of the density of ``u = y / c`` given ``t`` (noncentral gamma law).

    ``u`` and ``t`` broadcast. For N_E branches sharing the mean
    ``lambda_e z0``, ``u`` is a sum of N_E unit-scale noncentral terms with
    total noncentrality ``k t`` where ``k = N_E lambda_e^2 / (1 - lambda_e^2)``.
    """
    l2 = lambda_e * lambda_e
    nd = N_E * l2 * np.asarray(t, dtype=float) / (1.0 - l2)
    u = np.asarray(u, dtype=float)
    u, nd = np.broadcast_arrays(u, nd)
    s = 2.0 * np.sqrt(nd * u)
    out = np.empty(u.shape)
    cen = s == 0
    # central case: Gamma(N_E, 1)
    with np.errstate(divide="ignore"):
        out[cen] = (N_E - 1) * np.log(u[cen]) - u[cen] - nd[cen] - gammaln(N_E)
    if N_E == 1:
        out[cen] = -u[cen] - nd[cen]
    nc = ~cen
    un, ndn, sn = u[nc], nd[nc], s[nc]
    out[nc] = (0.5 * (N_E - 1) * np.log(un / ndn) - un - ndn
               + np.log(ive(N_E - 1, sn)) + sn)
    return out


def pdf_conditional_eve(y, state: ConditionedState, cfg: SystemConfig, lambda_e: float):
    """Density of the eavesdropper MRC SNR given ``t``."""
    _check_lambda(lambda_e)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("y must be >= 0")
    c = cfg.gamma_bar_e * (1.0 - lambda_e * lambda_e)
    return np.exp(_log_eve_density(y / c, state.t, lambda_e, cfg.N_E)) / c


def cdf_conditional_mrc(x, state: ConditionedState, cfg: SystemConfig, rho: float,
                        prec: Precision = DEFAULT):
    """CDF of the MRC sum of ``M`` branches with common ``eta = rho`` given ``t``."""
    if not abs(rho) < 1:
        raise DomainError("|rho| must be < 1")
    om = 1.0 - rho * rho
    a = math.sqrt(2.0 * cfg.M * rho * rho * state.t / om)
    b = np.sqrt(2.0 * np.asarray(x, dtype=float) / (cfg.gamma_bar_b * om))
    _, p = marcum_qp(cfg.M, a, b, prec)
    return p


def pdf_conditional_mrc_asym(x, state: ConditionedState, cfg: SystemConfig, factors: DerivedFactors):
    """Leading small-``x`` term of the conditional MRC density."""
    x = np.asarray(x, dtype=float)
    M = cfg.M
    return (math.exp(-factors.S * state.t) / factors.prod_one_minus_eta2
            * x ** (M - 1) / (math.gamma(M) * cfg.gamma_bar_b ** M))


def pdf_conditional_egc_asym(x, state: ConditionedState, cfg: SystemConfig, factors: DerivedFactors):
    """Leading small-``x`` term of the conditional EGC density."""
    x = np.asarray(x, dtype=float)
    M = cfg.M
    return ((2.0 * M) ** M * math.exp(-factors.S * state.t) * x ** (M - 1)
            / (2.0 * math.gamma(2 * M) * cfg.gamma_bar_b ** M * factors.prod_one_minus_eta2))


# ---------------------------------------------------------------------------
# exact SOP by nested Gauss-Laguerre

def _nested_sop(cfg: SystemConfig, lambda_e: float, cond_cdf, prec: Precision, t_rates=(1.0,)):
    """int e^{-t} int F_B(A(y+1)-1 | t) f_E(y|t) dy dt on doubling grids.

    ``cond_cdf(x, t)`` receives broadcastable arrays of legitimate SNR
    thresholds and conditioning values. The t-rule is scaled by each rate in
    ``t_rates`` in turn until one converges: rate 1 suits integrands that
    follow e^{-t}, rate 1 + S the high-SNR regime where F_B ~ e^{-S t}.
    """
    A = cfg.two_rs
    c = cfg.gamma_bar_e * (1.0 - lambda_e * lambda_e)
    for rate in t_rates:
        prev = None
        for n in _node_schedule(prec):
            tx, tlogw = laguerre_rule(n)
            ux, ulogw = laguerre_rule(n)
            T = tx[:, None] / rate
            U = ux[None, :]
            logk = ulogw[None, :] + U + _log_eve_density(U, T, lambda_e, cfg.N_E)
            x = A * (c * U + 1.0) - 1.0
            F = cond_cdf(x, T)
            inner = np.sum(np.exp(logk) * F, axis=1)
            # weight e^{-t} dt = e^{-x} e^{x (1 - 1/rate)} dx / rate
            est = float(np.sum(np.exp(tlogw + tx * (1.0 - 1.0 / rate)) * inner)) / rate
            if not math.isfinite(est):
                break
            if prev is not None and abs(est - prev) < max(prec.abs_tol, prec.rel_tol * abs(est)):
                return est, n
            prev = est
    raise NonConvergence(f"exact SOP quadrature did not converge with {prec.quad_nodes} nodes")


def exact_sop_mrc_equicorrelated(cfg: SystemConfig, rho: float, lambda_e: float,
                                 prec: Precision = DEFAULT) -> SopEstimate:
    """Exact SOP of MRC over ``M`` branches that all share ``eta = rho``.

    Pairwise branch correlation is therefore ``rho**2``.
    """
    if cfg.N_t != 1:
        raise DomainError("exact MRC SOP needs N_t = 1")
    if not abs(rho) < 1:
        raise DomainError("|rho| must be < 1 (use the fully-correlated forms)")
    if not abs(lambda_e) < 1:
        raise DomainError("|lambda_e| must be < 1 (use the fully-correlated forms)")
    M = cfg.M
    om = 1.0 - rho * rho
    k_a = 2.0 * M * rho * rho / om
    k_b = 2.0 / (cfg.gamma_bar_b * om)

    def cond_cdf(x, t):
        a, b = np.broadcast_arrays(np.sqrt(k_a * t), np.sqrt(k_b * x))
        return marcum_qp(M, a, b, prec)[1]

    S = M * rho * rho / om
    val, n = _nested_sop(cfg, lambda_e, cond_cdf, prec, (1.0, 1.0 + S))
    return SopEstimate(val, Method.EXACT, None,
                       _meta(cfg, combiner="MRC", rho=rho, lambda_e=lambda_e, nodes=n))


def exact_sop_sc(cfg: SystemConfig, spec, prec: Precision = DEFAULT) -> SopEstimate:
    """Exact SOP of selection combining for an arbitrary ``eta`` vector."""
    if cfg.N_t != 1:
        raise DomainError("exact SC SOP needs N_t = 1")
    if spec.fully_correlated_main or spec.fully_correlated_eve:
        raise DomainError("exact SC SOP needs |eta|, |lambda_e| < 1")
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    eta2 = np.asarray(spec.eta) ** 2
    om = 1.0 - eta2

    def cond_cdf(x, t):
        F = 1.0
        for m in range(cfg.M):
            a, b = np.broadcast_arrays(np.sqrt(2.0 * eta2[m] * t / om[m]),
                                       np.sqrt(2.0 * x / (cfg.gamma_bar_b * om[m])))
            F = F * marcum_qp(1, a, b, prec)[1]
        return F

    S = float(np.sum(eta2 / om))
    val, n = _nested_sop(cfg, spec.lambda_e, cond_cdf, prec, (1.0, 1.0 + S))
    return SopEstimate(val, Method.EXACT, None,
                       _meta(cfg, combiner="SC", eta=spec.eta, lambda_e=spec.lambda_e, nodes=n))


# ---------------------------------------------------------------------------
# SIMO asymptotics

def combiner_prefactor(kind: CombinerKind, M: int) -> float:
    """SIMO asymptotic SOP of ``kind`` relative to MRC."""
    kind = CombinerKind.parse(kind)
    if kind is CombinerKind.MRC:
        return 1.0
    if kind is CombinerKind.SC:
        return float(math.factorial(M))
    return math.factorial(M) * (2.0 * M) ** M / math.factorial(2 * M)


def _simo_value(kind, cfg: SystemConfig, det_u: float, r: float) -> float:
    M = cfg.M
    A = cfg.two_rs
    ge = cfg.gamma_bar_e
    s = 0.0
    for k in range(M + 1):
        s += r ** k * ((A - 1.0) / ge) ** (M - k) * A ** k / math.factorial(M - k)
    return combiner_prefactor(kind, M) * ge ** M / (det_u * cfg.gamma_bar_b ** M) * s


def _require_simo(cfg):
    if cfg.N_t != 1 or cfg.N_E != 1:
        raise DomainError("SIMO forms need N_t = N_E = 1")


def asymptotic_sop_simo(kind, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float) -> SopEstimate:
    """High-SNR SOP for a single transmit antenna and a single-antenna eavesdropper.

    ``|lambda_e| = 1`` is accepted: the eavesdropper scale cancels and the
    expression stays finite.
    """
    _require_simo(cfg)
    _check_lambda(lambda_e, allow_one=True)
    kind = CombinerKind.parse(kind)
    r = (1.0 + factors.s_lambda(lambda_e)) / (1.0 + factors.S)
    val = _simo_value(kind, cfg, factors.det_U, r)
    return SopEstimate(val, Method.ASYMPTOTIC, None,
                       _meta(cfg, combiner=kind.value, tas_mode="SIMO", lambda_e=lambda_e))


SPECIAL_CASES = ("lambda_zero", "independent", "fully_corr_main", "fully_corr_eve")


def asymptotic_sop_simo_special(kind, cfg: SystemConfig, factors: DerivedFactors | None,
                                case: str, lambda_e: float = 0.0) -> SopEstimate:
    """SIMO asymptotics for the degenerate correlation settings.

    ``lambda_zero``: no main/eavesdropper correlation, any ``U``.
    ``independent``: ``U = I`` (``factors`` may be None).
    ``fully_corr_main``: every legitimate branch equal; ``factors`` must be None.
    ``fully_corr_eve``: eavesdropper fully tied to the shared component.
    """
    _require_simo(cfg)
    kind = CombinerKind.parse(kind)
    if case not in SPECIAL_CASES:
        raise DomainError(f"unknown case {case!r}")
    if case == "fully_corr_main":
        if factors is not None:
            raise DomainError("fully_corr_main has no correlation matrix; pass factors=None")
        if lambda_e != 0:
            raise DomainError("fully_corr_main form assumes lambda_e = 0")
        A = cfg.two_rs
        eps = kind.epsilon(cfg.M)
        val = cfg.gamma_bar_e / (eps * cfg.gamma_bar_b) * (A + (A - 1.0) / cfg.gamma_bar_e)
    elif case == "independent":
        if factors is not None and any(e != 0 for e in factors.eta):
            raise DomainError("independent case needs eta = 0")
        val = _simo_value(kind, cfg, 1.0, 1.0)
    elif factors is None:
        raise DomainError(f"{case} needs factors")
    elif case == "lambda_zero":
        if lambda_e != 0:
            raise DomainError("lambda_zero case needs lambda_e = 0")
        val = _simo_value(kind, cfg, factors.det_U, 1.0)
    else:
        val = _simo_value(kind, cfg, factors.det_U, 1.0 / (1.0 + factors.S))
    return SopEstimate(val, Method.ASYMPTOTIC, None,
                       _meta(cfg, combiner=kind.value, tas_mode="SIMO", case=case))


def sop_ratio(kind, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float, comparison: str) -> float:
    """Correlated SOP relative to the no-eavesdropper-correlation or independent case."""
    _check_lambda(lambda_e)
    r = (1.0 + factors.s_lambda(lambda_e)) / (1.0 + factors.S)
    if comparison == "corr_vs_cmc":
        return r ** cfg.M
    if comparison == "corr_vs_indep":
        return r ** cfg.M / factors.det_U
    raise DomainError(f"unknown comparison {comparison!r}")


# ---------------------------------------------------------------------------
# transmit antenna selection

def _log_tas_prefactor(kind, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float) -> float:
    kind = CombinerKind.parse(kind)
    M, N_t, N_E = cfg.M, cfg.N_t, cfg.N_E
    if kind is CombinerKind.MRC:
        lc = -N_t * gammaln(M + 1)
    elif kind is CombinerKind.SC:
        lc = 0.0
    else:
        lc = M * N_t * math.log(2.0 * M) - N_t * gammaln(2 * M + 1)
    return (lc - math.log(factors.prod_one_minus_eta2) - (N_t - 1) * math.log(factors.det_U)
            - gammaln(N_E) - math.log(factors.alpha_at(lambda_e, N_E))
            - M * N_t * math.log(cfg.gamma_bar_b))


def _log_tas_terms(cfg: SystemConfig, factors: DerivedFactors, lambda_e: float, prec: Precision,
                   dominant_only: bool):
    L = cfg.M * cfg.N_t
    N_E = cfg.N_E
    A = cfg.two_rs
    z = factors.z_at(lambda_e, N_E)
    log_x = math.log(A * cfg.gamma_bar_e * (1.0 - lambda_e * lambda_e))
    omegas = [L] if dominant_only or A == 1.0 else range(L + 1)
    out = []
    for w in omegas:
        lt = (gammaln(L + 1) - gammaln(w + 1) - gammaln(L - w + 1)
              + gammaln(N_E + w) + w * log_x + math.log(hyp2f1(1.0, N_E + w, N_E, z, prec)))
        if w < L:
            lt += (L - w) * math.log(A - 1.0)
        out.append(lt)
    return np.array(out)


def asymptotic_sop_tas_no_csi(kind, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float,
                              prec: Precision = DEFAULT, dominant_only: bool = False) -> SopEstimate:
    """High-SNR SOP when the antenna with the largest legitimate SNR is used.

    ``dominant_only`` keeps only the highest power of ``gamma_bar_e`` in the
    sum, i.e. the form for ``gamma_bar_e >> 1``.
    """
    _check_lambda(lambda_e)
    kind = CombinerKind.parse(kind)
    terms = _log_tas_terms(cfg, factors, lambda_e, prec, dominant_only)
    val = math.exp(_log_tas_prefactor(kind, cfg, factors, lambda_e) + logsumexp(terms))
    return SopEstimate(val, Method.ASYMPTOTIC, None,
                       _meta(cfg, combiner=kind.value, tas_mode="TAS_NO_EVE_CSI",
                             lambda_e=lambda_e, dominant_only=dominant_only))


def asymptotic_sop_tas_with_csi(kind, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float,
                                prec: Precision = DEFAULT, dominant_only: bool = False) -> SopEstimate:
    """High-SNR SOP when the antenna with the largest secrecy capacity is used.

    Outage needs every antenna in outage, and the antennas are independent,
    so this is the single-antenna SOP raised to ``N_t``.
    """
    kind = CombinerKind.parse(kind)
    one = replace(cfg, N_t=1)
    p1 = asymptotic_sop_tas_no_csi(kind, one, factors, lambda_e, prec, dominant_only).value
    val = p1 ** cfg.N_t
    return SopEstimate(val, Method.ASYMPTOTIC, None,
                       _meta(cfg, combiner=kind.value, tas_mode="TAS_WITH_EVE_CSI",
                             lambda_e=lambda_e, dominant_only=dominant_only))


def asymptotic_sop(kind, mode, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float,
                   prec: Precision = DEFAULT) -> SopEstimate:
    """Dispatch on the selection mode."""
    mode = TasMode.parse(mode)
    if mode is TasMode.SIMO:
        if cfg.N_t != 1:
            raise DomainError("SIMO requires N_t = 1")
        if cfg.N_E == 1:
            return asymptotic_sop_simo(kind, cfg, factors, lambda_e)
        est = asymptotic_sop_tas_no_csi(kind, cfg, factors, lambda_e, prec)
        return replace(est, meta={**est.meta, "tas_mode": "SIMO"})
    if mode is TasMode.TAS_NO_EVE_CSI:
        return asymptotic_sop_tas_no_csi(kind, cfg, factors, lambda_e, prec)
    return asymptotic_sop_tas_with_csi(kind, cfg, factors, lambda_e, prec)


def sop_tas_fully_correlated(kind, cfg: SystemConfig) -> SopEstimate:
    """SOP when every legitimate and eavesdropper branch equals the shared component.

    Exact for both selection rules: all antennas see the same ordering of
    secrecy capacity and legitimate SNR.
    """
    kind = CombinerKind.parse(kind)
    A = cfg.two_rs
    margin = kind.epsilon(cfg.M) * cfg.gamma_bar_b - A * cfg.N_E * cfg.gamma_bar_e
    if margin <= 0:
        raise SecrecyInfeasible(
            f"epsilon*gamma_bar_b = {kind.epsilon(cfg.M) * cfg.gamma_bar_b:g} does not exceed "
            f"2^R_s*N_E*gamma_bar_e = {A * cfg.N_E * cfg.gamma_bar_e:g}"
        )
    val = (-math.expm1(-(A - 1.0) / margin)) ** cfg.N_t
    return SopEstimate(val, Method.EXACT, None, _meta(cfg, combiner=kind.value, case="fully_correlated"))


def eve_antenna_penalty(cfg: SystemConfig, factors: DerivedFactors, lambda_e: float,
                        prec: Precision = DEFAULT) -> float:
    """SOP growth from N_E eavesdropper antennas relative to one, for ``gamma_bar_e >> 1``."""
    _check_lambda(lambda_e)
    L = cfg.M * cfg.N_t
    N_E = cfg.N_E
    a_n = factors.alpha_at(lambda_e, N_E)
    a_1 = factors.alpha_at(lambda_e, 1)
    z = factors.z_at(lambda_e, N_E)
    log_r = (gammaln(L + N_E) - gammaln(N_E) - gammaln(L + 1)
             + (L + 1) * math.log1p(factors.S) - math.log(a_n) - L * math.log(a_1)
             + math.log(hyp2f1(1.0, L + N_E, N_E, z, prec)))
    return math.exp(log_r)


# ---------------------------------------------------------------------------
# TAS joint density

def log_joint_pdf_tas_mrc(x, y, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float):
    """log of the small-``x`` joint density of (selected TAS/MRC SNR, eavesdropper SNR)."""
    _check_lambda(lambda_e)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError("x and y must be >= 0")
    M, N_t, N_E = cfg.M, cfg.N_t, cfg.N_E
    L = M * N_t
    c = cfg.gamma_bar_e * (1.0 - lambda_e * lambda_e)
    z = factors.z_at(lambda_e, N_E)
    a_n = factors.alpha_at(lambda_e, N_E)
    const = (math.log(L) - N_t * gammaln(M + 1) - math.log(factors.prod_one_minus_eta2)
             - (N_t - 1) * math.log(factors.det_U) - L * math.log(cfg.gamma_bar_b)
             - N_E * math.log(c) - gammaln(N_E) - math.log(a_n))
    with np.errstate(divide="ignore"):
        lx = (L - 1) * np.log(x) if L > 1 else np.zeros(x.shape)
        ly = (N_E - 1) * np.log(y) if N_E > 1 else np.zeros(y.shape)
    yb = np.broadcast_to(y, np.broadcast(x, y).shape)
    return const + lx + ly - y / c + log_hyp1f1_1n(N_E, z * yb / c)


def joint_pdf_tas_mrc(x, y, cfg: SystemConfig, factors: DerivedFactors, lambda_e: float):
    """Small-``x`` joint density of (selected TAS/MRC SNR, eavesdropper SNR)."""
    return np.exp(log_joint_pdf_tas_mrc(x, y, cfg, factors, lambda_e))


def sop_from_joint_pdf(cfg: SystemConfig, factors: DerivedFactors, lambda_e: float,
                       prec: Precision = DEFAULT) -> float:
    """Integrate the joint density numerically over ``x <= A (y + 1) - 1``.

    Inner x-integral by Gauss-Legendre (the density is polynomial in x),
    outer y-integral by Gauss-Laguerre matched to the decay rate
    ``(1 - z) / c`` of the eavesdropper factor.
    """
    A = cfg.two_rs
    L = cfg.M * cfg.N_t
    c = cfg.gamma_bar_e * (1.0 - lambda_e * lambda_e)
    z = factors.z_at(lambda_e, cfg.N_E)
    gx, gw = leggauss(max(8, L))

    def inner(y):
        X = A * (y + 1.0) - 1.0
        xs = 0.5 * X[:, None] * (gx[None, :] + 1.0)
        f = joint_pdf_tas_mrc(xs, y[:, None], cfg, factors, lambda_e)
        return 0.5 * X * np.sum(gw[None, :] * f, axis=1)

    return quad_semi_infinite(inner, prec, rate=(1.0 - z) / c)
