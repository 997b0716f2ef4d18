"""Correlated Rayleigh channel model.

Every legitimate branch ``m`` and eavesdropper branch ``k`` behind one
transmit antenna share a common complex Gaussian ``z0``::

    h_b[m] = sqrt(1 - eta[m]**2) * w_b[m] + eta[m] * z0
    h_e[k] = sqrt(1 - lam**2)    * w_e[k] + lam    * z0

with all real and imaginary parts i.i.d. N(0, 1/2). Branch SNRs are
``gamma_bar * |h|**2``. Conditioning on ``t = |z0|**2`` makes the branches
independent, which is what all the closed forms exploit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCorrelation, DomainError
from .specfun import DEFAULT, Precision, marcum_q_complement

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, average SNRs (linear) and target secrecy rate."""

    M: int = 1
    N_t: int = 1
    N_E: int = 1
    gamma_bar_b: float = 1.0
    gamma_bar_e: float = 1.0
    r_s: float = 1.0

    def __post_init__(self):
        for name in ("M", "N_t", "N_E"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be an integer >= 1, got {v}")
            object.__setattr__(self, name, int(v))
        for name in ("gamma_bar_b", "gamma_bar_e"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)
        r = float(self.r_s)
        if not (math.isfinite(r) and r >= 0):
            raise DomainError(f"r_s must be >= 0, got {r}")
        object.__setattr__(self, "r_s", r)

    @property
    def two_rs(self) -> float:
        return 2.0 ** self.r_s


@dataclass(frozen=True)
class CorrelationSpec:
    """Correlation coefficients of the legitimate and eavesdropper links.

    With ``fully_correlated_main`` (resp. ``fully_correlated_eve``) set, the
    private part of every legitimate (eavesdropper) branch is dropped and
    only the sign of ``eta[m]`` (``lambda_e``) is used.
    """

    eta: tuple = (0.0,)
    lambda_e: float = 0.0
    fully_correlated_main: bool = False
    fully_correlated_eve: bool = False

    def __post_init__(self):
        eta = tuple(float(v) for v in np.atleast_1d(self.eta))
        if not eta:
            raise DomainError("eta must have at least one entry")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "lambda_e", float(self.lambda_e))
        if not all(math.isfinite(v) for v in eta + (self.lambda_e,)):
            raise DomainError("correlation coefficients must be finite")
        if not self.fully_correlated_main and any(abs(v) >= 1 for v in eta):
            raise DomainError("|eta| must be < 1 unless fully_correlated_main is set")
        if not self.fully_correlated_eve and abs(self.lambda_e) >= 1:
            raise DomainError("|lambda_e| must be < 1 unless fully_correlated_eve is set")

    @property
    def M(self) -> int:
        return len(self.eta)

    def weights(self):
        """Private and shared amplitude weights.

        Returns
        -------
        priv_b, shared_b : ndarray, shape (M,)
        priv_e, shared_e : float
        """
        eta = np.asarray(self.eta)
        if self.fully_correlated_main:
            priv_b = np.zeros_like(eta)
            shared_b = np.where(eta < 0, -1.0, 1.0)
        else:
            priv_b = np.sqrt(1.0 - eta * eta)
            shared_b = eta.copy()
        if self.fully_correlated_eve:
            priv_e, shared_e = 0.0, (-1.0 if self.lambda_e < 0 else 1.0)
        else:
            lam = self.lambda_e
            priv_e, shared_e = math.sqrt(1.0 - lam * lam), lam
        return priv_b, shared_b, priv_e, shared_e

    def branch_correlation(self):
        """Pairwise correlations: legitimate matrix, eve-eve, and main-eve vector."""
        _, shared_b, _, shared_e = self.weights()
        rho_b = np.outer(shared_b, shared_b)
        np.fill_diagonal(rho_b, 1.0)
        return rho_b, shared_e * shared_e, shared_b * shared_e


@dataclass(frozen=True)
class DerivedFactors:
    """Correlation matrix and the aggregate sums used by the closed forms."""

    eta: tuple
    lambda_e: float
    N_E: int
    U: np.ndarray = field(repr=False)
    det_U: float
    det_direct: float
    S: float
    S_lambda: float
    alpha: float

    @property
    def M(self) -> int:
        return len(self.eta)

    @property
    def prod_one_minus_eta2(self) -> float:
        return float(np.prod(1.0 - np.asarray(self.eta) ** 2))

    def s_lambda(self, lambda_e: float) -> float:
        """S_lambda at another eavesdropper correlation (``|lambda_e| <= 1``)."""
        return self.S * (1.0 - lambda_e * lambda_e)

    def alpha_at(self, lambda_e: float, N_E: int | None = None) -> float:
        n_e = self.N_E if N_E is None else N_E
        l2 = lambda_e * lambda_e
        return 1.0 + self.S + n_e * l2 / (1.0 - l2)

    def z_at(self, lambda_e: float, N_E: int | None = None) -> float:
        """Argument of the 2F1 terms, in [0, 1)."""
        n_e = self.N_E if N_E is None else N_E
        l2 = lambda_e * lambda_e
        return n_e * l2 / (self.alpha_at(lambda_e, n_e) * (1.0 - l2))


def correlation_matrix(eta) -> np.ndarray:
    """Unit-diagonal matrix with off-diagonal entries ``eta[m] * eta[m']``."""
    eta = np.asarray(eta, dtype=float)
    U = np.outer(eta, eta)
    np.fill_diagonal(U, 1.0)
    return U


def det_product(eta) -> float:
    """det(U) via prod(1 - eta**2) * (1 + sum eta**2 / (1 - eta**2))."""
    eta2 = np.asarray(eta, dtype=float) ** 2
    om = 1.0 - eta2
    return float(np.prod(om) * (1.0 + np.sum(eta2 / om)))


def build_factors(spec: CorrelationSpec, cfg: SystemConfig) -> DerivedFactors:
    if spec.fully_correlated_main or spec.fully_correlated_eve:
        raise DegenerateCorrelation(
            "fully-correlated links have dedicated formulas; build_factors needs |eta|, |lambda_e| < 1"
        )
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    eta = np.asarray(spec.eta)
    eta2 = eta * eta
    S = float(np.sum(eta2 / (1.0 - eta2)))
    l2 = spec.lambda_e ** 2
    U = correlation_matrix(eta)
    U.setflags(write=False)
    det_u = det_product(eta)
    det_direct = float(np.linalg.det(U))
    if abs(det_u - det_direct) > 1e-10 * abs(det_u):
        raise ArithmeticError(f"det(U) mismatch: product {det_u!r} vs direct {det_direct!r}")
    return DerivedFactors(
        eta=spec.eta,
        lambda_e=spec.lambda_e,
        N_E=cfg.N_E,
        U=U,
        det_U=det_u,
        det_direct=det_direct,
        S=S,
        S_lambda=S * (1.0 - l2),
        alpha=1.0 + S + cfg.N_E * l2 / (1.0 - l2),
    )


@dataclass(frozen=True)
class ChannelDraw:
    """One realization behind a single transmit antenna."""

    h_b: np.ndarray
    h_e: np.ndarray
    t: float


def sample_channel(spec: CorrelationSpec, cfg: SystemConfig, stream: np.random.Generator) -> ChannelDraw:
    """Draw one set of legitimate/eavesdropper gains for one transmit antenna."""
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    g = stream.standard_normal((1 + cfg.M + cfg.N_E, 2)) * _SQRT_HALF
    z = g[:, 0] + 1j * g[:, 1]
    priv_b, shared_b, priv_e, shared_e = spec.weights()
    h_b = priv_b * z[1:1 + cfg.M] + shared_b * z[0]
    h_e = priv_e * z[1 + cfg.M:] + shared_e * z[0]
    return ChannelDraw(h_b=h_b, h_e=h_e, t=float(g[0, 0] ** 2 + g[0, 1] ** 2))


def sample_gains(spec: CorrelationSpec, cfg: SystemConfig, stream: np.random.Generator, n: int):
    """Vectorized sampler: ``n`` draws for every transmit antenna.

    Returns complex arrays ``h_b`` of shape (n, N_t, M), ``h_e`` of shape
    (n, N_t, N_E) and ``t`` of shape (n, N_t).
    """
    if spec.M != cfg.M:
        raise DomainError(f"eta has {spec.M} entries but M = {cfg.M}")
    g = stream.standard_normal((n, cfg.N_t, 1 + cfg.M + cfg.N_E, 2)) * _SQRT_HALF
    z = g[..., 0] + 1j * g[..., 1]
    priv_b, shared_b, priv_e, shared_e = spec.weights()
    z0 = z[..., :1]
    h_b = priv_b * z[..., 1:1 + cfg.M] + shared_b * z0
    h_e = priv_e * z[..., 1 + cfg.M:] + shared_e * z0
    return h_b, h_e, np.abs(z[..., 0]) ** 2


def conditional_branch_cdf(x, t, eta_m, gamma_bar, prec: Precision = DEFAULT):
    """CDF of one branch SNR given ``t``: 1 - Q_1(sqrt(2 eta^2 t/(1-eta^2)), sqrt(2x/(gamma_bar(1-eta^2))))."""
    if not abs(eta_m) < 1:
        raise DomainError("|eta_m| must be < 1")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0) or np.any(t < 0):
        raise DomainError("x and t must be nonnegative")
    om = 1.0 - eta_m * eta_m
    a = np.sqrt(2.0 * eta_m * eta_m * t / om)
    with np.errstate(over="ignore"):
        b = np.sqrt(2.0 * x / (gamma_bar * om))
    inf = ~np.isfinite(b)
    if np.any(inf):
        out = np.ones(np.broadcast(a, b).shape)
        fin = ~np.broadcast_to(inf, out.shape)
        a_b, b_b = np.broadcast_arrays(a, b)
        out[fin] = marcum_q_complement(1, a_b[fin], b_b[fin], prec)
        return out if out.ndim else float(out)
    return marcum_q_complement(1, a, b, prec)
