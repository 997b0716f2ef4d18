"""Special functions and quadrature used by the closed forms.

Everything here is a pure function of its arguments. Tolerances come from a
``Precision`` value so callers (and tests) can tighten them explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaln, ive, roots_laguerre

from . import _backend
from .errors import DomainError, NonConvergence

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Precision:
    """Numerical tolerances shared by series and quadrature routines."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_terms: int = 10_000
    quad_nodes: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if self.quad_nodes < 8:
            raise DomainError("quad_nodes must be >= 8")

    @property
    def series_eps(self) -> float:
        # relative truncation used inside the Marcum series
        return max(1e-3 * min(self.abs_tol, self.rel_tol), _EPS)


DEFAULT = Precision()


def _check_finite_nonneg(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise DomainError(f"{name} must be finite and nonnegative")
    return x


def _check_order(M):
    if int(M) != M or M < 1:
        raise DomainError(f"Marcum order must be a positive integer, got {M}")
    return int(M)


def marcum_qp(M, a, b, prec: Precision = DEFAULT):
    """Vectorized ``(Q_M(a, b), 1 - Q_M(a, b))``.

    Both outputs are accurate in the relative sense on the side that is
    summed directly, so deep tails of either one keep their digits.

    Parameters
    ----------
    M : int
        Order, M >= 1.
    a, b : array_like
        Nonnegative arguments, broadcast together.
    """
    M = _check_order(M)
    a = _check_finite_nonneg("a", a)
    b = _check_finite_nonneg("b", b)
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    q, p, n_failed = _backend.marcum_qp(
        M, a.ravel(), b.ravel(), prec.series_eps, prec.max_terms
    )
    if n_failed:
        raise NonConvergence(f"Marcum Q series: {n_failed} entries exceeded max_terms")
    q = np.asarray(q).reshape(shape)
    p = np.asarray(p).reshape(shape)
    # snap tiny excursions past the unit interval
    q = np.where((q < 0) & (q > -prec.abs_tol), 0.0, q)
    q = np.where((q > 1) & (q < 1 + prec.abs_tol), 1.0, q)
    p = np.where((p < 0) & (p > -prec.abs_tol), 0.0, p)
    p = np.where((p > 1) & (p < 1 + prec.abs_tol), 1.0, p)
    return q, p


def marcum_q(M, a, b, prec: Precision = DEFAULT) -> float:
    """Generalized Marcum Q-function Q_M(a, b) for a scalar argument pair."""
    q, _ = marcum_qp(M, a, b, prec)
    return float(q) if np.ndim(q) == 0 else q


def marcum_q_complement(M, a, b, prec: Precision = DEFAULT):
    """1 - Q_M(a, b), summed directly (no cancellation for small values)."""
    _, p = marcum_qp(M, a, b, prec)
    return float(p) if np.ndim(p) == 0 else p


def bessel_i_scaled(nu, x, prec: Precision = DEFAULT):
    """exp(-x) * I_nu(x) for integer ``nu >= 0`` and ``x >= 0``."""
    if int(nu) != nu or nu < 0:
        raise DomainError("nu must be a nonnegative integer")
    x = _check_finite_nonneg("x", x)
    out = ive(int(nu), x)
    if np.any(~np.isfinite(out)):
        raise NonConvergence("scaled Bessel evaluation failed")
    return float(out) if out.ndim == 0 else out


def _is_nonpos_int(v) -> bool:
    return v <= 0 and float(v).is_integer()


def _sum_series(a_list, c_list, z, prec, n_terms=None):
    """Sum prod_i (a_i)_k / prod_j (c_j)_k * z**k / k!.

    If ``n_terms`` is given the series is a polynomial and is summed exactly.
    Otherwise stop once the geometric tail bound drops below machine
    precision relative to the running sum.
    """
    s = 1.0
    term = 1.0
    k = 0
    limit = prec.max_terms if n_terms is None else n_terms
    while k < limit:
        num = z
        for ai in a_list:
            num *= ai + k
        den = float(k + 1)
        for ci in c_list:
            den *= ci + k
        ratio = num / den
        term *= ratio
        s += term
        k += 1
        if n_terms is None:
            r = abs(ratio)
            if r < 1.0 and abs(term) * r / (1.0 - r) <= _EPS * abs(s):
                return s
            if term == 0.0:
                return s
    if n_terms is not None:
        return s
    raise NonConvergence(f"hypergeometric series did not converge in {prec.max_terms} terms")


def hyp1f1(a, c, z, prec: Precision = DEFAULT) -> float:
    """Confluent hypergeometric function 1F1(a; c; z) for real arguments.

    Negative ``z`` goes through Kummer's transformation so the summed series
    has no cancellation when ``c - a >= 0``.
    """
    if _is_nonpos_int(c):
        raise DomainError("c must not be a nonpositive integer")
    if not math.isfinite(z):
        raise DomainError("z must be finite")
    if a == 0 or z == 0:
        return 1.0
    if _is_nonpos_int(a):
        return _sum_series([a], [c], z, prec, n_terms=int(-a))
    if z < 0:
        if _is_nonpos_int(c - a):
            return math.exp(z) * _sum_series([c - a], [c], -z, prec, n_terms=int(a - c))
        return math.exp(z) * _sum_series([c - a], [c], -z, prec)
    return _sum_series([a], [c], z, prec)


def hyp2f1(a, b, c, z, prec: Precision = DEFAULT) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments.

    Supported: the terminating cases (``a`` or ``b`` a nonpositive integer)
    for any ``z``; any ``z < 0`` when ``c - a`` or ``c - b`` is a
    nonpositive integer, where Euler's transformation turns the series into
    a polynomial with terms of one sign; and ``|z| < 1`` otherwise.
    """
    if _is_nonpos_int(c):
        raise DomainError("c must not be a nonpositive integer")
    if not math.isfinite(z):
        raise DomainError("z must be finite")
    for p, q in ((a, b), (b, a)):
        if _is_nonpos_int(p):
            return _sum_series([p, q], [c], z, prec, n_terms=int(-p))
    if z == 0:
        return 1.0
    for p, q in ((c - a, c - b), (c - b, c - a)):
        if z < 0 and _is_nonpos_int(p):
            poly = _sum_series([p, q], [c], z, prec, n_terms=int(-p))
            return (1.0 - z) ** (c - a - b) * poly
    if abs(z) >= 1.0:
        raise DomainError("|z| >= 1 outside the supported region")
    return _sum_series([a, b], [c], z, prec)


def log_hyp1f1_1n(N: int, w):
    """log 1F1(1; N; w) for integer ``N >= 1`` and ``w >= 0``, vectorized.

    Uses 1F1(1; N; w) = (N-1) e^w w^(1-N) gamma_lower(N-1, w), which stays
    finite in log form where the series itself would overflow.
    """
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    w = _check_finite_nonneg("w", w)
    if N == 1:
        return w + 0.0
    n1 = N - 1.0
    out = np.zeros(w.shape)
    pos = w > 0
    wp = w[pos]
    out[pos] = (wp + math.log(n1) + (1.0 - N) * np.log(wp)
                + gammaln(n1) + np.log(gammainc(n1, wp)))
    # small w: gammainc loses nothing, but log(w) terms cancel; use the series
    small = pos & (w < 1e-3)
    for i in np.flatnonzero(small):
        out.flat[i] = math.log(_sum_series([1.0], [float(N)], float(w.flat[i]), DEFAULT))
    return out


@lru_cache(maxsize=64)
def laguerre_rule(n: int):
    """Gauss-Laguerre nodes and log-weights for ``n`` points.

    Nodes whose weight underflows are dropped; their contribution is below
    double precision anyway.
    """
    x, w = roots_laguerre(n)
    keep = w > 0
    x = x[keep]
    logw = np.log(w[keep])
    x.setflags(write=False)
    logw.setflags(write=False)
    return x, logw


def _node_schedule(prec: Precision):
    n = 8
    while n < prec.quad_nodes:
        yield n
        n *= 2
    yield prec.quad_nodes


def quad_semi_infinite(f, prec: Precision = DEFAULT, rate: float = 1.0) -> float:
    """Integrate ``f`` over ``[0, inf)`` with doubling Gauss-Laguerre rules.

    ``f`` must accept an array of abscissae and decay exponentially. The
    rule is applied to ``f(t) * exp(rate * t)`` against the weight
    ``exp(-rate * t)``; pick ``rate`` near the integrand's decay rate.

    Raises
    ------
    NonConvergence
        If two successive rules never agree to ``max(abs_tol, rel_tol*|I|)``.
    """
    if not rate > 0:
        raise DomainError("rate must be positive")
    prev = None
    for n in _node_schedule(prec):
        x, logw = laguerre_rule(n)
        t = x / rate
        ft = np.asarray(f(t), dtype=float)
        est = float(np.sum(np.exp(logw + x) * ft)) / rate
        if not math.isfinite(est):
            raise NonConvergence("quadrature produced a non-finite value")
        if prev is not None and abs(est - prev) < max(prec.abs_tol, prec.rel_tol * abs(est)):
            return est
        prev = est
    raise NonConvergence(f"Gauss-Laguerre did not converge with {prec.quad_nodes} nodes")
