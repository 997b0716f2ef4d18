"""Pure numpy implementation of the hot kernels.

This module mirrors ``_kernels.pyx`` operation for operation; it is what
``corrsop._backend`` loads when the compiled extension is unavailable or
``CORRSOP_PURE_PYTHON=1`` is set.

Marcum Q series
---------------
With ``alpha = a**2 / 2`` and ``beta = b**2 / 2`` the Marcum function is a
Poisson mixture of regularized incomplete gamma functions::

    Q_M(a, b)     = sum_j w_j * Qg(M + j, beta)
    1 - Q_M(a, b) = sum_j w_j * Pg(M + j, beta)
    w_j = exp(-alpha) alpha**j / j!

``Qg`` increases with ``j`` and ``Pg`` decreases, so ``Qg`` is recursed
upwards and ``Pg`` downwards; both recursions only add positive terms.
Whichever of ``Q`` and ``1 - Q`` is the smaller one (decided by comparing
``beta`` with the mean ``alpha + M``) is summed directly, the other is its
complement.

When ``a`` and ``b`` are far apart the Poisson sum needs on the order of
``sqrt(alpha) * |sqrt(beta) - sqrt(alpha)|`` terms. There the Bessel forms
are used instead, with ``r = min(a, b) / max(a, b)`` and ``x = a b``::

    1 - Q_M = exp(-(a-b)**2/2) * sum_{k>=M} r**k ive(k, x)              (b < a)
    Q_M     = exp(-(a-b)**2/2) * (sum_{k=1}^{M-1} r**-k ive(k, x)
                                  + sum_{k>=0} r**k ive(k, x))          (b > a)

whose terms fall off at least geometrically.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, ive

BACKEND = "python"

KIND_MRC, KIND_SC, KIND_EGC = 0, 1, 2
MODE_SIMO, MODE_NO_CSI, MODE_WITH_CSI = 0, 1, 2


def _log_pmf(k, lam):
    return -lam + k * np.log(lam) - gammaln(k + 1.0)


def _p_side(M, al, be, eps, max_terms):
    """Sum 1 - Q_M directly (beta below the mean)."""
    n_el = al.size
    j0 = np.floor(al)
    w0 = np.exp(-al + j0 * np.log(al) - gammaln(j0 + 1.0))
    failed = np.zeros(n_el, dtype=bool)

    # upper cut: remaining weight above j_hi is below eps * w0
    j = j0.copy()
    w = w0.copy()
    active = np.ones(n_el, dtype=bool)
    it = 0
    while True:
        qr = al / (j + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(qr < 1.0, w * qr / (1.0 - qr), np.inf)
        active &= ~(tail <= eps * w0)
        if not active.any():
            break
        it += 1
        if it > max_terms:
            failed |= active
            break
        w = np.where(active, w * al / (j + 1.0), w)
        j = np.where(active, j + 1.0, j)

    n = M + j
    pg = gammainc(n, be)
    d = np.exp(_log_pmf(n - 1.0, be))
    p_m = gammainc(float(M), be)
    total = np.zeros(n_el)
    active = ~failed
    it = 0
    while True:
        total = np.where(active, total + w * pg, total)
        stop = j <= 0.0
        r = j / al
        with np.errstate(divide="ignore", invalid="ignore"):
            low_tail = np.where(r < 1.0, w * r / (1.0 - r), np.inf)
        stop |= p_m * low_tail <= eps * total
        active &= ~stop
        if not active.any():
            break
        it += 1
        if it > max_terms:
            failed |= active
            break
        pg = np.where(active, pg + d, pg)
        n = np.where(active, n - 1.0, n)
        d = np.where(active, d * n / be, d)
        w = np.where(active, w * j / al, w)
        j = np.where(active, j - 1.0, j)
    return 1.0 - total, total, failed


def _q_side(M, al, be, eps, max_terms):
    """Sum Q_M directly (beta at or above the mean)."""
    n_el = al.size
    j0 = np.floor(al)
    w0 = np.exp(-al + j0 * np.log(al) - gammaln(j0 + 1.0))
    failed = np.zeros(n_el, dtype=bool)

    # lower cut: remaining weight below j_lo is below eps * w0
    j = j0.copy()
    w = w0.copy()
    active = j > 0.0
    it = 0
    while True:
        r = j / al
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(r < 1.0, w * r / (1.0 - r), np.inf)
        active &= ~(tail <= eps * w0)
        if not active.any():
            break
        it += 1
        if it > max_terms:
            failed |= active
            break
        w = np.where(active, w * j / al, w)
        j = np.where(active, j - 1.0, j)
        active &= j > 0.0

    n = M + j
    qg = gammaincc(n, be)
    d = np.exp(_log_pmf(n, be))
    total = np.zeros(n_el)
    active = ~failed
    it = 0
    while True:
        total = np.where(active, total + w * qg, total)
        qr = al / (j + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            up_tail = np.where(qr < 1.0, w * qr / (1.0 - qr), np.inf)
        active &= ~(up_tail <= eps * total)
        if not active.any():
            break
        it += 1
        if it > max_terms:
            failed |= active
            break
        qg = np.where(active, qg + d, qg)
        n = np.where(active, n + 1.0, n)
        d = np.where(active, d * be / n, d)
        w = np.where(active, w * al / (j + 1.0), w)
        j = np.where(active, j + 1.0, j)
    return total, 1.0 - total, failed


# separation |sqrt(beta) - sqrt(alpha)| * sqrt(max(alpha, beta)) above which
# the Bessel forms are used. The upper form scales by (b/a)^k, so it also
# needs alpha >= BESSEL_MIN_ALPHA; below that the Poisson series is short.
SEP_BESSEL = 25.0
BESSEL_MIN_ALPHA = 1.0


def _bessel_side(M, a, b, eps, max_terms, upper):
    """Sum the Bessel form: 1 - Q_M if ``upper`` is False (b < a), else Q_M (b > a)."""
    n_el = a.size
    x = a * b
    hi = np.maximum(a, b)
    r = np.minimum(a, b) / hi
    lpref = -0.5 * (a - b) * (a - b)
    total = np.zeros(n_el)
    failed = np.zeros(n_el, dtype=bool)
    if upper:
        pw = np.ones(n_el)
        for k in range(1, M):
            pw = pw / r
            total = total + pw * ive(float(k), x)
        k0 = 0
    else:
        k0 = M
    pw = r ** k0
    term = pw * ive(float(k0), x)
    total = total + term
    prev = term
    active = term > 0.0
    k = k0
    it = 0
    while active.any():
        it += 1
        if it > max_terms:
            failed |= active
            break
        k += 1
        pw = np.where(active, pw * r, pw)
        term = np.where(active, pw * ive(float(k), x), term)
        total = np.where(active, total + term, total)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = term / prev
            tail = np.where(ratio < 1.0, term * ratio / (1.0 - ratio), np.inf)
        active &= ~((tail <= eps * total) | (term == 0.0))
        prev = np.where(active, term, prev)
    s = np.exp(lpref) * total
    if upper:
        return s, 1.0 - s, failed
    return 1.0 - s, s, failed


def _separated(al, be):
    return np.abs(np.sqrt(be) - np.sqrt(al)) * np.sqrt(np.maximum(al, be)) > SEP_BESSEL


def marcum_qp(M, a, b, eps, max_terms):
    """Return ``(Q_M(a, b), 1 - Q_M(a, b), n_failed)`` for 1-D arrays.

    Entries that did not converge within ``max_terms`` iterations are NaN.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    q = np.empty(a.shape)
    p = np.empty(a.shape)
    alpha = 0.5 * a * a
    beta = 0.5 * b * b

    zero_b = beta == 0.0
    q[zero_b] = 1.0
    p[zero_b] = 0.0
    zero_a = (alpha == 0.0) & ~zero_b
    q[zero_a] = gammaincc(float(M), beta[zero_a])
    p[zero_a] = gammainc(float(M), beta[zero_a])

    general = ~(zero_b | zero_a)
    sep = general & _separated(alpha, beta)
    lower = general & (beta < alpha + M)
    upper = general & ~lower
    lower_b = lower & sep & (beta < alpha)
    upper_b = upper & sep & (alpha >= BESSEL_MIN_ALPHA)
    n_failed = 0
    for mask, route in ((lower & ~lower_b, 0), (upper & ~upper_b, 1), (lower_b, 2), (upper_b, 3)):
        if not mask.any():
            continue
        if route == 0:
            qs, ps, bad = _p_side(M, alpha[mask], beta[mask], eps, max_terms)
        elif route == 1:
            qs, ps, bad = _q_side(M, alpha[mask], beta[mask], eps, max_terms)
        else:
            qs, ps, bad = _bessel_side(M, a[mask], b[mask], eps, max_terms, route == 3)
        qs[bad] = np.nan
        ps[bad] = np.nan
        q[mask] = qs
        p[mask] = ps
        n_failed += int(bad.sum())
    return q, p, n_failed


def count_outages(draws, priv_b, shared_b, priv_e, shared_e, gamma_b, gamma_e, two_rs):
    """Count secrecy outages for every combiner/selection pair in one pass.

    ``draws`` has shape ``(n, N_t, 1 + M + N_E, 2)``: slot 0 holds the
    shared component, then the legitimate branches, then the eavesdropper
    branches; the last axis is (real, imag), already scaled to variance 1/2.

    Returns an int64 array ``counts[kind, mode]``.
    """
    draws = np.asarray(draws, dtype=np.float64)
    n, n_t = draws.shape[0], draws.shape[1]
    n_b = len(priv_b)
    n_e = int(draws.shape[2]) - 1 - n_b
    x0 = draws[:, :, 0, 0]
    y0 = draws[:, :, 0, 1]

    mrc = np.zeros((n, n_t))
    sc = np.zeros((n, n_t))
    amp = np.zeros((n, n_t))
    for m in range(n_b):
        re = priv_b[m] * draws[:, :, 1 + m, 0] + shared_b[m] * x0
        im = priv_b[m] * draws[:, :, 1 + m, 1] + shared_b[m] * y0
        g = gamma_b * (re * re + im * im)
        mrc = mrc + g
        sc = np.maximum(sc, g)
        amp = amp + np.sqrt(g)
    egc = amp * amp / n_b

    ge = np.zeros((n, n_t))
    for k in range(n_e):
        re = priv_e * draws[:, :, 1 + n_b + k, 0] + shared_e * x0
        im = priv_e * draws[:, :, 1 + n_b + k, 1] + shared_e * y0
        ge = ge + gamma_e * (re * re + im * im)
    rhs = two_rs * (1.0 + ge)

    counts = np.zeros((3, 3), dtype=np.int64)
    rows = np.arange(n)
    for kind, gb in ((KIND_MRC, mrc), (KIND_SC, sc), (KIND_EGC, egc)):
        out = (1.0 + gb) < rhs
        counts[kind, MODE_SIMO] = np.count_nonzero(out[:, 0])
        sel = np.argmax(gb, axis=1)
        counts[kind, MODE_NO_CSI] = np.count_nonzero(out[rows, sel])
        counts[kind, MODE_WITH_CSI] = np.count_nonzero(out.all(axis=1))
    return counts
