# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Marcum Q series and the Monte Carlo outage counter.

Operation-for-operation twin of ``_kernels_py``; see that module for the
series layout. Both kernels release the GIL.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, floor, sqrt, fabs, fmax, fmin, NAN, INFINITY
from scipy.special.cython_special cimport gammainc, gammaincc, gammaln, ive

cnp.import_array()

BACKEND = "cython"

cdef int KIND_MRC = 0, KIND_SC = 1, KIND_EGC = 2
cdef int MODE_SIMO = 0, MODE_NO_CSI = 1, MODE_WITH_CSI = 2


cdef inline double _log_pmf(double k, double lam) noexcept nogil:
    return -lam + k * log(lam) - gammaln(k + 1.0)


cdef int _p_side(int M, double al, double be, double eps, long max_terms,
                 double* q, double* p) noexcept nogil:
    cdef double j0 = floor(al)
    cdef double w0 = exp(-al + j0 * log(al) - gammaln(j0 + 1.0))
    cdef double j = j0, w = w0, qr, r, tail, n, pg, d, p_m, total
    cdef long it = 0
    while True:
        qr = al / (j + 1.0)
        if qr < 1.0:
            tail = w * qr / (1.0 - qr)
        else:
            tail = INFINITY
        if tail <= eps * w0:
            break
        it += 1
        if it > max_terms:
            return 1
        w = w * al / (j + 1.0)
        j = j + 1.0

    n = M + j
    pg = gammainc(n, be)
    d = exp(_log_pmf(n - 1.0, be))
    p_m = gammainc(<double>M, be)
    total = 0.0
    it = 0
    while True:
        total = total + w * pg
        if j <= 0.0:
            break
        r = j / al
        if r < 1.0:
            tail = w * r / (1.0 - r)
        else:
            tail = INFINITY
        if p_m * tail <= eps * total:
            break
        it += 1
        if it > max_terms:
            return 1
        pg = pg + d
        n = n - 1.0
        d = d * n / be
        w = w * j / al
        j = j - 1.0
    q[0] = 1.0 - total
    p[0] = total
    return 0


cdef int _q_side(int M, double al, double be, double eps, long max_terms,
                 double* q, double* p) noexcept nogil:
    cdef double j0 = floor(al)
    cdef double w0 = exp(-al + j0 * log(al) - gammaln(j0 + 1.0))
    cdef double j = j0, w = w0, qr, r, tail, n, qg, d, total
    cdef long it = 0
    while j > 0.0:
        r = j / al
        if r < 1.0:
            tail = w * r / (1.0 - r)
        else:
            tail = INFINITY
        if tail <= eps * w0:
            break
        it += 1
        if it > max_terms:
            return 1
        w = w * j / al
        j = j - 1.0

    n = M + j
    qg = gammaincc(n, be)
    d = exp(_log_pmf(n, be))
    total = 0.0
    it = 0
    while True:
        total = total + w * qg
        qr = al / (j + 1.0)
        if qr < 1.0:
            tail = w * qr / (1.0 - qr)
        else:
            tail = INFINITY
        if tail <= eps * total:
            break
        it += 1
        if it > max_terms:
            return 1
        qg = qg + d
        n = n + 1.0
        d = d * be / n
        w = w * al / (j + 1.0)
        j = j + 1.0
    q[0] = total
    p[0] = 1.0 - total
    return 0


cdef double SEP_BESSEL = 25.0
cdef double BESSEL_MIN_ALPHA = 1.0


cdef int _bessel_side(int M, double a, double b, double eps, long max_terms, bint upper,
                      double* q, double* p) noexcept nogil:
    cdef double x = a * b
    cdef double hi = fmax(a, b)
    cdef double r = fmin(a, b) / hi
    cdef double lpref = -0.5 * (a - b) * (a - b)
    cdef double total = 0.0, pw, term, prev, ratio, tail, s
    cdef int k, k0
    cdef long it = 0
    if upper:
        pw = 1.0
        for k in range(1, M):
            pw = pw / r
            total = total + pw * ive(<double>k, x)
        k0 = 0
    else:
        k0 = M
    pw = r ** k0
    term = pw * ive(<double>k0, x)
    total = total + term
    prev = term
    k = k0
    if term > 0.0:
        while True:
            it += 1
            if it > max_terms:
                return 1
            k += 1
            pw = pw * r
            term = pw * ive(<double>k, x)
            total = total + term
            ratio = term / prev
            if ratio < 1.0:
                tail = term * ratio / (1.0 - ratio)
            else:
                tail = INFINITY
            if tail <= eps * total or term == 0.0:
                break
            prev = term
    s = exp(lpref) * total
    if upper:
        q[0] = s
        p[0] = 1.0 - s
    else:
        q[0] = 1.0 - s
        p[0] = s
    return 0


def marcum_qp(int M, a, b, double eps, long max_terms):
    """Return ``(Q_M(a, b), 1 - Q_M(a, b), n_failed)`` for 1-D arrays."""
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n_el = av.shape[0], i
    q_arr = np.empty(n_el)
    p_arr = np.empty(n_el)
    cdef double[::1] qv = q_arr
    cdef double[::1] pv = p_arr
    cdef double al, be
    cdef long n_failed = 0
    cdef int bad
    cdef bint sep
    with nogil:
        for i in range(n_el):
            al = 0.5 * av[i] * av[i]
            be = 0.5 * bv[i] * bv[i]
            if be == 0.0:
                qv[i] = 1.0
                pv[i] = 0.0
                continue
            if al == 0.0:
                qv[i] = gammaincc(<double>M, be)
                pv[i] = gammainc(<double>M, be)
                continue
            sep = fabs(sqrt(be) - sqrt(al)) * sqrt(fmax(al, be)) > SEP_BESSEL
            if be < al + M:
                if sep and be < al:
                    bad = _bessel_side(M, av[i], bv[i], eps, max_terms, False, &qv[i], &pv[i])
                else:
                    bad = _p_side(M, al, be, eps, max_terms, &qv[i], &pv[i])
            elif sep and al >= BESSEL_MIN_ALPHA:
                bad = _bessel_side(M, av[i], bv[i], eps, max_terms, True, &qv[i], &pv[i])
            else:
                bad = _q_side(M, al, be, eps, max_terms, &qv[i], &pv[i])
            if bad:
                qv[i] = NAN
                pv[i] = NAN
                n_failed += 1
    return q_arr, p_arr, n_failed


def count_outages(draws, priv_b, shared_b, double priv_e, double shared_e,
                  double gamma_b, double gamma_e, double two_rs):
    """Count secrecy outages for every combiner/selection pair in one pass.

    Same contract as ``_kernels_py.count_outages``.
    """
    cdef double[:, :, :, ::1] dv = np.ascontiguousarray(draws, dtype=np.float64)
    cdef double[::1] pb = np.ascontiguousarray(priv_b, dtype=np.float64)
    cdef double[::1] sb = np.ascontiguousarray(shared_b, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0], n_t = dv.shape[1]
    cdef Py_ssize_t n_b = pb.shape[0]
    cdef Py_ssize_t n_e = dv.shape[2] - 1 - n_b
    counts_arr = np.zeros((3, 3), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    cdef Py_ssize_t i, a, m, k, kind
    cdef double x0, y0, re, im, g, mrc, sc, amp, egc, ge, rhs, gb
    cdef double best[3]
    cdef int best_out[3]
    cdef int all_out[3]
    cdef int out
    with nogil:
        for i in range(n):
            for kind in range(3):
                best[kind] = -1.0
                best_out[kind] = 0
                all_out[kind] = 1
            for a in range(n_t):
                x0 = dv[i, a, 0, 0]
                y0 = dv[i, a, 0, 1]
                mrc = 0.0
                sc = 0.0
                amp = 0.0
                for m in range(n_b):
                    re = pb[m] * dv[i, a, 1 + m, 0] + sb[m] * x0
                    im = pb[m] * dv[i, a, 1 + m, 1] + sb[m] * y0
                    g = gamma_b * (re * re + im * im)
                    mrc = mrc + g
                    if g > sc:
                        sc = g
                    amp = amp + sqrt(g)
                egc = amp * amp / n_b
                ge = 0.0
                for k in range(n_e):
                    re = priv_e * dv[i, a, 1 + n_b + k, 0] + shared_e * x0
                    im = priv_e * dv[i, a, 1 + n_b + k, 1] + shared_e * y0
                    ge = ge + gamma_e * (re * re + im * im)
                rhs = two_rs * (1.0 + ge)
                for kind in range(3):
                    if kind == KIND_MRC:
                        gb = mrc
                    elif kind == KIND_SC:
                        gb = sc
                    else:
                        gb = egc
                    out = (1.0 + gb) < rhs
                    if a == 0:
                        counts[kind, MODE_SIMO] += out
                    if gb > best[kind]:
                        best[kind] = gb
                        best_out[kind] = out
                    if not out:
                        all_out[kind] = 0
            for kind in range(3):
                counts[kind, MODE_NO_CSI] += best_out[kind]
                counts[kind, MODE_WITH_CSI] += all_out[kind]
    return counts_arr
