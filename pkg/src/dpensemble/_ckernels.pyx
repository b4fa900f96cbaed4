# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels.py`` for the reference semantics."""
import numpy as np

from libc.math cimport exp, log, log1p, sqrt, fabs
from libc.stdint cimport uint64_t, int64_t

cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double LOG_2PI_HALF = 0.5 * log(2.0 * 3.141592653589793)
cdef double TAIL_CUT = 1e-17
cdef int NFACT_TABLE = 256
cdef double[257] _LOGFACT

cdef int _i
_LOGFACT[0] = 0.0
_LOGFACT[1] = 0.0
for _i in range(2, NFACT_TABLE + 1):
    _LOGFACT[_i] = _LOGFACT[_i - 1] + log(<double>_i)

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef inline uint64_t _splitmix64(uint64_t x) noexcept nogil:
    cdef uint64_t z = x + <uint64_t>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t trial, uint64_t stream) noexcept nogil:
    cdef uint64_t h = _splitmix64(_splitmix64(seed) ^ _splitmix64(trial + (stream << 48)))
    return (<double>(h >> 11) + 0.5) * TWO_M53


cdef inline double _log_factorial(int64_t k) noexcept nogil:
    cdef double x, ix, ix2
    if k <= NFACT_TABLE:
        return _LOGFACT[k]
    x = k + 1.0
    ix = 1.0 / x
    ix2 = ix * ix
    return (x - 0.5) * log(x) - x + LOG_2PI_HALF + ix * (1.0 / 12.0 - ix2 * (1.0 / 360.0 - ix2 / 1260.0))


cdef int64_t _binomial_inverse(int64_t n, double p, double u) noexcept nogil:
    cdef double r, logpm, pm, s, pk, cdf, below
    cdef int64_t m, k
    if p <= 0.0 or n == 0:
        return 0
    if p >= 1.0:
        return n
    if p > 0.5:
        return n - _binomial_inverse(n, 1.0 - p, 1.0 - u)
    r = p / (1.0 - p)
    m = <int64_t>((<double>(n + 1)) * p)
    if m > n:
        m = n
    logpm = (_log_factorial(n) - _log_factorial(m) - _log_factorial(n - m)
             + (<double>m) * log(p) + (<double>(n - m)) * log1p(-p))
    pm = exp(logpm)
    s = 0.0
    pk = pm
    k = m
    while k > 0:
        pk = pk * (<double>k) / ((<double>(n - k + 1)) * r)
        k -= 1
        s += pk
        if pk < TAIL_CUT * (s + pm):
            break
    cdf = s + pm
    if u <= cdf:
        k = m
        pk = pm
        while k > 0:
            below = cdf - pk
            if u > below:
                return k
            pk = pk * (<double>k) / ((<double>(n - k + 1)) * r)
            k -= 1
            cdf = below
        return 0
    k = m
    pk = pm
    while k < n:
        pk = pk * (<double>(n - k)) / (<double>(k + 1)) * r
        k += 1
        cdf += pk
        if u <= cdf or pk == 0.0:
            return k
    return n


cdef int64_t _poisson_inverse(double lam, double u) noexcept nogil:
    cdef double logpm, pm, s, pk, cdf, below
    cdef int64_t m, k
    if lam <= 0.0:
        return 0
    m = <int64_t>lam
    if m > 0:
        logpm = (<double>m) * log(lam) - lam - _log_factorial(m)
    else:
        logpm = -lam
    pm = exp(logpm)
    s = 0.0
    pk = pm
    k = m
    while k > 0:
        pk = pk * (<double>k) / lam
        k -= 1
        s += pk
        if pk < TAIL_CUT * (s + pm):
            break
    cdf = s + pm
    if u <= cdf:
        k = m
        pk = pm
        while k > 0:
            below = cdf - pk
            if u > below:
                return k
            pk = pk * (<double>k) / lam
            k -= 1
            cdf = below
        return 0
    k = m
    pk = pm
    while True:
        pk = pk * lam / (<double>(k + 1))
        k += 1
        cdf += pk
        if u <= cdf or pk == 0.0:
            return k


def uniform(seed, trial, stream):
    return _uniform(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>trial, <uint64_t>stream)


def binomial_inverse(int64_t n, double p, double u):
    return _binomial_inverse(n, p, u)


def poisson_inverse(double lam, double u):
    return _poisson_inverse(lam, u)


def sample_counts(seed, int64_t start, int64_t stop, int64_t n, double p, int method):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(stop - start, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t i
    cdef double lam = (<double>n) * p
    cdef double u
    with nogil:
        for i in range(start, stop):
            u = _uniform(s, <uint64_t>i, 0)
            if method == 0:
                o[i - start] = _binomial_inverse(n, p, u)
            else:
                o[i - start] = _poisson_inverse(lam, u)
    return out


cdef inline void _matvec(double[:, ::1] A, double[::1] b, double* y, double* out, int n) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(n):
        acc = b[i]
        for j in range(n):
            acc += A[i, j] * y[j]
        out[i] = acc


def dp45_linear(A, b, y0, t_eval, double rtol, atol, double h0, double h_min, long max_steps):
    cdef double[:, ::1] Am = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] bm = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] te = np.ascontiguousarray(t_eval, dtype=np.float64)
    cdef double[::1] at = np.ascontiguousarray(atol, dtype=np.float64)
    cdef int n = bm.shape[0]
    cdef Py_ssize_t nt = te.shape[0]
    Y = np.empty((nt, n))
    cdef double[:, ::1] Ym = Y
    work = np.empty((10, n))
    cdef double[:, ::1] w = work
    cdef double* y = &w[0, 0]
    cdef double* k1 = &w[1, 0]
    cdef double* k2 = &w[2, 0]
    cdef double* k3 = &w[3, 0]
    cdef double* k4 = &w[4, 0]
    cdef double* k5 = &w[5, 0]
    cdef double* k6 = &w[6, 0]
    cdef double* k7 = &w[7, 0]
    cdef double* ys = &w[8, 0]
    cdef double* yn = &w[9, 0]
    cdef double* tmp
    cdef int i
    cdef Py_ssize_t idx = 1
    cdef double t, h, target, h_saved, e, sc, ssum, err, fac, ay, ayn
    cdef bint clipped
    cdef long acc = 0, rej = 0
    cdef int status = 0
    y0m = np.ascontiguousarray(y0, dtype=np.float64)
    cdef double[::1] y0v = y0m
    for i in range(n):
        y[i] = y0v[i]
        Ym[0, i] = y0v[i]
    t = te[0]
    h = h0
    with nogil:
        _matvec(Am, bm, y, k1, n)
        while idx < nt:
            target = te[idx]
            clipped = False
            h_saved = h
            if t + h >= target:
                h = target - t
                clipped = True
            for i in range(n):
                ys[i] = y[i] + h * (A21 * k1[i])
            _matvec(Am, bm, ys, k2, n)
            for i in range(n):
                ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            _matvec(Am, bm, ys, k3, n)
            for i in range(n):
                ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _matvec(Am, bm, ys, k4, n)
            for i in range(n):
                ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _matvec(Am, bm, ys, k5, n)
            for i in range(n):
                ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            _matvec(Am, bm, ys, k6, n)
            for i in range(n):
                yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            _matvec(Am, bm, yn, k7, n)
            ssum = 0.0
            for i in range(n):
                e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                ay = fabs(y[i])
                ayn = fabs(yn[i])
                sc = at[i] + rtol * (ay if ay > ayn else ayn)
                ssum += (e / sc) * (e / sc)
            err = sqrt(ssum / n)
            if err <= 1.0:
                if clipped:
                    t = target
                else:
                    t = t + h
                tmp = y
                y = yn
                yn = tmp
                tmp = k1
                k1 = k7
                k7 = tmp
                acc += 1
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = 0.9 * exp(-0.2 * log(err))
                    if fac < 0.2:
                        fac = 0.2
                    if fac > 10.0:
                        fac = 10.0
                if clipped:
                    for i in range(n):
                        Ym[idx, i] = y[i]
                    idx += 1
                    if fac >= 1.0:
                        h = h_saved
                    else:
                        h = h * fac
                else:
                    h = h * fac
            else:
                rej += 1
                fac = 0.9 * exp(-0.2 * log(err))
                if fac < 0.2:
                    fac = 0.2
                h = h * fac
                if h < h_min:
                    status = 1
                    break
            if acc + rej >= max_steps:
                status = 2
                break
    return Y, status, acc, rej
