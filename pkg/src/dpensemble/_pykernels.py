"""Pure-Python kernels. Mirrors ``_ckernels.pyx`` operation for operation so
both backends produce the same numbers (bit-identical for the samplers)."""
from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
TWO_M53 = 1.0 / 9007199254740992.0
LOG_2PI_HALF = 0.5 * math.log(2.0 * math.pi)
TAIL_CUT = 1e-17
NFACT_TABLE = 256

_LOGFACT = [0.0] * (NFACT_TABLE + 1)
for _i in range(2, NFACT_TABLE + 1):
    _LOGFACT[_i] = _LOGFACT[_i - 1] + math.log(_i)

# Dormand-Prince 5(4)
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

OK, STEP_COLLAPSE, MAX_STEPS = 0, 1, 2


def splitmix64(x):
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def uniform(seed, trial, stream):
    """Counter-based uniform on (0, 1) keyed by (seed, trial, stream)."""
    h = splitmix64(splitmix64(seed & MASK64) ^ splitmix64((trial + (stream << 48)) & MASK64))
    return ((h >> 11) + 0.5) * TWO_M53


def log_factorial(k):
    if k <= NFACT_TABLE:
        return _LOGFACT[k]
    x = k + 1.0
    ix = 1.0 / x
    ix2 = ix * ix
    return (x - 0.5) * math.log(x) - x + LOG_2PI_HALF + ix * (1.0 / 12.0 - ix2 * (1.0 / 360.0 - ix2 / 1260.0))


def binomial_inverse(n, p, u):
    """Smallest k with CDF_{Bin(n,p)}(k) >= u, searched outward from the mode."""
    if p <= 0.0 or n == 0:
        return 0
    if p >= 1.0:
        return n
    if p > 0.5:
        return n - binomial_inverse(n, 1.0 - p, 1.0 - u)
    r = p / (1.0 - p)
    m = int((n + 1) * p)
    if m > n:
        m = n
    logpm = log_factorial(n) - log_factorial(m) - log_factorial(n - m) + m * math.log(p) + (n - m) * math.log1p(-p)
    pm = math.exp(logpm)
    # lower tail mass below the mode
    s = 0.0
    pk = pm
    k = m
    while k > 0:
        pk = pk * k / ((n - k + 1) * r)
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
            pk = pk * k / ((n - k + 1) * r)
            k -= 1
            cdf = below
        return 0
    k = m
    pk = pm
    while k < n:
        pk = pk * (n - k) / (k + 1) * r
        k += 1
        cdf += pk
        if u <= cdf or pk == 0.0:
            return k
    return n


def poisson_inverse(lam, u):
    if lam <= 0.0:
        return 0
    m = int(lam)
    logpm = m * math.log(lam) - lam - log_factorial(m) if m > 0 else -lam
    pm = math.exp(logpm)
    s = 0.0
    pk = pm
    k = m
    while k > 0:
        pk = pk * k / lam
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
            pk = pk * k / lam
            k -= 1
            cdf = below
        return 0
    k = m
    pk = pm
    while True:
        pk = pk * lam / (k + 1)
        k += 1
        cdf += pk
        if u <= cdf or pk == 0.0:
            return k


def sample_counts(seed, start, stop, n, p, method):
    """Per-trial success counts for trials ``start..stop-1``.

    ``method`` 0 draws Binomial(n, p); 1 draws Poisson(n p).
    """
    out = np.empty(stop - start, dtype=np.int64)
    lam = n * p
    for i in range(start, stop):
        u = uniform(seed, i, 0)
        out[i - start] = binomial_inverse(n, p, u) if method == 0 else poisson_inverse(lam, u)
    return out


def _matvec(A, b, y, n):
    out = [0.0] * n
    for i in range(n):
        row = A[i]
        acc = b[i]
        for j in range(n):
            acc += row[j] * y[j]
        out[i] = acc
    return out


def dp45_linear(A, b, y0, t_eval, rtol, atol, h0, h_min, max_steps):
    """Adaptive Dormand-Prince integration of ``y' = A y + b``.

    Returns ``(Y, status, n_accepted, n_rejected)`` with ``Y[i]`` the state at
    ``t_eval[i]``; steps are shortened to land on every output time.
    """
    A = np.asarray(A, dtype=float).tolist()
    b = np.asarray(b, dtype=float).tolist()
    t_eval = np.asarray(t_eval, dtype=float)
    atol = np.asarray(atol, dtype=float).tolist()
    n = len(b)
    y = np.asarray(y0, dtype=float).tolist()
    Y = np.empty((t_eval.size, n))
    Y[0] = y
    t = float(t_eval[0])
    h = h0
    k1 = _matvec(A, b, y, n)
    acc = rej = 0
    status = OK
    idx = 1
    rng = range(n)
    while idx < t_eval.size:
        target = float(t_eval[idx])
        clipped = False
        h_saved = h
        if t + h >= target:
            h = target - t
            clipped = True
        y2 = [y[i] + h * (A21 * k1[i]) for i in rng]
        k2 = _matvec(A, b, y2, n)
        y3 = [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in rng]
        k3 = _matvec(A, b, y3, n)
        y4 = [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng]
        k4 = _matvec(A, b, y4, n)
        y5 = [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng]
        k5 = _matvec(A, b, y5, n)
        y6 = [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]) for i in rng]
        k6 = _matvec(A, b, y6, n)
        yn = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]) for i in rng]
        k7 = _matvec(A, b, yn, n)
        ssum = 0.0
        for i in rng:
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol[i] + rtol * max(abs(y[i]), abs(yn[i]))
            ssum += (e / sc) * (e / sc)
        err = math.sqrt(ssum / n)
        if err <= 1.0:
            t = target if clipped else t + h
            y = yn
            k1 = k7
            acc += 1
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * math.exp(-0.2 * math.log(err))))
            if clipped:
                Y[idx] = y
                idx += 1
                # a step shortened to hit an output time says little about the next one
                h = h_saved if fac >= 1.0 else h * fac
            else:
                h = h * fac
        else:
            rej += 1
            h = h * max(0.2, 0.9 * math.exp(-0.2 * math.log(err)))
            if h < h_min:
                status = STEP_COLLAPSE
                break
        if acc + rej >= max_steps:
            status = MAX_STEPS
            break
    return Y, status, acc, rej
