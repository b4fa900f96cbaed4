"""Compiled kernels vs the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times the trial sampler and the linear Dormand-Prince integrator on both
backends and checks the outputs agree before reporting the speed-up.
"""
import argparse
import time

import numpy as np

from dpensemble import _pykernels as py
from dpensemble import kernels
from dpensemble.readout import CavityParams, EnsembleReadoutState, _moment_matrix, _realify, dispersive


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def moment_problem():
    w0 = 2 * np.pi * 5e9
    cav = CavityParams(omega0=w0, g=0.01 * w0, transition=1.5 * w0, gamma=1e-4 * w0)
    der = dispersive(cav, 1000)
    M, c = _moment_matrix(0.5 * der.Gamma, der.Gamma, der.kappa, cav.gamma, 1.0, -1.0, 0.0)
    A, b = _realify(M / der.kappa, c / der.kappa)
    return A, b, np.zeros(10), np.linspace(0, 30, 201), 1e-10, np.full(10, 1e-22)


CASES = {
    "sampler binomial 1e6 shots x 20k trials": lambda m: m.sample_counts(1, 0, 20_000, 10**6, 1e-4, 0),
    "sampler binomial 1e4 shots x 20k trials": lambda m: m.sample_counts(1, 0, 20_000, 10**4, 1e-4, 0),
    "sampler poisson 1e8 shots x 20k trials": lambda m: m.sample_counts(1, 0, 20_000, 10**8, 1e-16, 1),
    "dp45 moment ODE, 30/kappa": lambda m: m.dp45_linear(*moment_problem(), 1e-3, 1e-12, 10**6)[0],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    c = kernels.compiled_backend
    if c is None:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':45s} {'python s':>10s} {'compiled s':>11s} {'speed-up':>9s}")
    for name, fn in CASES.items():
        tp, yp = best_of(lambda: fn(py), args.repeat)
        tc, yc = best_of(lambda: fn(c), args.repeat)
        assert np.allclose(yp, yc, rtol=1e-12, atol=0), name
        print(f"{name:45s} {tp:10.4f} {tc:11.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
