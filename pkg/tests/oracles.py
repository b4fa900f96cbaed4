"""Independent reference values and random case generators shared by the suites."""
import math

import numpy as np

from dpensemble.readout import CavityParams, EnsembleReadoutState, dispersive

TWO_PI = 2.0 * math.pi

# band edges (Hz) and the masses they map to (ueV), as quoted
BAND_MASSES_UEV = {4.5e9: 18.61, 6.5e9: 26.88, 120e9: 496.28, 200e9: 827.13}

# hand evaluation of sqrt(e E / (m l)) / 2 pi at 30 V/cm, 0.5 um: quoted anchor
Y_ANCHOR_HZ = 5.143e9


def closed_form_photons(detuning, kappa, Gamma, sz, eps, nbar=0.0):
    """Steady-state photon number written out independently of the package."""
    num = kappa**2 + Gamma**2 - 2 * sz * Gamma * detuning + detuning**2
    den = (kappa**2 + Gamma**2 - detuning**2) ** 2 + 4 * kappa**2 * detuning**2
    return eps**2 * num / den + nbar


def random_dispersive_case(rng: np.random.Generator):
    """A random readout configuration that satisfies |Delta| >= 10 g."""
    w0 = TWO_PI * 10 ** rng.uniform(9.0, 10.5)
    g = w0 * 10 ** rng.uniform(-3.5, -1.5)
    delta = g * 10 ** rng.uniform(1.0, 2.5) * rng.choice([-1.0, 1.0])
    if w0 + delta <= 0:
        delta = abs(delta)
    Gamma = g * g / abs(delta)
    kappa = Gamma * 10 ** rng.uniform(-1.5, 0.5)
    cav = CavityParams(
        omega0=w0,
        g=g,
        transition=w0 + delta,
        drive_amplitude=kappa * 10 ** rng.uniform(-2, 1),
        gamma=2 * kappa,
        temperature=float(rng.choice([0.0, 10 ** rng.uniform(-2, 0)])),
    )
    n = int(10 ** rng.uniform(0, 4))
    state = EnsembleReadoutState(float(rng.uniform(0, 1)), str(rng.choice(["mixture", "expectation"])))
    der = dispersive(cav, n)
    d0 = rng.uniform(-3, 3) * max(abs(der.Gamma), kappa)
    return cav, state, n, float(der.drive_at(d0))
