"""Randomised invariants. Each test is importable and callable on its own."""
import math
import warnings

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from dpensemble.constants import _UNITS, Quantity, frequency_to_mass
from dpensemble.detector import DetectorSpec, dipole_length
from dpensemble.readout import photon_number
from dpensemble.sensitivity import SensitivityQuery, chi_scaled_form, chi_sensitivity, exclusion_curve
from dpensemble.signal import DarkPhotonHypothesis, ensemble_probability, single_atom_probability
from dpensemble.thermal import ThermalBand, thermal_probability

TWO_PI = 2 * math.pi
UNIT_PAIRS = [(a, b) for a in _UNITS for b in _UNITS if _UNITS[a][0] == _UNITS[b][0]]
pos = st.floats(1e-30, 1e30, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------- units

def test_unit_round_trips_log_uniform():
    rng = np.random.default_rng(2018)
    for a, b in UNIT_PAIRS:
        for v in 10 ** rng.uniform(-30, 30, 1000):
            back = Quantity(v, a).to(b).to(a).value
            assert abs(back / v - 1) < 1e-12, (a, b, v)


@settings(max_examples=1000)
@given(pair=st.sampled_from(UNIT_PAIRS), v=pos)
def test_unit_round_trip(pair, v):
    a, b = pair
    assert abs(Quantity(v, a).to(b).to(a).value / v - 1) < 1e-12


@settings(max_examples=300)
@given(f1=st.floats(1.0, 1e18), f2=st.floats(1.0, 1e18))
def test_frequency_to_mass_monotone(f1, f2):
    if f1 < f2:
        assert frequency_to_mass(f1) < frequency_to_mass(f2)


@settings(max_examples=300)
@given(w=st.floats(1e6, 1e15))
def test_dipole_sqrt_law(w):
    ref = dipole_length(TWO_PI * 1e9) * math.sqrt(TWO_PI * 1e9)
    assert abs(dipole_length(w) * math.sqrt(w) / ref - 1) < 1e-12


# ---------------------------------------------------------------- readout

sigma = st.floats(-1.0, 1.0)
rate = st.floats(1e-3, 1e3)
detuning = st.floats(-1e4, 1e4)


@settings(max_examples=1000)
@given(d=detuning, kappa=rate, G=st.floats(-1e3, 1e3), sz=sigma, nbar=st.floats(0, 10))
def test_spectrum_non_negative(d, kappa, G, sz, nbar):
    assert photon_number(d, kappa, G, sz, 1.0, nbar) >= 0
    num = kappa**2 + (d - sz * G) ** 2 + G**2 * (1 - sz**2)
    ref = kappa**2 + G**2 - 2 * sz * G * d + d**2
    assert num >= 0 and math.isclose(num, ref, rel_tol=1e-9, abs_tol=1e-9 * (kappa**2 + G**2 + d**2))


@settings(max_examples=1000)
@given(d=detuning, kappa=rate, G=st.floats(-1e3, 1e3), sz=sigma)
def test_spectrum_mirror(d, kappa, G, sz):
    a = photon_number(d, kappa, G, sz)
    b = photon_number(-d, kappa, G, -sz)
    assert math.isclose(a, b, rel_tol=1e-12)


# ---------------------------------------------------------------- excitation probability

freq_cm = st.floats(4.5e9, 6.5e9)
chi_st = st.floats(1e-16, 1e-11)


def _prob(f, chi, n=1, tau=1e-5, cos_theta=1.0, detune=0.0):
    det = DetectorSpec(omega_eg=TWO_PI * f, ensemble_size=n)
    hyp = DarkPhotonHypothesis.at_angular(TWO_PI * (f + detune), chi=chi, cos_theta=cos_theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ensemble_probability(det, hyp, tau).probability, single_atom_probability(det, hyp, tau)


@settings(max_examples=300)
@given(f=freq_cm, chi=st.floats(1e-18, 1e-14), n=st.integers(1, 10**6), detune=st.floats(-1e6, 1e6))
def test_probability_linear_in_n(f, chi, n, detune):
    p_n, p_1 = _prob(f, chi, n, detune=detune)
    assert math.isclose(p_n, n * p_1, rel_tol=1e-13)


@settings(max_examples=300)
@given(f=freq_cm, chi=chi_st, k=st.floats(0.01, 10), detune=st.floats(-1e6, 1e6))
def test_probability_quadratic_in_chi(f, chi, k, detune):
    _, p = _prob(f, chi, detune=detune)
    _, pk = _prob(f, chi * k, detune=detune)
    assert math.isclose(pk, k * k * p, rel_tol=1e-12)


@settings(max_examples=300)
@given(f=freq_cm, chi=chi_st, c=st.floats(-1.0, 1.0))
def test_probability_cos_squared(f, chi, c):
    _, p1 = _prob(f, chi)
    _, pc = _prob(f, chi, cos_theta=c)
    assert math.isclose(pc, c * c * p1, rel_tol=1e-12, abs_tol=1e-300)


@settings(max_examples=300)
@given(f=freq_cm, chi=chi_st, tau=st.floats(1e-7, 5e-5), k=st.floats(0.1, 2.0))
def test_probability_tau_squared_on_resonance(f, chi, tau, k):
    _, p = _prob(f, chi, tau=tau)
    _, pk = _prob(f, chi, tau=tau * k)
    assert math.isclose(pk, k * k * p, rel_tol=1e-12)


# ---------------------------------------------------------------- sensitivity

def test_scaled_form_matches_sensitivity_grid():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10_000):
        mode = rng.choice(["y", "z"])
        f = rng.uniform(4.5e9, 6.5e9) if mode == "y" else rng.uniform(120e9, 280e9)
        n = int(10 ** rng.uniform(3, 9))
        tau = 10 ** rng.uniform(-6, -3)
        p = 10 ** rng.uniform(-7, -2)
        rho = rng.uniform(0.1, 1.0)
        c = rng.uniform(0.05, 1.0)
        det = DetectorSpec(mode=mode, omega_eg=TWO_PI * f, ensemble_size=n)
        a = chi_sensitivity(SensitivityQuery(p, -math.inf, det, tau, rho, c)).chi
        b = chi_scaled_form(p, n, tau, TWO_PI * f, rho=rho, cos_theta=c)
        worst = max(worst, abs(a / b - 1))
    assert worst < 5e-3


@settings(max_examples=300)
@given(p1=st.floats(1e-7, 1e-2), p2=st.floats(1e-7, 1e-2), logp=st.floats(-300, -9))
def test_chi_over_root_excess_constant(p1, p2, logp):
    det = DetectorSpec(omega_eg=TWO_PI * 5e9, ensemble_size=10**6)
    r1 = chi_sensitivity(SensitivityQuery(p1, logp, det, 1e-4))
    r2 = chi_sensitivity(SensitivityQuery(p2, logp, det, 1e-4))
    k1 = r1.chi / math.sqrt(p1 - 10**logp)
    k2 = r2.chi / math.sqrt(p2 - 10**logp)
    assert math.isclose(k1, k2, rel_tol=1e-12)


def test_exclusion_root_omega_and_root_n():
    for mode, band, tau in (("y", (4.5e9, 6.5e9), 1e-4), ("z", (120e9, 200e9), 1e-5)):
        det = DetectorSpec(mode=mode)
        a = exclusion_curve(det, band, 1e-4, tau, n_atoms=10**6, points=101, include_thermal=False)
        b = exclusion_curve(det, band, 1e-4, tau, n_atoms=10**8, points=101, include_thermal=False)
        ratio = a.chi / np.sqrt(a.freq)
        assert np.ptp(ratio) / ratio.mean() < 1e-12
        np.testing.assert_allclose(a.chi / b.chi, 10.0, rtol=1e-12)
        t = exclusion_curve(det, band, 1e-4, tau, n_atoms=10**8, points=101)
        assert np.all(np.diff(t.chi) > 0)


# ---------------------------------------------------------------- thermal background

def test_thermal_monotone_ladders():
    rng = np.random.default_rng(3)
    for _ in range(20):
        f = rng.uniform(4.5e9, 6.5e9)
        base = dict(T=10 ** rng.uniform(-2.3, 0), n=int(10 ** rng.uniform(2, 9)), tau=10 ** rng.uniform(-6, -3),
                    dw=10 ** rng.uniform(1, 5))

        def lp(T, n, tau, dw):
            det = DetectorSpec(omega_eg=TWO_PI * f, ensemble_size=n, temperature=T)
            return thermal_probability(det, ThermalBand.from_hz(f, dw, T), tau)

        for key in base:
            ladder = []
            for k in (1.0, 1.5, 2.0, 3.0):
                kw = dict(base)
                kw[key] = int(kw[key] * k) if key == "n" else kw[key] * k
                ladder.append(lp(**kw))
            assert np.all(np.diff(ladder) > 0), key
