import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dpensemble.constants import UnitError
from dpensemble.readout import (
    CavityParams,
    DispersiveWarning,
    EnsembleReadoutState,
    IntegrationError,
    ResolutionError,
    SteadyStateWarning,
    _moment_matrix,
    dispersive,
    estimate_P_from_spectrum,
    integrate_moments,
    photon_number,
    steady_state_spectrum,
)

TWO_PI = 2 * math.pi


def grid(cav, n, span=3.0, points=2401):
    der = dispersive(cav, n)
    return der.drive_at(np.linspace(span, -span, points) * abs(der.Gamma))


def test_cavity_params(fig2_cavity):
    assert fig2_cavity.kappa == fig2_cavity.gamma / 2
    assert fig2_cavity.dispersive_valid
    q = CavityParams(omega0=1e10, g=1e7, transition=2e10, quality_factor=1e5)
    assert q.gamma == pytest.approx(1e5)
    assert not CavityParams(1e10, 1e9, 1.5e10, gamma=1e5).dispersive_valid
    for bad in (dict(g=0.0), dict(gamma=-1.0), dict(quality_factor=None, gamma=None)):
        kw = dict(omega0=1e10, g=1e7, transition=2e10, gamma=1e5) | bad
        with pytest.raises(UnitError):
            CavityParams(**kw)


def test_dispersive_derived(fig2_cavity):
    der = dispersive(fig2_cavity, 1000)
    assert der.Gamma * der.delta == pytest.approx(fig2_cavity.g**2, rel=1e-15)
    assert der.omega_shift == pytest.approx(999 * der.Gamma, rel=1e-15)
    assert der.Gamma == pytest.approx(4 * der.kappa, rel=1e-12)
    w = 1.001 * fig2_cavity.omega0
    assert der.drive_at(der.detuning(w)) == pytest.approx(w, rel=1e-15)
    with pytest.raises(UnitError):
        dispersive(CavityParams(1e10, 1e7, 1e10, gamma=1e5), 10)


def test_state_interpretations():
    s = EnsembleReadoutState(0.1, "expectation")
    assert s.sigma_z(1000) == pytest.approx(-1 + 2e-4)
    assert [c[0] for c in s.components(1000)] == ["expectation"]
    m = EnsembleReadoutState(0.1)
    assert m.components(1000) == [("ground", 0.9, -1.0), ("excited", 0.1, 1.0)]
    with pytest.raises(UnitError):
        EnsembleReadoutState(1.5)
    with pytest.raises(UnitError):
        EnsembleReadoutState(0.1, "collective")


def test_bare_lorentzian_limit():
    d = np.linspace(-5, 5, 101)
    np.testing.assert_allclose(photon_number(d, 1.0, 0.0, -1.0, 2.0, 0.3), 4.0 / (1 + d**2) + 0.3, rtol=1e-15)


def test_ground_peak_location_and_height():
    kappa, G = 1.0, 50.0
    d = np.linspace(G - 2, G + 2, 40001)
    s = photon_number(d, kappa, G, -1.0)
    i = np.argmax(s)
    assert d[i] == pytest.approx(G, abs=1e-3)
    expected = (kappa**2 + 4 * G**2) / (4 * kappa**2 * G**2)
    assert s[i] == pytest.approx(expected, rel=(kappa / G) ** 2 * 2)


def test_mirror_symmetry():
    rng = np.random.default_rng(1)
    d = rng.normal(size=200) * 10
    for sz in (-1.0, -0.3, 0.0, 0.7, 1.0):
        np.testing.assert_allclose(photon_number(d, 1.3, 4.1, sz), photon_number(-d, 1.3, 4.1, -sz), rtol=1e-12)


def test_closed_form_is_convex_combination():
    d = np.linspace(-20, 20, 401)
    for sz in (-0.5, 0.2, 0.9):
        mix = (1 - sz) / 2 * photon_number(d, 1.0, 4.0, -1.0) + (1 + sz) / 2 * photon_number(d, 1.0, 4.0, 1.0)
        np.testing.assert_allclose(photon_number(d, 1.0, 4.0, sz), mix, rtol=1e-13)


def test_fig2_component_peaks(fig2_cavity):
    spec = steady_state_spectrum(fig2_cavity, EnsembleReadoutState(0.1), 1000, grid(fig2_cavity, 1000))
    comps = spec.normalized_components()
    assert comps["ground"].max() == pytest.approx(0.9, abs=1e-6)
    assert comps["excited"].max() == pytest.approx(0.1, abs=1e-6)
    assert np.all(spec.photon_number >= 0)
    rows = list(spec.rows())
    assert len(rows) == 3 * 2401 and {r[3] for r in rows} == {"total", "ground", "excited"}


def test_spectrum_errors_and_warnings(fig2_cavity):
    with pytest.raises(UnitError):
        steady_state_spectrum(fig2_cavity, EnsembleReadoutState(0.1), 1000, [])
    with pytest.raises(UnitError):
        steady_state_spectrum(fig2_cavity, EnsembleReadoutState(0.1), 1000, [np.nan])
    weak = CavityParams(1e10, 2e9, 1.5e10, gamma=1e6)
    with pytest.warns(DispersiveWarning):
        steady_state_spectrum(weak, EnsembleReadoutState(0.1), 10, [1e10])


def test_thermal_offset(fig2_cavity):
    hot = CavityParams(fig2_cavity.omega0, fig2_cavity.g, fig2_cavity.transition, gamma=fig2_cavity.gamma, temperature=0.2)
    w = grid(hot, 1000, points=201)
    a = steady_state_spectrum(hot, EnsembleReadoutState(0.1), 1000, w)
    b = steady_state_spectrum(hot, EnsembleReadoutState(0.1), 1000, w, include_offset=False)
    assert a.nbar > 0
    np.testing.assert_allclose(a.photon_number - b.photon_number, a.nbar, rtol=1e-12)
    np.testing.assert_allclose(a.normalized, b.normalized, rtol=1e-12)


@pytest.mark.parametrize("interp", ["mixture", "expectation"])
def test_ode_matches_closed_form(fig2_cavity, interp):
    state = EnsembleReadoutState(0.1, interp)
    w = grid(fig2_cavity, 1000, points=13)
    spec = steady_state_spectrum(fig2_cavity, state, 1000, w)
    t_end = 30 / fig2_cavity.kappa
    for wi, si in zip(w, spec.photon_number):
        tr = integrate_moments(fig2_cavity, state, 1000, float(wi), t_end)
        assert abs(tr.n[-1] - si) / si < 1e-4


def test_moment_equations_against_solve_ivp(fig2_cavity):
    der = dispersive(fig2_cavity, 1000)
    k = der.kappa
    M, c = _moment_matrix(0.7 * der.Gamma, der.Gamma, k, fig2_cavity.gamma, 1.0, -1.0, 0.0)
    t_end = 8 / k
    ref = solve_ivp(lambda t, y: M @ y + c, (0, t_end), np.zeros(5, complex), rtol=1e-11, atol=1e-14 / k**2,
                    t_eval=np.linspace(0, t_end, 9), method="DOP853")
    tr = integrate_moments(fig2_cavity, EnsembleReadoutState(0.0), 1000, float(der.drive_at(0.7 * der.Gamma)), t_end, n_samples=9)
    np.testing.assert_allclose(tr.n, ref.y[4].real, rtol=1e-7, atol=1e-12 / k**2)


def test_pure_dissipation_and_thermalisation(fig2_cavity):
    dark = CavityParams(fig2_cavity.omega0, fig2_cavity.g, fig2_cavity.transition, drive_amplitude=0.0, gamma=fig2_cavity.gamma)
    tr = integrate_moments(dark, EnsembleReadoutState(0.0), 1000, fig2_cavity.omega0, 10 / dark.kappa, initial_photons=5.0)
    assert np.all(np.diff(tr.n) <= 1e-15) and tr.n[-1] < 1e-6 * 5
    assert np.max(np.abs(tr.a)) == 0.0
    hot = CavityParams(fig2_cavity.omega0, fig2_cavity.g, fig2_cavity.transition, drive_amplitude=0.0,
                       gamma=fig2_cavity.gamma, temperature=0.5)
    nbar = dispersive(hot, 1000).nbar
    tr = integrate_moments(hot, EnsembleReadoutState(0.0), 1000, hot.omega0, 20 / hot.gamma, initial_photons=0.0)
    assert tr.n[-1] == pytest.approx(nbar, rel=1e-6)


def test_integration_guards(fig2_cavity):
    with pytest.raises(UnitError):
        integrate_moments(fig2_cavity, EnsembleReadoutState(0.1), 1000, fig2_cavity.omega0, 0.0)
    with pytest.warns(SteadyStateWarning):
        integrate_moments(fig2_cavity, EnsembleReadoutState(0.1), 1000, fig2_cavity.omega0, 1 / fig2_cavity.kappa)
    with pytest.raises(IntegrationError):
        integrate_moments(fig2_cavity, EnsembleReadoutState(0.1), 1000, fig2_cavity.omega0, 30 / fig2_cavity.kappa, max_steps=10)


@pytest.mark.parametrize("p", [0.0, 0.01, 0.1, 0.3, 0.5, 0.9])
def test_estimator_round_trip(fig2_cavity, p):
    w = grid(fig2_cavity, 1000)
    spec = steady_state_spectrum(fig2_cavity, EnsembleReadoutState(p), 1000, w)
    tol = 1e-6 if p == 0 else 2e-3
    assert estimate_P_from_spectrum(w, spec.photon_number, fig2_cavity, 1000) == pytest.approx(p, abs=tol)


def test_estimator_coarse_grid_and_offset(fig2_cavity):
    hot = CavityParams(fig2_cavity.omega0, fig2_cavity.g, fig2_cavity.transition, gamma=fig2_cavity.gamma, temperature=0.3)
    der = dispersive(hot, 1000)
    # exactly five samples per linewidth
    w = der.drive_at(np.arange(-3 * der.Gamma, 3 * der.Gamma + 1, der.kappa / 5))
    spec = steady_state_spectrum(hot, EnsembleReadoutState(0.2), 1000, w)
    assert estimate_P_from_spectrum(w, spec.photon_number, hot, 1000) == pytest.approx(0.2, abs=2e-3)


def test_estimator_resolution_errors(fig2_cavity):
    w = grid(fig2_cavity, 1000, points=41)
    s = steady_state_spectrum(fig2_cavity, EnsembleReadoutState(0.1), 1000, w).photon_number
    with pytest.raises(ResolutionError):
        estimate_P_from_spectrum(w, s, fig2_cavity, 1000)
    w = grid(fig2_cavity, 1000, span=0.5)
    s = steady_state_spectrum(fig2_cavity, EnsembleReadoutState(0.1), 1000, w).photon_number
    with pytest.raises(ResolutionError):
        estimate_P_from_spectrum(w, s, fig2_cavity, 1000)
    merged = CavityParams(fig2_cavity.omega0, fig2_cavity.g, fig2_cavity.transition, gamma=fig2_cavity.gamma * 4)
    w = grid(merged, 1000)
    s = steady_state_spectrum(merged, EnsembleReadoutState(0.1), 1000, w).photon_number
    with pytest.raises(ResolutionError):
        estimate_P_from_spectrum(w, s, merged, 1000)
