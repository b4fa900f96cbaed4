import math

import numpy as np
import pytest

from dpensemble.constants import (
    CODATA2018,
    EPS0,
    GEV_PER_CM3,
    UNIT_TAGS,
    Quantity,
    UnitError,
    density_from_si,
    density_to_si,
    dimension_of,
    frequency_to_mass,
    mass_to_angular,
    mass_to_frequency,
)


def test_codata_fields_positive_and_h_consistent():
    for name in ("hbar", "h", "e", "m_e", "c", "k_B", "epsilon_0"):
        assert getattr(CODATA2018, name) > 0
    assert abs(CODATA2018.h / (2 * math.pi * CODATA2018.hbar) - 1) < 1e-15


def test_codata_2018_values_are_frozen():
    assert CODATA2018.m_e == 9.1093837015e-31
    assert CODATA2018.epsilon_0 == 8.8541878128e-12
    assert CODATA2018.e == 1.602176634e-19
    assert CODATA2018.h == 6.62607015e-34


@pytest.mark.parametrize(
    "f, ueV", [(4.5e9, 18.61), (6.5e9, 26.88), (120e9, 496.28), (200e9, 827.13)]
)
def test_band_edges_to_mass(f, ueV):
    assert float(frequency_to_mass(f)) * 1e6 == pytest.approx(ueV, rel=1e-4)


def test_mass_frequency_inverse():
    f = np.geomspace(1e6, 1e15, 50)
    np.testing.assert_allclose(mass_to_frequency(frequency_to_mass(f)), f, rtol=1e-15)
    assert mass_to_angular(frequency_to_mass(1e9)) == pytest.approx(2 * math.pi * 1e9, rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_frequency_to_mass_rejects(bad):
    with pytest.raises(UnitError):
        frequency_to_mass(bad)


def test_density_examples():
    assert density_to_si(0.45) == pytest.approx(7.210e-5, rel=1e-3)
    assert density_to_si(1.0) == pytest.approx(1.602176634e-4, rel=1e-12)
    assert density_to_si(0.0) == 0.0
    assert density_from_si(density_to_si(0.3)) == pytest.approx(0.3, rel=1e-15)
    assert GEV_PER_CM3 == pytest.approx(1.602176634e-10 / 1e-6, rel=1e-15)
    with pytest.raises(UnitError):
        density_to_si(-0.1)


def test_field_mapping_magnitude():
    # chi = 1 at the local density gives a few kV/m
    assert math.sqrt(2 * density_to_si(0.45) / EPS0) == pytest.approx(4.04e3, abs=5.0)  # quoted to 3 digits


def test_quantity_conversions():
    q = Quantity(1.0, "GeV/cm3")
    assert q.to("J/m3").value == pytest.approx(1.602176634e-4, rel=1e-15)
    assert Quantity(2 * math.pi, "rad/s").to("Hz").value == pytest.approx(1.0, rel=1e-15)
    assert Quantity(1.0, "eV").si() == CODATA2018.e
    assert q.to("GeV/cm3") is q
    with pytest.raises(UnitError):
        Quantity(1.0, "Hz").to("K")
    with pytest.raises(UnitError):
        Quantity(1.0, "furlong")
    assert {dimension_of(u) for u in UNIT_TAGS} == {
        "frequency", "energy", "mass", "temperature", "field", "density", "time", "length"
    }
