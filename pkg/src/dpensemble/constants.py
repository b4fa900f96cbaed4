"""Physical constants (CODATA 2018) and the few unit conversions the pipeline needs.

Everything downstream computes in SI. Electron-volts and GeV/cm^3 only appear
at the input/output boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    h: float
    e: float
    m_e: float
    c: float
    k_B: float
    epsilon_0: float


_H = 6.62607015e-34  # exact since the 2019 SI redefinition

CODATA2018 = PhysicalConstants(
    hbar=_H / (2.0 * math.pi),
    h=_H,
    e=1.602176634e-19,
    m_e=9.1093837015e-31,
    c=299792458.0,
    k_B=1.380649e-23,
    epsilon_0=8.8541878128e-12,
)

HBAR = CODATA2018.hbar
H_PLANCK = CODATA2018.h
E_CHARGE = CODATA2018.e
M_ELECTRON = CODATA2018.m_e
C_LIGHT = CODATA2018.c
K_B = CODATA2018.k_B
EPS0 = CODATA2018.epsilon_0

EV = E_CHARGE  # J per eV
GEV_PER_CM3 = 1e9 * EV / 1e-6  # J/m^3 per GeV/cm^3
M_ELECTRON_MEV = M_ELECTRON * C_LIGHT**2 / (1e6 * EV)


class UnitError(ValueError):
    """Raised for out-of-domain inputs or incompatible unit conversions."""


# unit tag -> (dimension class, factor to the class's SI base unit)
_UNITS: dict[str, tuple[str, float]] = {
    "Hz": ("frequency", 1.0),
    "rad/s": ("frequency", 1.0 / (2.0 * math.pi)),
    "eV": ("energy", EV),
    "J": ("energy", 1.0),
    "kg": ("mass", 1.0),
    "K": ("temperature", 1.0),
    "V/m": ("field", 1.0),
    "J/m3": ("density", 1.0),
    "GeV/cm3": ("density", GEV_PER_CM3),
    "s": ("time", 1.0),
    "m": ("length", 1.0),
}

UNIT_TAGS = tuple(_UNITS)


def dimension_of(unit: str) -> str:
    try:
        return _UNITS[unit][0]
    except KeyError:
        raise UnitError(f"unknown unit tag {unit!r}") from None


@dataclass(frozen=True)
class Quantity:
    """A scalar tagged with one of the supported units."""

    value: float
    unit: str

    def __post_init__(self):
        dimension_of(self.unit)

    @property
    def dimension(self) -> str:
        return dimension_of(self.unit)

    def to(self, unit: str) -> "Quantity":
        src_dim, src_factor = _UNITS[self.unit]
        dst_dim = dimension_of(unit)
        if dst_dim != src_dim:
            raise UnitError(f"cannot convert {self.unit} ({src_dim}) to {unit} ({dst_dim})")
        if unit == self.unit:
            return self
        return Quantity(self.value * src_factor / _UNITS[unit][1], unit)

    def si(self) -> float:
        return self.value * _UNITS[self.unit][1]


def _require_positive(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise UnitError(f"{name} must be positive and finite, got {x!r}")


def frequency_to_mass(f_hz):
    """Photon energy h*f in eV for an ordinary frequency in Hz."""
    _require_positive("frequency", f_hz)
    return np.multiply(f_hz, H_PLANCK / EV)


def mass_to_frequency(m_ev):
    """Inverse of :func:`frequency_to_mass`."""
    _require_positive("mass", m_ev)
    return np.multiply(m_ev, EV / H_PLANCK)


def mass_to_angular(m_ev):
    """Mass (eV) expressed as an angular frequency M/hbar in rad/s."""
    return 2.0 * math.pi * mass_to_frequency(m_ev)


def density_to_si(rho_gev_cm3: float) -> float:
    """GeV/cm^3 to J/m^3."""
    if not math.isfinite(rho_gev_cm3) or rho_gev_cm3 < 0:
        raise UnitError(f"density must be non-negative, got {rho_gev_cm3!r}")
    return rho_gev_cm3 * GEV_PER_CM3


def density_from_si(rho_si: float) -> float:
    if not math.isfinite(rho_si) or rho_si < 0:
        raise UnitError(f"density must be non-negative, got {rho_si!r}")
    return rho_si / GEV_PER_CM3
