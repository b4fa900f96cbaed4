"""Electron-on-helium artificial atoms used as the detector ensemble.

Two vibrational modes are modelled:

* ``y`` (lateral): a harmonic well set by the bias field over an electrode at
  depth ``l``, giving ``omega = sqrt(e E / (m l))``. With E = 30 V/cm and
  l = 0.5 um this lands at 5.17 GHz, within 0.5 % of the quoted 5.143 GHz.
* ``z`` (vertical): the 1->2 transition of the hydrogen-like image-potential
  states with a linear Stark shift. The effective Rydberg is chosen so the
  zero-field splitting sits at 120 GHz. Only the tunable range and the
  monotonicity of this curve are physical claims; its shape is a model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .constants import E_CHARGE, H_PLANCK, HBAR, M_ELECTRON, UnitError

TWO_PI = 2.0 * math.pi

# validated tuning windows (ordinary frequency, Hz)
TUNABLE_RANGE = {
    "y": (4.5e9, 6.5e9),
    "z": (120e9, 280e9),
}
BAND_NAME = {"y": "centimeter", "z": "millimeter"}

# z-mode model constants
ZERO_FIELD_SPLITTING_HZ = 120e9
RYDBERG_HE = H_PLANCK * ZERO_FIELD_SPLITTING_HZ / 0.75  # E_n = -R/n^2, 1->2 gap is 3R/4
BOHR_HE = HBAR / math.sqrt(2.0 * M_ELECTRON * RYDBERG_HE)  # effective Bohr radius
# <z>_n = 1.5 n^2 a for the 1D hydrogen-like surface states
DIPOLE_SHIFT_12 = 1.5 * (4 - 1) * BOHR_HE


def _check_positive(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise UnitError(f"{name} must be positive, got {x!r}")


def y_mode_frequency(field, depth, mass=M_ELECTRON):
    """Angular frequency of the lateral mode, ``sqrt(e E / (m l))``."""
    _check_positive("bias field", field)
    _check_positive("electrode depth", depth)
    _check_positive("mass", mass)
    return np.sqrt(E_CHARGE * np.asarray(field, dtype=float) / (mass * depth))


def y_mode_field(omega, depth, mass=M_ELECTRON):
    """Bias field that tunes the lateral mode to ``omega``."""
    _check_positive("omega", omega)
    _check_positive("electrode depth", depth)
    return mass * depth * np.asarray(omega, dtype=float) ** 2 / E_CHARGE


def z_mode_frequency(field):
    """Angular frequency of the vertical 1->2 transition under bias ``field`` (V/m)."""
    arr = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise UnitError(f"bias field must be non-negative, got {field!r}")
    return (0.75 * RYDBERG_HE + E_CHARGE * arr * DIPOLE_SHIFT_12) / HBAR


def z_mode_field(omega):
    """Inverse of :func:`z_mode_frequency`."""
    e_split = HBAR * np.asarray(omega, dtype=float) - 0.75 * RYDBERG_HE
    if np.any(e_split < 0):
        raise UnitError("requested frequency lies below the zero-field splitting")
    return e_split / (E_CHARGE * DIPOLE_SHIFT_12)


def dipole_length(omega_eg, mass=M_ELECTRON):
    """Effective dipole length ``sqrt(hbar / (2 m omega))`` in metres."""
    _check_positive("omega_eg", omega_eg)
    _check_positive("mass", mass)
    return np.sqrt(HBAR / (2.0 * mass * np.asarray(omega_eg, dtype=float)))


def tuning_curve(mode, fields, depth=0.5e-6, mass=M_ELECTRON):
    """Tabulate ``(field V/m, frequency Hz)`` for either mode."""
    fields = np.asarray(fields, dtype=float)
    if mode == "y":
        omega = y_mode_frequency(fields, depth, mass)
    elif mode == "z":
        omega = z_mode_frequency(fields)
    else:
        raise UnitError(f"unknown mode {mode!r}")
    return np.column_stack([fields, omega / TWO_PI])


def field_range(mode, depth=0.5e-6, mass=M_ELECTRON):
    """Bias fields (V/m) spanning the mode's validated tuning window."""
    lo, hi = TUNABLE_RANGE[mode]
    if mode == "y":
        return float(y_mode_field(TWO_PI * lo, depth, mass)), float(y_mode_field(TWO_PI * hi, depth, mass))
    return float(z_mode_field(TWO_PI * lo)), float(z_mode_field(TWO_PI * hi))


@dataclass(frozen=True)
class DetectorSpec:
    """One tunable electron-on-helium mode plus the ensemble it belongs to.

    ``omega_eg`` pins the transition frequency directly; otherwise it follows
    from the bias field through the mode model.
    """

    mode: Literal["y", "z"] = "y"
    bias_field: float = 3000.0
    electrode_depth: float = 0.5e-6
    mass: float = M_ELECTRON
    ensemble_size: int = 1
    temperature: float = 0.01
    coherence_time: float = 1e-4
    omega_eg: float | None = None

    def __post_init__(self):
        if self.mode not in TUNABLE_RANGE:
            raise UnitError(f"mode must be 'y' or 'z', got {self.mode!r}")
        if not self.bias_field >= 0:
            raise UnitError("bias field must be >= 0")
        if not self.electrode_depth > 0:
            raise UnitError("electrode depth must be > 0")
        if not self.mass > 0:
            raise UnitError("mass must be > 0")
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 1:
            raise UnitError("ensemble size must be a positive integer")
        if not self.temperature > 0:
            raise UnitError("temperature must be > 0")
        if not self.coherence_time > 0:
            raise UnitError("coherence time must be > 0")
        if self.omega_eg is not None and not self.omega_eg > 0:
            raise UnitError("omega_eg must be > 0")

    @property
    def transition(self) -> float:
        if self.omega_eg is not None:
            return float(self.omega_eg)
        if self.mode == "y":
            return float(y_mode_frequency(self.bias_field, self.electrode_depth, self.mass))
        return float(z_mode_frequency(self.bias_field))

    @property
    def band(self) -> str:
        return BAND_NAME[self.mode]

    @property
    def dipole(self) -> float:
        return float(dipole_length(self.transition, self.mass))

    def tuned_to(self, omega: float) -> "DetectorSpec":
        return replace(self, omega_eg=float(omega))

    def with_size(self, n: int) -> "DetectorSpec":
        return replace(self, ensemble_size=int(n))

    def in_band(self, f_lo: float, f_hi: float) -> bool:
        lo, hi = TUNABLE_RANGE[self.mode]
        return lo <= f_lo and f_hi <= hi
