"""Blackbody background: occupancy, band-limited thermal excitation, rms field.

Probabilities are carried as log10 values. At millimetre frequencies and mK
temperatures the Planck factor is far below the smallest double.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .constants import C_LIGHT, E_CHARGE, EPS0, HBAR, K_B, UnitError
from .detector import DetectorSpec, dipole_length

LN10 = math.log(10.0)
PI4_OVER_15 = math.pi**4 / 15.0


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class ThermalBand:
    center: float  # omega_eg, rad/s
    half_width: float  # delta omega, rad/s
    temperature: float  # K; 0 is allowed and maps to log10 P = -inf

    def __post_init__(self):
        if not self.half_width > 0:
            raise UnitError("band half-width must be > 0")
        if not self.half_width < self.center:
            raise UnitError("band half-width must be smaller than the centre frequency")
        if not self.temperature >= 0:
            raise UnitError("temperature must be >= 0")

    @classmethod
    def from_hz(cls, center_hz: float, half_width_hz: float, temperature: float) -> "ThermalBand":
        """Build a band from ordinary frequencies (a 1 kHz width becomes 2*pi*1e3 rad/s)."""
        return cls(2 * math.pi * center_hz, 2 * math.pi * half_width_hz, temperature)


def _reduced_energy(omega, temperature):
    return HBAR * np.asarray(omega, dtype=float) / (K_B * temperature)


def log_planck_occupancy(omega, temperature):
    """Natural log of the Bose-Einstein occupancy, finite for any positive input."""
    if temperature == 0:
        return np.full(np.shape(omega), -np.inf)[()]
    x = _reduced_energy(omega, temperature)
    with np.errstate(over="ignore"):
        small = -np.log(np.expm1(np.minimum(x, 40.0)))
    large = -x - np.log1p(-np.exp(-np.maximum(x, 40.0)))
    return np.where(x > 40.0, large, small)[()]


def planck_occupancy(omega, temperature):
    """Mean thermal photon number ``1/(exp(hbar w / kT) - 1)``."""
    if np.any(np.asarray(omega) <= 0):
        raise UnitError("omega must be > 0")
    if temperature < 0:
        raise UnitError("temperature must be >= 0")
    return np.exp(log_planck_occupancy(omega, temperature))


def _log10_prefactor(det: DetectorSpec, center: float, tau: float) -> float:
    d = float(dipole_length(center, det.mass))
    pref = det.ensemble_size * E_CHARGE**2 * d**2 * tau**2 / (
        2.0 * EPS0 * math.pi**2 * C_LIGHT**3 * HBAR
    )
    return math.log10(pref)


def _quad(f, a, b, rtol):
    res = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200, full_output=1)
    if len(res) == 4:
        val, err, info, msg = res
        raise QuadratureError(
            f"quadrature over [{a:.6g}, {b:.6g}] failed after {info['neval']} evaluations: "
            f"estimate {val:.6g} +/- {err:.2g}; {msg.strip()}"
        )
    return res[0], res[1]


def planck_band_log_integral(band: ThermalBand, rtol: float = 1e-9) -> float:
    """Natural log of the band integral of ``omega^3 nbar(omega)``.

    The integrand is normalized by its value at the band centre so the
    quadrature works on O(1) numbers whatever the temperature.
    """
    w0, dw, T = band.center, band.half_width, band.temperature
    if T == 0:
        return -math.inf
    log_n0 = float(log_planck_occupancy(w0, T))

    def ratio(u):
        w = w0 + u
        return (w / w0) ** 3 * math.exp(float(log_planck_occupancy(w, T)) - log_n0)

    val, _ = _quad(ratio, -dw, dw, rtol)
    return 3.0 * math.log(w0) + log_n0 + math.log(val)


def thermal_probability(det: DetectorSpec, band: ThermalBand, tau: float, rtol: float = 1e-9) -> float:
    """log10 of the thermally induced ensemble excitation probability."""
    if not tau > 0:
        raise UnitError("tau must be > 0")
    log_i = planck_band_log_integral(band, rtol)
    if log_i == -math.inf:
        return -math.inf
    return _log10_prefactor(det, band.center, tau) + log_i / LN10


def thermal_probability_narrowband(det: DetectorSpec, band: ThermalBand, tau: float) -> float:
    """log10 probability using ``2 dw w^3 nbar(w)``, valid when dw << w."""
    w0 = band.center
    log_i = math.log(2.0 * band.half_width) + 3.0 * math.log(w0) + float(
        log_planck_occupancy(w0, band.temperature)
    )
    return _log10_prefactor(det, w0, tau) + log_i / LN10


def thermal_probability_linear(det: DetectorSpec, band: ThermalBand, tau: float, rtol: float = 1e-9) -> float:
    """Linear-space evaluation; underflows to 0 in the millimetre band."""
    T, w0 = band.temperature, band.center

    # integrate over the offset so the narrow interval keeps full precision
    def integrand(u):
        w = w0 + u
        return w**3 / math.expm1(HBAR * w / (K_B * T))

    val, _ = _quad(integrand, -band.half_width, band.half_width, rtol)
    return 10.0 ** _log10_prefactor(det, band.center, tau) * val


def thermal_spectrum(det: DetectorSpec, freqs_hz, half_width_hz: float, tau: float) -> np.ndarray:
    """Table of ``(frequency GHz, log10 P_therm)`` with the detector retuned per point."""
    freqs_hz = np.asarray(freqs_hz, dtype=float)
    out = np.empty((freqs_hz.size, 2))
    for i, f in enumerate(freqs_hz):
        band = ThermalBand.from_hz(f, half_width_hz, det.temperature)
        out[i] = f / 1e9, thermal_probability(det.tuned_to(band.center), band, tau)
    return out


def bose_integral(rtol: float = 1e-12) -> float:
    """``int_0^inf x^3/(e^x - 1) dx`` by quadrature (analytically pi^4/15)."""

    def f(x):
        return x**3 / math.expm1(x) if 0 < x < 700 else 0.0

    val, _ = _quad(f, 0.0, math.inf, rtol)
    return val


def thermal_field_rms(temperature: float) -> float:
    """Root-mean-square blackbody electric field (V/m) over all frequencies."""
    if temperature < 0:
        raise UnitError("temperature must be >= 0")
    if temperature == 0:
        return 0.0
    scale = (K_B * temperature / HBAR) ** 4
    integral = HBAR / (math.pi**2 * C_LIGHT**3) * scale * bose_integral()
    return math.sqrt(2.0 / EPS0 * integral)
