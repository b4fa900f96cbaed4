"""Dark-photon induced excitation of single atoms and of the ensemble."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import (
    E_CHARGE,
    EPS0,
    HBAR,
    UnitError,
    density_to_si,
    frequency_to_mass,
    mass_to_angular,
)
from .detector import DetectorSpec, dipole_length


class CoherenceWarning(UserWarning):
    """Interaction time exceeds the dark-photon or detector coherence time."""


class PerturbationWarning(UserWarning):
    """First-order probability exceeded 1 and was clipped."""


@dataclass(frozen=True)
class DarkPhotonHypothesis:
    mass: float  # eV
    chi: float = 0.0
    rho: float = 0.45  # GeV/cm^3
    cos_theta: float = 1.0
    v_dm: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise UnitError("dark-photon mass must be positive")
        if not self.chi >= 0:
            raise UnitError("mixing strength must be >= 0")
        if not self.rho >= 0:
            raise UnitError("density must be >= 0")
        if not abs(self.cos_theta) <= 1:
            raise UnitError("|cos(theta)| must be <= 1")
        if not 0 < self.v_dm < 1:
            raise UnitError("v_dm must lie in (0, 1)")

    @property
    def omega(self) -> float:
        return float(mass_to_angular(self.mass))

    @property
    def rho_si(self) -> float:
        return density_to_si(self.rho)

    @classmethod
    def at_angular(cls, omega: float, **kw) -> "DarkPhotonHypothesis":
        return cls(mass=float(frequency_to_mass(omega / (2 * math.pi))), **kw)


@dataclass(frozen=True)
class ExcitationResult:
    probability: float
    on_resonance: bool
    tau_used: float
    tau_dp: float
    coherent: bool
    clipped: bool = False

    @property
    def werner_weights(self) -> tuple[float, float]:
        """Amplitudes-squared of ground and single-excitation states."""
        return 1.0 - self.probability, self.probability


def effective_field_amplitude(hyp: DarkPhotonHypothesis) -> float:
    """Peak mixed electric field in V/m, ``chi * sqrt(2 rho / eps0)``."""
    return hyp.chi * math.sqrt(2.0 * hyp.rho_si / EPS0)


def dark_coherence_time(hyp: DarkPhotonHypothesis) -> float:
    return 2.0 * math.pi / (hyp.omega * hyp.v_dm**2)


def sinc(x):
    # np.sinc is the normalized sin(pi x)/(pi x)
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _coupling(det: DetectorSpec, hyp: DarkPhotonHypothesis) -> float:
    d = float(dipole_length(det.transition, det.mass))
    return E_CHARGE * d * effective_field_amplitude(hyp) * hyp.cos_theta / (2.0 * HBAR)


def _check_tau(det, hyp, tau):
    if not (math.isfinite(tau) and tau > 0):
        raise UnitError(f"interaction time must be > 0, got {tau!r}")
    tau_dp = dark_coherence_time(hyp)
    limit = min(tau_dp, det.coherence_time)
    coherent = tau <= limit
    if not coherent:
        warnings.warn(
            f"tau={tau:.3g} s exceeds min(tau_DP={tau_dp:.3g} s, tau_q={det.coherence_time:.3g} s)",
            CoherenceWarning,
            stacklevel=3,
        )
    return tau_dp, coherent


def single_atom_probability(det: DetectorSpec, hyp: DarkPhotonHypothesis, tau: float) -> float:
    """First-order transition probability of one atom after time ``tau``."""
    _check_tau(det, hyp, tau)
    return _single(det, hyp, tau)


def _single(det, hyp, tau):
    x = (det.transition - hyp.omega) * tau / 2.0
    return float(_coupling(det, hyp) ** 2 * sinc(x) ** 2 * tau**2)


def ensemble_probability(det: DetectorSpec, hyp: DarkPhotonHypothesis, tau: float) -> ExcitationResult:
    """N-atom collective excitation probability (N times the single-atom value)."""
    tau_dp, coherent = _check_tau(det, hyp, tau)
    p = det.ensemble_size * _single(det, hyp, tau)
    clipped = p > 1.0
    if clipped:
        warnings.warn(
            f"first-order probability {p:.3g} > 1; clipped to 1", PerturbationWarning, stacklevel=2
        )
        p = 1.0
    on_res = abs(det.transition - hyp.omega) * tau < 2.0 * math.pi
    return ExcitationResult(p, on_res, tau, tau_dp, coherent, clipped)
