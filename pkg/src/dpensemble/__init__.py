"""Dark-photon searches with atomic-ensemble detectors.

Signal and thermal excitation of an electron-on-helium ensemble, dispersive
cavity readout, mixing-strength reach, detection statistics and scan
planning.
"""
__version__ = "0.1.0"

from .constants import CODATA2018, Quantity, UnitError, density_to_si, frequency_to_mass, mass_to_frequency
from .detector import DetectorSpec, dipole_length, y_mode_frequency, z_mode_frequency
from .kernels import BACKEND
from .montecarlo import CampaignSim, power_curve, simulate_campaign
from .readout import (
    CavityParams,
    EnsembleReadoutState,
    estimate_P_from_spectrum,
    integrate_moments,
    steady_state_spectrum,
)
from .sensitivity import (
    ScanPlan,
    SensitivityQuery,
    chi_scaled_form,
    chi_sensitivity,
    confidence,
    exclusion_curve,
    plan_scan,
)
from .signal import (
    DarkPhotonHypothesis,
    dark_coherence_time,
    effective_field_amplitude,
    ensemble_probability,
    single_atom_probability,
)
from .thermal import ThermalBand, planck_occupancy, thermal_field_rms, thermal_probability

__all__ = [
    "BACKEND",
    "CODATA2018",
    "CampaignSim",
    "CavityParams",
    "DarkPhotonHypothesis",
    "DetectorSpec",
    "EnsembleReadoutState",
    "Quantity",
    "ScanPlan",
    "SensitivityQuery",
    "ThermalBand",
    "UnitError",
    "chi_scaled_form",
    "chi_sensitivity",
    "confidence",
    "dark_coherence_time",
    "density_to_si",
    "dipole_length",
    "effective_field_amplitude",
    "ensemble_probability",
    "estimate_P_from_spectrum",
    "exclusion_curve",
    "frequency_to_mass",
    "integrate_moments",
    "mass_to_frequency",
    "planck_occupancy",
    "plan_scan",
    "power_curve",
    "simulate_campaign",
    "single_atom_probability",
    "steady_state_spectrum",
    "thermal_field_rms",
    "thermal_probability",
    "y_mode_frequency",
    "z_mode_frequency",
]
