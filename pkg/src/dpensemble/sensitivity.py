"""Mixing-strength sensitivity, detection significance and scan campaigns."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .constants import E_CHARGE, EPS0, HBAR, M_ELECTRON_MEV, UnitError, density_to_si, frequency_to_mass
from .detector import TUNABLE_RANGE, DetectorSpec, dipole_length
from .thermal import ThermalBand, thermal_probability

SIGMA_95 = 1.645  # one-sided 95 % Gaussian quantile, as used for the detection criterion
ISOTROPIC_COS_THETA = math.sqrt(1.0 / 3.0)
SECONDS_PER_DAY = 86400.0

# reference point of the scaled sensitivity formula
REF_CHI = 1.075e-12
REF_P = 1e-4
REF_N = 1e5
REF_TAU = 1e-4
REF_MASS_MEV = 0.51
REF_OMEGA = 2 * math.pi * 1e9
REF_RHO = 0.45


class ScanWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SensitivityQuery:
    p_obs: float
    log10_p_therm: float
    detector: DetectorSpec
    tau: float
    rho: float = 0.45  # GeV/cm^3
    cos_theta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p_obs <= 1.0:
            raise UnitError("p_obs must lie in [0, 1]")
        if not self.tau > 0:
            raise UnitError("tau must be > 0")
        if not self.rho > 0:
            raise UnitError("rho must be > 0")
        if not 0 < abs(self.cos_theta) <= 1:
            raise UnitError("cos_theta must be non-zero with |cos_theta| <= 1")

    @property
    def p_therm(self) -> float:
        return 10.0**self.log10_p_therm

    @property
    def excess(self) -> float:
        return self.p_obs - self.p_therm


@dataclass(frozen=True)
class SensitivityResult:
    chi: float | None
    excess: bool

    def __float__(self):
        return math.nan if self.chi is None else self.chi


def chi_sensitivity(q: SensitivityQuery) -> SensitivityResult:
    """Smallest mixing strength consistent with the observed excess probability.

    Returns a result with ``excess=False`` and ``chi=None`` when the observed
    probability does not exceed the thermal background.
    """
    exc = q.excess
    if not exc > 0:
        return SensitivityResult(None, False)
    d = float(dipole_length(q.detector.transition, q.detector.mass))
    n = q.detector.ensemble_size
    rho_eff = density_to_si(q.rho) / EPS0
    chi = math.sqrt(2.0) * HBAR / (q.tau * E_CHARGE * d * abs(q.cos_theta)) * math.sqrt(exc / (n * rho_eff))
    return SensitivityResult(chi, True)


def chi_scaled_form(
    p_excess: float,
    n_atoms: float,
    tau: float,
    omega_eg: float,
    mass_mev: float = M_ELECTRON_MEV,
    rho: float = 0.45,
    cos_theta: float = 1.0,
) -> float:
    """The product-of-ratios form anchored at 1.075e-12."""
    factors = (p_excess, n_atoms, tau, omega_eg, mass_mev, rho, cos_theta)
    if any(not f > 0 for f in factors):
        raise UnitError("all factors must be positive")
    return (
        REF_CHI
        / cos_theta
        * math.sqrt(p_excess / REF_P)
        * (n_atoms / REF_N) ** -0.5
        * (tau / REF_TAU) ** -1
        * math.sqrt(mass_mev / REF_MASS_MEV)
        * math.sqrt(omega_eg / REF_OMEGA)
        * (rho / REF_RHO) ** -0.5
    )


@dataclass(frozen=True)
class Confidence:
    significance: float
    level: float
    passes_95: bool
    degenerate: bool = False


def confidence(signal_counts: float, background_counts: float) -> Confidence:
    """``S/sqrt(B)`` and its one-sided Gaussian confidence level.

    Zero background is flagged as degenerate; any positive signal then passes.
    """
    if signal_counts < 0 or background_counts < 0:
        raise UnitError("counts must be non-negative")
    if background_counts == 0:
        ok = signal_counts > 0
        return Confidence(math.inf if ok else 0.0, 1.0 if ok else 0.5, ok, degenerate=True)
    z = signal_counts / math.sqrt(background_counts)
    return Confidence(z, float(norm.cdf(z)), z > SIGMA_95)


def shot_counts(n_shot: int, p_obs: float, p_therm: float) -> tuple[float, float]:
    """Expected ``(S, B)`` transition counts over ``n_shot`` repetitions."""
    return n_shot * (p_obs - p_therm), n_shot * p_therm


@dataclass(frozen=True)
class ScanPlan:
    """A frequency scan: band in Hz, per-point bandwidth and dwell."""

    f_lo: float
    f_hi: float
    dwell: float
    bandwidth: float | None = None
    quality_factor: float | None = None
    shots: int = 10_000
    tau: float = 1e-4

    def __post_init__(self):
        if not self.f_hi > self.f_lo > 0:
            raise UnitError("need f_hi > f_lo > 0")
        if not self.dwell > 0:
            raise UnitError("dwell must be > 0")
        if self.bandwidth is None and self.quality_factor is None:
            raise UnitError("give a bandwidth or a quality factor")
        if self.shots < 1 or not self.tau > 0:
            raise UnitError("need shots >= 1 and tau > 0")

    @property
    def center(self) -> float:
        return 0.5 * (self.f_lo + self.f_hi)

    @property
    def point_bandwidth(self) -> float:
        """Explicit bandwidth, otherwise centre frequency over Q."""
        b = self.bandwidth if self.bandwidth is not None else self.center / self.quality_factor
        if not b > 0:
            raise UnitError("bandwidth must be > 0")
        return b


@dataclass(frozen=True)
class PlanSummary:
    points: int
    bandwidth: float
    total_time: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def total_days(self) -> float:
        return self.total_time / SECONDS_PER_DAY


def plan_scan(plan: ScanPlan) -> PlanSummary:
    b = plan.point_bandwidth
    points = math.ceil((plan.f_hi - plan.f_lo) / b)
    notes = []
    if plan.dwell < plan.shots * plan.tau:
        msg = f"dwell {plan.dwell:g} s is shorter than shots*tau = {plan.shots * plan.tau:g} s"
        warnings.warn(msg, ScanWarning, stacklevel=2)
        notes.append(msg)
    return PlanSummary(points, b, points * plan.dwell, tuple(notes))


def reconcile_duration(plan: ScanPlan, quoted_days: float, tolerance_days: float = 1.0) -> dict:
    """Compare a plan against a quoted campaign length.

    Returns the plan's own total, the dwell time that would reproduce the
    quoted figure, and a note whenever the two disagree by more than
    ``tolerance_days``.
    """
    s = plan_scan(plan)
    dwell_needed = quoted_days * SECONDS_PER_DAY / s.points
    out = {
        "points": s.points,
        "total_days": s.total_days,
        "quoted_days": quoted_days,
        "dwell_for_quote": dwell_needed,
        "consistent": abs(s.total_days - quoted_days) <= tolerance_days,
    }
    if not out["consistent"]:
        out["note"] = (
            f"dwell {plan.dwell:g} s gives {s.total_days:.2f} days, not {quoted_days:g}; "
            f"the quoted length needs about {dwell_needed:.3g} s per point"
        )
    return out


@dataclass
class ExclusionCurve:
    freq: np.ndarray  # Hz
    mass: np.ndarray  # eV
    chi: np.ndarray  # nan where there is no excess
    log10_p_therm: np.ndarray
    n_atoms: int
    p_target: float
    tau: float
    dwell: float
    cos_theta: float

    def rows(self):
        for m, c in zip(self.mass, self.chi):
            yield float(m * 1e6), float(c), self.n_atoms, self.p_target, self.tau, self.dwell

    @property
    def envelope(self) -> tuple[float, float]:
        return float(np.nanmin(self.chi)), float(np.nanmax(self.chi))


def exclusion_curve(
    det: DetectorSpec,
    band: tuple[float, float],
    p_target: float,
    tau: float,
    n_atoms: int | None = None,
    dwell: float = 10.0,
    points: int = 201,
    rho: float = 0.45,
    cos_theta: float = ISOTROPIC_COS_THETA,
    linewidth_hz: float = 1e3,
    include_thermal: bool = True,
) -> ExclusionCurve:
    """chi reach across a band, retuning the detector to each candidate mass."""
    f_lo, f_hi = band
    if not det.in_band(f_lo, f_hi):
        lo, hi = TUNABLE_RANGE[det.mode]
        raise UnitError(
            f"band [{f_lo:.4g}, {f_hi:.4g}] Hz lies outside the {det.mode}-mode range [{lo:.4g}, {hi:.4g}] Hz"
        )
    if n_atoms is not None:
        det = det.with_size(n_atoms)
    freqs = np.linspace(f_lo, f_hi, points)
    chi = np.empty(points)
    logp = np.empty(points)
    for i, f in enumerate(freqs):
        d = det.tuned_to(2 * math.pi * f)
        if include_thermal:
            logp[i] = thermal_probability(d, ThermalBand.from_hz(f, linewidth_hz, det.temperature), tau)
        else:
            logp[i] = -math.inf
        res = chi_sensitivity(SensitivityQuery(p_target, logp[i], d, tau, rho, cos_theta))
        chi[i] = float(res)
    return ExclusionCurve(
        freqs, np.asarray(frequency_to_mass(freqs)), chi, logp, det.ensemble_size, p_target, tau, dwell, cos_theta
    )
