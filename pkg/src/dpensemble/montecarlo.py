"""Shot-by-shot simulation of the S/sqrt(B) detection criterion.

Each trial is one campaign of ``shots`` binary transition outcomes. Counts
are drawn by inverting the Binomial (or, for tiny probabilities, Poisson) CDF
at a counter-based uniform keyed by ``(master_seed, trial)``. Trials are
therefore independent of how they are split across workers, and runs with a
common seed share random numbers across probabilities, which makes power
curves monotone.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, norm

from . import kernels
from .constants import UnitError
from .sensitivity import SIGMA_95

POISSON_THRESHOLD = 1e-15
BINOMIAL, POISSON = 0, 1


@dataclass(frozen=True)
class CampaignSim:
    shots: int
    p_signal: float
    p_background: float
    trials: int = 10_000
    master_seed: int = 0

    def __post_init__(self):
        if self.shots < 1 or int(self.shots) != self.shots:
            raise UnitError("shots must be a positive integer")
        if not (0.0 <= self.p_signal <= 1.0 and 0.0 <= self.p_background <= 1.0):
            raise UnitError("probabilities must lie in [0, 1]")
        if self.p_signal + self.p_background > 1.0:
            raise UnitError("p_signal + p_background exceeds 1")
        if self.trials < 1:
            raise UnitError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise UnitError("master_seed must be an unsigned 64-bit integer")

    @property
    def p_total(self) -> float:
        return self.p_signal + self.p_background

    @property
    def expected_background(self) -> float:
        return self.shots * self.p_background

    @property
    def threshold(self) -> float:
        """Excess over the expected background needed to claim a detection."""
        return SIGMA_95 * math.sqrt(self.expected_background)


@dataclass(frozen=True)
class CampaignResult:
    detections: int
    trials: int
    rate: float
    ci95: tuple[float, float]
    master_seed: int
    mean_count: float

    def to_dict(self) -> dict:
        return {
            "detections": self.detections,
            "trials": self.trials,
            "empirical_rate": self.rate,
            "ci95": list(self.ci95),
            "master_seed": self.master_seed,
            "mean_count": self.mean_count,
        }


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    z = norm.ppf(0.5 + level / 2.0)
    phat = k / n
    den = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / den
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / den
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


def _chunks(trials, chunk):
    return [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]


def trial_counts(
    sim: CampaignSim, method: str = "auto", workers: int = 1, chunk: int = 65536
) -> np.ndarray:
    """Number of transitions observed in each trial."""
    p = sim.p_total
    if method == "auto":
        m = POISSON if p < POISSON_THRESHOLD else BINOMIAL
    elif method in ("binomial", "poisson"):
        m = BINOMIAL if method == "binomial" else POISSON
    else:
        raise UnitError(f"unknown sampling method {method!r}")
    parts = _chunks(sim.trials, chunk)

    def run(bounds):
        return kernels.sample_counts(sim.master_seed, bounds[0], bounds[1], sim.shots, p, m)

    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            pieces = list(ex.map(run, parts))
    else:
        pieces = [run(b) for b in parts]
    return np.concatenate(pieces)


def detected(counts: np.ndarray, sim: CampaignSim) -> np.ndarray:
    excess = counts - sim.expected_background
    return excess > sim.threshold


def simulate_campaign(sim: CampaignSim, workers: int = 1, method: str = "auto") -> CampaignResult:
    counts = trial_counts(sim, method=method, workers=workers)
    k = int(np.count_nonzero(detected(counts, sim)))
    return CampaignResult(k, sim.trials, k / sim.trials, wilson_interval(k, sim.trials), sim.master_seed, float(counts.mean()))


def power_curve(base: CampaignSim, p_signals, workers: int = 1) -> np.ndarray:
    """Detection rate for each signal probability; rows ``(p_signal, rate, lo, hi)``."""
    grid = np.asarray(p_signals, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise UnitError("p_signal grid must be sorted ascending")
    rows = []
    for ps in grid:
        sim = CampaignSim(base.shots, float(ps), base.p_background, base.trials, base.master_seed)
        r = simulate_campaign(sim, workers=workers)
        rows.append((ps, r.rate, *r.ci95))
    return np.array(rows)


def poisson_detection_rate(shots: int, p_signal: float) -> float:
    """Chance of at least one signal count when the background is negligible."""
    return -math.expm1(-shots * p_signal)


def analytic_detection_rate(sim: CampaignSim) -> float:
    """Exact Binomial tail beyond the detection threshold."""
    cut = math.floor(sim.expected_background + sim.threshold)
    return float(binom.sf(cut, sim.shots, sim.p_total))
