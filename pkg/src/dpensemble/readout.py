"""Dispersive readout of the ensemble through a driven cavity.

The steady-state photon number follows from the closed-form solution of the
linear moment equations (cavity dissipation only, ``<sigma_z>`` conserved).
The same equations are also integrated in time as an independent check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import kernels
from .constants import UnitError
from .thermal import planck_occupancy


class DispersiveWarning(UserWarning):
    """Atom-cavity detuning is not large compared with the coupling."""


class SteadyStateWarning(UserWarning):
    """Integration stopped before the cavity could relax."""


class IntegrationError(ArithmeticError):
    pass


class ResolutionError(ValueError):
    """The two dispersive peaks cannot be told apart on the given spectrum."""


@dataclass(frozen=True)
class CavityParams:
    """Driven readout cavity. Frequencies are angular (rad/s).

    ``gamma`` is the full energy decay rate; the amplitude rate is ``kappa = gamma/2``.
    If ``gamma`` is omitted it is taken as ``omega0 / quality_factor``.
    """

    omega0: float
    g: float
    transition: float
    drive_amplitude: float = 1.0
    gamma: float | None = None
    quality_factor: float | None = None
    drive_frequency: float | None = None
    temperature: float = 0.0
    dispersive_ratio: float = 10.0

    def __post_init__(self):
        if self.gamma is None:
            if self.quality_factor is None:
                raise UnitError("give either gamma or quality_factor")
            if not self.quality_factor > 0:
                raise UnitError("quality factor must be > 0")
            object.__setattr__(self, "gamma", self.omega0 / self.quality_factor)
        for name in ("omega0", "g", "gamma", "transition"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise UnitError(f"{name} must be positive, got {v!r}")
        if not self.temperature >= 0:
            raise UnitError("temperature must be >= 0")

    @property
    def kappa(self) -> float:
        return self.gamma / 2.0

    @property
    def dispersive_valid(self) -> bool:
        return abs(self.transition - self.omega0) >= self.dispersive_ratio * self.g


@dataclass(frozen=True)
class DispersiveDerived:
    delta: float
    Gamma: float
    omega_shift: float
    nbar: float
    kappa: float
    omega0: float

    def detuning(self, omega_d):
        """Drive detuning from the ensemble-pulled cavity line."""
        return self.omega0 - self.omega_shift - np.asarray(omega_d, dtype=float)

    def drive_at(self, detuning):
        return self.omega0 - self.omega_shift - np.asarray(detuning, dtype=float)


def dispersive(cav: CavityParams, n_atoms: int) -> DispersiveDerived:
    delta = cav.transition - cav.omega0
    if delta == 0:
        raise UnitError("atom and cavity are resonant; no dispersive regime")
    gam = cav.g**2 / delta
    nbar = float(planck_occupancy(cav.omega0, cav.temperature)) if cav.temperature > 0 else 0.0
    return DispersiveDerived(delta, gam, (n_atoms - 1) * gam, nbar, cav.kappa, cav.omega0)


@dataclass(frozen=True)
class EnsembleReadoutState:
    """Excitation probability of the ensemble and how the readout sees it.

    ``mixture``: each shot finds the ensemble either in the ground state or in
    the single-excitation manifold, so the spectrum is the P-weighted sum of
    the two pure spectra. ``expectation``: the probe atom carries the average
    ``<sigma_z> = -1 + 2P/N`` of the superposed state.
    """

    probability: float
    interpretation: Literal["mixture", "expectation"] = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise UnitError("probability must lie in [0, 1]")
        if self.interpretation not in ("mixture", "expectation"):
            raise UnitError(f"unknown interpretation {self.interpretation!r}")

    def sigma_z(self, n_atoms: int) -> float:
        return -1.0 + 2.0 * self.probability / n_atoms

    def components(self, n_atoms: int) -> list[tuple[str, float, float]]:
        """``(tag, weight, <sigma_z>)`` for each pure spectrum in the readout."""
        if self.interpretation == "expectation":
            return [("expectation", 1.0, self.sigma_z(n_atoms))]
        return [("ground", 1.0 - self.probability, -1.0), ("excited", self.probability, 1.0)]


def photon_number(detuning, kappa, Gamma, sigma_z, drive_amplitude=1.0, nbar=0.0):
    """Steady-state ``<a^dag a>`` of the dispersively shifted cavity."""
    d = np.asarray(detuning, dtype=float)
    k2, G2 = kappa * kappa, Gamma * Gamma
    num = k2 + G2 - 2.0 * sigma_z * Gamma * d + d * d
    den = (k2 + G2 - d * d) ** 2 + 4.0 * k2 * d * d
    return drive_amplitude**2 * num / den + nbar


@dataclass
class Spectrum:
    omega_d: np.ndarray
    photon_number: np.ndarray
    components: dict[str, np.ndarray]
    interpretation: str
    omega0: float
    reference_peak: float  # eps^2/kappa^2, peak of a pure-state spectrum
    nbar: float
    include_offset: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def normalized(self) -> np.ndarray:
        # built from the components: subtracting nbar from the total loses
        # precision when the coherent signal is small next to the thermal floor
        return self.coherent / self.reference_peak

    @property
    def coherent(self) -> np.ndarray:
        """Driven part of ``<a^dag a>``, without the thermal offset."""
        return np.sum(list(self.components.values()), axis=0)

    def normalized_components(self) -> dict[str, np.ndarray]:
        return {k: v / self.reference_peak for k, v in self.components.items()}

    def rows(self):
        """``(omega_d/omega0, normalized <a^dag a>, interpretation, component)`` rows."""
        x = self.omega_d / self.omega0
        for xi, yi in zip(x, self.normalized):
            yield float(xi), float(yi), self.interpretation, "total"
        for tag, comp in self.normalized_components().items():
            for xi, yi in zip(x, comp):
                yield float(xi), float(yi), self.interpretation, tag


def steady_state_spectrum(
    cav: CavityParams,
    state: EnsembleReadoutState,
    n_atoms: int,
    omega_d,
    include_offset: bool = True,
) -> Spectrum:
    """Transmission spectrum over a grid of drive frequencies.

    With ``include_offset=False`` the constant thermal term is dropped, which
    gives the proportional form usually plotted.
    """
    omega_d = np.atleast_1d(np.asarray(omega_d, dtype=float))
    if omega_d.size == 0:
        raise UnitError("drive-frequency grid is empty")
    if not np.all(np.isfinite(omega_d)):
        raise UnitError("drive-frequency grid contains non-finite values")
    if not cav.dispersive_valid:
        warnings.warn(
            f"|Delta| < {cav.dispersive_ratio:g} g; dispersive approximation is doubtful",
            DispersiveWarning,
            stacklevel=2,
        )
    der = dispersive(cav, n_atoms)
    det = der.detuning(omega_d)
    comps = {}
    total = np.zeros_like(det)
    for tag, weight, sz in state.components(n_atoms):
        c = weight * photon_number(det, der.kappa, der.Gamma, sz, cav.drive_amplitude)
        comps[tag] = c
        total += c
    nbar = der.nbar if include_offset else 0.0
    ref = cav.drive_amplitude**2 / der.kappa**2
    return Spectrum(
        omega_d, total + nbar, comps, state.interpretation, cav.omega0, ref, der.nbar, include_offset,
        meta={"Gamma": der.Gamma, "kappa": der.kappa, "omega_shift": der.omega_shift},
    )


# ---------------------------------------------------------------- time domain

@dataclass
class MomentTrajectory:
    t: np.ndarray
    a: np.ndarray
    a_sz: np.ndarray
    a_dag: np.ndarray
    a_dag_sz: np.ndarray
    n: np.ndarray
    steps: int = 0
    rejected: int = 0


def _moment_matrix(delta0, Gamma, kappa, gamma, eps, sz, nbar):
    """Complex generator ``M, c`` for (a, a sz, a^dag, a^dag sz, a^dag a)."""
    M = np.zeros((5, 5), dtype=complex)
    c = np.zeros(5, dtype=complex)
    M[0, 0] = -1j * delta0 - kappa
    M[0, 1] = -1j * Gamma
    c[0] = -1j * eps
    M[1, 0] = -1j * Gamma
    M[1, 1] = -1j * delta0 - kappa
    c[1] = -1j * eps * sz
    M[2, 2] = 1j * delta0 - kappa
    M[2, 3] = 1j * Gamma
    c[2] = 1j * eps
    M[3, 2] = 1j * Gamma
    M[3, 3] = 1j * delta0 - kappa
    c[3] = 1j * eps * sz
    M[4, 0] = 1j * eps
    M[4, 2] = -1j * eps
    M[4, 4] = -gamma
    c[4] = gamma * nbar
    return M, c


def _realify(M, c):
    A = np.block([[M.real, -M.imag], [M.imag, M.real]])
    return A, np.concatenate([c.real, c.imag])


def integrate_moments(
    cav: CavityParams,
    state: EnsembleReadoutState,
    n_atoms: int,
    omega_d: float,
    t_end: float,
    n_samples: int = 201,
    rtol: float = 1e-10,
    initial_photons: float | None = None,
    max_steps: int = 2_000_000,
) -> MomentTrajectory:
    """Integrate the moment equations from the cavity vacuum.

    Under the mixture reading every component is integrated alongside the
    others and the moments are combined with the mixture weights. The cavity
    starts with no coherent field and ``initial_photons`` quanta (defaults to
    the thermal occupancy).
    """
    if not t_end > 0:
        raise UnitError("t_end must be > 0")
    der = dispersive(cav, n_atoms)
    kappa, gamma, eps = der.kappa, cav.gamma, cav.drive_amplitude
    if t_end < 3.0 / kappa:
        warnings.warn("t_end < 3/kappa: steady state likely unreached", SteadyStateWarning, stacklevel=2)
    d0 = float(der.detuning(omega_d))
    n0 = der.nbar if initial_photons is None else float(initial_photons)
    comps = state.components(n_atoms)
    nc = len(comps)

    # time measured in units of 1/kappa keeps the generator O(1)
    blocks_A, blocks_b = [], []
    for _, _, sz in comps:
        M, c = _moment_matrix(d0, der.Gamma, kappa, gamma, eps, sz, der.nbar)
        A, b = _realify(M / kappa, c / kappa)
        blocks_A.append(A)
        blocks_b.append(b)
    dim = 10 * nc
    A = np.zeros((dim, dim))
    for i, Ab in enumerate(blocks_A):
        A[10 * i : 10 * i + 10, 10 * i : 10 * i + 10] = Ab
    b = np.concatenate(blocks_b)
    y0 = np.zeros(dim)
    y0[4::10] = n0

    amp_scale = abs(eps) / kappa
    n_scale = max(amp_scale**2, der.nbar, n0)
    amp_scale = amp_scale or math.sqrt(n_scale) or 1.0
    n_scale = n_scale or 1.0
    atol = np.full(dim, 1e-2 * rtol * amp_scale)
    atol[4::10] = atol[9::10] = 1e-2 * rtol * n_scale

    t_eval = np.linspace(0.0, t_end * kappa, max(int(n_samples), 2))
    rate = max(np.abs(A).sum(axis=1).max(), 1e-300)
    h0 = min(0.05 / rate, t_eval[1])
    Y, status, acc, rej = kernels.dp45_linear(A, b, y0, t_eval, rtol, atol, h0, 1e-14 * t_eval[-1], max_steps)
    if status == kernels.STEP_COLLAPSE:
        raise IntegrationError(f"step size collapsed after {acc} accepted / {rej} rejected steps")
    if status == kernels.MAX_STEPS:
        raise IntegrationError(f"step budget of {max_steps} exhausted")

    z = np.zeros((t_eval.size, 5), dtype=complex)
    for i, (_, w, _) in enumerate(comps):
        blk = Y[:, 10 * i : 10 * i + 10]
        z += w * (blk[:, :5] + 1j * blk[:, 5:])
    return MomentTrajectory(
        t_eval / kappa, z[:, 0], z[:, 1], z[:, 2], z[:, 3], z[:, 4].real, steps=acc, rejected=rej
    )


# ---------------------------------------------------------------- estimation

def _vertex(x, y, i):
    """Quadratic through the reciprocal of three samples.

    A Lorentzian is exactly quadratic in 1/y, so the vertex is exact for an
    isolated line and very close for overlapping ones.
    """
    if i <= 0 or i >= len(x) - 1 or np.any(y[i - 1 : i + 2] <= 0):
        return x[i], y[i]
    xs, r = x[i - 1 : i + 2], 1.0 / y[i - 1 : i + 2]
    c2, c1, c0 = np.polyfit(xs - xs[1], r, 2)
    if c2 <= 0:
        return x[i], y[i]
    xv = -c1 / (2.0 * c2)
    if abs(xv) > (xs[2] - xs[0]):
        return x[i], y[i]
    return xs[1] + xv, 1.0 / (c0 - c1 * c1 / (4.0 * c2))


def local_maxima(y):
    idx = np.flatnonzero((y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:])) + 1
    return idx


def _peak_near(x, y, target, window):
    maxima = local_maxima(y)
    near = maxima[np.abs(x[maxima] - target) < window]
    if near.size:
        i = near[np.argmin(np.abs(x[near] - target))]
        return _vertex(x, y, i), True
    i = int(np.argmin(np.abs(x - target)))
    return (x[i], y[i]), False


def estimate_P_from_spectrum(omega_d, photon_number_values, cav: CavityParams, n_atoms: int, background=None) -> float:
    """Excitation probability from the heights of the two dispersive peaks.

    The ground-state line sits at ``Delta_0 = +Gamma`` and the shifted line at
    ``-Gamma``. Both heights are background subtracted and then unmixed using
    the known line shapes, which removes the crosstalk of each line's tail
    under the other peak; for well separated lines this reduces to
    ``h_shifted / (h_shifted + h_main)``.
    """
    der = dispersive(cav, n_atoms)
    kappa, G = der.kappa, der.Gamma
    if 2.0 * abs(G) < 3.0 * kappa:
        raise ResolutionError(
            f"peak separation 2|Gamma| = {2 * abs(G):.4g} < 3 kappa = {3 * kappa:.4g} rad/s"
        )
    x = der.detuning(omega_d)
    order = np.argsort(x)
    x = x[order]
    y = np.asarray(photon_number_values, dtype=float)[order]
    y = y - (der.nbar if background is None else background)
    lo, hi = -abs(G), abs(G)
    if x[0] > lo or x[-1] < hi:
        raise ResolutionError("spectrum does not cover both dispersive peaks")
    for target in (lo, hi):
        sel = np.abs(x - target) <= kappa
        if np.count_nonzero(sel) < 5 or np.max(np.diff(x[sel])) > kappa / 5 * (1 + 1e-9):
            raise ResolutionError(f"fewer than 5 grid points per linewidth near Delta_0 = {target:.4g}")

    (xm, hm), _ = _peak_near(x, y, G, abs(G))
    (xs, hs), _ = _peak_near(x, y, -G, abs(G))

    def shape(xx, sz):
        return photon_number(xx, kappa, G, sz)

    mat = np.array([[shape(xm, -1.0), shape(xm, 1.0)], [shape(xs, -1.0), shape(xs, 1.0)]])
    u, v = np.linalg.solve(mat, np.array([hm, hs]))
    if u + v <= 0:
        raise ResolutionError("no signal above background")
    return float(min(1.0, max(0.0, v / (u + v))))
