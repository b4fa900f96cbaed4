"""Batch front end: one subcommand per reproduced figure or campaign estimate.

Exit codes: 0 success, 2 configuration error, 3 failed internal self-check.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .constants import M_ELECTRON, UnitError, frequency_to_mass
from .detector import TUNABLE_RANGE, DetectorSpec, field_range, tuning_curve
from .montecarlo import CampaignSim, analytic_detection_rate, power_curve, simulate_campaign, trial_counts
from .readout import (
    CavityParams,
    EnsembleReadoutState,
    ResolutionError,
    local_maxima,
    dispersive,
    estimate_P_from_spectrum,
    integrate_moments,
    steady_state_spectrum,
)
from .sensitivity import ISOTROPIC_COS_THETA, ScanPlan, exclusion_curve, plan_scan, reconcile_duration
from .signal import DarkPhotonHypothesis, dark_coherence_time
from .thermal import ThermalBand, thermal_probability_narrowband, thermal_spectrum

ENV_OUT = "DPENSEMBLE_OUT"
TWO_PI = 2.0 * math.pi
EXIT_OK, EXIT_CONFIG, EXIT_SELFCHECK = 0, 2, 3


class SelfCheckFailure(RuntimeError):
    pass


# ------------------------------------------------------------------ writers

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


PLOT_TEMPLATE = '''"""Plot {csv_name}; generated alongside the data."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(lambda: ([], []))
with open("{csv_name}") as fh:
    rows = csv.reader(fh)
    header = next(rows)
    for row in rows:
        key = ", ".join(f"{{h}}={{v}}" for h, v in zip(header[2:], row[2:]))
        x, y = series[key]
        x.append(float(row[0]))
        y.append(float(row[1]))

fig, ax = plt.subplots()
for key, (x, y) in series.items():
    ax.plot(x, y, label=key or None)
ax.set_xlabel(header[0])
ax.set_ylabel(header[1])
{scale}if len(series) > 1:
    ax.legend(fontsize="small")
fig.savefig("{stem}.png", dpi=150)
'''


def emit_plot(out: Path, csv_name: str, logy: bool = False) -> None:
    stem = Path(csv_name).stem
    scale = 'ax.set_yscale("log")\n' if logy else ""
    (out / f"plot_{stem}.py").write_text(PLOT_TEMPLATE.format(csv_name=csv_name, stem=stem, scale=scale))


# ------------------------------------------------------------------ builders

def _guard(cfg: RunConfig, section: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except UnitError as exc:
        raise cfg.error(str(exc), section) from None


def build_detector(cfg: RunConfig) -> DetectorSpec:
    d = cfg.section("detector")
    mode = d.get("mode", "y")
    lo, hi = TUNABLE_RANGE[mode]
    default_field = 3000.0 if mode == "y" else 0.0
    return _guard(
        cfg,
        "detector",
        DetectorSpec,
        mode=mode,
        bias_field=d.get("bias_field", default_field),
        electrode_depth=d.get("electrode_depth", 0.5e-6),
        mass=d.get("mass", M_ELECTRON),
        ensemble_size=d.get("ensemble_size", 1),
        temperature=d.get("temperature", 0.01),
        coherence_time=d.get("coherence_time", 1e-4),
    )


def build_cavity(cfg: RunConfig) -> CavityParams:
    c = cfg.section("cavity")
    f0 = cfg.require("cavity", "frequency_hz")
    kw = dict(
        omega0=TWO_PI * f0,
        g=TWO_PI * cfg.require("cavity", "coupling_hz"),
        transition=TWO_PI * cfg.require("cavity", "transition_hz"),
        drive_amplitude=c.get("drive_amplitude", 1.0),
        temperature=c.get("temperature", 0.0),
        dispersive_ratio=c.get("dispersive_ratio", 10.0),
    )
    if "kappa_hz" in c:
        kw["gamma"] = 2.0 * TWO_PI * c["kappa_hz"]
    elif "quality_factor" in c:
        kw["quality_factor"] = c["quality_factor"]
    else:
        raise cfg.error("cavity needs kappa_hz or quality_factor", "cavity")
    return _guard(cfg, "cavity", CavityParams, **kw)


def _band(cfg: RunConfig, det: DetectorSpec):
    band = cfg.get("scan", "band_hz")
    if band is None:
        band = list(TUNABLE_RANGE[det.mode])
    if not det.in_band(*band):
        lo, hi = TUNABLE_RANGE[det.mode]
        raise cfg.error(f"band {band} Hz outside the {det.mode}-mode range [{lo:g}, {hi:g}] Hz", "scan", "band_hz")
    return band


# ------------------------------------------------------------------ commands

def cmd_spectrum(cfg: RunConfig, out: Path, args) -> dict:
    cav = build_cavity(cfg)
    r = cfg.section("readout")
    n = r.get("ensemble_size", 1000)
    state = _guard(cfg, "readout", EnsembleReadoutState, r.get("probability", 0.1), r.get("interpretation", "mixture"))
    npts = r.get("grid_points", 2401)
    if npts < 3:
        raise cfg.error("grid_points must be >= 3", "readout", "grid_points")
    der = dispersive(cav, n)
    span = r.get("grid_half_span", 3.0) * abs(der.Gamma)
    detuning = np.linspace(span, -span, npts)  # ascending drive frequency
    omega_d = der.drive_at(detuning)
    include_offset = r.get("include_offset", True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = steady_state_spectrum(cav, state, n, omega_d, include_offset=include_offset)
    write_csv(
        out / "spectrum.csv",
        ["omega_d_over_omega0", "normalized_photon_number", "interpretation", "component"],
        spec.rows(),
    )

    # peak heights of the component curves and of the total curve
    comp_peaks = {k: float(v.max()) for k, v in spec.normalized_components().items()}
    norm_total = spec.normalized
    maxima = local_maxima(norm_total)
    total_peaks = sorted((float(norm_total[i]) for i in maxima), reverse=True)

    summary = {
        "interpretation": state.interpretation,
        "probability": state.probability,
        "ensemble_size": n,
        "Gamma_over_omega0": der.Gamma / cav.omega0,
        "kappa_over_omega0": der.kappa / cav.omega0,
        "component_peak_heights": comp_peaks,
        "total_peak_heights": total_peaks,
    }
    try:
        summary["P_hat"] = estimate_P_from_spectrum(omega_d, spec.coherent, cav, n, background=0.0)
        rt_tol = r.get("roundtrip_tolerance", 2e-3)
        roundtrip = []
        for p in r.get("roundtrip", [0.01, 0.05, 0.1, 0.3, 0.5]):
            s = steady_state_spectrum(cav, EnsembleReadoutState(p, "mixture"), n, omega_d, include_offset=include_offset)
            est = estimate_P_from_spectrum(omega_d, s.coherent, cav, n, background=0.0)
            roundtrip.append({"P": p, "P_hat": est, "error": est - p})
        summary["roundtrip"] = roundtrip
        summary["roundtrip_ok"] = all(abs(x["error"]) <= rt_tol for x in roundtrip)
    except ResolutionError as exc:
        raise cfg.error(f"spectrum unsuitable for P estimation: {exc}", "readout") from None

    # time-domain oracle at a handful of drive frequencies
    k = r.get("ode_points", 9)
    idx = np.unique(np.linspace(0, npts - 1, k).round().astype(int))
    t_end = r.get("ode_t_end_kappa", 30.0) / der.kappa
    tol = r.get("ode_tolerance", 1e-4)
    ode_rows = []
    worst = 0.0
    for i in idx:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            tr = integrate_moments(cav, state, n, float(omega_d[i]), t_end)
        closed = float(spec.photon_number[i]) if include_offset else float(spec.photon_number[i]) + der.nbar
        rel = abs(tr.n[-1] - closed) / closed
        worst = max(worst, rel)
        ode_rows.append((
            omega_d[i] / cav.omega0,
            spec.coherent[i] / spec.reference_peak,
            (tr.n[-1] - der.nbar) / spec.reference_peak,
            rel,
        ))
    write_csv(out / "ode_spectrum.csv", ["omega_d_over_omega0", "closed_form", "ode", "relative_error"], ode_rows)
    summary["ode_max_relative_error"] = worst
    summary["ode_ok"] = worst < tol
    write_json(out / "spectrum_summary.json", summary)
    if args.emit_plots:
        emit_plot(out, "spectrum.csv")
    if not summary["ode_ok"]:
        raise SelfCheckFailure(f"ODE and closed form differ by {worst:.3g} (> {tol:g})")
    if not summary["roundtrip_ok"]:
        raise SelfCheckFailure("P round trip outside tolerance")
    return summary


def cmd_thermal(cfg: RunConfig, out: Path, args) -> dict:
    det = build_detector(cfg)
    band = _band(cfg, det)
    pts = cfg.get("scan", "points", 201)
    tau = cfg.get("scan", "tau_s", det.coherence_time)
    lw = cfg.get("detector", "linewidth_hz", 1e3)
    freqs = np.linspace(band[0], band[1], pts)
    table = thermal_spectrum(det, freqs, lw, tau)
    write_csv(out / "thermal.csv", ["frequency_ghz", "log10_p_therm"], table)

    e_lo, e_hi = field_range(det.mode, det.electrode_depth, det.mass)
    fields = np.linspace(e_lo, e_hi, 101)
    write_csv(out / "tuning.csv", ["bias_field_v_per_m", "frequency_ghz"], [(e, f / 1e9) for e, f in tuning_curve(det.mode, fields, det.electrode_depth, det.mass)])

    narrow = np.array([
        thermal_probability_narrowband(det.tuned_to(TWO_PI * f), ThermalBand.from_hz(f, lw, det.temperature), tau)
        for f in freqs
    ])
    rel_dev = np.abs(10.0 ** (narrow - table[:, 1]) - 1.0)
    summary = {
        "mode": det.mode,
        "band_hz": band,
        "ensemble_size": det.ensemble_size,
        "temperature_k": det.temperature,
        "tau_s": tau,
        "linewidth_hz": lw,
        "log10_p_therm_min": float(table[:, 1].min()),
        "log10_p_therm_max": float(table[:, 1].max()),
        "narrowband_max_relative_deviation": float(rel_dev.max()),
    }
    bound = cfg.get("scan", "assert_log10_below")
    if bound is not None:
        summary["assert_log10_below"] = bound
        summary["bound_ok"] = bool(table[:, 1].max() < bound)
    write_json(out / "thermal_summary.json", summary)
    if args.emit_plots:
        emit_plot(out, "thermal.csv")
        emit_plot(out, "tuning.csv")
    if bound is not None and not summary["bound_ok"]:
        raise SelfCheckFailure(f"log10 P_therm reaches {summary['log10_p_therm_max']:.2f}, not below {bound}")
    return summary


def _hypothesis_params(cfg):
    h = cfg.section("hypothesis")
    return h.get("rho_gev_cm3", 0.45), h.get("cos_theta", ISOTROPIC_COS_THETA), h.get("v_dm", 1e-3)


def _curves(cfg, det, band, tau):
    s = cfg.section("scan")
    rho, cos_t, _ = _hypothesis_params(cfg)
    targets = s.get("p_targets", [1e-4, 1e-5, 1e-6])
    dwells = s.get("dwells_s", [s.get("dwell_s", 10.0)] * len(targets))
    if len(dwells) != len(targets):
        raise cfg.error("dwells_s must match p_targets in length", "scan", "dwells_s")
    sizes = s.get("ensemble_sizes", [det.ensemble_size])
    lw = cfg.get("detector", "linewidth_hz", 1e3)
    # every N at the first target; the remaining targets at the largest N
    families = [(n, targets[0], dwells[0]) for n in sizes]
    families += [(max(sizes), p, td) for p, td in zip(targets[1:], dwells[1:])]
    curves = []
    for n, p, td in families:
        curves.append(
            exclusion_curve(det, tuple(band), p, tau, n_atoms=n, dwell=td, points=s.get("points", 201),
                            rho=rho, cos_theta=cos_t, linewidth_hz=lw)
        )
    return curves


def cmd_exclusion(cfg: RunConfig, out: Path, args) -> dict:
    det = build_detector(cfg)
    band = _band(cfg, det)
    tau = cfg.get("scan", "tau_s", det.coherence_time)
    curves = _curves(cfg, det, band, tau)
    rows = [row for c in curves for row in c.rows()]
    write_csv(out / "exclusion.csv", ["mass_uev", "chi", "N", "P_target", "tau_s", "T_d_s"], rows)
    _, _, v_dm = _hypothesis_params(cfg)
    tau_dp = dark_coherence_time(DarkPhotonHypothesis(float(frequency_to_mass(band[1])), v_dm=v_dm))
    summary = {
        "mode": det.mode,
        "band_hz": band,
        "mass_range_uev": [float(frequency_to_mass(band[0])) * 1e6, float(frequency_to_mass(band[1])) * 1e6],
        "tau_s": tau,
        "cos_theta": curves[0].cos_theta,
        "tau_dp_min_s": tau_dp,
        "coherence_ok": tau <= min(tau_dp, det.coherence_time),
        "curves": [
            {"N": c.n_atoms, "P_target": c.p_target, "T_d_s": c.dwell, "chi_min": c.envelope[0], "chi_max": c.envelope[1]}
            for c in curves
        ],
    }
    write_json(out / "exclusion_summary.json", summary)
    if args.emit_plots:
        emit_plot(out, "exclusion.csv", logy=True)
    return summary


def cmd_plan(cfg: RunConfig, out: Path, args) -> dict:
    det = build_detector(cfg)
    band = _band(cfg, det)
    s = cfg.section("scan")
    if "bandwidth_hz" not in s and "quality_factor" not in s:
        raise cfg.error("scan needs bandwidth_hz or quality_factor", "scan")
    plan = _guard(
        cfg, "scan", ScanPlan, band[0], band[1], s.get("dwell_s", 10.0),
        bandwidth=s.get("bandwidth_hz"), quality_factor=s.get("quality_factor"),
        shots=s.get("shots", 10_000), tau=s.get("tau_s", det.coherence_time),
    )
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        res = plan_scan(plan)
    rho, cos_t, _ = _hypothesis_params(cfg)
    p0 = s.get("p_targets", [1e-4])[0]
    curve = exclusion_curve(det, tuple(band), p0, plan.tau, dwell=plan.dwell, points=s.get("points", 101),
                            rho=rho, cos_theta=cos_t, linewidth_hz=cfg.get("detector", "linewidth_hz", 1e3))
    summary = {
        "band_hz": band,
        "mass_range_uev": [float(frequency_to_mass(band[0])) * 1e6, float(frequency_to_mass(band[1])) * 1e6],
        "bandwidth_hz": res.bandwidth,
        "points": res.points,
        "dwell_s": plan.dwell,
        "total_time_s": res.total_time,
        "total_days": res.total_days,
        "notes": list(res.notes),
        "chi_envelope": {"N": det.ensemble_size, "P_target": p0, "cos_theta": cos_t,
                         "chi_min": curve.envelope[0], "chi_max": curve.envelope[1]},
    }
    if "quoted_days" in s:
        rec = reconcile_duration(plan, s["quoted_days"])
        summary["quoted_days"] = s["quoted_days"]
        summary["consistent_with_quote"] = rec["consistent"]
        if "note" in rec:
            summary["notes"].append(rec["note"])
        summary["dwell_for_quote_s"] = rec["dwell_for_quote"]
    if "reconstruct_dwell_s" in s:
        alt = ScanPlan(band[0], band[1], s["reconstruct_dwell_s"], bandwidth=res.bandwidth, shots=plan.shots, tau=plan.tau)
        summary["reconstruction"] = {"dwell_s": alt.dwell, "total_days": plan_scan(alt).total_days}
    write_json(out / "plan_summary.json", summary)
    return summary


def cmd_montecarlo(cfg: RunConfig, out: Path, args) -> dict:
    m = cfg.section("montecarlo")
    seed = args.seed if args.seed is not None else m.get("seed", 0)
    shots = m.get("shots", 10_000)
    pb = m.get("p_background", 1.4e-9)
    ps = m.get("p_signal", 1e-4)
    trials = m.get("trials", 10_000)
    workers = m.get("workers", 1)
    alt = _guard(cfg, "montecarlo", CampaignSim, shots, ps, pb, trials, seed)
    null = _guard(cfg, "montecarlo", CampaignSim, shots, 0.0, pb, trials, seed)
    r_alt = simulate_campaign(alt, workers=workers)
    r_null = simulate_campaign(null, workers=workers)
    grid = m.get("p_signal_grid", [0.0, ps / 10, ps / 3, ps, 3 * ps, 10 * ps])
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise cfg.error("p_signal_grid must be ascending", "montecarlo", "p_signal_grid")
    if max(grid) + pb > 1:
        raise cfg.error("p_signal + p_background exceeds 1 on the grid", "montecarlo", "p_signal_grid")
    curve = power_curve(null, grid, workers=workers)
    write_csv(out / "power_curve.csv", ["p_signal", "detection_rate", "ci95_lo", "ci95_hi"], curve)

    # determinism: sequential and threaded evaluation must agree count for count
    small = CampaignSim(shots, ps, pb, min(trials, 20_000), seed)
    same = bool(np.array_equal(trial_counts(small, workers=1, chunk=4096), trial_counts(small, workers=4, chunk=4096)))
    summary = {
        "seed": seed,
        "shots": shots,
        "p_background": pb,
        "p_signal": ps,
        "trials": trials,
        "null": r_null.to_dict(),
        "signal": r_alt.to_dict(),
        "analytic_rate": {"null": analytic_detection_rate(null), "signal": analytic_detection_rate(alt)},
        "parallel_matches_sequential": same,
    }
    write_json(out / "montecarlo_summary.json", summary)
    if args.emit_plots:
        emit_plot(out, "power_curve.csv")
    if not same:
        raise SelfCheckFailure("threaded and sequential trial counts differ")
    return summary


COMMANDS = {
    "spectrum": cmd_spectrum,
    "thermal": cmd_thermal,
    "exclusion": cmd_exclusion,
    "plan": cmd_plan,
    "montecarlo": cmd_montecarlo,
}


# ------------------------------------------------------------------ entry

def figures_dir() -> Path:
    return Path(str(resources.files("dpensemble") / "figures"))


def _out_dir(args, cfg: RunConfig | None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.get("output", "directory"):
        return Path(cfg.get("output", "directory"))
    return Path(os.environ.get(ENV_OUT, "out"))


def run_config(command: str | None, config_path: str, out: Path | None, args) -> int:
    try:
        cfg = load_config(config_path, strict=args.strict)
        if command is None:
            command = cfg.command
            if command is None:
                raise ConfigError("config has no 'command' and none was given", 1, config_path)
        elif cfg.command is not None and cfg.command != command:
            raise ConfigError(f"config is for '{cfg.command}', not '{command}'", cfg.lines.get(("command",)), config_path)
        for w in cfg.warnings:
            print(f"warning: {w}", file=sys.stderr)
        out = out if out is not None else _out_dir(args, cfg)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SelfCheckFailure as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    print(f"{command}: wrote {out}")
    if args.verbose:
        print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help=f"output directory (default: config, then ${ENV_OUT}, then ./out)")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed for Monte Carlo runs")
    common.add_argument("--strict", action="store_true", help="reject unknown config keys")
    common.add_argument("--emit-plots", action="store_true", help="write matplotlib scripts next to the CSVs")
    common.add_argument("-v", "--verbose", action="store_true", help="print the run summary")

    p = argparse.ArgumentParser(prog="dpensemble", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", "") + " outputs")
        sp.add_argument("--config", required=True, metavar="PATH")
    sp = sub.add_parser("run", parents=[common], help="run a config, dispatching on its 'command' key")
    sp.add_argument("--config", required=True, metavar="PATH")
    sp = sub.add_parser("run-all", parents=[common], help="regenerate every figure config")
    sp.add_argument("--figures", metavar="DIR", help="directory of figure configs (default: bundled)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return run_config(None, args.config, None, args)
    if args.command == "run-all":
        fig = Path(args.figures) if args.figures else figures_dir()
        base = Path(args.out) if args.out else Path(os.environ.get(ENV_OUT, "out"))
        configs = sorted(fig.glob("*.yaml"))
        if not configs:
            print(f"config error: no *.yaml configs in {fig}", file=sys.stderr)
            return EXIT_CONFIG
        return max(run_config(None, str(c), base / c.stem, args) for c in configs)
    return run_config(args.command, args.config, None, args)


if __name__ == "__main__":
    sys.exit(main())
