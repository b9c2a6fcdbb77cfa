"""Command-line front end.

Subcommands: rates, evolve, mcwf, validate.  Each run reads one YAML config,
writes CSV output plus a manifest echoing the fully resolved configuration
(so a run can be reproduced bit-identically from its manifest), and renders
quick-look figures next to the CSVs when --plot is given.

Exit codes: 0 success, 1 validity warning (validate only), 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import (RunConfig, build_equation, build_initial_state, build_model,
                     build_system, initial_pure_vector, load_run_config)
from .errors import (ConfigError, InvalidStateError, NegativeRateError,
                     NonSecularConfigError, QuadratureError,
                     StepSizeUnderflowError)
from .evolve import evolve_master, timescale_report
from .mcwf import mcwf_ensemble
from .rates import gamma_xi, precompute_rate_trace, xi_spread

XI_SPREAD_THRESHOLD = 0.05


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg.output)
    if not out.is_absolute():
        out = cfg.base_dir / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def _out_grid(cfg: RunConfig) -> np.ndarray:
    t_max = cfg.simulation["t_max"]
    n = cfg.simulation["out_points"]
    if t_max == 0.0 or n == 1:
        return np.array([0.0])
    return np.linspace(0.0, t_max, n)


def _write_manifest(out: Path, command: str, cfg: RunConfig, extra: dict) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "resolved_config": cfg.resolved(),
    }
    manifest.update(extra)
    path = out / "manifest.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=True, default_flow_style=False)
    return path


def _timescales_dict(report) -> dict:
    return {
        "tau_s": float(report.tau_s),
        "tau_c": float(report.tau_c) if np.isfinite(report.tau_c) else "inf",
        "tau_r": float(report.tau_r) if np.isfinite(report.tau_r) else "inf",
        "gamma_markov": float(report.gamma_markov),
        "lamb_markov": float(report.lamb_markov),
        "markov_valid": bool(report.markov_valid),
        "secular_valid": bool(report.secular_valid),
        "relaxation_defined": bool(report.relaxation_defined),
    }


def cmd_rates(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    params = build_system(cfg)
    model = build_model(cfg)
    grid = _out_grid(cfg)
    trace = precompute_rate_trace(model, params, grid,
                                  tol=cfg.simulation["quad_tol"])
    csv_path = out_dir / "rates.csv"
    trace.to_csv(csv_path)
    extra = {
        "outputs": ["rates.csv"],
        "markov": {"gamma": float(trace.gamma_markov),
                   "lambda": float(trace.lamb_markov)},
        "warnings": (["xi-approximation degraded: drive or detuning reaches "
                      "a tenth of the laser frequency"]
                     if params.xi_approx_warning else []),
    }
    if plot:
        from .plotting import plot_rate_trace
        plot_rate_trace(trace, out_dir / "rates.png")
        extra["outputs"].append("rates.png")
    _write_manifest(out_dir, "rates", cfg, extra)
    print(f"wrote {csv_path}")
    return 0


def cmd_evolve(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    params = build_system(cfg)
    model = build_model(cfg)
    equation = build_equation(cfg)
    rho0 = build_initial_state(cfg, params)
    t_max = cfg.simulation["t_max"]
    if t_max <= 0:
        raise ConfigError("simulation.t_max", "evolve needs t_max > 0")
    grid = _out_grid(cfg)
    record = evolve_master(rho0, params, model, equation, (0.0, t_max), grid,
                           ode_tol=cfg.simulation["ode_tol"],
                           quad_tol=cfg.simulation["quad_tol"])
    csv_path = out_dir / "trajectory.csv"
    record.to_csv(csv_path)
    report = timescale_report(params, model, tol=cfg.simulation["quad_tol"])
    warnings = []
    if params.xi_approx_warning:
        warnings.append("xi-approximation degraded: drive or detuning reaches "
                        "a tenth of the laser frequency")
    if not report.relaxation_defined:
        warnings.append("relaxation time undefined: Markovian decay rate is "
                        "not positive")
    else:
        if not report.markov_valid:
            warnings.append("Markov approximation questionable: tau_c > tau_r/10")
        if not report.secular_valid:
            warnings.append("secular approximation questionable: tau_s > tau_r/10")
    extra = {
        "outputs": ["trajectory.csv"],
        "timescales": _timescales_dict(report),
        "warnings": warnings,
        "diagnostics": {
            "max_trace_dev": float(record.trace_dev.max()),
            "max_herm_dev": float(record.herm_dev.max()),
            "min_eigenvalue": float(record.min_eig.min()),
            "steps": record.meta["integrator"]["steps"],
            "rejected": record.meta["integrator"]["rejected"],
        },
    }
    if plot:
        from .plotting import plot_trajectory
        plot_trajectory(record, out_dir / "trajectory.png")
        extra["outputs"].append("trajectory.png")
    _write_manifest(out_dir, "evolve", cfg, extra)
    print(f"wrote {csv_path}")
    return 0


def cmd_mcwf(cfg: RunConfig, out_dir: Path, plot: bool) -> int:
    params = build_system(cfg)
    model = build_model(cfg)
    equation = build_equation(cfg)
    if cfg.mcwf is None:
        raise ConfigError("mcwf", "mcwf section required for trajectory runs")
    rho0 = build_initial_state(cfg, params)
    psi0 = initial_pure_vector(rho0)
    t_max = cfg.simulation["t_max"]
    if t_max <= 0:
        raise ConfigError("simulation.t_max", "mcwf needs t_max > 0")
    grid = _out_grid(cfg)
    record = mcwf_ensemble(psi0, params, model, equation, (0.0, t_max), grid,
                           n_traj=cfg.mcwf["n_traj"],
                           master_seed=cfg.mcwf["master_seed"],
                           dt=cfg.mcwf["dt"], psi0_basis=rho0.basis,
                           quad_tol=cfg.simulation["quad_tol"])
    csv_path = out_dir / "ensemble.csv"
    record.to_csv(csv_path)
    extra = {
        "outputs": ["ensemble.csv"],
        "mcwf": {
            "n_traj": record.n_traj,
            "master_seed": record.master_seed,
            "dt_requested": float(record.meta["dt_requested"]),
            "dt_effective": float(record.meta["dt_effective"]),
            "total_steps": int(record.meta["total_steps"]),
            "jump_counts": record.jump_counts,
        },
        "warnings": (["xi-approximation degraded: drive or detuning reaches "
                      "a tenth of the laser frequency"]
                     if params.xi_approx_warning else []),
    }
    if plot:
        from .plotting import plot_ensemble
        plot_ensemble(record, out_dir / "ensemble.png")
        extra["outputs"].append("ensemble.png")
    _write_manifest(out_dir, "mcwf", cfg, extra)
    print(f"wrote {csv_path}")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    params = build_system(cfg)
    model = build_model(cfg)
    quad_tol = cfg.simulation["quad_tol"]
    report = timescale_report(params, model, tol=quad_tol)

    flags = []
    if params.xi_approx_warning:
        flags.append("drive/detuning not small against the laser frequency")
    if not report.relaxation_defined:
        flags.append("tau_r undefined (Markovian decay rate not positive)")
    else:
        if not report.markov_valid:
            flags.append("Markov approximation invalid (tau_c > tau_r/10)")
        if not report.secular_valid:
            flags.append("secular approximation invalid (tau_s > tau_r/10)")

    spread_ratio = None
    if report.relaxation_defined and np.isfinite(report.tau_c):
        probes = report.tau_c * np.array([1.0, 3.0, 10.0])
        ratios = []
        for t in probes:
            g0 = gamma_xi(model, params, 0, t, quad_tol)
            if abs(g0) > 100 * quad_tol:
                ratios.append(xi_spread(model, params, t, quad_tol) / abs(g0))
        if ratios:
            spread_ratio = max(ratios)
            if spread_ratio > XI_SPREAD_THRESHOLD:
                flags.append(f"sideband spread {spread_ratio:.1%} of |Gamma| "
                             f"exceeds {XI_SPREAD_THRESHOLD:.0%}")

    def fmt(x):
        return f"{x:12.6g}" if np.isfinite(x) else "         inf"

    print("timescale            value")
    print(f"tau_S (system)     {fmt(report.tau_s)}")
    print(f"tau_C (reservoir)  {fmt(report.tau_c)}")
    print(f"tau_R (relaxation) {fmt(report.tau_r)}")
    print(f"gamma_markov       {fmt(report.gamma_markov)}")
    print(f"lambda_markov      {fmt(report.lamb_markov)}")
    if spread_ratio is not None:
        print(f"xi-spread ratio    {fmt(spread_ratio)}")
    if flags:
        print("validity flags:")
        for flag in flags:
            print(f"  - {flag}")
        return 1
    print("validity flags: none")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="drivenatom",
        description="Simulate a laser-driven two-level atom in a structured "
                    "reservoir: time-dependent decay rates, master-equation "
                    "evolution, and quantum-trajectory ensembles.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
            ("rates", "export the time-dependent decay and shift rates"),
            ("evolve", "integrate the master equation"),
            ("mcwf", "run a Monte Carlo wave-function ensemble"),
            ("validate", "report timescales and validity flags")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="YAML run file")
        if name != "validate":
            p.add_argument("--out", default=None,
                           help="output directory (overrides the config)")
            p.add_argument("--plot", action="store_true",
                           help="render PNG figures next to the CSVs")
    args = parser.parse_args(argv)

    try:
        cfg = load_run_config(args.config)
        if args.command == "validate":
            return cmd_validate(cfg)
        out_dir = _out_dir(cfg, args.out)
        if args.command == "rates":
            return cmd_rates(cfg, out_dir, args.plot)
        if args.command == "evolve":
            return cmd_evolve(cfg, out_dir, args.plot)
        return cmd_mcwf(cfg, out_dir, args.plot)
    except (ConfigError, InvalidStateError, NonSecularConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NegativeRateError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        print("hint: run the 'evolve' command, which handles negative rates",
              file=sys.stderr)
        return 3
    except (QuadratureError, StepSizeUnderflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
