"""Run configuration: YAML schema, strict validation, and object builders.

A run file is a key tree with typed scalars; unknown keys are rejected so a
typo cannot silently fall back to a default.  All validation errors carry the
offending field path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError
from .master import EquationConfig
from .qubit import ATOMIC, EIGEN, QubitState, SystemParams, make_system
from .spectral import FlatBand, Lorentzian, OhmicFamily, SpectralDensity, Tabulated

NAMED_STATES = ("ground", "excited", "plus_atomic", "psi_plus", "psi_minus")

_SECTION_KEYS = {
    "system": {"omega_a", "omega_l", "rabi"},
    "equation": {"secular", "markov", "lamb_shift"},
    "simulation": {"t_max", "out_points", "ode_tol", "quad_tol"},
    "mcwf": {"n_traj", "master_seed", "dt"},
    "initial_state": {"named", "bloch", "matrix", "basis"},
}
_SPECTRAL_KEYS = {
    "lorentzian": {"center", "width", "strength", "domain_halfwidth"},
    "ohmic": {"coupling", "cutoff", "exponent"},
    "flat": {"level", "omega_min", "omega_max"},
    "tabulated": {"path"},
}
_TOP_KEYS = {"system", "spectral", "equation", "initial_state", "simulation",
             "mcwf", "output"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description, ready for the command implementations."""

    system: dict
    spectral: dict
    equation: dict
    initial_state: dict
    simulation: dict
    mcwf: dict | None
    output: str
    base_dir: Path = field(default_factory=Path)

    def resolved(self) -> dict:
        """Plain dict echo of the configuration with all defaults filled in."""
        out = {
            "system": dict(self.system),
            "spectral": dict(self.spectral),
            "equation": dict(self.equation),
            "initial_state": dict(self.initial_state),
            "simulation": dict(self.simulation),
            "output": self.output,
        }
        if self.mcwf is not None:
            out["mcwf"] = dict(self.mcwf)
        return out


def _require(mapping: dict, key: str, path: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"{path}.{key}", "missing required key")
    return mapping[key]


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _as_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected true/false, got {value!r}")
    return value


def _as_mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed: set, path: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")


def _as_complex(value: Any, path: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a complex entry, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(path, f"cannot parse complex number {value!r}") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_as_float(value[0], path), _as_float(value[1], path))
    raise ConfigError(path, f"expected number, 're+imj' string, or [re, im], got {value!r}")


def load_run_config(path) -> RunConfig:
    """Parse and validate a YAML run file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("config", f"invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "config")

    system = _as_mapping(_require(raw, "system", "config"), "system")
    _reject_unknown(system, _SECTION_KEYS["system"], "system")
    system = {
        "omega_a": _as_float(_require(system, "omega_a", "system"), "system.omega_a"),
        "omega_l": _as_float(_require(system, "omega_l", "system"), "system.omega_l"),
        "rabi": _as_float(_require(system, "rabi", "system"), "system.rabi"),
    }

    spectral = _as_mapping(_require(raw, "spectral", "config"), "spectral")
    kind = _require(spectral, "kind", "spectral")
    if kind not in _SPECTRAL_KEYS:
        raise ConfigError("spectral.kind",
                          f"expected one of {sorted(_SPECTRAL_KEYS)}, got {kind!r}")
    _reject_unknown(spectral, _SPECTRAL_KEYS[kind] | {"kind"}, "spectral")
    spectral = dict(spectral)

    equation = dict(_as_mapping(raw.get("equation", {}), "equation"))
    _reject_unknown(equation, _SECTION_KEYS["equation"], "equation")
    equation.setdefault("secular", False)
    equation.setdefault("markov", False)
    equation.setdefault("lamb_shift", "corrected")
    _as_bool(equation["secular"], "equation.secular")
    _as_bool(equation["markov"], "equation.markov")
    if equation["lamb_shift"] not in ("corrected", "literal", "off"):
        raise ConfigError("equation.lamb_shift",
                          f"expected corrected|literal|off, got {equation['lamb_shift']!r}")

    initial = dict(_as_mapping(_require(raw, "initial_state", "config"), "initial_state"))
    _reject_unknown(initial, _SECTION_KEYS["initial_state"], "initial_state")
    forms = [k for k in ("named", "bloch", "matrix") if k in initial]
    if len(forms) != 1:
        raise ConfigError("initial_state",
                          "provide exactly one of: named, bloch, matrix")
    if "named" in initial:
        if initial["named"] not in NAMED_STATES:
            raise ConfigError("initial_state.named",
                              f"expected one of {NAMED_STATES}, got {initial['named']!r}")
        if "basis" in initial:
            raise ConfigError("initial_state.basis",
                              "named states carry their own basis")
    else:
        initial.setdefault("basis", ATOMIC)
        if initial["basis"] not in (ATOMIC, EIGEN):
            raise ConfigError("initial_state.basis",
                              f"expected atomic|eigen, got {initial['basis']!r}")

    simulation = dict(_as_mapping(_require(raw, "simulation", "config"), "simulation"))
    _reject_unknown(simulation, _SECTION_KEYS["simulation"], "simulation")
    simulation["t_max"] = _as_float(_require(simulation, "t_max", "simulation"),
                                    "simulation.t_max")
    if simulation["t_max"] < 0:
        raise ConfigError("simulation.t_max", "must be non-negative")
    simulation.setdefault("out_points", 201)
    simulation["out_points"] = _as_int(simulation["out_points"], "simulation.out_points")
    if simulation["out_points"] < 1:
        raise ConfigError("simulation.out_points", "must be at least 1")
    simulation.setdefault("ode_tol", 1e-9)
    simulation.setdefault("quad_tol", 1e-8)
    simulation["ode_tol"] = _as_float(simulation["ode_tol"], "simulation.ode_tol")
    simulation["quad_tol"] = _as_float(simulation["quad_tol"], "simulation.quad_tol")
    for key in ("ode_tol", "quad_tol"):
        if simulation[key] <= 0:
            raise ConfigError(f"simulation.{key}", "must be positive")

    mcwf = raw.get("mcwf")
    if mcwf is not None:
        mcwf = dict(_as_mapping(mcwf, "mcwf"))
        _reject_unknown(mcwf, _SECTION_KEYS["mcwf"], "mcwf")
        mcwf["n_traj"] = _as_int(_require(mcwf, "n_traj", "mcwf"), "mcwf.n_traj")
        mcwf["master_seed"] = _as_int(_require(mcwf, "master_seed", "mcwf"),
                                      "mcwf.master_seed")
        mcwf["dt"] = _as_float(_require(mcwf, "dt", "mcwf"), "mcwf.dt")
        if mcwf["n_traj"] < 1:
            raise ConfigError("mcwf.n_traj", "must be at least 1")
        if mcwf["master_seed"] < 0:
            raise ConfigError("mcwf.master_seed", "must be non-negative")
        if mcwf["dt"] <= 0:
            raise ConfigError("mcwf.dt", "must be positive")

    output = raw.get("output", "runs/out")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "expected a non-empty directory path")

    return RunConfig(system=system, spectral=spectral, equation=equation,
                     initial_state=initial, simulation=simulation, mcwf=mcwf,
                     output=output, base_dir=path.parent)


def build_system(cfg: RunConfig) -> SystemParams:
    try:
        return make_system(cfg.system["omega_a"], cfg.system["omega_l"],
                           cfg.system["rabi"])
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from None


def build_model(cfg: RunConfig) -> SpectralDensity:
    section = cfg.spectral
    kind = section["kind"]
    try:
        if kind == "lorentzian":
            return Lorentzian(
                center=_as_float(_require(section, "center", "spectral"), "spectral.center"),
                width=_as_float(_require(section, "width", "spectral"), "spectral.width"),
                strength=_as_float(_require(section, "strength", "spectral"),
                                   "spectral.strength"),
                domain_halfwidth=_as_float(section.get("domain_halfwidth", 40.0),
                                           "spectral.domain_halfwidth"))
        if kind == "ohmic":
            return OhmicFamily(
                coupling=_as_float(_require(section, "coupling", "spectral"),
                                   "spectral.coupling"),
                cutoff=_as_float(_require(section, "cutoff", "spectral"), "spectral.cutoff"),
                exponent=_as_float(section.get("exponent", 1.0), "spectral.exponent"))
        if kind == "flat":
            return FlatBand(
                level=_as_float(_require(section, "level", "spectral"), "spectral.level"),
                omega_min=_as_float(_require(section, "omega_min", "spectral"),
                                    "spectral.omega_min"),
                omega_max=_as_float(_require(section, "omega_max", "spectral"),
                                    "spectral.omega_max"))
        target = Path(_require(section, "path", "spectral"))
        if not target.is_absolute():
            target = cfg.base_dir / target
        if not target.exists():
            raise ConfigError("spectral.path", f"file not found: {target}")
        return Tabulated.from_csv(target)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("spectral", str(exc)) from None


def build_equation(cfg: RunConfig) -> EquationConfig:
    return EquationConfig(secular=cfg.equation["secular"],
                          markov=cfg.equation["markov"],
                          lamb_shift=cfg.equation["lamb_shift"])


def _named_state(name: str, params: SystemParams) -> QubitState:
    if name == "ground":
        return QubitState(np.diag([0.0, 1.0]).astype(complex), ATOMIC)
    if name == "excited":
        return QubitState(np.diag([1.0, 0.0]).astype(complex), ATOMIC)
    if name == "plus_atomic":
        return QubitState(np.full((2, 2), 0.5, dtype=complex), ATOMIC)
    if name == "psi_plus":
        return QubitState(np.diag([1.0, 0.0]).astype(complex), EIGEN)
    return QubitState(np.diag([0.0, 1.0]).astype(complex), EIGEN)


def build_initial_state(cfg: RunConfig, params: SystemParams) -> QubitState:
    section = cfg.initial_state
    try:
        if "named" in section:
            return _named_state(section["named"], params)
        if "bloch" in section:
            vec = section["bloch"]
            if not isinstance(vec, (list, tuple)) or len(vec) != 3:
                raise ConfigError("initial_state.bloch", "expected [x, y, z]")
            x, y, z = (_as_float(v, "initial_state.bloch") for v in vec)
            from .qubit import BlochVector, state_from_bloch
            return state_from_bloch(BlochVector(x, y, z), section["basis"])
        entries = section["matrix"]
        if not isinstance(entries, (list, tuple)) or len(entries) != 4:
            raise ConfigError("initial_state.matrix",
                              "expected 4 entries (row-major rho)")
        vals = [_as_complex(v, "initial_state.matrix") for v in entries]
        mat = np.array(vals, dtype=complex).reshape(2, 2)
        return QubitState(mat, section["basis"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("initial_state", str(exc)) from None


def initial_pure_vector(state: QubitState, tol: float = 1e-9
                        ) -> np.ndarray:
    """Extract the wavefunction of a pure state for trajectory runs.

    The dominant eigenvector is taken with its largest component made real
    and positive so the extraction is deterministic.
    """
    vals, vecs = np.linalg.eigh(state.matrix)
    if vals[0] > tol:
        raise ConfigError("initial_state",
                          f"trajectory runs need a pure state; smallest "
                          f"eigenvalue is {vals[0]:.3e}")
    vec = vecs[:, -1]
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase
