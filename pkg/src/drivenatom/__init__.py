"""Simulation engine for a laser-driven two-level atom in a structured reservoir.

The package computes time-dependent decay and Lamb-shift rates from an
arbitrary spectral density, assembles the corresponding local-in-time master
equation in the dressed basis (with independent secular and Markov switches),
integrates it with a controlled-error Runge-Kutta scheme, and unravels the
secular equation into Monte Carlo wave-function trajectories when the decay
rate stays non-negative.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateSystemError, InvalidStateError,
                     NegativeRateError, NonconvergentTailError,
                     NonSecularConfigError, QuadratureError,
                     StepSizeUnderflowError)
from .qubit import (ATOMIC, EIGEN, BlochVector, QubitState, SystemParams,
                    bloch_vector, change_basis, coefficients, eigenbasis,
                    eigenbasis_matrix, make_system, state_from_bloch)
from .spectral import (FlatBand, Lorentzian, OhmicFamily, SpectralDensity,
                       Tabulated, bath_correlation, bath_correlation_many,
                       correlation_time, spectral_weight)
from .rates import (CallableRates, MarkovRates, QuadratureRates, RatesSource,
                    RateTrace, TraceRates, gamma_xi, markov_rate,
                    precompute_rate_trace, rates, xi_spread)
from .master import (EquationConfig, GeneratorSnapshot, generator_matrix,
                     generator_parts, lamb_shift, master_rhs, unvec, vec)
from .evolve import (TimescaleReport, TrajectoryRecord, evolve_master,
                     timescale_report)
from .mcwf import EnsembleRecord, mcwf_ensemble

__all__ = [
    "ATOMIC", "EIGEN", "BlochVector", "QubitState", "SystemParams",
    "bloch_vector", "change_basis", "coefficients", "eigenbasis",
    "eigenbasis_matrix", "make_system", "state_from_bloch",
    "FlatBand", "Lorentzian", "OhmicFamily", "SpectralDensity", "Tabulated",
    "bath_correlation", "bath_correlation_many", "correlation_time",
    "spectral_weight",
    "CallableRates", "MarkovRates", "QuadratureRates", "RatesSource",
    "RateTrace", "TraceRates", "gamma_xi", "markov_rate",
    "precompute_rate_trace", "rates", "xi_spread",
    "EquationConfig", "GeneratorSnapshot", "generator_matrix",
    "generator_parts", "lamb_shift", "master_rhs", "unvec", "vec",
    "TimescaleReport", "TrajectoryRecord", "evolve_master", "timescale_report",
    "EnsembleRecord", "mcwf_ensemble",
    "ConfigError", "DegenerateSystemError", "InvalidStateError",
    "NegativeRateError", "NonconvergentTailError", "NonSecularConfigError",
    "QuadratureError", "StepSizeUnderflowError",
    "__version__",
]
