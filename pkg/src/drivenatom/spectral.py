"""Reservoir spectral densities and the zero-temperature bath correlation function.

The correlation function is the Fourier transform of the spectral density,

    f(tau) = integral over the support of J(omega) * exp(-i omega tau),

computed by adaptive Gauss-Kronrod panels whose width is capped at a fraction
of the oscillation period 2*pi/|tau|.  Together with the rate-integral phase
exp(i (omega_l + xi*omega) tau) this convention makes a Lorentzian resonant
with the laser produce the decay rate gamma(t) = strength * (1 - exp(-width*t)).
"""

from __future__ import annotations

import abc
import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import QuadratureError
from .quadrature import OSCILLATION_FRACTION, panel_edges, panel_nodes, _WGK, _WG

DEFAULT_QUAD_TOL = 1e-8

# Exp-matrix chunking budget (complex elements) for the Fourier sums.
_CHUNK_BUDGET = 6_000_000
_MAX_PANELS = 2_000_000


class SpectralDensity(abc.ABC):
    """A reservoir description J(omega) >= 0 on a declared support interval."""

    @abc.abstractmethod
    def evaluate(self, omega) -> np.ndarray:
        """J(omega), vectorized; exactly zero outside the declared support."""

    @property
    @abc.abstractmethod
    def support(self) -> tuple[float, float]:
        """Interval outside which J is treated as zero."""

    def panel_seeds(self) -> np.ndarray:
        """Interior frequencies that initial quadrature panels should respect."""
        return np.array([])

    @abc.abstractmethod
    def bandwidth_hint(self) -> float:
        """Rough spectral width; sets scan scales, never accuracy."""

    @abc.abstractmethod
    def centroid_hint(self) -> float:
        """Rough location of the spectral weight; seeds oscillation caps."""


@dataclass(frozen=True)
class Lorentzian(SpectralDensity):
    """J(omega) = (strength/2pi) * width^2 / ((omega-center)^2 + width^2).

    The quadrature domain is center +- domain_halfwidth*width; the mass left
    outside is (2/pi)*arctan(1/domain_halfwidth) of the total strength*width/2,
    about 1.6e-2 at the default of 40, so raise domain_halfwidth when rates are
    needed to better than ~strength/(pi*domain_halfwidth**2).
    """

    center: float
    width: float
    strength: float
    domain_halfwidth: float = 40.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"width must be positive, got {self.width}")
        if self.strength <= 0:
            raise ValueError(f"strength must be positive, got {self.strength}")
        if self.domain_halfwidth <= 1:
            raise ValueError("domain_halfwidth must exceed 1")

    def evaluate(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        lo, hi = self.support
        peak = self.strength / (2.0 * np.pi)
        j = peak * self.width**2 / ((omega - self.center) ** 2 + self.width**2)
        return np.where((omega >= lo) & (omega <= hi), j, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        half = self.domain_halfwidth * self.width
        return (self.center - half, self.center + half)

    def panel_seeds(self) -> np.ndarray:
        steps = 2.0 ** np.arange(-1, int(np.ceil(np.log2(self.domain_halfwidth))) + 1)
        offsets = np.concatenate([-steps[::-1], [0.0], steps]) * self.width
        return self.center + offsets

    def bandwidth_hint(self) -> float:
        return self.width

    def centroid_hint(self) -> float:
        return self.center


@dataclass(frozen=True)
class OhmicFamily(SpectralDensity):
    """J(omega) = coupling * cutoff^(1-s) * omega^s * exp(-omega/cutoff), omega > 0.

    exponent s = 1 is Ohmic, s < 1 sub-Ohmic, s > 1 super-Ohmic.
    """

    coupling: float
    cutoff: float
    exponent: float = 1.0

    def __post_init__(self):
        if self.coupling <= 0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.exponent <= 0:
            raise ValueError(f"exponent must be positive, got {self.exponent}")

    def evaluate(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        lo, hi = self.support
        inside = (omega > lo) & (omega <= hi)
        x = np.where(inside, omega, 1.0)
        j = self.coupling * self.cutoff ** (1.0 - self.exponent) \
            * x**self.exponent * np.exp(-x / self.cutoff)
        return np.where(inside, j, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        # exp(-50) ~ 2e-22 leaves nothing measurable beyond the upper edge
        return (0.0, self.cutoff * (50.0 + 10.0 * self.exponent))

    def panel_seeds(self) -> np.ndarray:
        scale = self.cutoff * max(1.0, self.exponent)
        return scale * np.array([0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0,
                                 8.0, 16.0, 32.0])

    def bandwidth_hint(self) -> float:
        return self.cutoff * (1.0 + self.exponent)

    def centroid_hint(self) -> float:
        return self.cutoff * (1.0 + self.exponent)


@dataclass(frozen=True)
class FlatBand(SpectralDensity):
    """Constant J(omega) = level on [omega_min, omega_max], zero elsewhere."""

    level: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be non-negative, got {self.level}")
        if not self.omega_min < self.omega_max:
            raise ValueError("omega_min must be below omega_max")

    def evaluate(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        inside = (omega >= self.omega_min) & (omega <= self.omega_max)
        return np.where(inside, self.level, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        return (self.omega_min, self.omega_max)

    def bandwidth_hint(self) -> float:
        return self.omega_max - self.omega_min

    def centroid_hint(self) -> float:
        return 0.5 * (self.omega_min + self.omega_max)


class Tabulated(SpectralDensity):
    """Sampled spectral density with linear interpolation, zero outside the grid."""

    def __init__(self, omegas, values):
        omegas = np.asarray(omegas, dtype=float)
        values = np.asarray(values, dtype=float)
        if omegas.ndim != 1 or omegas.size < 2:
            raise ValueError("need at least two (omega, J) samples")
        if omegas.shape != values.shape:
            raise ValueError("omega and J arrays must have the same length")
        if not np.all(np.diff(omegas) > 0):
            raise ValueError("omega grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("J samples must be non-negative")
        omegas.setflags(write=False)
        values.setflags(write=False)
        self.omegas = omegas
        self.values = values

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Load a two-column CSV with header ``omega,J``."""
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty spectral density file") from None
            if [h.strip() for h in header] != ["omega", "J"]:
                raise ValueError(f"{path}: expected header 'omega,J', got {header}")
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        if not rows:
            raise ValueError(f"{path}: no data rows")
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1])

    def evaluate(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        j = np.interp(omega, self.omegas, self.values, left=0.0, right=0.0)
        inside = (omega >= self.omegas[0]) & (omega <= self.omegas[-1])
        return np.where(inside, j, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        return (float(self.omegas[0]), float(self.omegas[-1]))

    def panel_seeds(self) -> np.ndarray:
        # kinks of the linear interpolant must coincide with panel edges
        return self.omegas[1:-1]

    def bandwidth_hint(self) -> float:
        return float(self.omegas[-1] - self.omegas[0])

    def centroid_hint(self) -> float:
        mass = np.trapezoid(self.values, self.omegas)
        if mass <= 0:
            return float(0.5 * (self.omegas[0] + self.omegas[-1]))
        return float(np.trapezoid(self.omegas * self.values, self.omegas) / mass)


def _fourier_bin(model: SpectralDensity, taus: np.ndarray, tol: float,
                 max_sweeps: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """f(tau) for one group of taus of comparable magnitude."""
    lo, hi = model.support
    span = hi - lo
    tau_scale = float(np.max(np.abs(taus)))
    cap = np.inf if tau_scale == 0 else OSCILLATION_FRACTION * 2.0 * np.pi / tau_scale
    edges = panel_edges(lo, hi, min(cap, span), include=model.panel_seeds())

    for _ in range(max_sweeps):
        n_panels = edges.size - 1
        if n_panels > _MAX_PANELS:
            raise QuadratureError(
                f"bath correlation panel budget exceeded ({n_panels} panels)")
        nodes, halfw = panel_nodes(edges)
        jv = model.evaluate(nodes.reshape(-1)).reshape(nodes.shape)
        w15 = halfw[:, None] * _WGK[None, :] * jv
        w7 = halfw[:, None] * _WG[None, :] * jv[:, 1::2]
        flat_nodes = nodes.reshape(-1)

        values = np.zeros(taus.size, dtype=complex)
        errors = np.zeros(taus.size)
        panel_worst = np.zeros(n_panels)
        chunk = max(1, min(taus.size, _CHUNK_BUDGET // max(1, flat_nodes.size)))
        for start in range(0, taus.size, chunk):
            tc = slice(start, min(start + chunk, taus.size))
            phases = np.exp(-1j * flat_nodes[:, None] * taus[tc][None, :])
            phases = phases.reshape(n_panels, 15, -1)
            c15 = np.einsum("pk,pkc->pc", w15, phases)
            c7 = np.einsum("pk,pkc->pc", w7, phases[:, 1::2, :])
            d = np.abs(c15 - c7)
            values[tc] = c15.sum(axis=0)
            errors[tc] = d.sum(axis=0)
            panel_worst = np.maximum(panel_worst, d.max(axis=1))

        worst = float(errors.max())
        if worst <= tol:
            return values, errors
        budget = 0.5 * tol * (2.0 * halfw / span)
        flagged = panel_worst > budget
        if not flagged.any():
            flagged[np.argmax(panel_worst)] = True
        mids = 0.5 * (edges[:-1][flagged] + edges[1:][flagged])
        edges = np.unique(np.concatenate([edges, mids]))

    raise QuadratureError(
        f"bath correlation quadrature did not converge "
        f"(estimate {worst:.3e} > tol {tol:.3e})", estimate=worst)


def bath_correlation_many(model: SpectralDensity, taus, tol: float = DEFAULT_QUAD_TOL
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized f(tau) over an array of lags.

    Returns (values, per-tau absolute error estimates).  Lags are grouped by
    magnitude so that the oscillation cap, which scales like 1/|tau|, is not
    dictated by the largest lag for all of them.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    values = np.zeros(taus.size, dtype=complex)
    errors = np.zeros(taus.size)
    if taus.size == 0:
        return values, errors
    mags = np.abs(taus)
    top = mags.max()
    if top == 0.0:
        values[:], errors[:] = _fourier_bin(model, np.array([0.0]), tol)
        return values, errors
    floor = top * 2.0**-13
    level = np.zeros(taus.size, dtype=int)
    nz = mags > floor
    level[nz] = np.clip(np.floor(np.log2(top / mags[nz])).astype(int), 0, 12)
    level[~nz] = 13
    for k in np.unique(level):
        idx = np.nonzero(level == k)[0]
        values[idx], errors[idx] = _fourier_bin(model, taus[idx], tol)
    return values, errors


def bath_correlation(model: SpectralDensity, tau: float,
                     tol: float = DEFAULT_QUAD_TOL) -> complex:
    """Zero-temperature bath correlation f(tau) to absolute tolerance tol.

    Raises QuadratureError (carrying the achieved estimate) on nonconvergence.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vals, _ = bath_correlation_many(model, [tau], tol)
    return complex(vals[0])


def spectral_weight(model: SpectralDensity, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Total integral of J over its support, i.e. f(0)."""
    return bath_correlation(model, 0.0, tol).real


def correlation_time(model: SpectralDensity, tol: float = DEFAULT_QUAD_TOL,
                     scan_decades: float = 4.5) -> float:
    """First lag where |f(tau)| drops below f(0)/e (grid scan plus bisection).

    Returns inf when f vanishes identically or never decays that far within
    the scanned window of ~300 inverse bandwidths.
    """
    try:
        return _correlation_time_cached(model, float(tol), float(scan_decades))
    except TypeError:  # unhashable model
        return _correlation_time_impl(model, tol, scan_decades)


def _correlation_time_impl(model, tol, scan_decades):
    f0 = abs(bath_correlation(model, 0.0, tol))
    if f0 <= 0.0:
        return np.inf
    target = f0 / np.e
    scan_tol = min(tol, 1e-6 * f0)
    bw = model.bandwidth_hint()
    taus = np.geomspace(1e-2 / bw, 1e-2 / bw * 10.0**scan_decades, 161)
    # scan in blocks of rising lag so an early crossing skips the big lags
    lo, hi = None, None
    prev_tau = 0.0
    for block in np.array_split(taus, 16):
        vals, _ = bath_correlation_many(model, block, scan_tol)
        below = np.abs(vals) < target
        if below.any():
            k = int(np.argmax(below))
            lo = prev_tau if k == 0 else block[k - 1]
            hi = block[k]
            break
        prev_tau = block[-1]
    if hi is None:
        return np.inf
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = abs(bath_correlation(model, mid, scan_tol))
        if fm < target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=256)
def _correlation_time_cached(model, tol, scan_decades):
    return _correlation_time_impl(model, tol, scan_decades)
