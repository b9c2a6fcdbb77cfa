"""Monte Carlo wave-function unraveling of the secular equation.

Trajectories evolve by first-order jump/no-jump stepping: at each step the
jump probability of channel j is its rate times ||L_j psi||^2 times the step,
capped at 0.1 by deterministic step refinement; otherwise the state drifts
under the non-Hermitian effective Hamiltonian and is renormalized.  Every
trajectory owns a counter-based random stream (Philox keyed by
(master_seed, trajectory index)), so the ensemble is bit-reproducible
regardless of execution order or batching.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidStateError, NegativeRateError, NonSecularConfigError
from .evolve import build_rates_source
from .master import EquationConfig, lamb_shift
from .qubit import ATOMIC, EIGEN, SystemParams, coefficients, eigenbasis_matrix
from .rates import MarkovRates, RatesSource, TraceRates
from .spectral import SpectralDensity

DEFAULT_QUAD_TOL = 1e-8
JUMP_PROBABILITY_CAP = 0.1
_DRAW_CHUNK = 2048

CHANNEL_NAMES = ("sigma_minus", "sigma_plus", "sigma_z")


@dataclass(frozen=True, eq=False)
class EnsembleRecord:
    """Trajectory-ensemble average and its statistics.

    mean_states holds the dressed-basis average of |psi><psi| per output time;
    mean_bloch and se_bloch are the atomic-basis ensemble mean and standard
    error of the Bloch components.
    """

    times: np.ndarray
    mean_states: np.ndarray
    mean_bloch: np.ndarray
    se_bloch: np.ndarray
    n_traj: int
    master_seed: int
    jump_counts: dict[str, int]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.times, self.mean_states, self.mean_bloch, self.se_bloch):
            arr.setflags(write=False)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "mean_x", "mean_y", "mean_z",
                             "se_x", "se_y", "se_z"])
            for i in range(self.times.size):
                row = [self.times[i], *self.mean_bloch[i], *self.se_bloch[i]]
                writer.writerow([f"{v:.17g}" for v in row])


def _trajectory_stream(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based per-trajectory stream: Philox keyed by (seed, index)."""
    key = np.array([master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_nonnegative_rates(source: RatesSource) -> None:
    if isinstance(source, MarkovRates):
        if source.gamma < 0.0:
            raise NegativeRateError(
                f"Markovian decay rate is negative ({source.gamma:.6g}); "
                "reversed-jump (NMQJ) unraveling is out of scope, use the "
                "master-equation evolution instead", time=0.0)
        return
    if isinstance(source, TraceRates):
        gam = source.trace.gamma
        bad = np.nonzero(gam < 0.0)[0]
        if bad.size:
            t_bad = float(source.trace.times[bad[0]])
            raise NegativeRateError(
                f"decay rate goes negative at t = {t_bad:.6g} "
                f"(gamma = {gam[bad[0]]:.6g}); the negative-rate regime needs "
                "reversed quantum jumps (NMQJ), which this package does not "
                "implement; use the master-equation evolution instead",
                time=t_bad)
        return
    raise InvalidStateError("mcwf requires Markov constants or a rate trace")


def mcwf_ensemble(psi0: np.ndarray, params: SystemParams,
                  model: SpectralDensity, config: EquationConfig,
                  t_span: tuple[float, float], out_grid, n_traj: int,
                  master_seed: int, dt: float, *,
                  psi0_basis: str = ATOMIC,
                  quad_tol: float = DEFAULT_QUAD_TOL) -> EnsembleRecord:
    """Unravel the secular equation into n_traj quantum trajectories.

    Requires a secular config and non-negative decay rates over the whole
    window (NegativeRateError otherwise).  The requested dt is an upper bound;
    it is refined deterministically so that total jump probability per step
    stays below 0.1 and the dressed precession is resolved.
    """
    if not config.secular:
        raise NonSecularConfigError(
            "trajectory unraveling applies to the secular equation only; "
            "set secular=true or use the master-equation evolution")
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    t0, t_max = float(t_span[0]), float(t_span[1])
    if t0 != 0.0 or t_max <= 0.0:
        raise ValueError("t_span must be (0, T) with T > 0")
    out_grid = np.asarray(out_grid, dtype=float)
    if out_grid.size == 0 or (out_grid.size > 1 and np.any(np.diff(out_grid) <= 0)):
        raise ValueError("out_grid must be non-empty and strictly increasing")
    if out_grid[0] < 0.0 or out_grid[-1] > t_max * (1 + 1e-12):
        raise ValueError("out_grid must lie within [0, T]")

    psi = np.asarray(psi0, dtype=complex).reshape(2)
    norm = np.linalg.norm(psi)
    if norm <= 1e-12:
        raise InvalidStateError("psi0 must be a non-zero two-component vector")
    psi = psi / norm
    u = eigenbasis_matrix(params)
    if psi0_basis == ATOMIC:
        psi = u.conj().T @ psi
    elif psi0_basis != EIGEN:
        raise InvalidStateError(f"unknown basis tag {psi0_basis!r}")

    source = build_rates_source(model, params, config, t_max, quad_tol)
    _check_nonnegative_rates(source)

    cp, cm, c0 = coefficients(params)
    weights = np.array([cp**2, cm**2, c0**2])
    if isinstance(source, MarkovRates):
        gamma_max = source.gamma
    else:
        gamma_max = float(source.trace.gamma.max(initial=0.0))

    dt_eff = min(dt, 1.0 / (10.0 * params.omega))
    if isinstance(source, TraceRates) and source.trace.times.size > 1:
        dt_eff = min(dt_eff, float(np.diff(source.trace.times).min()))
    total_rate = gamma_max * weights.sum()
    if total_rate > 0.0:
        dt_eff = min(dt_eff, JUMP_PROBABILITY_CAP / total_rate)

    # step plan: each output interval is subdivided uniformly
    targets = out_grid[1:] if out_grid[0] == 0.0 else out_grid
    seg_bounds = np.concatenate([[0.0], targets])
    seg_steps = [max(1, int(np.ceil((b - a) / dt_eff)))
                 for a, b in zip(seg_bounds[:-1], seg_bounds[1:])]
    total_steps = int(sum(seg_steps))

    streams = [_trajectory_stream(master_seed, i) for i in range(n_traj)]
    draws = np.empty((n_traj, 0))
    draw_ptr = 0

    def next_draws() -> np.ndarray:
        nonlocal draws, draw_ptr
        if draw_ptr >= draws.shape[1]:
            width = min(_DRAW_CHUNK, max(1, total_steps))
            draws = np.empty((n_traj, width))
            for i, stream in enumerate(streams):
                draws[i] = stream.random(width)
            draw_ptr = 0
        col = draws[:, draw_ptr]
        draw_ptr += 1
        return col

    n_out = out_grid.size
    mean_states = np.zeros((n_out, 2, 2), dtype=complex)
    sum_b = np.zeros((n_out, 3))
    sum_b2 = np.zeros((n_out, 3))
    jump_counts = np.zeros(3, dtype=np.int64)

    state = np.tile(psi, (n_traj, 1))

    def record(idx: int) -> None:
        mean_states[idx] = np.einsum("ni,nj->ij", state, state.conj()) / n_traj
        at = state @ u.T
        b = np.empty((n_traj, 3))
        cross = at[:, 0] * at[:, 1].conj()
        b[:, 0] = 2.0 * cross.real
        b[:, 1] = -2.0 * cross.imag
        b[:, 2] = np.abs(at[:, 0])**2 - np.abs(at[:, 1])**2
        sum_b[idx] = b.sum(axis=0)
        sum_b2[idx] = (b**2).sum(axis=0)

    out_idx = 0
    if out_grid[0] == 0.0:
        record(0)
        out_idx = 1

    hs_diag = np.array([0.5 * params.omega, -0.5 * params.omega])
    for seg in range(len(seg_steps)):
        a, b = seg_bounds[seg], seg_bounds[seg + 1]
        n_sub = seg_steps[seg]
        h = (b - a) / n_sub
        for k in range(n_sub):
            t_k = a + k * h
            gamma, lam = source.at(t_k)
            chan = weights * gamma
            hl = lamb_shift((gamma, lam), (cp, cm, c0), config)
            u_col = next_draws()

            pop_plus = state[:, 0].real**2 + state[:, 0].imag**2
            pop_minus = state[:, 1].real**2 + state[:, 1].imag**2
            p1 = chan[0] * pop_plus * h
            p2 = p1 + chan[1] * pop_minus * h
            p3 = p2 + chan[2] * h
            c1 = u_col < p1
            c2 = ~c1 & (u_col < p2)
            c3 = ~c1 & ~c2 & (u_col < p3)
            n1, n2, n3 = int(c1.sum()), int(c2.sum()), int(c3.sum())
            jump_counts += (n1, n2, n3)

            if n1 or n2 or n3:
                old_plus = state[:, 0].copy()
                old_minus = state[:, 1].copy()
            # drift everyone, then overwrite the few jumped rows; H_S and
            # every Lamb-shift variant are diagonal in the dressed basis, so
            # the no-jump propagator is a pair of complex phases
            loss = np.array([chan[0] + chan[2], chan[1] + chan[2]])
            phase = np.exp((-1j * (hs_diag + np.diag(hl).real) - 0.5 * loss) * h)
            state *= phase[None, :]
            state /= np.sqrt(state[:, 0].real**2 + state[:, 0].imag**2
                             + state[:, 1].real**2 + state[:, 1].imag**2)[:, None]
            if n1:  # sigma_minus: collapse to |psi_->
                amp = old_plus[c1]
                state[c1, 0] = 0.0
                state[c1, 1] = amp / np.abs(amp)
            if n2:  # sigma_plus: collapse to |psi_+>
                amp = old_minus[c2]
                state[c2, 0] = amp / np.abs(amp)
                state[c2, 1] = 0.0
            if n3:  # sigma_z: flip the coherence sign
                state[c3, 0] = old_plus[c3]
                state[c3, 1] = -old_minus[c3]
        record(out_idx)
        out_idx += 1

    mean_bloch = sum_b / n_traj
    if n_traj > 1:
        var = (sum_b2 - sum_b**2 / n_traj) / (n_traj - 1)
        se_bloch = np.sqrt(np.maximum(var, 0.0) / n_traj)
    else:
        se_bloch = np.zeros_like(sum_b)

    meta = {
        "config": config,
        "dt_requested": dt,
        "dt_effective": dt_eff,
        "total_steps": total_steps,
        "psi0_basis": psi0_basis,
        "eigenbasis_matrix": u,
    }
    return EnsembleRecord(times=out_grid.copy(), mean_states=mean_states,
                          mean_bloch=mean_bloch, se_bloch=se_bloch,
                          n_traj=n_traj, master_seed=master_seed,
                          jump_counts={name: int(c) for name, c
                                       in zip(CHANNEL_NAMES, jump_counts)},
                          meta=meta)
