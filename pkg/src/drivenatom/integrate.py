"""Explicit adaptive Dormand-Prince 5(4) integrator with continuous output.

Fifth-order propagation with the embedded fourth-order error estimate, FSAL
stage reuse, and the standard quartic interpolant for evaluating the solution
at arbitrary points inside each accepted step.  Works on complex state
vectors, which is how density matrices travel through it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepSizeUnderflowError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
# y5 - y4 weights for the local error estimate
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# dense-output weights (Hairer's contd5 coefficients)
_D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXPONENT = -1.0 / 5.0


@dataclass
class IntegrationStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, direction=1.0):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _dense_eval(theta, y_old, h, k, dy):
    """Interpolant on one step: theta in [0, 1], vectorized over theta."""
    r1 = y_old
    r2 = dy
    r3 = h * k[0] - dy
    r4 = dy - h * k[6] - r3
    r5 = h * (k.T @ _D)
    th = np.asarray(theta)[..., None]
    return (r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5))))


def solve_dense(f: Callable[[float, np.ndarray], np.ndarray],
                t_span: tuple[float, float], y0: np.ndarray,
                out_ts: np.ndarray, rtol: float = 1e-9, atol: float = 1e-9,
                max_steps: int = 2_000_000,
                ) -> tuple[np.ndarray, IntegrationStats]:
    """Integrate y' = f(t, y) over t_span and sample at out_ts.

    out_ts must be increasing and lie inside t_span.  Returns the (n_out, dim)
    solution array and the integrator statistics.  Raises
    StepSizeUnderflowError when the controller cannot make progress, which for
    this package signals a pathological rate trace.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError("t_span must have t1 > t0")
    out_ts = np.asarray(out_ts, dtype=float)
    if out_ts.size and (out_ts[0] < t0 - 1e-12 or out_ts[-1] > t1 + 1e-12):
        raise ValueError("output grid must lie within t_span")
    y0 = np.asarray(y0, dtype=complex)

    stats = IntegrationStats()
    out = np.empty((out_ts.size, y0.size), dtype=complex)
    next_out = 0
    while next_out < out_ts.size and out_ts[next_out] <= t0:
        out[next_out] = y0
        next_out += 1

    t, y = t0, y0.copy()
    k = np.empty((7, y0.size), dtype=complex)
    k[0] = f(t, y)
    stats.nfev += 1
    h = _initial_step(f, t, y, k[0], rtol, atol)
    stats.nfev += 1
    h = min(h, t1 - t0)
    h_floor = 16.0 * np.finfo(float).eps * max(abs(t0), abs(t1), 1.0)
    just_rejected = False

    while t < t1:
        if stats.steps + stats.rejected >= max_steps:
            raise StepSizeUnderflowError(
                f"step budget exhausted at t = {t:.6g}", time=t)
        h = min(h, t1 - t)
        if h < h_floor:
            raise StepSizeUnderflowError(
                f"step size underflow at t = {t:.6g} (h = {h:.3e})", time=t)
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A[i])
            k[i] = f(t + _C[i] * h, yi)
        stats.nfev += 6
        err = h * (k.T @ _E)
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        norm = _error_norm(err, y, y_new, rtol, atol)
        if norm > 1.0:
            stats.rejected += 1
            just_rejected = True
            h *= max(_MIN_FACTOR, _SAFETY * norm**_ORDER_EXPONENT)
            continue

        t_new = t + h
        if next_out < out_ts.size:
            hi = np.searchsorted(out_ts, t_new, side="right")
            if hi > next_out:
                theta = (out_ts[next_out:hi] - t) / h
                out[next_out:hi] = _dense_eval(theta, y, h, k, y_new - y)
                next_out = hi
        stats.steps += 1
        k[0] = k[6]  # FSAL
        t, y = t_new, y_new
        max_growth = 1.0 if just_rejected else _MAX_FACTOR
        just_rejected = False
        factor = max_growth if norm == 0.0 else \
            min(max_growth, max(_MIN_FACTOR, _SAFETY * norm**_ORDER_EXPONENT))
        h *= factor

    while next_out < out_ts.size:  # grid points at exactly t1
        out[next_out] = y
        next_out += 1
    return out, stats
