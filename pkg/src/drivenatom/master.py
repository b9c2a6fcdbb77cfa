"""Assembly of the non-secular TCL master equation in the dressed basis.

Everything here acts on density matrices expressed in the (|psi_+>, |psi_->)
basis.  The full right-hand side consists of the coherent term
-i[H_S + H_L, rho], three dissipators with weights C_+^2, C_-^2, C_0^2 gamma(t)
on the dressed lowering/raising/sigma_z channels, two cross terms, an anomalous
sigma_+ rho sigma_+ + sigma_- rho sigma_- term, and a sigma_x
anticommutator/commutator line; the secular switch keeps only the coherent
term and the three dissipators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .qubit import IDENTITY, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Z, SystemParams, coefficients
from .rates import RatesSource

TRACE_ROW_TOL = 1e-12

LambShiftMode = Literal["corrected", "literal", "off"]


@dataclass(frozen=True)
class EquationConfig:
    """Switches for the equation assembly.

    secular drops the cross, anomalous, and sigma_x lines; markov selects
    constant asymptotic rates instead of gamma(t), lambda(t); lamb_shift picks
    the Lamb-shift Hamiltonian variant ('corrected' zeroes out a nilpotent
    term and an inert identity shift that the 'literal' variant retains).
    """

    secular: bool = False
    markov: bool = False
    lamb_shift: str = "corrected"

    def __post_init__(self):
        if self.lamb_shift not in ("corrected", "literal", "off"):
            raise ValueError(f"unknown lamb_shift mode {self.lamb_shift!r}")


def hamiltonian_eigen(params: SystemParams) -> np.ndarray:
    """System Hamiltonian in its own eigenbasis, (omega/2) sigma_z."""
    return 0.5 * params.omega * SIGMA_Z


def lamb_shift(rate_pair: tuple[float, float], coeffs: tuple[float, float, float],
               config: EquationConfig) -> np.ndarray:
    """Lamb-shift Hamiltonian for the given (gamma, lambda) and (C_+, C_-, C_0)."""
    _, lam = rate_pair
    c_plus, c_minus, c_zero = coeffs
    if config.lamb_shift == "off":
        return np.zeros((2, 2), dtype=complex)
    if config.lamb_shift == "literal":
        return lam * (c_plus**2 * (SIGMA_MINUS @ SIGMA_PLUS)
                      + c_plus**2 * (SIGMA_MINUS @ SIGMA_MINUS)
                      + c_zero**2 * (SIGMA_Z @ SIGMA_Z))
    return lam * (c_plus**2 * (SIGMA_MINUS @ SIGMA_PLUS)
                  + c_minus**2 * (SIGMA_PLUS @ SIGMA_MINUS))


def master_rhs(state_eigen: np.ndarray, t: float, params: SystemParams,
               rates_source: RatesSource, config: EquationConfig) -> np.ndarray:
    """d(rho)/dt for a density matrix given in the dressed basis."""
    rho = np.asarray(state_eigen, dtype=complex)
    gamma, lam = rates_source.at(t)
    cp, cm, c0 = coefficients(params)
    h = hamiltonian_eigen(params) + lamb_shift((gamma, lam), (cp, cm, c0), config)
    out = -1j * (h @ rho - rho @ h)

    sp, sm, sz, sx = SIGMA_PLUS, SIGMA_MINUS, SIGMA_Z, SIGMA_X
    out += cp**2 * gamma * (sm @ rho @ sp - 0.5 * (sp @ sm @ rho + rho @ sp @ sm))
    out += cm**2 * gamma * (sp @ rho @ sm - 0.5 * (sm @ sp @ rho + rho @ sm @ sp))
    out += c0**2 * gamma * (sz @ rho @ sz - rho)
    if config.secular:
        return out

    out += -cm * c0 * gamma * (sp @ rho @ sz + sz @ rho @ sm)
    out += +cp * c0 * gamma * (sm @ rho @ sz + sz @ rho @ sp)
    out += c0**2 * gamma * (sp @ rho @ sp + sm @ rho @ sm)
    out += c0 * (0.5 * gamma * (sx @ rho + rho @ sx)
                 + 1j * lam * (sx @ rho - rho @ sx))
    return out


# --- column-vectorized form ---------------------------------------------------
# vec stacks columns (Fortran order), so vec(A X B) = (B^T kron A) vec(X).

def vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat).reshape(-1, order="F")

def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v).reshape(2, 2, order="F")

def _left(m):
    return np.kron(IDENTITY, m)

def _right(m):
    return np.kron(m.T, IDENTITY)

def _sandwich(a, b):
    """Superoperator of X -> A X B."""
    return np.kron(b.T, a)

def _commutator_super(h):
    return _left(h) - _right(h)

def _dissipator_super(l):
    ll = l.conj().T @ l
    return _sandwich(l, l.conj().T) - 0.5 * (_left(ll) + _right(ll))


def generator_parts(params: SystemParams, config: EquationConfig
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decompose the generator as G(t) = G_h + gamma(t) G_gamma + lambda(t) G_lambda.

    This affine structure holds because every dissipative line is linear in
    gamma and the Lamb shift plus the sigma_x commutator are linear in lambda.
    """
    cp, cm, c0 = coefficients(params)
    sp, sm, sz, sx = SIGMA_PLUS, SIGMA_MINUS, SIGMA_Z, SIGMA_X

    g_h = -1j * _commutator_super(hamiltonian_eigen(params))

    hl_unit = lamb_shift((0.0, 1.0), (cp, cm, c0), config)
    g_lam = -1j * _commutator_super(hl_unit)

    g_gam = (cp**2 * _dissipator_super(sm)
             + cm**2 * _dissipator_super(sp)
             + c0**2 * _dissipator_super(sz))
    if not config.secular:
        g_gam += -cm * c0 * (_sandwich(sp, sz) + _sandwich(sz, sm))
        g_gam += +cp * c0 * (_sandwich(sm, sz) + _sandwich(sz, sp))
        g_gam += c0**2 * (_sandwich(sp, sp) + _sandwich(sm, sm))
        g_gam += 0.5 * c0 * (_left(sx) + _right(sx))
        g_lam = g_lam + 1j * c0 * _commutator_super(sx)
    return g_h, g_gam, g_lam


@dataclass(frozen=True, eq=False)
class GeneratorSnapshot:
    """The 4x4 generator acting on column-vectorized density matrices at one time."""

    time: float
    matrix: np.ndarray
    gamma: float
    lamb: float

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))


def generator_matrix(t: float, params: SystemParams, rates_source: RatesSource,
                     config: EquationConfig) -> GeneratorSnapshot:
    """Vectorized generator at time t (time-independent under markov + secular)."""
    gamma, lam = rates_source.at(t)
    g_h, g_gam, g_lam = generator_parts(params, config)
    matrix = g_h + gamma * g_gam + lam * g_lam
    return GeneratorSnapshot(time=float(t), matrix=matrix,
                             gamma=float(gamma), lamb=float(lam))
