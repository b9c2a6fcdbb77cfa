"""Driven-qubit parameters, Pauli algebra, and the dressed-state eigenbasis.

Conventions used throughout the package: the atomic basis is ordered
(|e>, |g>) with sigma_z |e> = +|e> and sigma_+ = |e><g|.  The dressed basis is
ordered (|psi_+>, |psi_->) with energies +omega/2 and -omega/2 under
H_S = (delta*sigma_z + rabi*sigma_x)/2, where omega = sqrt(delta^2 + rabi^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSystemError, InvalidStateError

ATOMIC = "atomic"
EIGEN = "eigen"

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
for _m in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS):
    _m.setflags(write=False)

# The xi-approximation (one rate for all three dressed sidebands) degrades once
# detuning or drive reach a tenth of the laser frequency.
WEAK_DRIVE_LIMIT = 0.1

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Laser-driven two-level system in the frame rotating at the laser frequency.

    Attributes
    ----------
    omega_a : float
        Atomic transition angular frequency (rad/time).
    omega_l : float
        Laser angular frequency (rad/time).
    delta : float
        Detuning omega_a - omega_l.
    rabi : float
        Rabi frequency, >= 0.
    omega : float
        Dressed energy bias sqrt(delta**2 + rabi**2).
    theta : float
        Mixing angle atan2(delta, rabi), restricted to (-pi/2, pi/2] by rabi >= 0.
    xi_approx_warning : bool
        True when |delta| or rabi reaches 0.1*omega_l, where the single-rate
        sideband approximation starts to degrade.
    """

    omega_a: float
    omega_l: float
    delta: float
    rabi: float
    omega: float
    theta: float
    xi_approx_warning: bool = False


def make_system(omega_a: float, omega_l: float, rabi: float) -> SystemParams:
    """Build SystemParams from the three laboratory inputs.

    Raises DegenerateSystemError when the system is exactly resonant and
    undriven (delta = rabi = 0), which leaves the dressed basis undefined.
    """
    if omega_a <= 0:
        raise ValueError(f"omega_a must be positive, got {omega_a}")
    if omega_l <= 0:
        raise ValueError(f"omega_l must be positive, got {omega_l}")
    if rabi < 0:
        raise ValueError(f"rabi must be non-negative, got {rabi}")
    delta = omega_a - omega_l
    if delta == 0.0 and rabi == 0.0:
        raise DegenerateSystemError(
            "delta = rabi = 0 leaves the dressed splitting zero and the "
            "mixing angle undefined")
    omega = float(np.hypot(delta, rabi))
    theta = float(np.arctan2(delta, rabi))
    warn = abs(delta) >= WEAK_DRIVE_LIMIT * omega_l or rabi >= WEAK_DRIVE_LIMIT * omega_l
    return SystemParams(float(omega_a), float(omega_l), float(delta),
                        float(rabi), omega, theta, warn)


def eigenbasis(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal dressed states (|psi_+>, |psi_->) in atomic coordinates.

    Phase convention: the |e> components of both vectors are real and
    non-negative; the relative sign sits on the |g> component of |psi_->.
    """
    # half-angle form of sqrt((1 +- sin theta)/2), stable near theta = +-pi/2
    half = 0.25 * np.pi - 0.5 * params.theta
    a = np.cos(half)
    b = np.sin(half)
    psi_plus = np.array([a, b], dtype=complex)
    psi_minus = np.array([b, -a], dtype=complex)
    return psi_plus, psi_minus


def eigenbasis_matrix(params: SystemParams) -> np.ndarray:
    """Unitary whose columns are (|psi_+>, |psi_->)."""
    plus, minus = eigenbasis(params)
    return np.column_stack([plus, minus])


def hamiltonian_atomic(params: SystemParams) -> np.ndarray:
    """H_S = (delta*sigma_z + rabi*sigma_x)/2 in the atomic basis."""
    return 0.5 * (params.delta * SIGMA_Z + params.rabi * SIGMA_X)


def coefficients(params: SystemParams) -> tuple[float, float, float]:
    """Dressed coupling weights (C_+, C_-, C_0).

    C_pm = (omega +- delta) / (2 omega) and C_0 = rabi / (2 omega); they obey
    C_+ + C_- = 1 and C_+ C_- = C_0**2.
    """
    om = params.omega
    c_plus = (om + params.delta) / (2.0 * om)
    c_minus = (om - params.delta) / (2.0 * om)
    c_zero = params.rabi / (2.0 * om)
    return c_plus, c_minus, c_zero


@dataclass(frozen=True, eq=False)
class QubitState:
    """A validated 2x2 density matrix tagged with its basis."""

    matrix: np.ndarray
    basis: str = ATOMIC

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (2, 2):
            raise InvalidStateError(f"expected a 2x2 matrix, got shape {mat.shape}")
        if self.basis not in (ATOMIC, EIGEN):
            raise InvalidStateError(f"unknown basis tag {self.basis!r}")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise InvalidStateError(f"matrix is not Hermitian (deviation {herm:.3e})")
        tr_dev = abs(mat.trace() - 1.0)
        if tr_dev > TRACE_TOL:
            raise InvalidStateError(f"trace deviates from 1 by {tr_dev:.3e}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)).min())
        if min_eig < -POSITIVITY_TOL:
            raise InvalidStateError(f"matrix is not positive semidefinite "
                                    f"(min eigenvalue {min_eig:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def _unchecked(cls, matrix: np.ndarray, basis: str) -> "QubitState":
        """Internal constructor for evolution output, which may carry small
        numerical trace/positivity deviations that the diagnostics report."""
        obj = object.__new__(cls)
        mat = np.array(matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(obj, "matrix", mat)
        object.__setattr__(obj, "basis", basis)
        return obj


def change_basis(state: QubitState, params: SystemParams, target: str) -> QubitState:
    """Re-express a state in the atomic or dressed basis (unitary similarity)."""
    if target not in (ATOMIC, EIGEN):
        raise InvalidStateError(f"unknown basis tag {target!r}")
    if state.basis == target:
        return state
    u = eigenbasis_matrix(params)
    if target == EIGEN:
        mat = u.conj().T @ state.matrix @ u
    else:
        mat = u @ state.matrix @ u.conj().T
    return QubitState._unchecked(mat, target)


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector r with rho = (I + r.sigma)/2; |r| <= 1 for physical states."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm_sq = self.x**2 + self.y**2 + self.z**2
        if norm_sq > 1.0 + 1e-9:
            raise InvalidStateError(f"Bloch vector has |r|^2 = {norm_sq:.12f} > 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def bloch_vector(state: QubitState) -> BlochVector:
    """Bloch components of a state, taken in the state's own basis."""
    m = state.matrix
    return BlochVector(
        x=float((m[0, 1] + m[1, 0]).real),
        y=float((1j * (m[0, 1] - m[1, 0])).real),
        z=float((m[0, 0] - m[1, 1]).real),
    )


def state_from_bloch(vec: BlochVector, basis: str = ATOMIC) -> QubitState:
    mat = 0.5 * (IDENTITY + vec.x * SIGMA_X + vec.y * SIGMA_Y + vec.z * SIGMA_Z)
    return QubitState(mat, basis)


def bloch_components(matrix: np.ndarray) -> np.ndarray:
    """Unvalidated Bloch components of a raw 2x2 matrix (for diagnostics)."""
    return np.array([
        (matrix[0, 1] + matrix[1, 0]).real,
        (1j * (matrix[0, 1] - matrix[1, 0])).real,
        (matrix[0, 0] - matrix[1, 1]).real,
    ])
