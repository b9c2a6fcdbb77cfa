import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drivenatom import (ATOMIC, EIGEN, BlochVector, DegenerateSystemError,
                        InvalidStateError, QubitState, bloch_vector,
                        change_basis, coefficients, eigenbasis,
                        eigenbasis_matrix, make_system, state_from_bloch)
from drivenatom.qubit import hamiltonian_atomic

from oracles import random_density_matrix

nonzero_drive = st.tuples(
    st.floats(min_value=1.0, max_value=100.0),      # omega_a
    st.floats(min_value=-0.5, max_value=0.5),       # delta
    st.floats(min_value=1e-6, max_value=5.0),       # rabi
)


def _system_from(omega_a, delta, rabi):
    return make_system(omega_a=omega_a, omega_l=omega_a - delta, rabi=rabi)


class TestMakeSystem:
    def test_resonance(self):
        p = make_system(10.0, 10.0, 0.2)
        assert p.delta == 0.0
        assert p.omega == pytest.approx(0.2, abs=0)
        assert p.theta == 0.0

    def test_three_four_five(self):
        p = make_system(10.3, 10.0, 0.4)
        assert p.omega == pytest.approx(0.5, rel=1e-15)
        assert np.sin(p.theta) == pytest.approx(0.6, rel=1e-14)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSystemError):
            make_system(10.0, 10.0, 0.0)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            make_system(-1.0, 10.0, 0.1)
        with pytest.raises(ValueError):
            make_system(10.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            make_system(10.0, 10.0, -0.1)

    def test_warning_flag(self):
        assert not make_system(10.0, 10.0, 0.4).xi_approx_warning
        assert make_system(10.0, 10.0, 1.0).xi_approx_warning      # rabi = 0.1 omega_l
        assert make_system(11.0, 10.0, 0.4).xi_approx_warning      # |delta| = 0.1 omega_l

    @given(nonzero_drive)
    @settings(max_examples=50, deadline=None)
    def test_dressed_splitting_identity(self, args):
        p = _system_from(*args)
        assert p.omega**2 == pytest.approx(p.delta**2 + p.rabi**2, rel=1e-15)
        assert abs(np.sin(p.theta)) == pytest.approx(abs(p.delta) / p.omega, abs=1e-14)
        assert np.cos(p.theta) == pytest.approx(p.rabi / p.omega, abs=1e-14)
        assert np.cos(p.theta) >= 0.0


class TestEigenbasis:
    def test_resonant_sigma_x_eigenvectors(self):
        p = make_system(10.0, 10.0, 0.5)
        plus, minus = eigenbasis(p)
        s = 1 / np.sqrt(2)
        assert np.allclose(plus, [s, s], atol=1e-15)
        assert np.allclose(np.abs(minus), [s, s], atol=1e-15)
        assert abs(np.vdot(plus, minus)) < 1e-15

    def test_sigma_z_limit(self):
        p = make_system(10.5, 10.0, 1e-9)
        plus, minus = eigenbasis(p)
        assert abs(plus[0]) == pytest.approx(1.0, abs=1e-9)
        assert abs(minus[1]) == pytest.approx(1.0, abs=1e-9)

    def test_against_dense_eigensolver(self):
        p = make_system(10.3, 10.0, 0.4)
        plus, minus = eigenbasis(p)
        h = hamiltonian_atomic(p)
        vals, vecs = np.linalg.eigh(h)
        # eigh sorts ascending, so column 1 belongs to +omega/2
        assert abs(abs(np.vdot(vecs[:, 1], plus)) - 1.0) < 1e-12
        assert abs(abs(np.vdot(vecs[:, 0], minus)) - 1.0) < 1e-12

    @given(nonzero_drive)
    @settings(max_examples=50, deadline=None)
    def test_orthonormal_eigenrelation(self, args):
        p = _system_from(*args)
        plus, minus = eigenbasis(p)
        h = hamiltonian_atomic(p)
        assert abs(np.vdot(plus, minus)) < 1e-12
        assert np.linalg.norm(plus) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(minus) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(h @ plus - (p.omega / 2) * plus) < 1e-12 * max(1, p.omega)
        assert np.linalg.norm(h @ minus + (p.omega / 2) * minus) < 1e-12 * max(1, p.omega)
        # phase convention: excited components real and non-negative
        assert plus[0].real >= 0 and plus[0].imag == 0
        assert minus[0].real >= 0 and minus[0].imag == 0


class TestCoefficients:
    def test_symmetric_point(self):
        c = coefficients(make_system(10.0, 10.0, 0.7))
        assert c == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)

    def test_undriven_limit(self):
        c = coefficients(make_system(10.5, 10.0, 1e-12))
        assert c[0] == pytest.approx(1.0, abs=1e-11)
        assert c[1] == pytest.approx(0.0, abs=1e-11)
        assert c[2] == pytest.approx(0.0, abs=1e-11)

    def test_three_four_five_values(self):
        # omega = 0.5: C+ = 0.8, C- = 0.2, C0 = 0.4
        c = coefficients(make_system(10.3, 10.0, 0.4))
        assert c == pytest.approx((0.8, 0.2, 0.4), rel=1e-14)

    @given(nonzero_drive)
    @settings(max_examples=50, deadline=None)
    def test_identities(self, args):
        cp, cm, c0 = coefficients(_system_from(*args))
        assert cp + cm == pytest.approx(1.0, abs=1e-15)
        assert cp * cm == pytest.approx(c0**2, abs=1e-14)
        assert 0.0 <= cp <= 1.0 and 0.0 <= cm <= 1.0 and 0.0 <= c0 <= 0.5


class TestQubitState:
    def test_validation(self):
        with pytest.raises(InvalidStateError):
            QubitState(np.array([[1.0, 0.1], [0.3, 0.0]]), ATOMIC)  # not hermitian
        with pytest.raises(InvalidStateError):
            QubitState(np.diag([0.6, 0.6]).astype(complex), ATOMIC)  # trace 1.2
        with pytest.raises(InvalidStateError):
            QubitState(np.diag([1.2, -0.2]).astype(complex), ATOMIC)  # negative
        with pytest.raises(InvalidStateError):
            QubitState(np.eye(2) / 2, "dressed")

    def test_matrix_is_frozen(self):
        state = QubitState(np.eye(2, dtype=complex) / 2, ATOMIC)
        with pytest.raises(ValueError):
            state.matrix[0, 0] = 3.0


class TestChangeBasis:
    def test_maximally_mixed_invariant(self, detuned_system):
        state = QubitState(np.eye(2, dtype=complex) / 2, ATOMIC)
        out = change_basis(state, detuned_system, EIGEN)
        assert np.allclose(out.matrix, np.eye(2) / 2, atol=1e-15)

    def test_excited_on_resonance(self):
        p = make_system(10.0, 10.0, 0.3)
        state = QubitState(np.diag([1.0, 0.0]).astype(complex), ATOMIC)
        out = change_basis(state, p, EIGEN)
        assert np.allclose(np.diag(out.matrix).real, [0.5, 0.5], atol=1e-14)
        assert abs(out.matrix[0, 1]) == pytest.approx(0.5, abs=1e-14)

    def test_round_trip_and_spectrum(self, rng, detuned_system):
        for _ in range(25):
            rho = random_density_matrix(rng)
            state = QubitState._unchecked(rho, ATOMIC)
            there = change_basis(state, detuned_system, EIGEN)
            back = change_basis(there, detuned_system, ATOMIC)
            assert np.max(np.abs(back.matrix - rho)) < 1e-13
            assert np.allclose(np.linalg.eigvalsh(there.matrix),
                               np.linalg.eigvalsh(rho), atol=1e-13)
            assert there.matrix.trace() == pytest.approx(1.0, abs=1e-13)

    def test_unitary_columns(self, detuned_system):
        u = eigenbasis_matrix(detuned_system)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)


class TestBloch:
    def test_round_trip(self, rng):
        for _ in range(25):
            rho = random_density_matrix(rng)
            state = QubitState._unchecked(rho, ATOMIC)
            vec = bloch_vector(state)
            back = state_from_bloch(vec, ATOMIC)
            assert np.max(np.abs(back.matrix - rho)) < 1e-14

    def test_poles(self):
        excited = QubitState(np.diag([1.0, 0.0]).astype(complex), ATOMIC)
        assert bloch_vector(excited).z == pytest.approx(1.0)
        ground = QubitState(np.diag([0.0, 1.0]).astype(complex), ATOMIC)
        assert bloch_vector(ground).z == pytest.approx(-1.0)

    def test_norm_validation(self):
        with pytest.raises(InvalidStateError):
            BlochVector(1.0, 0.5, 0.0)
