import numpy as np
import pytest

from qdshield import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    PositivityViolationError,
    StateCorruptionError,
    general_eigenvalues,
    hermitian_eigensystem,
    partial_trace,
    su2_exponential,
    tensor_product,
    validate_density_matrix,
)

BELL = np.zeros((4, 4), dtype=complex)
BELL[0, 0] = BELL[0, 3] = BELL[3, 0] = BELL[3, 3] = 0.5


def random_density(rng, dim=4):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


class TestTensorProduct:
    def test_sigma_z_times_identity(self):
        assert np.allclose(tensor_product(SIGMA_Z, IDENTITY_2), np.diag([1, 1, -1, -1]))

    def test_identity_times_sigma_z(self):
        assert np.allclose(tensor_product(IDENTITY_2, SIGMA_Z), np.diag([1, -1, 1, -1]))

    def test_sigma_x_squared(self):
        expected = np.fliplr(np.eye(4))
        assert np.allclose(tensor_product(SIGMA_X, SIGMA_X), expected)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tensor_product(np.eye(4), SIGMA_X)

    def test_partial_trace_consistency(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            a = random_density(rng, 2)
            b = random_density(rng, 2)
            assert np.max(np.abs(partial_trace(np.kron(a, b), "A") - a)) < 1e-12
            assert np.max(np.abs(partial_trace(np.kron(a, b), "B") - b)) < 1e-12


class TestPartialTrace:
    def test_bell_marginal(self):
        assert np.allclose(partial_trace(BELL, "A"), IDENTITY_2 / 2)

    def test_product_state(self):
        rho = np.kron(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])).astype(complex)
        assert np.allclose(partial_trace(rho, "B"), np.diag([0.0, 1.0]))

    def test_maximally_mixed(self):
        assert np.allclose(partial_trace(np.eye(4) / 4, "A"), IDENTITY_2 / 2)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(2), "A")


class TestHermitianEigensystem:
    def test_sigma_z(self):
        vals, _ = hermitian_eigensystem(SIGMA_Z)
        assert np.allclose(vals, [1.0, -1.0])

    def test_maximally_mixed(self):
        vals, _ = hermitian_eigensystem(np.eye(4) / 4)
        assert np.allclose(vals, 0.25)

    def test_bell_projector(self):
        vals, _ = hermitian_eigensystem(BELL)
        assert np.allclose(vals, [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_rejects_non_hermitian(self):
        m = np.eye(4, dtype=complex)
        m[0, 1] = 1e-4
        with pytest.raises(ValueError):
            hermitian_eigensystem(m)

    def test_reconstruction_and_residuals(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = h + h.conj().T
            vals, vecs = hermitian_eigensystem(h)
            assert np.all(np.diff(vals) <= 1e-12)
            rebuilt = (vecs * vals) @ vecs.conj().T
            assert np.max(np.abs(rebuilt - h)) < 1e-9
            for lam, v in zip(vals, vecs.T):
                assert np.linalg.norm(h @ v - lam * v) < 1e-10
            assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(4))) < 1e-10


class TestGeneralEigenvalues:
    def test_diagonal(self):
        vals = sorted(general_eigenvalues(np.diag([1.0, 2, 3, 4])).real)
        assert np.allclose(vals, [1, 2, 3, 4])

    def test_nilpotent_jordan(self):
        m = np.diag(np.ones(3), 1).astype(complex)
        assert np.max(np.abs(general_eigenvalues(m))) < 1e-12

    def test_concurrence_matrix_of_bell_state(self):
        # rho * (sy x sy) * rho^* * (sy x sy) for the Bell projector is the
        # projector itself (rank 1, trace 1), so the spectrum is {1, 0, 0, 0}.
        sysy = np.kron(SIGMA_Y, SIGMA_Y)
        m = BELL @ sysy @ BELL.conj() @ sysy
        vals = np.sort_complex(general_eigenvalues(m))
        assert np.allclose(vals, [0, 0, 0, 1], atol=1e-8)

    def test_agrees_with_hermitian_solver(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = h + h.conj().T
            general = np.sort(general_eigenvalues(h).real)
            hermitian = np.sort(hermitian_eigensystem(h)[0])
            assert np.max(np.abs(general - hermitian)) < 1e-8


class TestSu2Exponential:
    X_AXIS = np.array([1.0, 0.0, 0.0])

    def test_zero_angle(self):
        assert np.allclose(su2_exponential(self.X_AXIS, 0.0), IDENTITY_2)

    def test_spinor_periodicity(self):
        assert np.allclose(su2_exponential(self.X_AXIS, 2 * np.pi), -IDENTITY_2, atol=1e-12)

    def test_pi_rotation(self):
        assert np.allclose(su2_exponential(self.X_AXIS, np.pi), -1j * SIGMA_X, atol=1e-12)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError):
            su2_exponential(np.array([1.0, 1.0, 0.0]), 0.5)

    def test_group_additivity_and_unitarity(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            theta, phi = rng.uniform(-6, 6, size=2)
            prod = su2_exponential(axis, theta) @ su2_exponential(axis, phi)
            assert np.max(np.abs(prod - su2_exponential(axis, theta + phi))) < 1e-10
            u = su2_exponential(axis, theta)
            assert np.max(np.abs(u @ u.conj().T - IDENTITY_2)) < 1e-12


class TestValidateDensityMatrix:
    def test_accepts_maximally_mixed(self):
        out = validate_density_matrix(np.eye(4) / 4)
        assert np.allclose(out, np.eye(4) / 4)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(PositivityViolationError) as err:
            validate_density_matrix(np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex))
        assert err.value.eigenvalue == pytest.approx(-0.5)

    def test_rejects_non_hermitian(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] += 1e-3
        with pytest.raises(StateCorruptionError):
            validate_density_matrix(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(StateCorruptionError):
            validate_density_matrix(np.eye(4, dtype=complex) / 3.9)

    def test_preserves_raw_matrix(self):
        m = np.diag([1.0 + 5e-7, -5e-7, 0.0, 0.0]).astype(complex)
        out = validate_density_matrix(m, tol_neg=1e-6)
        assert out[1, 1] == m[1, 1]  # tiny negativity tolerated, not clamped
