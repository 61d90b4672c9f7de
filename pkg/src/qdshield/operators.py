"""Dense complex linear algebra for one- and two-qubit operators.

Everything is a plain complex ``numpy.ndarray`` of shape (2, 2) or (4, 4).
The two-qubit basis ordering is |00>, |01>, |10>, |11> with qubit 1 the left
tensor factor.
"""

from __future__ import annotations

import numpy as np

from .errors import PositivityViolationError, StateCorruptionError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_4 = np.eye(4, dtype=complex)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-6
DEFAULT_NEG_TOL = 1e-6


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise ValueError(f"{name} must be 2x2 or 4x4, got shape {m.shape}")
    return m


def tensor_product(a, b):
    """Kronecker product of two single-qubit operators, |q1 q2> = |q1> x |q2>."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor_product expects two 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace(rho, keep):
    """Reduce a two-qubit operator to the kept qubit ('A' = qubit 1, 'B' = qubit 2)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace expects a 4x4 matrix, got shape {rho.shape}")
    if keep not in ("A", "B"):
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    r = rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def hermiticity_defect(m):
    """Largest entrywise deviation of ``m`` from its conjugate transpose."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigensystem(m, herm_tol=1e-8):
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix.

    Raises
    ------
    ValueError
        If ``m`` deviates from Hermiticity by more than ``herm_tol``.
    """
    m = _as_square(m)
    defect = hermiticity_defect(m)
    if defect > herm_tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {herm_tol:.1e})")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(vals)[::-1]
    return vals[order].astype(float), vecs[:, order]


def general_eigenvalues(m):
    """All four eigenvalues of a (generally non-normal) 4x4 matrix, unordered."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"general_eigenvalues expects a 4x4 matrix, got shape {m.shape}")
    return np.linalg.eigvals(m)


def su2_exponential(axis, angle):
    """The 2x2 unitary exp(-i * angle * (axis . sigma) / 2) for a unit 3-vector axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {axis.shape}")
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"axis must be normalized to 1 within 1e-12, got norm {norm!r}")
    half = 0.5 * angle
    n_dot_sigma = axis[0] * SIGMA_X + axis[1] * SIGMA_Y + axis[2] * SIGMA_Z
    return np.cos(half) * IDENTITY_2 - 1j * np.sin(half) * n_dot_sigma


def validate_density_matrix(m, tol_neg=DEFAULT_NEG_TOL):
    """Check Hermiticity, unit trace, and positivity; return the unmodified matrix.

    Eigenvalues in [-tol_neg, 0) are tolerated (transient Redfield negativity);
    clamping to zero happens only inside entropy evaluations, never here.

    Raises
    ------
    StateCorruptionError
        Hermiticity defect above 1e-10 or |trace - 1| above 1e-6.
    PositivityViolationError
        Smallest eigenvalue below ``-tol_neg`` (the offending value is attached).
    """
    m = _as_square(m, "state")
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_TOL:
        raise StateCorruptionError(f"state is not Hermitian (defect {defect:.3e})")
    trace_err = abs(complex(np.trace(m)) - 1.0)
    if trace_err > TRACE_TOL:
        raise StateCorruptionError(f"state trace deviates from 1 by {trace_err:.3e}")
    smallest = float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))
    if smallest < -tol_neg:
        raise PositivityViolationError(
            f"state eigenvalue {smallest:.3e} below -{tol_neg:.1e}", smallest
        )
    return m


def min_eigenvalue(m):
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    m = np.asarray(m, dtype=complex)
    return float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))
