"""Two-qubit correlation measures: superfidelity, concurrence, quantum discord.

Discord conventions: entropies are in bits (log base 2), the measurement is a
rank-1 projective measurement on qubit B parametrized by Bloch angles, and
the classical correlation maximizes S_A minus the average conditional entropy
of A given the B outcome. Projective measurements are optimal for the
Bell-diagonal and X-structured states this package produces; general POVMs
are not searched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NumericalFailureError, PositivityViolationError
from .operators import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    general_eigenvalues,
    partial_trace,
)

_LN2 = math.log(2.0)
_PAULI_STACK = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
_SYSY = np.kron(SIGMA_Y, SIGMA_Y).real.astype(float)

# Bell-basis correlation vectors (phi+, phi-, psi+, psi-).
_BELL_C_VECTORS = np.array(
    [[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]], dtype=float
)


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective basis on the Bloch sphere: polar angle theta, azimuth phi."""

    theta: float
    phi: float

    def bloch_vector(self):
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def projectors(self):
        n_dot_sigma = np.einsum("a,aij->ij", self.bloch_vector(), _PAULI_STACK)
        plus = 0.5 * (IDENTITY_2 + n_dot_sigma)
        return plus, IDENTITY_2 - plus


@dataclass(frozen=True)
class OptimizerSettings:
    theta_points: int = 32
    phi_points: int = 64
    refine: bool = True
    value_tol: float = 1e-10
    max_iterations: int = 200


@dataclass(frozen=True)
class DiscordResult:
    discord: float
    classical_correlation: float
    mutual_information: float
    optimal_basis: MeasurementBasis


_DEFAULT_OPT = OptimizerSettings()
_GRID_CACHE = {}


def _xlogx(x):
    """x * ln(x) with the 0*log(0) = 0 convention; negatives clamp to 0."""
    x = np.maximum(x, 0.0)
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(x[nz])
    return out


def _clamped_eigs(vals, tol_neg):
    vals = np.real(vals)
    worst = float(np.min(vals))
    if worst < -tol_neg:
        raise PositivityViolationError(
            f"eigenvalue {worst:.3e} below -{tol_neg:.1e} in entropy", worst
        )
    return np.maximum(vals, 0.0)


def von_neumann_entropy(rho, tol_neg=1e-6):
    """Entropy -sum(lam * log2 lam) in bits; eigenvalues in [-tol_neg, 0) clamp to 0."""
    rho = np.asarray(rho, dtype=complex)
    vals = _clamped_eigs(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)), tol_neg)
    return float(-np.sum(_xlogx(vals)) / _LN2)


def superfidelity(rho, sigma):
    """Tr(rho sigma) + sqrt(1 - Tr rho^2) * sqrt(1 - Tr sigma^2)."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    overlap = float(np.real(np.trace(rho @ sigma)))
    radicands = []
    for m in (rho, sigma):
        r = 1.0 - float(np.real(np.trace(m @ m)))
        if r < -1e-12:
            raise ValueError(f"purity exceeds 1 by {-r:.3e}; not a state")
        radicands.append(max(r, 0.0))
    return overlap + math.sqrt(radicands[0]) * math.sqrt(radicands[1])


def concurrence(rho):
    """Wootters concurrence from the spin-flipped matrix spectrum."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence expects a 4x4 state, got {rho.shape}")
    m = rho @ _SYSY @ rho.conj() @ _SYSY
    vals = general_eigenvalues(m)
    scale = max(1.0, float(np.max(np.abs(vals))))
    worst_imag = float(np.max(np.abs(vals.imag)))
    if worst_imag > 1e-8 * scale:
        raise NumericalFailureError(
            f"concurrence spectrum has imaginary part {worst_imag:.3e}",
            achieved=worst_imag,
        )
    roots = np.sqrt(np.maximum(vals.real, 0.0))
    roots.sort()
    return float(max(0.0, roots[3] - roots[2] - roots[1] - roots[0]))


def mutual_information(rho, tol_neg=1e-6):
    """S(rho_A) + S(rho_B) - S(rho_AB), clamped at 0 within -1e-9."""
    rho = np.asarray(rho, dtype=complex)
    s_a = von_neumann_entropy(partial_trace(rho, "A"), tol_neg)
    s_b = von_neumann_entropy(partial_trace(rho, "B"), tol_neg)
    s_ab = von_neumann_entropy(rho, tol_neg)
    info = s_a + s_b - s_ab
    if info < -1e-9:
        raise NumericalFailureError(f"mutual information {info:.3e} < -1e-9", achieved=info)
    return max(info, 0.0)


def _basis_grid(settings: OptimizerSettings):
    key = (settings.theta_points, settings.phi_points)
    cached = _GRID_CACHE.get(key)
    if cached is None:
        thetas = np.linspace(0.0, math.pi, settings.theta_points)
        phis = np.linspace(0.0, 2.0 * math.pi, settings.phi_points, endpoint=False)
        tt, pp = np.meshgrid(thetas, phis, indexing="ij")
        tt, pp = tt.ravel(), pp.ravel()
        st = np.sin(tt)
        directions = np.column_stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)])
        cached = (tt, pp, directions)
        _GRID_CACHE[key] = cached
    return cached


def _conditional_entropy_terms(rho_a, r_stack, directions):
    """Average conditional entropy of A for B-measurements along ``directions``.

    ``r_stack[alpha]`` is the 2x2 block Tr_B[rho (I x sigma_alpha)]; the
    unnormalized post-measurement states are (rho_A +/- n.r_stack)/2 and all
    entropies come from the closed-form 2x2 spectrum.
    """
    r00 = np.real(directions @ r_stack[:, 0, 0])
    r11 = np.real(directions @ r_stack[:, 1, 1])
    r01 = directions @ r_stack[:, 0, 1]
    a00, a11 = rho_a[0, 0].real, rho_a[1, 1].real
    a01 = rho_a[0, 1]
    total = np.zeros(len(directions))
    for sign in (+1.0, -1.0):
        u00 = 0.5 * (a00 + sign * r00)
        u11 = 0.5 * (a11 + sign * r11)
        u01 = 0.5 * (a01 + sign * r01)
        p = u00 + u11
        det = u00 * u11 - (u01.real**2 + u01.imag**2)
        s = np.sqrt(np.maximum(0.25 * p * p - det, 0.0))
        lam_hi = np.maximum(0.5 * p + s, 0.0)
        lam_lo = np.maximum(0.5 * p - s, 0.0)
        # p * S(u/p) = -(sum xlogx(lam) - xlogx(p)) / ln 2, and outcomes with
        # p below 1e-14 contribute nothing (removable singularity).
        term = -(_xlogx(lam_hi) + _xlogx(lam_lo) - _xlogx(p)) / _LN2
        term[p < 1e-14] = 0.0
        total += term
    return total


def _scalar_xlogx(x):
    return x * math.log(x) if x > 0.0 else 0.0


def _conditional_entropy_single(rho_a, r_stack, theta, phi):
    """Scalar twin of :func:`_conditional_entropy_terms` for the refiner."""
    st = math.sin(theta)
    n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
    r00 = sum(n[a] * r_stack[a, 0, 0].real for a in range(3))
    r11 = sum(n[a] * r_stack[a, 1, 1].real for a in range(3))
    r01 = sum(n[a] * r_stack[a, 0, 1] for a in range(3))
    a00, a11 = rho_a[0, 0].real, rho_a[1, 1].real
    a01 = complex(rho_a[0, 1])
    total = 0.0
    for sign in (1.0, -1.0):
        u00 = 0.5 * (a00 + sign * r00)
        u11 = 0.5 * (a11 + sign * r11)
        u01 = 0.5 * (a01 + sign * r01)
        p = u00 + u11
        if p < 1e-14:
            continue
        det = u00 * u11 - (u01.real**2 + u01.imag**2)
        s = math.sqrt(max(0.25 * p * p - det, 0.0))
        lam_hi = max(0.5 * p + s, 0.0)
        lam_lo = max(0.5 * p - s, 0.0)
        total -= (_scalar_xlogx(lam_hi) + _scalar_xlogx(lam_lo) - _scalar_xlogx(p)) / _LN2
    return total


def _measurement_blocks(rho):
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    rho_a = np.einsum("ijkj->ik", r)
    r_stack = np.einsum("ijkl,alj->aik", r, _PAULI_STACK)
    return rho_a, r_stack


def _canonical_angles(theta, phi):
    theta = theta % (2.0 * math.pi)
    if theta > math.pi:
        theta = 2.0 * math.pi - theta
        phi = phi + math.pi
    return theta, phi % (2.0 * math.pi)


def classical_correlation(rho, settings: OptimizerSettings = None, tol_neg=1e-6):
    """Maximal classical correlation J = max_basis [S_A - sum_k p_k S(rho_A|k)].

    The measurement acts on qubit B. A coarse theta x phi grid locates the
    basin; a Nelder-Mead simplex started from the best three grid points
    refines it. Returns (value, optimal MeasurementBasis).
    """
    if settings is None:
        settings = _DEFAULT_OPT
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"classical_correlation expects a 4x4 state, got {rho.shape}")
    rho_a, r_stack = _measurement_blocks(rho)
    s_a = von_neumann_entropy(rho_a, tol_neg)

    tt, pp, directions = _basis_grid(settings)
    cond = _conditional_entropy_terms(rho_a, r_stack, directions)
    order = np.argsort(cond)
    best = order[0]
    best_cond = float(cond[best])
    best_angles = (float(tt[best]), float(pp[best]))

    if settings.refine:

        def objective(x):
            return _conditional_entropy_single(rho_a, r_stack, x[0], x[1])

        simplex = np.array([[tt[i], pp[i]] for i in order[:3]])
        spread = math.pi / (2 * settings.theta_points)
        area = abs(
            (simplex[1, 0] - simplex[0, 0]) * (simplex[2, 1] - simplex[0, 1])
            - (simplex[2, 0] - simplex[0, 0]) * (simplex[1, 1] - simplex[0, 1])
        )
        if area < 1e-12:
            simplex = np.array(
                [
                    simplex[0],
                    simplex[0] + np.array([spread, 0.0]),
                    simplex[0] + np.array([0.0, 2 * spread]),
                ]
            )
        result = minimize(
            objective,
            simplex[0],
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": 1e-9,
                "fatol": settings.value_tol,
                "maxiter": settings.max_iterations,
                "maxfev": 4 * settings.max_iterations,
            },
        )
        if not math.isfinite(result.fun):
            raise NumericalFailureError(
                "simplex refinement diverged", achieved=s_a - best_cond
            )
        if result.fun < best_cond:
            best_cond = float(result.fun)
            best_angles = (float(result.x[0]), float(result.x[1]))

    theta, phi = _canonical_angles(*best_angles)
    return max(s_a - best_cond, 0.0), MeasurementBasis(theta, phi)


def quantum_discord(rho, settings: OptimizerSettings = None, tol_neg=1e-6):
    """Quantum discord I_AB - J_AB with the optimizing measurement basis."""
    rho = np.asarray(rho, dtype=complex)
    info = mutual_information(rho, tol_neg)
    classical, basis = classical_correlation(rho, settings, tol_neg)
    discord = info - classical
    if discord < -1e-8:
        raise NumericalFailureError(
            f"discord {discord:.3e} below -1e-8; optimizer overshoot", achieved=discord
        )
    if discord < 0.0:
        discord, classical = 0.0, info
    return DiscordResult(
        discord=discord,
        classical_correlation=classical,
        mutual_information=info,
        optimal_basis=basis,
    )


def bell_diagonal_state(c1, c2, c3):
    """Two-qubit state with Bell-basis weights set by the correlation vector."""
    weights = 0.25 * (1.0 + _BELL_C_VECTORS @ np.array([c1, c2, c3]))
    if np.min(weights) < -1e-12:
        raise ValueError(
            f"correlation vector ({c1}, {c2}, {c3}) gives negative weight "
            f"{float(np.min(weights)):.3e}"
        )
    rho = 0.25 * np.eye(4, dtype=complex)
    paulis = (np.kron(SIGMA_X, SIGMA_X), np.kron(SIGMA_Y, SIGMA_Y), np.kron(SIGMA_Z, SIGMA_Z))
    for c, pp in zip((c1, c2, c3), paulis):
        rho += 0.25 * c * pp
    return rho


def correlation_vector(rho):
    """Diagonal correlation components (<sx sx>, <sy sy>, <sz sz>)."""
    rho = np.asarray(rho, dtype=complex)
    out = []
    for sig in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        out.append(float(np.real(np.trace(rho @ np.kron(sig, sig)))))
    return np.array(out)


def bell_diagonal_discord_oracle(c1, c2, c3):
    """Closed-form discord of a Bell-diagonal state.

    With weights lam over the Bell basis and chi = max |c_i|:
    I = 2 + sum lam log2 lam, J = sum_{s=+-} (1+s*chi)/2 * log2(1+s*chi).
    """
    weights = 0.25 * (1.0 + _BELL_C_VECTORS @ np.array([c1, c2, c3], dtype=float))
    if np.min(weights) < -1e-12:
        raise ValueError(f"invalid correlation vector ({c1}, {c2}, {c3})")
    weights = np.maximum(weights, 0.0)
    info = 2.0 + float(np.sum(_xlogx(weights)) / _LN2)
    chi = max(abs(c1), abs(c2), abs(c3))
    classical = float(
        (_xlogx(np.array([1.0 + chi])) + _xlogx(np.array([1.0 - chi])))[0] / (2.0 * _LN2)
    )
    return max(info - classical, 0.0)
