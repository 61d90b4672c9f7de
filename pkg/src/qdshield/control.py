"""Continuous decoupling drive: schedule, propagator, rotated couplings.

The drive Hamiltonian is n_x * omega * (sigma_x^(1) + sigma_x^(2)) with
omega = 2*pi/t_c, switched on at t_on with its phase reset to zero there.
Conjugating the dephasing coupling gives

    U0^dag(t) sigma_z U0(t) = cos(2*n_x*omega*(t - t_on)) * sigma_z
                            + sin(2*n_x*omega*(t - t_on)) * sigma_y

which is the (c_z, c_y) pair returned by :func:`lambda_coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import IDENTITY_2, SIGMA_Z, su2_exponential, tensor_product

X_AXIS = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class ControlSchedule:
    """Integer amplitude multiplier n_x, period t_c, turn-on time t_on.

    n_x = 0 means the drive is permanently off (unprotected evolution).
    """

    n_x: int
    t_c: float = 1.0
    t_on: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.n_x, (int, np.integer)) and self.n_x >= 0):
            raise ValueError(f"n_x must be a non-negative integer, got {self.n_x!r}")
        if not self.t_c > 0:
            raise ValueError(f"t_c must be positive, got {self.t_c}")
        if self.t_on < 0:
            raise ValueError(f"t_on must be >= 0, got {self.t_on}")

    @classmethod
    def unvalidated(cls, n_x, t_c=1.0, t_on=0.0):
        """Bypass the integer-n_x check (diagnostics of non-decoupling drives)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "n_x", n_x)
        object.__setattr__(obj, "t_c", t_c)
        object.__setattr__(obj, "t_on", t_on)
        return obj

    @property
    def omega(self):
        return 2.0 * math.pi / self.t_c

    @property
    def modulation_frequency(self):
        """Angular frequency 2*n_x*omega of the rotated coupling."""
        return 2.0 * self.n_x * self.omega

    def is_active(self, t):
        return self.n_x != 0 and t >= self.t_on


def lambda_coefficients(t, s: ControlSchedule):
    """(c_z, c_y) with U0^dag sigma_z U0 = c_z*sigma_z + c_y*sigma_y at time t."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if not s.is_active(t):
        return 1.0, 0.0
    phase = s.modulation_frequency * (t - s.t_on)
    return math.cos(phase), math.sin(phase)


def u0_single_qubit(t, s: ControlSchedule):
    """Single-qubit factor of the drive propagator (identity before turn-on)."""
    if not s.is_active(t):
        return IDENTITY_2.copy()
    return su2_exponential(X_AXIS, s.modulation_frequency * (t - s.t_on))


def u0_two_qubit(t, s: ControlSchedule):
    """Two-qubit drive propagator exp(-i H0 (t - t_on)) for t >= t_on."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    u = u0_single_qubit(t, s)
    return tensor_product(u, u)


def decoupling_residual(s: ControlSchedule, quad_points=256):
    """Operator norm of the cycle-averaged transformed coupling.

    Evaluates (1/t_c) * integral_0^{t_c} U0^dag (sigma_z x I) U0 dt by
    composite trapezoid quadrature over one control period with the drive
    counted from phase zero. Exactly zero for every integer n_x >= 1; equal
    to 1 for n_x = 0.
    """
    if quad_points < 64:
        raise ValueError(f"quad_points must be >= 64, got {quad_points}")
    sz1 = tensor_product(SIGMA_Z, IDENTITY_2)
    ts = np.linspace(0.0, s.t_c, quad_points + 1)
    acc = np.zeros((4, 4), dtype=complex)
    weights = np.full(quad_points + 1, 1.0)
    weights[0] = weights[-1] = 0.5
    phase0 = s.t_on  # integrate the active drive over one period from turn-on
    for w, t in zip(weights, ts):
        u = u0_single_qubit(phase0 + t, s)
        u2 = np.kron(u, u)
        acc += w * (u2.conj().T @ sz1 @ u2)
    avg = acc * (s.t_c / quad_points) / s.t_c
    return float(np.linalg.norm(avg, ord=2))
