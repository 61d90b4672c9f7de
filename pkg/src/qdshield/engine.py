"""Interaction-picture master-equation integrator.

The equation of motion is time-local in the state: the memory integral over
t' applies only to the rotated coupling operators, so it collapses into two
scalar kernel moments per control segment,

    K_i(t) = int_0^t D(t - t') Lambda_i(t') dt'
           = k_z(t) * sigma_z^(i) + k_y(t) * sigma_y^(i),

and the whole propagation is a fixed-step RK4 ODE solve with K advanced
incrementally to each stage time. Both qubits see identical baths, so K_1
and K_2 share the same scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad as _scipy_quad

from .bath import BathParams, KernelMoments, advance_moments, kernel_D
from .control import ControlSchedule, lambda_coefficients, u0_two_qubit
from .errors import IntegrationAbortError, InternalConsistencyError
from .operators import (
    IDENTITY_2,
    SIGMA_Y,
    SIGMA_Z,
    hermiticity_defect,
    min_eigenvalue,
    validate_density_matrix,
)

SZ1 = np.kron(SIGMA_Z, IDENTITY_2)
SZ2 = np.kron(IDENTITY_2, SIGMA_Z)
SY1 = np.kron(SIGMA_Y, IDENTITY_2)
SY2 = np.kron(IDENTITY_2, SIGMA_Y)

TRAJECTORY_NEG_TOL = 1e-4


@dataclass(frozen=True)
class SimulationConfig:
    bath: BathParams
    schedule: ControlSchedule
    initial_state: np.ndarray
    t_final: float
    dt: float = 1e-3
    quad_tol: float = 1e-10
    sample_stride: int = 10

    def __post_init__(self):
        state = np.asarray(self.initial_state, dtype=complex)
        if state.shape != (4, 4):
            raise ValueError(f"initial_state must be 4x4, got {state.shape}")
        validate_density_matrix(state)
        object.__setattr__(self, "initial_state", state)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.schedule.n_x >= 1:
            cap = self.schedule.t_c / (40.0 * self.schedule.n_x)
            if self.dt > cap:
                raise ValueError(
                    f"dt = {self.dt} too coarse for n_x = {self.schedule.n_x}; "
                    f"needs dt <= t_c/(40 n_x) = {cap:.3e}"
                )
        if self.t_final < self.dt:
            raise ValueError(f"t_final = {self.t_final} must be >= dt = {self.dt}")
        if self.sample_stride < 1:
            raise ValueError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if not self.quad_tol > 0:
            raise ValueError(f"quad_tol must be positive, got {self.quad_tol}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: interaction- and lab-picture states plus diagnostics."""

    times: np.ndarray
    states_interaction: np.ndarray
    states_schrodinger: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    hermiticity_defect: np.ndarray
    config: SimulationConfig

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class MomentState:
    """Kernel-moment streams backing K_i(t) at the current time ``t``.

    ``plain`` accumulates int_0^t D(u) du (kept whenever the drive is off or
    delayed); once the drive is active, ``seg_mod`` and ``seg_plain`` hold the
    modulated and unmodulated integrals over the active segment. The
    pre-turn-on contribution to K is plain(t) - seg_plain(t~), both advanced
    numerically so finite temperature needs no special casing.
    """

    schedule: ControlSchedule
    bath: BathParams
    quad_tol: float
    t: float
    plain: KernelMoments | None
    seg_mod: KernelMoments | None
    seg_plain: KernelMoments | None

    @classmethod
    def start(cls, schedule: ControlSchedule, bath: BathParams, quad_tol=1e-10):
        driven_from_start = schedule.n_x >= 1 and schedule.t_on == 0.0
        return cls(
            schedule=schedule,
            bath=bath,
            quad_tol=quad_tol,
            t=0.0,
            plain=None if driven_from_start else KernelMoments.start(0.0),
            seg_mod=KernelMoments.start(0.0) if driven_from_start else None,
            seg_plain=None,
        )

    def advance_to(self, t_next):
        """Return a new MomentState advanced to ``t_next`` (>= current t)."""
        if t_next < self.t:
            raise ValueError(f"cannot advance moments backwards: {t_next} < {self.t}")
        if t_next == self.t:
            return self
        s = self.schedule
        state = self
        # Split a leg that crosses the turn-on instant so the modulated
        # streams start exactly at t_on.
        if (
            s.n_x >= 1
            and s.t_on > 0.0
            and state.t < s.t_on <= t_next
        ):
            state = state._advance_leg(s.t_on)
            state = replace(
                state,
                seg_mod=KernelMoments.start(s.t_on),
                seg_plain=KernelMoments.start(s.t_on),
            )
        return state._advance_leg(t_next)

    def _advance_leg(self, t_next):
        if t_next == self.t:
            return self
        plain = self.plain
        if plain is not None:
            plain = advance_moments(plain, t_next, 0.0, self.bath, self.quad_tol)
        seg_mod = self.seg_mod
        if seg_mod is not None:
            seg_mod = advance_moments(
                seg_mod, t_next, self.schedule.modulation_frequency, self.bath, self.quad_tol
            )
        seg_plain = self.seg_plain
        if seg_plain is not None:
            seg_plain = advance_moments(seg_plain, t_next, 0.0, self.bath, self.quad_tol)
        return replace(self, t=t_next, plain=plain, seg_mod=seg_mod, seg_plain=seg_plain)

    def scalars(self):
        """(k_z, k_y) with K_i(t) = k_z * sigma_z^(i) + k_y * sigma_y^(i)."""
        s = self.schedule
        if not s.is_active(self.t) or self.seg_mod is None:
            return self.plain.A, 0j
        phase = s.modulation_frequency * (self.t - s.t_on)
        c, sn = math.cos(phase), math.sin(phase)
        a, b = self.seg_mod.A, self.seg_mod.B
        k_z = c * a + sn * b
        k_y = sn * a - c * b
        if self.seg_plain is not None:
            k_z += self.plain.A - self.seg_plain.A
        return k_z, k_y


def memory_operator(t, qubit, moments: MomentState, s: ControlSchedule):
    """K_i(t) as a 4x4 operator on the given qubit ('A' or 'B')."""
    if abs(moments.t - t) > 1e-12:
        raise InternalConsistencyError(
            f"moments current at t = {moments.t}, requested t = {t}"
        )
    k_z, k_y = moments.scalars()
    if qubit == "A":
        return k_z * SZ1 + k_y * SY1
    if qubit == "B":
        return k_z * SZ2 + k_y * SY2
    raise ValueError(f"qubit must be 'A' or 'B', got {qubit!r}")


def master_rhs(t, rho_i, k_1, k_2, s: ControlSchedule):
    """d(rho_I)/dt = sum_i [Lambda_i, rho K_i] + [K_i^dag rho, Lambda_i]."""
    c_z, c_y = lambda_coefficients(t, s)
    lam1 = c_z * SZ1 + c_y * SY1
    lam2 = c_z * SZ2 + c_y * SY2
    out = np.zeros((4, 4), dtype=complex)
    for lam, k in ((lam1, k_1), (lam2, k_2)):
        rk = rho_i @ k
        out += lam @ rk - rk @ lam
        kr = k.conj().T @ rho_i
        out += kr @ lam - lam @ kr
    return out


def _phase_grids(cfg: SimulationConfig):
    """Step grid split at the turn-on instant so no RK step straddles it."""
    s = cfg.schedule
    if s.n_x >= 1 and 0.0 < s.t_on < cfg.t_final:
        spans = [(0.0, s.t_on), (s.t_on, cfg.t_final)]
    else:
        spans = [(0.0, cfg.t_final)]
    grids = []
    for lo, hi in spans:
        n = max(1, round((hi - lo) / cfg.dt))
        grids.append((lo, hi, n, (hi - lo) / n))
    return grids


def _k_pair(moments: MomentState):
    k_z, k_y = moments.scalars()
    return k_z * SZ1 + k_y * SY1, k_z * SZ2 + k_y * SY2


def evolve(cfg: SimulationConfig) -> Trajectory:
    """Fixed-step RK4 integration of the interaction-picture state.

    Stores every ``sample_stride``-th step (plus the final point), each with
    trace, Hermiticity, and positivity diagnostics; aborts if a stored state
    dips below the Redfield negativity tolerance of 1e-4.
    """
    s = cfg.schedule
    rho = cfg.initial_state.astype(complex).copy()
    moments = MomentState.start(s, cfg.bath, cfg.quad_tol)

    times = []
    states_i = []
    states_s = []
    diag_trace = []
    diag_mineig = []
    diag_herm = []

    def store(t, state):
        tr_err = abs(complex(np.trace(state)) - 1.0)
        herm = hermiticity_defect(state)
        mineig = min_eigenvalue(state)
        if mineig < -TRAJECTORY_NEG_TOL:
            raise IntegrationAbortError(
                f"state eigenvalue {mineig:.3e} at t = {t:.6f} below -1e-4",
                time=t,
                eigenvalue=mineig,
            )
        u0 = u0_two_qubit(t, s)
        times.append(t)
        states_i.append(state.copy())
        states_s.append(u0 @ state @ u0.conj().T)
        diag_trace.append(tr_err)
        diag_mineig.append(mineig)
        diag_herm.append(herm)

    step_index = 0
    store(0.0, rho)
    k_t = _k_pair(moments)
    for lo, hi, n_steps, h in _phase_grids(cfg):
        for k in range(n_steps):
            t0 = lo + k * h
            t_half = t0 + 0.5 * h
            t1 = lo + (k + 1) * h if k + 1 < n_steps else hi
            moments = moments.advance_to(t_half)
            k_half = _k_pair(moments)
            moments = moments.advance_to(t1)
            k_full = _k_pair(moments)

            f1 = master_rhs(t0, rho, k_t[0], k_t[1], s)
            f2 = master_rhs(t_half, rho + 0.5 * h * f1, k_half[0], k_half[1], s)
            f3 = master_rhs(t_half, rho + 0.5 * h * f2, k_half[0], k_half[1], s)
            f4 = master_rhs(t1, rho + h * f3, k_full[0], k_full[1], s)
            rho = rho + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)

            k_t = k_full
            step_index += 1
            is_last = (k + 1 == n_steps) and (hi == cfg.t_final)
            if step_index % cfg.sample_stride == 0 or is_last:
                store(t1, rho)

    return Trajectory(
        times=np.array(times),
        states_interaction=np.array(states_i),
        states_schrodinger=np.array(states_s),
        trace_error=np.array(diag_trace),
        min_eigenvalue=np.array(diag_mineig),
        hermiticity_defect=np.array(diag_herm),
        config=cfg,
    )


def dephasing_oracle_coherence(t, p: BathParams, quad_tol=1e-10):
    """Unprotected single-qubit coherence decay |rho_01(t)| / |rho_01(0)|.

    At beta = inf this is the closed form (1 + wc^2 t^2)^(-2 eta). At finite
    temperature the exponent Gamma(t) = 4 * int_0^t (t-u) Re D(u) du is
    evaluated with scipy's independent quadrature (the double integral of
    Re kappa collapses by swapping the integration order).
    """
    if t == 0:
        return 1.0
    if math.isinf(p.beta):
        return float((1.0 + (p.omega_c * t) ** 2) ** (-2.0 * p.eta))
    integrand = lambda u: (t - u) * kernel_D(u, p).real
    gamma, _ = _scipy_quad(integrand, 0.0, t, epsabs=quad_tol, epsrel=1e-12, limit=400)
    return float(math.exp(-4.0 * gamma))
