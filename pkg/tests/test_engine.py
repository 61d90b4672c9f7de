import math

import numpy as np
import pytest
from scipy.integrate import quad

import qdshield.engine as engine_module
from qdshield import (
    BathParams,
    ControlSchedule,
    InternalConsistencyError,
    MomentState,
    SimulationConfig,
    Trajectory,
    build_initial_state,
    concurrence,
    dephasing_oracle_coherence,
    evolve,
    kernel_D,
    master_rhs,
    memory_operator,
    partial_trace,
    quantum_discord,
)
from qdshield.engine import SY1, SZ1, SZ2
from qdshield.errors import IntegrationAbortError

ETA = 1.0 / 16.0
WC = 2.0 * math.pi
VACUUM = BathParams(eta=ETA, omega_c=WC, beta=math.inf)
BELL = build_initial_state("bell_phi_plus")
PLUS_PLUS = np.full((4, 4), 0.25, dtype=complex)  # |+>|+> product state


def kappa_closed(t):
    """int_0^t D(u) du for the vacuum kernel."""
    return 1j * ETA * WC * (1.0 / (1.0 + 1j * WC * t) - 1.0)


@pytest.fixture(scope="module")
def bell_unprotected():
    cfg = SimulationConfig(
        bath=VACUUM, schedule=ControlSchedule(n_x=0), initial_state=BELL, t_final=3.0
    )
    return evolve(cfg)


class TestMomentState:
    def test_zero_at_start(self):
        m = MomentState.start(ControlSchedule(n_x=0), VACUUM)
        k = memory_operator(0.0, "A", m, ControlSchedule(n_x=0))
        assert np.max(np.abs(k)) == 0.0

    def test_unprotected_closed_form(self):
        s = ControlSchedule(n_x=0)
        m = MomentState.start(s, VACUUM).advance_to(1.0)
        k = memory_operator(1.0, "A", m, s)
        expected = kappa_closed(1.0) * SZ1
        assert np.max(np.abs(k - expected)) < 1e-9
        assert kappa_closed(1.0).real == pytest.approx(ETA * WC**2 / (1 + WC**2), rel=1e-12)

    def test_split_consistency(self):
        quad_tol = 1e-10
        s = ControlSchedule(n_x=2)
        one = MomentState.start(s, VACUUM, quad_tol).advance_to(0.7)
        two = MomentState.start(s, VACUUM, quad_tol).advance_to(0.35).advance_to(0.7)
        k_one = memory_operator(0.7, "A", one, s)
        k_two = memory_operator(0.7, "A", two, s)
        assert np.max(np.abs(k_one - k_two)) < 2 * quad_tol

    def test_stale_moments_rejected(self):
        s = ControlSchedule(n_x=0)
        m = MomentState.start(s, VACUUM).advance_to(0.5)
        with pytest.raises(InternalConsistencyError):
            memory_operator(0.6, "A", m, s)

    def test_qubit_placement(self):
        s = ControlSchedule(n_x=0)
        m = MomentState.start(s, VACUUM).advance_to(0.3)
        k_a = memory_operator(0.3, "A", m, s)
        k_b = memory_operator(0.3, "B", m, s)
        kappa = kappa_closed(0.3)
        assert np.max(np.abs(k_a - kappa * SZ1)) < 1e-9
        assert np.max(np.abs(k_b - kappa * SZ2)) < 1e-9

    def test_delayed_turn_on_matches_direct_integral(self):
        # K(t) = int_0^t D(t - t') Lambda(t') dt' with Lambda switching at
        # t_on: cross-check the stream bookkeeping against scipy quadrature
        # of the defining integral, component by component.
        s = ControlSchedule(n_x=2, t_on=0.4)
        t = 0.75
        m = MomentState.start(s, VACUUM).advance_to(0.2).advance_to(t)
        k = memory_operator(t, "A", m, s)

        nu = s.modulation_frequency

        def lam_z(tp):
            return 1.0 if tp < s.t_on else math.cos(nu * (tp - s.t_on))

        def lam_y(tp):
            return 0.0 if tp < s.t_on else math.sin(nu * (tp - s.t_on))

        def complex_quad(f):
            re = quad(lambda x: f(x).real, 0.0, t, epsabs=1e-12, limit=400)[0]
            im = quad(lambda x: f(x).imag, 0.0, t, epsabs=1e-12, limit=400)[0]
            return complex(re, im)

        kz = complex_quad(lambda tp: kernel_D(t - tp, VACUUM) * lam_z(tp))
        ky = complex_quad(lambda tp: kernel_D(t - tp, VACUUM) * lam_y(tp))
        expected = kz * SZ1 + ky * SY1
        assert np.max(np.abs(k - expected)) < 1e-8


class TestMasterRhs:
    def test_zero_memory_operators(self):
        s = ControlSchedule(n_x=0)
        zero = np.zeros((4, 4), dtype=complex)
        out = master_rhs(0.0, BELL, zero, zero, s)
        assert np.max(np.abs(out)) == 0.0

    def test_maximally_mixed_fixed_point(self):
        s = ControlSchedule(n_x=0)
        kappa = kappa_closed(0.8)
        out = master_rhs(0.8, np.eye(4, dtype=complex) / 4, kappa * SZ1, kappa * SZ2, s)
        assert np.max(np.abs(out)) < 1e-15

    def test_single_qubit_coherence_rate(self):
        # Reduced to one qubit the unprotected equation reads
        # d(rho_01)/dt = -4 Re kappa(t) rho_01.
        s = ControlSchedule(n_x=0)
        rng = np.random.default_rng(2)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho1 = g @ g.conj().T
        rho1 /= np.trace(rho1).real
        rho = np.kron(rho1, np.eye(2) / 2)
        kappa = kappa_closed(0.6)
        out = master_rhs(0.6, rho, kappa * SZ1, kappa * SZ2, s)
        reduced = partial_trace(out, "A")
        expected01 = -4.0 * kappa.real * rho1[0, 1]
        assert abs(reduced[0, 1] - expected01) < 1e-12
        assert abs(reduced[0, 0]) < 1e-12  # populations conserved

    def test_traceless_and_hermiticity_preserving(self):
        rng = np.random.default_rng(3)
        s = ControlSchedule(n_x=3)
        for t in (0.07, 0.31, 1.23):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = g @ g.conj().T
            rho /= np.trace(rho).real
            k_z, k_y = 0.3 - 0.1j, 0.05 + 0.2j
            k1 = k_z * SZ1 + k_y * SY1
            k2 = k_z * SZ2 + k_y * np.kron(np.eye(2), np.array([[0, -1j], [1j, 0]]))
            out = master_rhs(t, rho, k1, k2, s)
            assert abs(np.trace(out)) < 1e-14
            assert np.max(np.abs(out - out.conj().T)) < 1e-14


class TestEvolve:
    def test_bell_coherence_matches_exact_solution(self, bell_unprotected):
        traj = bell_unprotected
        worst = 0.0
        for t, rho in zip(traj.times, traj.states_interaction):
            oracle = 0.5 * (1.0 + (WC * t) ** 2) ** (-4.0 * ETA)
            worst = max(worst, abs(rho[0, 3].real - oracle) / oracle)
        assert worst < 1e-4
        idx = np.argmin(np.abs(traj.times - 1.0))
        assert traj.states_interaction[idx][0, 3].real == pytest.approx(
            0.19822759991837025, rel=1e-6
        )

    def test_c3_conserved(self, bell_unprotected):
        zz = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0]))
        c3 = [np.real(np.trace(s @ zz)) for s in bell_unprotected.states_interaction]
        assert np.max(np.abs(np.array(c3) - c3[0])) < 1e-9

    def test_trajectory_structure(self, bell_unprotected):
        traj = bell_unprotected
        assert traj.times[0] == 0.0
        assert np.all(np.diff(traj.times) > 0)
        assert np.max(np.abs(traj.states_interaction[0] - BELL)) == 0.0
        assert len(traj) == 301

    def test_diagnostics_bounds(self, bell_unprotected):
        traj = bell_unprotected
        assert traj.trace_error.max() <= 1e-9
        assert traj.hermiticity_defect.max() <= 1e-10
        assert traj.min_eigenvalue.min() >= -1e-4

    def test_decoupled_limit_freezes_state(self):
        weak = BathParams(eta=1e-8, omega_c=WC, beta=math.inf)
        cfg = SimulationConfig(
            bath=weak, schedule=ControlSchedule(n_x=0), initial_state=BELL, t_final=3.0
        )
        traj = evolve(cfg)
        drift = max(
            np.max(np.abs(s - BELL)) for s in traj.states_interaction
        )
        assert drift < 1e-6

    def test_zero_field_equivalence(self):
        cfg_a = SimulationConfig(
            bath=VACUUM, schedule=ControlSchedule(n_x=0), initial_state=BELL, t_final=1.0
        )
        cfg_b = SimulationConfig(
            bath=VACUUM,
            schedule=ControlSchedule(n_x=4, t_on=5.0),
            initial_state=BELL,
            t_final=1.0,
        )
        ta, tb = evolve(cfg_a), evolve(cfg_b)
        diff = max(
            np.max(np.abs(a - b))
            for a, b in zip(ta.states_interaction, tb.states_interaction)
        )
        assert diff < 1e-12

    def test_picture_consistency(self):
        cfg = SimulationConfig(
            bath=VACUUM,
            schedule=ControlSchedule(n_x=3),
            initial_state=build_initial_state("mixed_rho2"),
            t_final=0.5,
        )
        traj = evolve(cfg)
        for idx in (10, 25, 50):
            rho_i = traj.states_interaction[idx]
            rho_s = traj.states_schrodinger[idx]
            assert concurrence(rho_i) == pytest.approx(concurrence(rho_s), abs=1e-8)
            d_i = quantum_discord(rho_i).discord
            d_s = quantum_discord(rho_s).discord
            assert d_i == pytest.approx(d_s, abs=1e-8)

    def test_step_halving_converges(self):
        state = build_initial_state("mixed_rho2")
        common = dict(
            bath=VACUUM, schedule=ControlSchedule(n_x=4), initial_state=state,
            t_final=0.5,
        )
        coarse = evolve(SimulationConfig(dt=1e-3, sample_stride=10, **common))
        fine = evolve(SimulationConfig(dt=5e-4, sample_stride=20, **common))
        assert np.allclose(coarse.times, fine.times)
        diff = max(
            np.max(np.abs(a - b))
            for a, b in zip(coarse.states_interaction, fine.states_interaction)
        )
        assert diff < 1e-9

    def test_protected_coherence_decays_slower(self):
        cfg = SimulationConfig(
            bath=VACUUM, schedule=ControlSchedule(n_x=4), initial_state=BELL, t_final=1.0
        )
        protected = evolve(cfg)
        unprotected_c = 0.5 * (1.0 + WC**2) ** (-4.0 * ETA)
        assert abs(protected.states_interaction[-1][0, 3]) > 2.0 * unprotected_c

    def test_positivity_abort_reports_time_and_eigenvalue(self, monkeypatch):
        monkeypatch.setattr(engine_module, "min_eigenvalue", lambda m: -0.5)
        cfg = SimulationConfig(
            bath=VACUUM, schedule=ControlSchedule(n_x=0), initial_state=BELL, t_final=0.1
        )
        with pytest.raises(IntegrationAbortError) as err:
            evolve(cfg)
        assert err.value.eigenvalue == -0.5
        assert err.value.time == 0.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimulationConfig(
                bath=VACUUM, schedule=ControlSchedule(n_x=4),
                initial_state=BELL, t_final=1.0, dt=0.01,  # > t_c/(40 n_x)
            )
        with pytest.raises(ValueError):
            SimulationConfig(
                bath=VACUUM, schedule=ControlSchedule(n_x=0),
                initial_state=BELL, t_final=1e-5, dt=1e-3,
            )
        with pytest.raises(ValueError):
            SimulationConfig(
                bath=VACUUM, schedule=ControlSchedule(n_x=0),
                initial_state=BELL, t_final=1.0, sample_stride=0,
            )


class TestDephasingOracle:
    def test_unit_at_zero(self):
        assert dephasing_oracle_coherence(0.0, VACUUM) == 1.0

    def test_transition_anchor(self):
        # (1 + 4 pi^2 t^2)^(1/4) = 5/3 at the sudden-transition anchor, so
        # the squared single-qubit coherence equals 0.6 there.
        t_star = math.sqrt(((5.0 / 3.0) ** 4 - 1.0) / (4.0 * math.pi**2))
        assert t_star == pytest.approx(0.41245547422030365, abs=1e-12)
        assert dephasing_oracle_coherence(t_star, VACUUM) ** 2 == pytest.approx(0.6, rel=1e-12)

    def test_asymptotic_log_log_slope(self):
        ts = np.linspace(10.0, 100.0, 200)
        values = np.array([dephasing_oracle_coherence(float(t), VACUUM) for t in ts])
        slope = np.polyfit(np.log(ts), np.log(values), 1)[0]
        assert slope == pytest.approx(-4.0 * ETA, abs=0.01)

    def test_finite_temperature_reduces_to_vacuum_at_large_beta(self):
        cold = BathParams(eta=ETA, omega_c=WC, beta=1e6)
        for t in (0.2, 1.0):
            assert dephasing_oracle_coherence(t, cold) == pytest.approx(
                dephasing_oracle_coherence(t, VACUUM), rel=1e-5
            )

    def test_engine_matches_finite_temperature_oracle(self):
        hot = BathParams(eta=ETA, omega_c=WC, beta=1.0)
        cfg = SimulationConfig(
            bath=hot, schedule=ControlSchedule(n_x=0), initial_state=PLUS_PLUS,
            t_final=1.0,
        )
        traj = evolve(cfg)
        worst = 0.0
        for t, rho in zip(traj.times, traj.states_interaction):
            coherence = 2.0 * abs(partial_trace(rho, "A")[0, 1])
            worst = max(worst, abs(coherence - dephasing_oracle_coherence(t, hot)))
        assert worst < 1e-4
