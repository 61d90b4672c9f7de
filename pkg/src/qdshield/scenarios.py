"""Named initial states, figure scenarios, derived times, and persistence.

Figure naming follows the source material's labels: fig1/fig3 are the
concurrence + superfidelity figures for the pure and special mixed states,
fig2/fig4 the discord figures, fig5 the turn-on timing comparison, fig6 the
temperature sweep of the effectiveness time. The CSV schema is fixed
(`t,nx,discord,concurrence,superfidelity,trace_error,min_eigenvalue`), so
fig5 and fig6 write one CSV per sub-scenario plus a shared JSON sidecar.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .bath import BathParams
from .control import ControlSchedule
from .engine import SimulationConfig, Trajectory, evolve
from .measures import (
    OptimizerSettings,
    bell_diagonal_state,
    concurrence,
    correlation_vector,
    quantum_discord,
    superfidelity,
)
from .operators import partial_trace, validate_density_matrix

MEASURE_NAMES = ("discord", "concurrence", "superfidelity")
CSV_HEADER = "t,nx,discord,concurrence,superfidelity,trace_error,min_eigenvalue"
TRAJECTORY_TOL_NEG = 1e-4
WORKERS_ENV_VAR = "QDSHIELD_WORKERS"

DEFAULT_BATH = BathParams(eta=1.0 / 16.0, omega_c=2.0 * math.pi, beta=math.inf)

_KET = {
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
}


def _projector(vec):
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def build_initial_state(name):
    """Resolve a named two-qubit initial state to its density matrix.

    bell_phi_plus : |Phi+><Phi+| with |Phi+> = (|00> + |11>)/sqrt(2)
    mixed_rho1    : equal mixture of (|00>+|11>+|01>+|10>)/2 and (|00>-|11>)/sqrt(2)
    mixed_rho2    : 0.8 |Phi+><Phi+| + 0.2 |Psi+><Psi+|
    """
    states = {
        "bell_phi_plus": lambda: _projector(_KET["00"] + _KET["11"]),
        "mixed_rho1": lambda: 0.5
        * (
            _projector(_KET["00"] + _KET["11"] + _KET["01"] + _KET["10"])
            + _projector(_KET["00"] - _KET["11"])
        ),
        "mixed_rho2": lambda: 0.8 * _projector(_KET["00"] + _KET["11"])
        + 0.2 * _projector(_KET["01"] + _KET["10"]),
    }
    if name not in states:
        raise ValueError(
            f"unknown initial state {name!r}; valid names: {sorted(states)}"
        )
    return validate_density_matrix(states[name]())


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_state: object  # named state or explicit 4x4 matrix
    n_x_list: tuple
    t_on: float = 0.0
    bath: BathParams = DEFAULT_BATH
    t_final: float = 3.0
    outputs: frozenset = frozenset(MEASURE_NAMES)

    def __post_init__(self):
        if not self.n_x_list:
            raise ValueError("n_x_list must be non-empty")
        unknown = set(self.outputs) - set(MEASURE_NAMES)
        if unknown:
            raise ValueError(f"unknown measures {sorted(unknown)}")

    def resolve_state(self):
        if isinstance(self.initial_state, str):
            return build_initial_state(self.initial_state)
        return validate_density_matrix(np.asarray(self.initial_state, dtype=complex))


@dataclass(frozen=True)
class NxResult:
    n_x: int
    trajectory: Trajectory
    measures: dict


@dataclass(frozen=True)
class RunRecord:
    scenario: Scenario
    results: tuple
    derived: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def result_for(self, n_x) -> NxResult:
        for r in self.results:
            if r.n_x == n_x:
                return r
        raise ValueError(f"record has no trajectory for n_x = {n_x}")


def _worker_count():
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ValueError(f"{WORKERS_ENV_VAR} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def evaluate_measures(trajectory: Trajectory, outputs, settings: OptimizerSettings = None):
    """Per-sample measure arrays over a trajectory (NaN for unselected ones)."""
    n = len(trajectory)
    out = {name: np.full(n, np.nan) for name in MEASURE_NAMES}
    rho0 = trajectory.states_interaction[0]
    for i in range(n):
        rho = trajectory.states_interaction[i]
        if "discord" in outputs:
            out["discord"][i] = quantum_discord(
                rho, settings, tol_neg=TRAJECTORY_TOL_NEG
            ).discord
        if "concurrence" in outputs:
            out["concurrence"][i] = concurrence(rho)
        if "superfidelity" in outputs:
            # The environment-free reference is constant in the interaction
            # picture, and superfidelity is invariant under the shared U0.
            out["superfidelity"][i] = superfidelity(rho, rho0)
    return out


def _run_single(scenario: Scenario, n_x, state, dt, quad_tol, sample_stride, settings):
    cfg = SimulationConfig(
        bath=scenario.bath,
        schedule=ControlSchedule(n_x=n_x, t_c=1.0, t_on=scenario.t_on),
        initial_state=state,
        t_final=scenario.t_final,
        dt=dt,
        quad_tol=quad_tol,
        sample_stride=sample_stride,
    )
    trajectory = evolve(cfg)
    measures = evaluate_measures(trajectory, scenario.outputs, settings)
    return NxResult(n_x=n_x, trajectory=trajectory, measures=measures)


def _config_hash(scenario: Scenario, state, dt, quad_tol, sample_stride):
    payload = {
        "name": scenario.name,
        "state": [[f"{z.real:.17g}", f"{z.imag:.17g}"] for z in state.ravel()],
        "nx_list": list(scenario.n_x_list),
        "t_on": scenario.t_on,
        "eta": scenario.bath.eta,
        "omega_c": scenario.bath.omega_c,
        "temperature": scenario.bath.temperature,
        "t_final": scenario.t_final,
        "outputs": sorted(scenario.outputs),
        "dt": dt,
        "quad_tol": quad_tol,
        "sample_stride": sample_stride,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def run_scenario(
    scenario: Scenario,
    dt=1e-3,
    quad_tol=1e-10,
    sample_stride=10,
    settings: OptimizerSettings = None,
    workers=None,
) -> RunRecord:
    """Evolve one trajectory per n_x and evaluate the selected measures.

    Trajectories are independent, so they run on a worker pool (size from the
    QDSHIELD_WORKERS variable, default available parallelism); results merge
    in declared n_x order, so output is deterministic either way.
    """
    state = scenario.resolve_state()
    if workers is None:
        workers = _worker_count()

    def job(n_x):
        return _run_single(scenario, n_x, state, dt, quad_tol, sample_stride, settings)

    if workers == 1 or len(scenario.n_x_list) == 1:
        results = tuple(job(n) for n in scenario.n_x_list)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(job, scenario.n_x_list))

    record = RunRecord(
        scenario=scenario,
        results=results,
        provenance={
            "config_hash": _config_hash(scenario, state, dt, quad_tol, sample_stride),
            "version": __version__,
            "dt": dt,
            "quad_tol": quad_tol,
            "sample_stride": sample_stride,
        },
    )
    derived = {}
    if "discord" in scenario.outputs and any(r.n_x == 0 for r in results):
        t_star = sudden_transition_time(record)
        derived["t_star"] = t_star
        derived["t_e"] = {
            r.n_x: effectiveness_time(record, r.n_x) for r in results if r.n_x != 0
        }
    return replace(record, derived=derived)


def _is_bell_diagonal(rho, tol=1e-8):
    rho = np.asarray(rho)
    rebuilt = bell_diagonal_state(*correlation_vector(rho))
    if np.max(np.abs(rho - rebuilt)) > tol:
        return False
    for sub in ("A", "B"):
        if np.max(np.abs(partial_trace(rho, sub) - 0.5 * np.eye(2))) > tol:
            return False
    return True


def sudden_transition_time(record: RunRecord):
    """First time the unprotected discord leaves its frozen plateau.

    Detection: the sampled discord slope magnitude must exceed ten times its
    median over the preceding plateau. When the trajectory is Bell-diagonal
    the time is refined by bisecting the |c1(t)| = |c3| crossing on the
    log-linear interpolant between samples. Returns None when there is no
    plateau (the initial state is not of the frozen-discord class).
    """
    res = record.result_for(0)
    d = res.measures["discord"]
    t = res.trajectory.times
    if np.any(np.isnan(d)) or len(d) < 12:
        return None

    deviation = np.abs(d - d[0])
    off_plateau = deviation > 1e-3
    plateau_len = int(np.argmax(off_plateau)) if off_plateau.any() else len(d)
    if plateau_len < 6 or plateau_len == len(d):
        return None

    slopes = np.diff(d) / np.diff(t)
    trip = None
    for k in range(5, len(slopes)):
        median = float(np.median(np.abs(slopes[:k])))
        if abs(slopes[k]) > 10.0 * median + 1e-12:
            trip = k
            break
    if trip is None:
        return None

    states = res.trajectory.states_interaction
    if _is_bell_diagonal(states[0]) and _is_bell_diagonal(states[trip]):
        c_abs = np.array(
            [np.abs(correlation_vector(s)[0]) for s in states]
        )
        c3 = abs(correlation_vector(states[0])[2])
        if c3 <= 0 or np.any(c_abs <= 0):
            return float(t[trip])
        f = np.log(c_abs) - math.log(c3)
        for k in range(len(f) - 1):
            if f[k] >= 0.0 > f[k + 1]:
                lo, hi = t[k], t[k + 1]
                f_lo, f_hi = f[k], f[k + 1]
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    f_mid = f_lo + (f_hi - f_lo) * (mid - t[k]) / (t[k + 1] - t[k])
                    if f_mid >= 0.0:
                        lo = mid
                    else:
                        hi = mid
                return float(0.5 * (lo + hi))
    return float(t[trip])


def effectiveness_time(record: RunRecord, n_x, persistence=10):
    """First crossing where the protected discord exceeds the unprotected one
    and stays above it for the next ``persistence`` samples. Linear
    interpolation between samples; None when no persistent crossing occurs."""
    if n_x == 0:
        raise ValueError("effectiveness_time needs a protected n_x >= 1")
    base = record.result_for(0)
    prot = record.result_for(n_x)
    d0 = base.measures["discord"]
    dk = prot.measures["discord"]
    t = base.trajectory.times
    if np.any(np.isnan(d0)) or np.any(np.isnan(dk)):
        raise ValueError("effectiveness_time requires discord on both trajectories")
    diff = dk - d0
    for k in range(1, len(diff) - persistence):
        if diff[k] > 0.0 and np.all(diff[k + 1 : k + 1 + persistence] > 0.0):
            if diff[k - 1] <= 0.0 and diff[k] > diff[k - 1]:
                frac = -diff[k - 1] / (diff[k] - diff[k - 1])
                return float(t[k - 1] + frac * (t[k] - t[k - 1]))
            return float(t[k])
    return None


def temperature_sweep(
    base: Scenario, temperatures, n_x=4, dt=1e-3, quad_tol=1e-10, sample_stride=10
):
    """Effectiveness times t_e(n_x) across bath temperatures (natural units).

    Returns (rows, records): one row dict per temperature with keys
    ``temperature``, ``t_star``, ``t_e``. Asserts nothing about trends.
    """
    if list(temperatures) != sorted(temperatures):
        raise ValueError("temperatures must be ascending")
    if any(T < 0 for T in temperatures):
        raise ValueError("temperatures must be >= 0")
    rows = []
    records = []
    for T in temperatures:
        bath = BathParams.from_temperature(base.bath.eta, base.bath.omega_c, T)
        scenario = replace(
            base,
            name=f"{base.name}_T{_format_float(T)}",
            bath=bath,
            n_x_list=(0, n_x),
            outputs=frozenset({"discord"}),
        )
        record = run_scenario(
            scenario, dt=dt, quad_tol=quad_tol, sample_stride=sample_stride
        )
        rows.append(
            {
                "temperature": float(T),
                "t_star": record.derived.get("t_star"),
                "t_e": record.derived.get("t_e", {}).get(n_x),
            }
        )
        records.append(record)
    return rows, records


def _format_float(x):
    if float(x) == int(x):
        return str(int(x))
    return f"{x:g}".replace(".", "p")


def format_value(x):
    """Fixed CSV float formatting: 12 significant digits."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.12g}"


def write_record_csv(record: RunRecord, path):
    """One CSV per scenario, rows grouped by n_x in declared order."""
    lines = [CSV_HEADER]
    for res in record.results:
        traj = res.trajectory
        for i, t in enumerate(traj.times):
            lines.append(
                ",".join(
                    [
                        format_value(t),
                        str(res.n_x),
                        format_value(res.measures["discord"][i]),
                        format_value(res.measures["concurrence"][i]),
                        format_value(res.measures["superfidelity"][i]),
                        format_value(traj.trace_error[i]),
                        format_value(traj.min_eigenvalue[i]),
                    ]
                )
            )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def sidecar_payload(records, derived=None, extra=None):
    """JSON sidecar with derived quantities and provenance (no timestamps)."""
    records = list(records)
    payload = {
        "scenarios": [r.scenario.name for r in records],
        "derived": derived if derived is not None else _merge_derived(records),
        "provenance": [r.provenance for r in records],
    }
    if extra:
        payload.update(extra)
    return payload


def _merge_derived(records):
    merged = {}
    for r in records:
        if not r.derived:
            continue
        entry = {}
        if r.derived.get("t_star") is not None:
            entry["t_star"] = r.derived["t_star"]
        t_e = {
            str(k): v for k, v in r.derived.get("t_e", {}).items() if v is not None
        }
        if t_e:
            entry["t_e"] = t_e
        if entry:
            merged[r.scenario.name] = entry
    return merged


def write_sidecar(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Built-in figure scenarios
# ---------------------------------------------------------------------------

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")
FIG6_TEMPERATURES = (0.0, 1.0, 2.0, 5.0)


def figure_scenarios(figure_id):
    """The built-in scenario list behind each figure dataset."""
    conc_fid = frozenset({"concurrence", "superfidelity"})
    discord = frozenset({"discord"})
    table = {
        "fig1": [Scenario("fig1", "bell_phi_plus", (0, 2, 3, 4), outputs=conc_fid)],
        "fig2": [Scenario("fig2", "bell_phi_plus", (0, 2, 3, 4), outputs=discord)],
        "fig3": [Scenario("fig3", "mixed_rho2", (0, 2, 3, 4), outputs=conc_fid)],
        "fig4": [Scenario("fig4", "mixed_rho2", (0, 1, 2, 3, 4), outputs=discord)],
        "fig5": [
            Scenario("fig5_ton0", "mixed_rho2", (1, 2, 3, 4), t_on=0.0, outputs=discord),
            Scenario("fig5_ton04", "mixed_rho2", (1, 2, 3, 4), t_on=0.4, outputs=discord),
        ],
    }
    if figure_id in table:
        return table[figure_id]
    if figure_id == "fig6":
        raise ValueError("fig6 is a derived sweep; use run_figure('fig6', ...)")
    raise ValueError(f"unknown figure {figure_id!r}; valid: {', '.join(FIGURE_IDS)}")


def run_figure(figure_id, out_dir, dt=1e-3, quad_tol=1e-10, sample_stride=10):
    """Compute one figure dataset; returns the list of files written.

    Partial files are removed if any sub-scenario fails."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        return _run_figure(
            figure_id, out_dir, written, dt=dt, quad_tol=quad_tol,
            sample_stride=sample_stride,
        )
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise


def _run_figure(figure_id, out_dir, written, dt, quad_tol, sample_stride):
    if figure_id == "fig6":
        base = Scenario("fig6", "mixed_rho2", (0, 4), outputs=frozenset({"discord"}))
        rows, records = temperature_sweep(
            base, FIG6_TEMPERATURES, n_x=4, dt=dt, quad_tol=quad_tol,
            sample_stride=sample_stride,
        )
        for T, record in zip(FIG6_TEMPERATURES, records):
            path = os.path.join(out_dir, f"fig6_T{_format_float(T)}.csv")
            write_record_csv(record, path)
            written.append(path)
        payload = sidecar_payload(
            records, extra={"figure": "fig6", "t_e_vs_temperature": rows}
        )
        path = os.path.join(out_dir, "fig6.json")
        write_sidecar(payload, path)
        written.append(path)
        return written

    scenarios = figure_scenarios(figure_id)
    records = []
    for scenario in scenarios:
        record = run_scenario(
            scenario, dt=dt, quad_tol=quad_tol, sample_stride=sample_stride
        )
        records.append(record)
        name = scenario.name if len(scenarios) > 1 else figure_id
        path = os.path.join(out_dir, f"{name}.csv")
        write_record_csv(record, path)
        written.append(path)
    payload = sidecar_payload(records, extra={"figure": figure_id})
    path = os.path.join(out_dir, f"{figure_id}.json")
    write_sidecar(payload, path)
    written.append(path)
    return written
