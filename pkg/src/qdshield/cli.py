"""Command-line interface: run, figures, te, check.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bath import BathParams, kernel_D, trigamma
from .control import ControlSchedule, decoupling_residual
from .engine import SimulationConfig, dephasing_oracle_coherence, evolve
from .errors import NumericalFailureError, PositivityViolationError, StateCorruptionError
from .measures import bell_diagonal_discord_oracle, bell_diagonal_state, quantum_discord
from .operators import partial_trace
from .scenarios import (
    FIGURE_IDS,
    Scenario,
    build_initial_state,
    run_figure,
    run_scenario,
    sidecar_payload,
    write_record_csv,
    write_sidecar,
)

_USAGE_EXIT = 1
_NUMERICAL_EXIT = 2

_CONFIG_KEYS = {
    "scenario": {"name", "initial_state", "nx_list", "t_on"},
    "bath": {"eta", "omega_c", "temperature"},
    "run": {"t_final", "dt", "quad_tol", "sample_stride"},
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_USAGE_EXIT)


class ConfigError(ValueError):
    pass


def _parse_matrix(raw):
    if not (isinstance(raw, list) and len(raw) == 4):
        raise ConfigError("initial_state matrix must be 4 rows")
    out = np.zeros((4, 4), dtype=complex)
    for i, row in enumerate(raw):
        if not (isinstance(row, list) and len(row) == 4):
            raise ConfigError("initial_state matrix rows must have 4 entries")
        for j, cell in enumerate(row):
            if isinstance(cell, (int, float)):
                out[i, j] = cell
            elif isinstance(cell, list) and len(cell) == 2:
                out[i, j] = complex(cell[0], cell[1])
            else:
                raise ConfigError(
                    f"matrix entry ({i},{j}) must be a number or [re, im] pair"
                )
    return out


def load_config(path):
    """Parse a scenario config file; unknown keys are usage errors."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section, allowed in _CONFIG_KEYS.items():
        entries = doc.get(section, {})
        if not isinstance(entries, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        bad = set(entries) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {section!r}: {sorted(bad)}")

    sc = doc.get("scenario", {})
    if "name" not in sc or "initial_state" not in sc or "nx_list" not in sc:
        raise ConfigError("scenario.name, scenario.initial_state, scenario.nx_list are required")
    initial = sc["initial_state"]
    if isinstance(initial, list):
        initial = _parse_matrix(initial)
    elif not isinstance(initial, str):
        raise ConfigError("scenario.initial_state must be a name or a 4x4 matrix")
    nx_list = sc["nx_list"]
    if not (isinstance(nx_list, list) and nx_list and all(isinstance(n, int) and n >= 0 for n in nx_list)):
        raise ConfigError("scenario.nx_list must be a non-empty list of integers >= 0")

    bath_doc = doc.get("bath", {})
    try:
        bath = BathParams.from_temperature(
            eta=float(bath_doc.get("eta", 1.0 / 16.0)),
            omega_c=float(bath_doc.get("omega_c", 2.0 * math.pi)),
            temperature=float(bath_doc.get("temperature", 0.0)),
        )
        run_doc = doc.get("run", {})
        scenario = Scenario(
            name=str(sc["name"]),
            initial_state=initial,
            n_x_list=tuple(nx_list),
            t_on=float(sc.get("t_on", 0.0)),
            bath=bath,
            t_final=float(run_doc.get("t_final", 3.0)),
        )
        run_kwargs = {
            "dt": float(run_doc.get("dt", 1e-3)),
            "quad_tol": float(run_doc.get("quad_tol", 1e-10)),
            "sample_stride": int(run_doc.get("sample_stride", 10)),
        }
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return scenario, run_kwargs


def _cmd_run(args):
    scenario, run_kwargs = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    written = []
    try:
        record = run_scenario(scenario, **run_kwargs)
        csv_path = os.path.join(args.out, f"{scenario.name}.csv")
        write_record_csv(record, csv_path)
        written.append(csv_path)
        json_path = os.path.join(args.out, f"{scenario.name}.json")
        write_sidecar(sidecar_payload([record]), json_path)
        written.append(json_path)
    except Exception:
        _remove_all(written)
        raise
    for path in written:
        print(path)
    return 0


def _remove_all(paths):
    for path in paths:
        try:
            os.remove(path)
        except OSError:
            pass


def _cmd_figures(args):
    figure_ids = list(FIGURE_IDS) if args.which == "all" else [args.which]
    written = []
    try:
        for figure_id in figure_ids:
            written.extend(run_figure(figure_id, args.out))
    except Exception:
        _remove_all(written)
        raise
    for path in written:
        print(path)
    return 0


def _cmd_te(args):
    bath = BathParams.from_temperature(1.0 / 16.0, 2.0 * math.pi, args.temperature)
    scenario = Scenario(
        name="te",
        initial_state=args.state,
        n_x_list=(0, args.nx),
        bath=bath,
        t_final=args.t_final,
        outputs=frozenset({"discord"}),
    )
    record = run_scenario(scenario)
    payload = {
        "state": args.state,
        "nx": args.nx,
        "temperature": args.temperature,
        "t_star": record.derived.get("t_star"),
        "t_e": record.derived.get("t_e", {}).get(args.nx),
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


def _check_line(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{status}: {name}{suffix}")
    return ok


def _trigamma_series(z, terms=200_000):
    n = np.arange(terms, dtype=float)
    partial = np.sum(1.0 / (z + n) ** 2)
    tail_z = z + terms
    return partial + 1.0 / tail_z + 0.5 / tail_z**2 + 1.0 / (6.0 * tail_z**3)


def _cmd_check(_args):
    ok = True
    vac = BathParams(eta=1.0 / 16.0, omega_c=2.0 * math.pi, beta=math.inf)

    worst = 0.0
    for z in (1.0 + 0j, 2.0 + 0j, 1 + 1j, 3 - 2j, 0.5 + 4j):
        worst = max(worst, abs(trigamma(z) - _trigamma_series(z)))
    ok &= _check_line("trigamma vs series oracle", worst < 1e-9, f"max err {worst:.2e}")

    worst = 0.0
    for u in (0.01, 0.1, 1.0, 10.0):
        d = kernel_D(u, vac)
        w2 = (vac.omega_c * u) ** 2
        re = vac.eta * vac.omega_c**2 * (1 - w2) / (1 + w2) ** 2
        im = -2 * vac.eta * vac.omega_c**3 * u / (1 + w2) ** 2
        worst = max(worst, abs(d - complex(re, im)))
    ok &= _check_line("vacuum kernel closed form", worst < 1e-12, f"max err {worst:.2e}")

    worst = 0.0
    for n_x in range(1, 9):
        worst = max(worst, decoupling_residual(ControlSchedule(n_x=n_x)))
    ok &= _check_line("decoupling residual n_x=1..8", worst < 1e-10, f"max {worst:.2e}")

    cfg = SimulationConfig(
        bath=vac,
        schedule=ControlSchedule(n_x=0),
        initial_state=np.kron(
            np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([[0.5, 0.5], [0.5, 0.5]])
        ),
        t_final=0.5,
    )
    traj = evolve(cfg)
    worst = 0.0
    for t, rho in zip(traj.times, traj.states_interaction):
        coh = 2.0 * abs(partial_trace(rho, "A")[0, 1])
        worst = max(worst, abs(coh - dephasing_oracle_coherence(t, vac)))
    ok &= _check_line("dephasing decay oracle", worst < 1e-4, f"max err {worst:.2e}")

    worst = 0.0
    for c in ((1.0, -0.6, 0.6), (0.5, -0.3, 0.3), (0.2, 0.2, -0.2), (0.9, -0.9, 0.9), (0.0, 0.0, 0.7)):
        num = quantum_discord(bell_diagonal_state(*c)).discord
        worst = max(worst, abs(num - bell_diagonal_discord_oracle(*c)))
    ok &= _check_line("discord vs Bell-diagonal oracle", worst < 1e-6, f"max err {worst:.2e}")

    return 0 if ok else _NUMERICAL_EXIT


def build_parser():
    parser = _Parser(prog="qdshield", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qdshield {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_fig = sub.add_parser("figures", help="compute built-in figure datasets")
    p_fig.add_argument("which", choices=list(FIGURE_IDS) + ["all"])
    p_fig.add_argument("--out", default=".", help="output directory")
    p_fig.set_defaults(func=_cmd_figures)

    p_te = sub.add_parser("te", help="derived transition/effectiveness times as JSON")
    p_te.add_argument("--state", required=True)
    p_te.add_argument("--nx", type=int, required=True)
    p_te.add_argument("--temperature", type=float, default=0.0)
    p_te.add_argument("--t-final", type=float, default=3.0, dest="t_final")
    p_te.set_defaults(func=_cmd_te)

    p_check = sub.add_parser("check", help="run the numerical self-tests")
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (NumericalFailureError, PositivityViolationError, StateCorruptionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _NUMERICAL_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
