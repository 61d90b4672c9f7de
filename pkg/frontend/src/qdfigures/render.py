"""Render qdshield figure datasets (CSV + JSON sidecars) to raster images.

This package is a pure view over the simulator's outputs: it never
recomputes physics, so byte-identical inputs give pixel-identical images
for a fixed style. Line styles follow the source conventions: solid black
for the unprotected curve, distinct dash/marker patterns for n_x = 1..4.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")

CSV_COLUMNS = (
    "t", "nx", "discord", "concurrence", "superfidelity",
    "trace_error", "min_eigenvalue",
)

# (color, linestyle, marker) per n_x, mirroring the dataset's legend
# conventions: solid black when unprotected, points for n_x = 1, then
# dotted / double dot-dashed / dash-dotted.
DEFAULT_STYLE = {
    0: ("black", "solid", None),
    1: ("magenta", "none", "o"),
    2: ("red", "dotted", None),
    3: ("blue", (0, (3, 1, 1, 1, 1, 1)), None),
    4: ("green", "dashdot", None),
}

_SAVE_OPTS = dict(dpi=150, metadata={"Software": "qdfigures"})


class RenderError(RuntimeError):
    """Missing file, missing column, or empty dataset."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_paths: tuple
    style: dict = field(default_factory=lambda: dict(DEFAULT_STYLE))

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise RenderError(
                f"unknown figure {self.figure_id!r}; valid: {', '.join(FIGURE_IDS)}"
            )


def default_spec(figure_id, data_dir):
    """Input file list for a figure as the simulator CLI lays it out."""
    table = {
        "fig1": ("fig1.csv",),
        "fig2": ("fig2.csv",),
        "fig3": ("fig3.csv",),
        "fig4": ("fig4.csv", "fig4.json"),
        "fig5": ("fig5_ton0.csv", "fig5_ton04.csv"),
        "fig6": ("fig6.json",),
    }
    if figure_id not in table:
        raise RenderError(
            f"unknown figure {figure_id!r}; valid: {', '.join(FIGURE_IDS)}"
        )
    return FigureSpec(
        figure_id=figure_id,
        input_paths=tuple(os.path.join(data_dir, name) for name in table[figure_id]),
    )


def load_curves(path, columns=("discord", "concurrence", "superfidelity")):
    """Parse one CSV into {nx: {column: [values], "t": [times]}}, nx-ordered."""
    if not os.path.exists(path):
        raise RenderError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in ("t", "nx") + tuple(columns):
            if column not in header:
                raise RenderError(f"missing column {column!r} in {path}")
        rows = list(reader)
    if not rows:
        raise RenderError(f"empty dataset: {path} has a header but no rows")
    curves = {}
    for row in rows:
        nx = int(row["nx"])
        entry = curves.setdefault(nx, {"t": []})
        entry["t"].append(float(row["t"]))
        for column in columns:
            entry.setdefault(column, []).append(float(row[column]))
    return curves


def load_sidecar(path):
    if not os.path.exists(path):
        raise RenderError(f"input file not found: {path}")
    with open(path) as fh:
        return json.load(fh)


def _plot_curves(ax, curves, column, style, label_fmt="$n_x = {nx}$"):
    for nx in sorted(curves):
        color, linestyle, marker = style.get(nx, ("gray", "solid", None))
        values = curves[nx][column]
        if any(math.isnan(v) for v in values):
            raise RenderError(f"column {column!r} has missing values for nx = {nx}")
        ax.plot(
            curves[nx]["t"],
            values,
            color=color,
            linestyle=linestyle,
            marker=marker,
            markersize=2.5,
            markevery=max(1, len(values) // 60),
            label="off" if nx == 0 else label_fmt.format(nx=nx),
        )


def _render_two_panel(spec, out_path):
    curves = load_curves(spec.input_paths[0])
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
    _plot_curves(ax_top, curves, "concurrence", spec.style)
    ax_top.set_ylabel("concurrence")
    ax_top.set_title("(a)", loc="left")
    _plot_curves(ax_bottom, curves, "superfidelity", spec.style)
    ax_bottom.set_ylabel("superfidelity")
    ax_bottom.set_title("(b)", loc="left")
    ax_bottom.set_xlabel(r"$t$ (units of $\tau$)")
    ax_top.legend(loc="best", fontsize=8)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def _render_discord(spec, out_path, inset_te=None):
    curves = load_curves(spec.input_paths[0], columns=("discord",))
    fig, ax = plt.subplots(figsize=(6, 4.2))
    _plot_curves(ax, curves, "discord", spec.style)
    ax.set_xlabel(r"$t$ (units of $\tau$)")
    ax.set_ylabel("quantum discord")
    ax.legend(loc="best", fontsize=8)
    if inset_te:
        nxs = sorted(int(k) for k in inset_te)
        inset = ax.inset_axes([0.55, 0.55, 0.4, 0.38])
        inset.plot(nxs, [inset_te[str(n)] for n in nxs], "ko-", markersize=4)
        inset.set_xlabel(r"$n_x$", fontsize=8)
        inset.set_ylabel(r"$t_e$", fontsize=8)
        inset.tick_params(labelsize=7)
        inset.set_xticks(nxs)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def _render_turn_on_grid(spec, out_path):
    early = load_curves(spec.input_paths[0], columns=("discord",))
    late = load_curves(spec.input_paths[1], columns=("discord",))
    fig, axes = plt.subplots(2, 2, figsize=(8, 6), sharex=True, sharey=True)
    panels = ("(a)", "(b)", "(c)", "(d)")
    for ax, label, nx in zip(axes.ravel(), panels, (1, 2, 3, 4)):
        if nx not in early or nx not in late:
            raise RenderError(f"missing n_x = {nx} curves for {spec.figure_id}")
        ax.plot(late[nx]["t"], late[nx]["discord"], color="black", linestyle="solid",
                label=r"on at $0.4\tau$")
        ax.plot(early[nx]["t"], early[nx]["discord"], color="red", linestyle="dashed",
                label=r"on at $t = 0$")
        ax.set_title(f"{label} $n_x = {nx}$", loc="left", fontsize=9)
    for ax in axes[1]:
        ax.set_xlabel(r"$t$ (units of $\tau$)")
    for ax in axes[:, 0]:
        ax.set_ylabel("quantum discord")
    axes[0, 0].legend(fontsize=8)
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def _render_temperature(spec, out_path):
    payload = load_sidecar(spec.input_paths[0])
    rows = payload.get("t_e_vs_temperature")
    if not rows:
        raise RenderError(f"no t_e_vs_temperature table in {spec.input_paths[0]}")
    temps = [row["temperature"] for row in rows]
    te = [row["t_e"] for row in rows]
    if any(v is None for v in te):
        raise RenderError(f"missing t_e values in {spec.input_paths[0]}")
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(temps, te, "ko-", markersize=5)
    ax.set_xlabel(r"$T$ (cutoff units)")
    ax.set_ylabel(r"$t_e$ (units of $\tau$)")
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def render(spec: FigureSpec, out_path):
    """Render one figure; raises RenderError without writing on bad input."""
    if spec.figure_id in ("fig1", "fig3"):
        _render_two_panel(spec, out_path)
    elif spec.figure_id == "fig2":
        _render_discord(spec, out_path)
    elif spec.figure_id == "fig4":
        sidecar = load_sidecar(spec.input_paths[1])
        te = sidecar.get("derived", {}).get("fig4", {}).get("t_e")
        if not te:
            raise RenderError(f"no derived t_e table in {spec.input_paths[1]}")
        _render_discord(spec, out_path, inset_te=te)
    elif spec.figure_id == "fig5":
        _render_turn_on_grid(spec, out_path)
    elif spec.figure_id == "fig6":
        _render_temperature(spec, out_path)
    else:  # pragma: no cover - guarded by FigureSpec
        raise RenderError(f"unknown figure {spec.figure_id!r}")
    return out_path
