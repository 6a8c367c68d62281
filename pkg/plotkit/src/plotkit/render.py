"""Render gateforge CSV artifacts into figures.

Three plot kinds, one per artifact schema:

- ``convergence``: log10 infidelity versus iteration (non-finite rows,
  i.e. runs that hit exactly zero infidelity, are dropped from the curve).
- ``pulses``: the piecewise-constant schedule drawn as a true staircase,
  one series per control.
- ``sweep``: swept parameter value versus (mean) fidelity.

Output is non-interactive and reproducible: the Agg backend renders to a
file and PNG metadata carries no timestamps or version strings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("convergence", "pulses", "sweep")

_FIGSIZE = (6.4, 4.0)
_DPI = 150


class SchemaError(ValueError):
    """The input CSV does not match the requested plot kind."""


@dataclass
class PlotSpec:
    kind: str
    input_path: Path
    output_path: Path
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r} (choose from {KINDS})")
        self.input_path = Path(self.input_path)
        self.output_path = Path(self.output_path)


def _read_table(path: Path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty CSV") from None
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def _columns(path, header, rows, names):
    missing = [n for n in names if n not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)} in {header}")
    idx = [header.index(n) for n in names]
    try:
        return [np.array([float(r[i]) for r in rows]) for i in idx]
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed numeric data ({exc})") from exc


def staircase_edges(t_start: np.ndarray, t_end: np.ndarray) -> np.ndarray:
    """Bin edges for a piecewise-constant pulse table."""
    return np.append(t_start, t_end[-1])


def _plot_convergence(ax, path, header, rows):
    its, lg = _columns(path, header, rows, ["iteration", "log10_infidelity"])
    finite = np.isfinite(lg)
    if not finite.any():
        raise SchemaError(f"{path}: no finite log10_infidelity values to plot")
    ax.plot(its[finite], lg[finite], lw=1.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\log_{10}$ infidelity")


def _plot_pulses(ax, path, header, rows):
    u_names = [h for h in header if h.startswith("u_")]
    if header[:2] != ["t_start", "t_end"] or not u_names:
        raise SchemaError(
            f"{path}: expected pulse table header t_start,t_end,u_0,... got {header}"
        )
    cols = _columns(path, header, rows, ["t_start", "t_end"] + u_names)
    edges = staircase_edges(cols[0], cols[1])
    for name, values in zip(u_names, cols[2:]):
        ax.stairs(values, edges, label=name, lw=1.2)
    ax.set_xlabel("time")
    ax.set_ylabel("control amplitude")
    if len(u_names) > 1:
        ax.legend(loc="best", fontsize=8)


def _plot_sweep(ax, path, header, rows):
    values, fids = _columns(path, header, rows, ["value", "fidelity"])
    if "param" not in header:
        raise SchemaError(f"{path}: missing column(s) param in {header}")
    param = rows[0][header.index("param")]
    ax.plot(values, fids, marker="o", lw=1.2)
    ax.set_xlabel(param)
    ax.set_ylabel("fidelity")


_PLOTTERS = {
    "convergence": _plot_convergence,
    "pulses": _plot_pulses,
    "sweep": _plot_sweep,
}


def render(spec: PlotSpec) -> Path:
    """Render one CSV artifact to an image file; returns the output path."""
    header, rows = _read_table(spec.input_path)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    try:
        _PLOTTERS[spec.kind](ax, spec.input_path, header, rows)
        ax.grid(True, alpha=0.3)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        save_kwargs = {"dpi": _DPI}
        if spec.output_path.suffix.lower() == ".png":
            # strip the default Software tag so identical inputs give
            # identical bytes across matplotlib patch versions
            save_kwargs["metadata"] = {"Software": None}
        fig.savefig(spec.output_path, **save_kwargs)
    finally:
        plt.close(fig)
    return spec.output_path
