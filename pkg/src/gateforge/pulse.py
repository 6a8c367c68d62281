"""Piecewise-constant control schedules.

A schedule stores one amplitude per (control, interval) over ``n`` equal
intervals of a total time ``T``. Initial fields are sampled at interval
midpoints and clipped to the model's amplitude bounds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .model import HamiltonianModel


@dataclass
class ControlSchedule:
    """Amplitude table ``values[m, j]`` for control m on interval j."""

    total_time: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if self.n_intervals < 1:
            raise ValueError("schedule needs at least one interval")

    @property
    def n_controls(self) -> int:
        return self.values.shape[0]

    @property
    def n_intervals(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        return self.total_time / self.n_intervals

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_intervals) + 0.5) * self.dt

    def copy(self) -> "ControlSchedule":
        return ControlSchedule(self.total_time, self.values.copy())


@dataclass(frozen=True)
class SinInit:
    """u(t) = amplitude * sin(t)."""

    amplitude: float = 1.0


@dataclass(frozen=True)
class ConstantInit:
    value: float = 0.0


@dataclass(frozen=True)
class RandomInit:
    """Uniform draws per interval from [low, high], seeded."""

    seed: int = 0
    low: float = -1.0
    high: float = 1.0


InitSpec = Union[SinInit, ConstantInit, RandomInit]


def init_schedule(
    spec: InitSpec | Sequence[InitSpec],
    model: HamiltonianModel,
    total_time: float,
    n_intervals: int,
) -> ControlSchedule:
    """Build an initial schedule from one spec (shared) or one per control."""
    m = model.n_controls
    specs = list(spec) if isinstance(spec, (list, tuple)) else [spec] * m
    if len(specs) != m:
        raise ValueError(f"got {len(specs)} init specs for {m} controls")
    t_mid = (np.arange(n_intervals) + 0.5) * (total_time / n_intervals)
    rows = []
    for s in specs:
        if isinstance(s, SinInit):
            rows.append(s.amplitude * np.sin(t_mid))
        elif isinstance(s, ConstantInit):
            rows.append(np.full(n_intervals, float(s.value)))
        elif isinstance(s, RandomInit):
            rng = np.random.default_rng(s.seed)
            rows.append(rng.uniform(s.low, s.high, n_intervals))
        else:
            raise TypeError(f"unknown init spec {s!r}")
    return clip(ControlSchedule(total_time, np.array(rows)), model)


def clip(schedule: ControlSchedule, model: HamiltonianModel) -> ControlSchedule:
    """Project every amplitude onto its control's bound interval."""
    lo, hi = model.bounds_arrays()
    return ControlSchedule(
        schedule.total_time, np.clip(schedule.values, lo[:, None], hi[:, None])
    )


def resample(schedule: ControlSchedule, n_new: int) -> ControlSchedule:
    """Re-grid to ``n_new`` intervals, averaging the old step function.

    The new value on each interval is the time average of the old
    piecewise-constant field there, so the time integral of every control
    is preserved.
    """
    if n_new < 1:
        raise ValueError("n_new must be >= 1")
    n_old = schedule.n_intervals
    if n_new == n_old:
        return schedule.copy()
    t = schedule.total_time
    old_edges = np.arange(n_old + 1) * (t / n_old)
    new_edges = np.arange(n_new + 1) * (t / n_new)
    values = np.zeros((schedule.n_controls, n_new))
    for k in range(n_new):
        lo, hi = new_edges[k], new_edges[k + 1]
        overlap = np.clip(np.minimum(old_edges[1:], hi) - np.maximum(old_edges[:-1], lo), 0.0, None)
        values[:, k] = schedule.values @ overlap / (hi - lo)
    return ControlSchedule(t, values)


def write_csv(schedule: ControlSchedule, path) -> None:
    """Write the pulse table: ``t_start,t_end,u_0,...``, one row per interval."""
    n, m = schedule.n_intervals, schedule.n_controls
    tt = schedule.total_time
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_start", "t_end"] + [f"u_{i}" for i in range(m)])
        for j in range(n):
            row = [j * tt / n, (j + 1) * tt / n] + list(schedule.values[:, j])
            writer.writerow(f"{x:.17g}" for x in row)


def read_csv(path) -> ControlSchedule:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["t_start", "t_end"] or len(header) < 3:
            raise ValueError(f"{path}: not a pulse table (header {header})")
        rows = [[float(x) for x in row] for row in reader]
    if not rows:
        raise ValueError(f"{path}: empty pulse table")
    total_time = rows[-1][1]
    values = np.array([row[2:] for row in rows]).T
    return ControlSchedule(total_time, values)
