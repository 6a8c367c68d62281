"""Sampling-based learning control: grid training and Monte-Carlo testing.

Training evolves every sample of a deterministic uncertainty grid under one
shared schedule and ascends the sample-averaged objective; testing draws
fresh random samples and reports fidelity statistics. Both work on closed
(unitary) and open (Lindblad) dynamics, dispatched on the model type.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .grape import OptimizationConfig, OptimizationReport, UnitaryEnsemble, ascend
from .lindblad import OpenEnsemble, OpenTarget, open_target
from .model import (
    HamiltonianModel,
    LindbladModel,
    TargetGate,
    UncertaintyModel,
    UncertaintySample,
)
from .pulse import ControlSchedule

__all__ = [
    "TestReport",
    "training_grid",
    "augmented_fidelity",
    "augmented_gradient",
    "train",
    "test",
    "draw_samples",
]

_HISTOGRAM_BINS = 20


@dataclass
class TestReport:
    """Statistics of fidelities over randomly drawn uncertainty samples."""

    count: int
    mean: float
    min: float
    max: float
    std: float
    histogram_counts: list[int]
    histogram_edges: list[float]
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def training_grid(uncertainty: UncertaintyModel) -> list[UncertaintySample]:
    """Cartesian grid of per-channel cell midpoints of [1-E, 1+E].

    Channel k with grid count n contributes values
    ``(1-E) + (E/n)*(2m-1)`` for m = 1..n. Degenerate channels (E=0)
    collapse to the single nominal value, deduplicating the grid.
    """
    axes = []
    ids = []
    for ch in uncertainty.channels:
        vals = [
            (1.0 - ch.bound) + (ch.bound / ch.grid_count) * (2 * m - 1)
            for m in range(1, ch.grid_count + 1)
        ]
        # E=0 (or repeated values) add nothing but cost
        unique = sorted(set(vals))
        axes.append(unique)
        ids.append(ch.id)
    return [
        UncertaintySample(dict(zip(ids, combo)))
        for combo in itertools.product(*axes)
    ]


def _ensemble(model, samples, target):
    if isinstance(model, LindbladModel):
        ot = target if isinstance(target, OpenTarget) else open_target(target)
        return OpenEnsemble(model, samples, ot)
    return UnitaryEnsemble(model, samples, target)


def _bounds(model):
    ham = model.hamiltonian if isinstance(model, LindbladModel) else model
    return ham.bounds_arrays()


def augmented_fidelity(
    model: HamiltonianModel | LindbladModel,
    samples: Sequence[UncertaintySample],
    schedule: ControlSchedule,
    target,
) -> float:
    """Arithmetic mean of per-sample gate fidelities under one schedule."""
    ens = _ensemble(model, samples, target)
    z = ens.overlaps(schedule.values, schedule.dt)
    return float((np.abs(z) / ens.fidelity_norm).mean())


def augmented_gradient(
    model: HamiltonianModel | LindbladModel,
    samples: Sequence[UncertaintySample],
    schedule: ControlSchedule,
    target,
) -> np.ndarray:
    """Sample-mean of the per-sample overlap-objective gradients, (M, N)."""
    ens = _ensemble(model, samples, target)
    _, g = ens.overlaps_and_gradient(schedule.values, schedule.dt)
    return g.mean(axis=0)


def train(
    model: HamiltonianModel | LindbladModel,
    uncertainty: UncertaintyModel,
    schedule0: ControlSchedule,
    target,
    config: OptimizationConfig,
) -> OptimizationReport:
    """Gradient ascent on the training-grid-averaged objective."""
    samples = training_grid(uncertainty)
    ens = _ensemble(model, samples, target)
    lo, hi = _bounds(model)
    report = ascend(ens, schedule0, lo, hi, config)
    report.extra["training_samples"] = len(samples)
    return report


def draw_samples(
    uncertainty: UncertaintyModel, count: int, rng: np.random.Generator
) -> list[UncertaintySample]:
    """Random samples per channel distribution (uniform or truncated gaussian).

    The gaussian option is centered at 1 with sigma = E/2, redrawn until it
    lands inside [1-E, 1+E].
    """
    columns = {}
    for ch in uncertainty.channels:
        lo, hi = 1.0 - ch.bound, 1.0 + ch.bound
        if ch.distribution == "uniform" or ch.bound == 0.0:
            columns[ch.id] = rng.uniform(lo, hi, count)
        else:
            sigma = ch.bound / 2.0
            vals = np.empty(count)
            remaining = np.arange(count)
            while remaining.size:
                draw = rng.normal(1.0, sigma, remaining.size)
                ok = (draw >= lo) & (draw <= hi)
                vals[remaining[ok]] = draw[ok]
                remaining = remaining[~ok]
            columns[ch.id] = vals
    ids = list(columns)
    return [
        UncertaintySample({cid: float(columns[cid][i]) for cid in ids})
        for i in range(count)
    ]


def test(
    model: HamiltonianModel | LindbladModel,
    uncertainty: UncertaintyModel,
    schedule: ControlSchedule,
    target,
    count: int = 2000,
    seed: int = 0,
) -> TestReport:
    """Monte-Carlo fidelity statistics for a fixed schedule; deterministic per seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    samples = draw_samples(uncertainty, count, rng)
    ens = _ensemble(model, samples, target)
    z = ens.overlaps(schedule.values, schedule.dt)
    fids = np.abs(z) / ens.fidelity_norm
    counts, edges = np.histogram(fids, bins=_HISTOGRAM_BINS)
    return TestReport(
        count=count,
        mean=float(fids.mean()),
        min=float(fids.min()),
        max=float(fids.max()),
        std=float(fids.std()),
        histogram_counts=[int(c) for c in counts],
        histogram_edges=[float(e) for e in edges],
        seed=seed,
    )
