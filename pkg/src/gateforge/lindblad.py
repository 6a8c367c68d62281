"""Open-system pulse optimization on Lindblad dynamics.

The density matrix is column-stacked, turning the master equation into a
linear ODE ``vec(rho_dot) = L vec(rho)``; the channel accumulated over the
schedule is the ordered product of the per-interval step maps
``G_j = expm(L_j * dt)``. The target unitary is lifted to its conjugation
superoperator ``S_F = kron(conj(U_F), U_F)``, and the open-system fidelity
is ``|tr(S_F^dag G(T))| / 4**q`` so that an exactly realized (global-phase
equivalent) unitary channel scores 1. The ``1/2**q`` normalization printed
in the source material cannot normalize a d^2-dimensional trace; it stays
available via ``literal_normalization`` for comparison.

Gradients mirror the unitary module: first order in dt with the generator
derivative inserted at the interval midpoint. The backward partial
products are accumulated exactly (step maps are not unitary, so the
adjoint chain is not a rearrangement of the forward one).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DimensionError, dagger, expm_stack, hs_inner, kron
from .model import (
    LindbladModel,
    TargetGate,
    UncertaintySample,
    dissipator_superoperator,
    hamiltonian_superoperator,
)
from .grape import OptimizationConfig, OptimizationReport, ascend
from .pulse import ControlSchedule

__all__ = [
    "OpenTarget",
    "ChannelChain",
    "open_target",
    "propagate_channel",
    "open_fidelity",
    "open_gradient",
    "open_optimize",
    "choi_matrix",
]


@dataclass
class OpenTarget:
    """A unitary gate lifted to superoperator space."""

    gate: TargetGate
    superoperator: np.ndarray
    normalization: float

    @property
    def dim(self) -> int:
        return self.gate.dim


def open_target(gate: TargetGate, literal_normalization: bool = False) -> OpenTarget:
    """Lift ``U_F`` to ``S_F = kron(conj(U_F), U_F)`` with its trace normalizer."""
    sf = kron(gate.matrix.conj(), gate.matrix)
    norm = float(gate.dim if literal_normalization else gate.dim**2)
    return OpenTarget(gate=gate, superoperator=sf, normalization=norm)


@dataclass
class ChannelChain:
    """Per-interval channel step maps and their forward partial products."""

    steps: np.ndarray      # (N, d^2, d^2)
    dt: float
    partials: np.ndarray   # (N+1, d^2, d^2)

    @property
    def terminal(self) -> np.ndarray:
        return self.partials[-1]


class OpenEnsemble:
    """Batched channel propagation/gradient over uncertainty samples.

    Presents the same evaluator surface as the unitary ensemble so the
    shared ascent loop drives both.
    """

    def __init__(
        self,
        model: LindbladModel,
        samples: Sequence[UncertaintySample],
        target: OpenTarget,
    ):
        if target.dim != model.dim:
            raise DimensionError(f"target dim {target.dim} != model dim {model.dim}")
        self.model = model
        self.target = target
        self.dim = model.dim  # step normalization uses the gate dimension
        self.sdim = model.dim**2
        self.fidelity_norm = target.normalization
        ham = model.hamiltonian
        drift_sup = hamiltonian_superoperator(ham.drift_coefficient * ham.drift)
        diss = [
            (t.rate, t.channel, dissipator_superoperator(t.operator))
            for t in model.collapse_terms
        ]
        l_const = []
        for s in samples:
            l = s.epsilon(ham.drift_channel) * drift_sup
            for rate, channel, dsup in diss:
                eff = s.epsilon(channel) * rate
                if eff < 0:
                    raise ValueError("negative effective collapse rate in sample")
                l = l + eff * dsup
            l_const.append(l)
        self.l_const = np.stack(l_const)
        ctrl_sups = [hamiltonian_superoperator(c.operator) for c in ham.controls]
        if ctrl_sups:
            eps_c = np.array(
                [[s.epsilon(c.channel) for c in ham.controls] for s in samples]
            )
            self.lm_eff = eps_c[:, :, None, None] * np.stack(ctrl_sups)[None]
        else:
            self.lm_eff = np.zeros((len(samples), 0, self.sdim, self.sdim), dtype=complex)
        self.n_samples = len(samples)

    def _steps(self, u: np.ndarray, dt: float):
        l = self.l_const[:, None] + np.einsum("mj,smab->sjab", u, self.lm_eff)
        g_half = expm_stack(l * (dt / 2.0))
        return g_half, g_half @ g_half

    def evolve(self, u: np.ndarray, dt: float):
        g_half, g_full = self._steps(u, dt)
        s, n = self.n_samples, u.shape[1]
        a = np.empty((s, n + 1, self.sdim, self.sdim), dtype=complex)
        a[:, 0] = np.eye(self.sdim)
        for j in range(n):
            a[:, j + 1] = g_full[:, j] @ a[:, j]
        return g_half, g_full, a

    def overlaps(self, u: np.ndarray, dt: float) -> np.ndarray:
        _, _, a = self.evolve(u, dt)
        return np.einsum("ab,sab->s", self.target.superoperator.conj(), a[:, -1])

    def overlaps_and_gradient(self, u: np.ndarray, dt: float):
        g_half, g_full, a = self.evolve(u, dt)
        sf = self.target.superoperator
        z = np.einsum("ab,sab->s", sf.conj(), a[:, -1])
        n = u.shape[1]
        a_mid = g_half @ a[:, :-1]
        # adjoint chain B_j = (G_N ... G_{j+1} Ghalf_j)^dag S_F, built backward
        b = np.empty_like(a_mid)
        p = np.broadcast_to(sf, (self.n_samples, self.sdim, self.sdim)).copy()
        for j in range(n - 1, -1, -1):
            b[:, j] = dagger(g_half[:, j]) @ p
            p = dagger(g_full[:, j]) @ p
        la = np.einsum("smab,sjbc->smjac", self.lm_eff, a_mid)
        inner = np.einsum("sjab,smjab->smj", b.conj(), la)
        g = 2.0 * np.real(dt * inner * np.conj(z)[:, None, None])
        return z, g


def propagate_channel(
    model: LindbladModel,
    sample: UncertaintySample,
    schedule: ControlSchedule,
) -> ChannelChain:
    """Channel step maps G_j = expm(L_j dt) and their running products."""
    _check_schedule(model, schedule)
    ens = OpenEnsemble(model, [sample], _identity_open_target(model.dim))
    _, steps, a = ens.evolve(schedule.values, schedule.dt)
    return ChannelChain(steps=steps[0], dt=schedule.dt, partials=a[0])


def open_fidelity(target: OpenTarget, g_t: np.ndarray) -> float:
    """|tr(S_F^dag G(T))| / normalization (4**q by default)."""
    return abs(hs_inner(target.superoperator, g_t)) / target.normalization


def open_gradient(
    model: LindbladModel,
    sample: UncertaintySample,
    schedule: ControlSchedule,
    target: OpenTarget,
) -> np.ndarray:
    """d |tr(S_F^dag G(T))|^2 / d u[m, j] as an (M, N) table."""
    _check_schedule(model, schedule)
    ens = OpenEnsemble(model, [sample], target)
    _, g = ens.overlaps_and_gradient(schedule.values, schedule.dt)
    return g[0]


def open_optimize(
    model: LindbladModel,
    samples: UncertaintySample | Sequence[UncertaintySample],
    schedule0: ControlSchedule,
    target: OpenTarget,
    config: OptimizationConfig,
) -> OptimizationReport:
    """Gradient ascent on the (sample-averaged) open-system overlap."""
    if isinstance(samples, UncertaintySample):
        samples = [samples]
    _check_schedule(model, schedule0)
    ens = OpenEnsemble(model, samples, target)
    lo, hi = model.hamiltonian.bounds_arrays()
    return ascend(ens, schedule0, lo, hi, config)


def choi_matrix(superop: np.ndarray) -> np.ndarray:
    """Choi matrix of a column-stacking superoperator.

    Built directly from the action on the matrix units; positive
    semidefiniteness certifies complete positivity.
    """
    d2 = superop.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2 or superop.shape != (d2, d2):
        raise DimensionError(f"not a square superoperator: shape {superop.shape}")
    c = np.zeros((d2, d2), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            image = (superop @ e.reshape(-1, order="F")).reshape(d, d, order="F")
            c += np.kron(e, image)
    return c


def _check_schedule(model: LindbladModel, schedule: ControlSchedule) -> None:
    if schedule.n_controls != model.hamiltonian.n_controls:
        raise DimensionError(
            f"schedule has {schedule.n_controls} controls, "
            f"model has {model.hamiltonian.n_controls}"
        )


def _identity_open_target(dim: int) -> OpenTarget:
    q = int(round(np.log2(dim)))
    gate = TargetGate(name="custom", matrix=np.eye(dim, dtype=complex), qubits=q)
    return open_target(gate)
