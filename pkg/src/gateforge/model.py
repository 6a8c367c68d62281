"""System models: target gates, controlled Hamiltonians, Lindblad terms.

A :class:`HamiltonianModel` is a drift operator plus a list of control
operators, each optionally tagged with a multiplicative uncertainty channel.
An :class:`UncertaintySample` assigns a concrete multiplier ``eps`` to each
channel id; untagged terms (and channels missing from a sample) use
``eps = 1``.

Unit handling: frequencies given in GHz with times in ns are used directly
as rad/ns (no 2*pi factor is inserted), matching the dimensionless
atomic-units convention of the one-qubit problems. hbar = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .linalg import dagger, kron

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Basis ordering |0> = (1, 0)^T; sigma_minus lowers |1> to |0>.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)

_HERM_TOL = 1e-12
_UNITARY_TOL = 1e-12


class ModelError(ValueError):
    """A model violates one of its structural invariants."""


def _is_hermitian(a: np.ndarray, tol: float = _HERM_TOL) -> bool:
    return bool(np.abs(a - dagger(a)).max() <= tol)


@dataclass(frozen=True)
class TargetGate:
    """A unitary gate to synthesize."""

    name: str
    matrix: np.ndarray
    qubits: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        d = 2**self.qubits
        if m.shape != (d, d):
            raise ModelError(f"gate {self.name}: expected {d}x{d} matrix, got {m.shape}")
        if np.abs(dagger(m) @ m - np.eye(d)).max() > _UNITARY_TOL:
            raise ModelError(f"gate {self.name}: matrix is not unitary")

    @property
    def dim(self) -> int:
        return 2**self.qubits


_STANDARD_GATES = {
    "H": (np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2), 1),
    "S": (np.diag([1.0, 1.0j]), 1),
    "T_pi8": (np.diag([1.0, np.exp(1j * np.pi / 4)]), 1),
    "CNOT": (
        np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        ),
        2,
    ),
}


def standard_gate(name: str) -> TargetGate:
    """One of the universal set: ``H``, ``S``, ``T_pi8``, ``CNOT``."""
    try:
        matrix, q = _STANDARD_GATES[name]
    except KeyError:
        known = ", ".join(sorted(_STANDARD_GATES))
        raise ModelError(f"unknown gate {name!r} (known: {known})") from None
    return TargetGate(name=name, matrix=matrix.copy(), qubits=q)


@dataclass(frozen=True)
class ControlTerm:
    """One control operator u_m(t) * H_m with amplitude bounds."""

    operator: np.ndarray
    bounds: tuple[float, float] = (-np.inf, np.inf)
    channel: str | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "operator", np.asarray(self.operator, dtype=complex))
        lo, hi = self.bounds
        if not lo < hi:
            raise ModelError(f"control {self.name or '?'}: bounds must satisfy lo < hi")


@dataclass(frozen=True)
class HamiltonianModel:
    """Drift plus piecewise-constant control terms.

    ``H(eps, u) = eps_0 * coeff * drift + sum_m eps_m * u_m * H_m``.
    """

    drift: np.ndarray
    drift_coefficient: float = 1.0
    drift_channel: str | None = None
    controls: tuple[ControlTerm, ...] = ()
    unit_system: str = "atomic-units"

    def __post_init__(self):
        object.__setattr__(self, "drift", np.asarray(self.drift, dtype=complex))
        object.__setattr__(self, "controls", tuple(self.controls))
        if not _is_hermitian(self.drift):
            raise ModelError("drift operator is not Hermitian")
        d = self.drift.shape[0]
        for c in self.controls:
            if c.operator.shape != (d, d):
                raise ModelError(
                    f"control {c.name or '?'}: dim {c.operator.shape[0]} != drift dim {d}"
                )
            if not _is_hermitian(c.operator):
                raise ModelError(f"control {c.name or '?'}: operator is not Hermitian")

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([c.bounds[0] for c in self.controls])
        hi = np.array([c.bounds[1] for c in self.controls])
        return lo, hi

    def channel_ids(self) -> list[str]:
        """Channel ids referenced by this model, drift first, no duplicates."""
        ids = []
        for ch in [self.drift_channel] + [c.channel for c in self.controls]:
            if ch is not None and ch not in ids:
                ids.append(ch)
        return ids


@dataclass(frozen=True)
class CollapseTerm:
    """A Lindblad dissipator sqrt(rate) * c with optional rate uncertainty."""

    operator: np.ndarray
    rate: float
    channel: str | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "operator", np.asarray(self.operator, dtype=complex))
        if self.rate < 0:
            raise ModelError(f"collapse term {self.name or '?'}: negative rate")


@dataclass(frozen=True)
class LindbladModel:
    """Markovian open system: Hamiltonian part plus collapse terms."""

    hamiltonian: HamiltonianModel
    collapse_terms: tuple[CollapseTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "collapse_terms", tuple(self.collapse_terms))
        d = self.hamiltonian.dim
        for t in self.collapse_terms:
            if t.operator.shape != (d, d):
                raise ModelError(f"collapse term {t.name or '?'}: wrong dimension")

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def channel_ids(self) -> list[str]:
        ids = self.hamiltonian.channel_ids()
        for t in self.collapse_terms:
            if t.channel is not None and t.channel not in ids:
                ids.append(t.channel)
        return ids


@dataclass(frozen=True)
class UncertaintyChannel:
    """A multiplicative parameter eps in [1-bound, 1+bound] on tagged terms."""

    id: str
    bound: float
    grid_count: int = 5
    distribution: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.bound < 1.0:
            raise ModelError(f"channel {self.id}: bound must lie in [0, 1)")
        if self.grid_count < 1:
            raise ModelError(f"channel {self.id}: grid_count must be >= 1")
        if self.distribution not in ("uniform", "gaussian"):
            raise ModelError(f"channel {self.id}: unknown distribution {self.distribution!r}")


@dataclass(frozen=True)
class UncertaintyModel:
    channels: tuple[UncertaintyChannel, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        seen = set()
        for ch in self.channels:
            if ch.id in seen:
                raise ModelError(f"duplicate uncertainty channel id {ch.id!r}")
            seen.add(ch.id)


@dataclass(frozen=True)
class UncertaintySample:
    """Concrete eps values for some subset of channels (absent => 1.0)."""

    epsilons: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "epsilons", dict(self.epsilons))

    def epsilon(self, channel: str | None) -> float:
        if channel is None:
            return 1.0
        return self.epsilons.get(channel, 1.0)

    @classmethod
    def nominal(cls) -> "UncertaintySample":
        return cls({})


def hamiltonian_at(
    model: HamiltonianModel,
    sample: UncertaintySample,
    amplitudes: Sequence[float],
) -> np.ndarray:
    """Assemble the Hamiltonian for one interval's control amplitudes."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape != (model.n_controls,):
        raise ModelError(
            f"expected {model.n_controls} amplitudes, got shape {amplitudes.shape}"
        )
    h = sample.epsilon(model.drift_channel) * model.drift_coefficient * model.drift
    for u, c in zip(amplitudes, model.controls):
        h = h + sample.epsilon(c.channel) * u * c.operator
    return h


def hamiltonian_superoperator(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``-1j*[h, .]`` under column stacking."""
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    return -1j * (kron(eye, h) - kron(h.T, eye))


def dissipator_superoperator(c: np.ndarray) -> np.ndarray:
    """Superoperator of ``D[c]rho = c rho c^dag - {c^dag c, rho}/2``."""
    d = c.shape[0]
    eye = np.eye(d, dtype=complex)
    cdc = dagger(c) @ c
    return kron(c.conj(), c) - 0.5 * kron(eye, cdc) - 0.5 * kron(cdc.T, eye)


def liouvillian(
    model: LindbladModel,
    sample: UncertaintySample,
    amplitudes: Sequence[float],
) -> np.ndarray:
    """Generator L with ``vec(rho_dot) = L @ vec(rho)``.

    Collapse rates are scaled by their channel's eps when tagged; a sample
    that would drive any effective rate negative is rejected.
    """
    h = hamiltonian_at(model.hamiltonian, sample, amplitudes)
    lv = hamiltonian_superoperator(h)
    for t in model.collapse_terms:
        rate = sample.epsilon(t.channel) * t.rate
        if rate < 0:
            raise ModelError(f"collapse term {t.name or '?'}: effective rate < 0")
        lv = lv + rate * dissipator_superoperator(t.operator)
    return lv
