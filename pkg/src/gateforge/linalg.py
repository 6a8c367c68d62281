"""Dense complex linear algebra for propagator arithmetic.

Everything here operates on plain ``numpy`` arrays of ``complex128``. The
dimensions in this package are tiny (2, 4, or 16), so all storage is dense
and row-major; there is no sparse path.

Vectorization convention used throughout the package: column stacking,
``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["expm", "kron", "hs_inner", "vec", "unvec", "dagger"]

_ANTIHERM_TOL = 1e-12


class DimensionError(ValueError):
    """Operands have incompatible or non-square shapes."""


class NumericInputError(ValueError):
    """Input contains NaN or Inf entries."""


def _as_square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise NumericInputError(f"{name} contains non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose (works on stacks: last two axes)."""
    return np.conj(np.swapaxes(a, -1, -2))


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square complex matrix.

    2x2 anti-Hermitian inputs (the dominant case: single-qubit propagator
    generators ``-1j*H*dt``) take a closed-form rotation-formula path;
    everything else goes through scipy's scaling-and-squaring Pade
    implementation.
    """
    a = _as_square(a)
    if a.shape == (2, 2) and np.abs(a + dagger(a)).max() <= _ANTIHERM_TOL * max(
        1.0, np.abs(a).max()
    ):
        # a = -1j*h*t for Hermitian h; reuse the batched closed form.
        h = 1j * a
        return unitary_step(h[None], 1.0)[0]
    return scipy.linalg.expm(a)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square matrices."""
    a = _as_square(a, "first factor")
    b = _as_square(b, "second factor")
    return np.kron(a, b)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``tr(a^dag @ b)``."""
    a = _as_square(a, "first operand")
    b = _as_square(b, "second operand")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v, dtype=complex).ravel()
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vec'ed square matrix")
    return v.reshape(d, d, order="F")


# ---------------------------------------------------------------------------
# Batched kernels used by the propagation loops. These accept stacks of
# matrices with shape (..., d, d) and avoid per-matrix Python overhead.
# ---------------------------------------------------------------------------


def unitary_step(h: np.ndarray, dt: float) -> np.ndarray:
    """``expm(-1j*h*dt)`` for a stack of Hermitian matrices ``h``.

    d=2 uses the closed-form rotation formula (cheap enough for million-step
    optimization runs); larger dimensions diagonalize.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] == 2:
        return _unitary_step_2x2(h, dt)
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * dt * w)
    return (v * phase[..., None, :]) @ dagger(v)


def _unitary_step_2x2(h: np.ndarray, dt: float) -> np.ndarray:
    # Pauli split h = a*I + b.sigma with real a, b.
    a = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    bx = h[..., 0, 1].real
    by = -h[..., 0, 1].imag
    bz = 0.5 * (h[..., 0, 0] - h[..., 1, 1]).real
    b = np.sqrt(bx * bx + by * by + bz * bz)
    theta = b * dt
    c = np.cos(theta)
    # sin(theta)/b, with the b -> 0 limit equal to dt
    safe = np.where(b > 0.0, b, 1.0)
    s = np.where(b > 0.0, np.sin(theta) / safe, dt)
    u = np.empty(h.shape, dtype=complex)
    u[..., 0, 0] = c - 1j * s * bz
    u[..., 1, 1] = c + 1j * s * bz
    u[..., 0, 1] = -1j * s * (bx - 1j * by)
    u[..., 1, 0] = -1j * s * (bx + 1j * by)
    return np.exp(-1j * a * dt)[..., None, None] * u


def expm_stack(a: np.ndarray) -> np.ndarray:
    """Exponential of a stack of general square matrices.

    Scaling-and-squaring with an 18-term Taylor core, applied uniformly to
    the whole stack. Meant for the channel-propagation generators, whose
    scaled norms are modest; accuracy is at machine level for norms up to
    the scaling cap.
    """
    a = np.asarray(a, dtype=complex)
    d = a.shape[-1]
    norm = np.abs(a).sum(axis=-1).max() if a.size else 0.0  # max row-sum norm
    s = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    x = a / (2.0**s)
    eye = np.broadcast_to(np.eye(d, dtype=complex), a.shape)
    t = eye.copy()
    for k in range(18, 0, -1):
        t = eye + (x @ t) / k
    for _ in range(s):
        t = t @ t
    return t
