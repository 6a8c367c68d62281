import numpy as np
import pytest

from gateforge.linalg import (
    DimensionError,
    NumericInputError,
    dagger,
    expm,
    expm_stack,
    hs_inner,
    kron,
    unitary_step,
    unvec,
    vec,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def taylor_expm(a, terms=30):
    """Independent oracle: scaling + long Taylor series + squaring."""
    norm = np.abs(a).sum(axis=-1).max()
    s = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0)
    x = a / 2.0**s
    acc = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ x / k
        acc = acc + term
    for _ in range(s):
        acc = acc @ acc
    return acc


def random_antihermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (a + a.conj().T) / 2
    return -1j * scale * h


def test_expm_zero_is_identity():
    assert np.array_equal(expm(np.zeros((2, 2))), np.eye(2))


def test_expm_pauli_rotation():
    got = expm(-1j * (np.pi / 2) * SX)
    want = np.array([[0, -1j], [-1j, 0]])
    assert np.abs(got - want).max() < 1e-14


@pytest.mark.parametrize("d", [2, 4])
def test_expm_matches_taylor_oracle(d):
    rng = np.random.default_rng(42)
    for _ in range(10):
        a = random_antihermitian(rng, d, scale=2.0)
        assert np.abs(expm(a) - taylor_expm(a)).max() < 1e-10


def test_expm_accuracy_at_large_norm():
    # contract covers norms up to 50
    rng = np.random.default_rng(3)
    for d in (2, 4):
        a = random_antihermitian(rng, d)
        a *= 50.0 / np.linalg.norm(a, 2)
        e = expm(a)
        o = taylor_expm(a, terms=40)
        rel = np.linalg.norm(e - o) / np.linalg.norm(o)
        assert rel < 1e-12


def test_expm_inverse_property():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = random_antihermitian(rng, 4, scale=5.0)
        prod = expm(a) @ expm(-a)
        assert np.linalg.norm(prod - np.eye(4)) < 1e-10


def test_expm_antihermitian_gives_unitary():
    rng = np.random.default_rng(11)
    for d in (2, 4):
        u = expm(random_antihermitian(rng, d, scale=3.0))
        assert np.linalg.norm(dagger(u) @ u - np.eye(d)) < 1e-10


def test_expm_rejects_bad_input():
    with pytest.raises(DimensionError):
        expm(np.zeros((2, 3)))
    with pytest.raises(NumericInputError):
        expm(np.array([[np.nan, 0], [0, 1]], dtype=complex))


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(SZ, SZ), np.diag([1, -1, -1, 1]).astype(complex))


def test_kron_index_formula():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    k = kron(a, b)
    for i in range(2):
        for j in range(2):
            for l in range(2):
                for m in range(2):
                    assert abs(k[i * 2 + l, j * 2 + m] - a[i, j] * b[l, m]) < 1e-15


def test_kron_mixed_product_and_associativity():
    rng = np.random.default_rng(1)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    lhs = kron(a, b) @ kron(c, d)
    rhs = kron(a @ c, b @ d)
    assert np.abs(lhs - rhs).max() < 1e-12
    # with exactly representable entries associativity is exact
    e, f, g = (rng.integers(-3, 4, size=(2, 2)).astype(complex) + 1j * rng.integers(-3, 4, size=(2, 2))
               for _ in range(3))
    assert np.array_equal(kron(kron(e, f), g), kron(e, kron(f, g)))


def test_hs_inner_basics():
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    assert abs(hs_inner(SX, SZ)) == 0
    u = expm(random_antihermitian(np.random.default_rng(5), 4))
    assert abs(hs_inner(u, u) - 4) < 1e-12


def test_hs_inner_conjugate_symmetry():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert abs(hs_inner(a, b) - np.conj(hs_inner(b, a))) < 1e-13


def test_hs_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        hs_inner(np.eye(2), np.eye(4))


def test_vec_column_stacking_convention():
    rng = np.random.default_rng(2)
    a, rho, b = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    lhs = vec(a @ rho @ b)
    rhs = kron(b.T, a) @ vec(rho)
    assert np.abs(lhs - rhs).max() < 1e-13
    assert np.array_equal(unvec(vec(rho)), rho)


def test_unitary_step_matches_expm():
    rng = np.random.default_rng(21)
    for d in (2, 4):
        h = rng.normal(size=(3, d, d)) + 1j * rng.normal(size=(3, d, d))
        h = (h + dagger(h)) / 2
        got = unitary_step(h, 0.37)
        for k in range(3):
            want = expm(-1j * h[k] * 0.37) if d > 2 else taylor_expm(-1j * h[k] * 0.37)
            assert np.abs(got[k] - want).max() < 1e-12


def test_expm_stack_matches_taylor():
    rng = np.random.default_rng(23)
    a = rng.normal(size=(5, 4, 4)) + 1j * rng.normal(size=(5, 4, 4))
    got = expm_stack(a)
    for k in range(5):
        assert np.abs(got[k] - taylor_expm(a[k])).max() < 1e-11
