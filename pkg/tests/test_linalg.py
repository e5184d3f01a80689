import numpy as np
import pytest

from ncgalois import linalg
from ncgalois.errors import DimensionMismatch, NotHermitian, NotPositiveDefinite
from ncgalois.linalg import (
    Subspace,
    hermitian_eig,
    matrix_imaginary_power,
    nullspace,
    subspace_contains,
    subspace_equal,
)


def test_eig_already_diagonal():
    w, v = hermitian_eig(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(w, [1.0, 2.0])
    # ascending order swaps the basis vectors: V is the flip permutation
    np.testing.assert_allclose(np.abs(v), np.array([[0.0, 1.0], [1.0, 0.0]]),
                               atol=1e-14)


def test_eig_pauli_x():
    w, v = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [-1.0, 1.0])
    expected = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
    np.testing.assert_allclose(np.abs(v), np.abs(expected), atol=1e-14)


def test_eig_reconstruction_random(rng):
    # reconstruction oracle: V diag(w) V* must reproduce the input
    for n in (2, 5, 9):
        a = linalg.random_hermitian(n, rng)
        w, v = hermitian_eig(a)
        rebuilt = (v * w) @ v.conj().T
        assert linalg.frob(rebuilt - a) <= 1e-10 * max(1.0, linalg.frob(a))
        assert linalg.frob(v.conj().T @ v - np.eye(n)) < 1e-12


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_deterministic(rng):
    a = linalg.random_hermitian(6, rng)
    w1, v1 = hermitian_eig(a)
    w2, v2 = hermitian_eig(a.copy())
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


def test_nullspace_identity_and_zero():
    assert nullspace(np.eye(3)).dim == 0
    assert nullspace(np.zeros((2, 3))).dim == 3


def test_nullspace_rank_one():
    ns = nullspace(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert ns.dim == 1
    expected = np.array([1.0, -1.0]) / np.sqrt(2)
    overlap = abs(np.vdot(ns.basis[:, 0], expected))
    assert overlap > 1 - 1e-12


def test_nullspace_rank_nullity(rng):
    for _ in range(5):
        a = rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7))
        a[:, 3] = a[:, 0] + a[:, 1]  # force rank deficiency of the column map
        ns = nullspace(a)
        rank = np.linalg.matrix_rank(a)
        assert ns.dim + rank == 7
        assert ns.residual(np.zeros(7)) == 0
        assert np.max(np.abs(a @ ns.basis)) < 1e-10


def test_imaginary_power_identity_and_zero_t():
    np.testing.assert_allclose(matrix_imaginary_power(np.eye(3), 0.7), np.eye(3))
    np.testing.assert_allclose(matrix_imaginary_power(np.diag([4.0, 1.0]), 0.0), np.eye(2))


def test_imaginary_power_explicit_phase():
    # diag(4,1) at t = pi/ln 4 gives diag(-1, 1) since 4^(it) = e^(it ln 4)
    t = np.pi / np.log(4.0)
    out = matrix_imaginary_power(np.diag([4.0, 1.0]), t)
    np.testing.assert_allclose(out, np.diag([-1.0, 1.0]), atol=1e-12)


def test_imaginary_power_group_law(rng):
    for _ in range(5):
        a = linalg.random_hermitian(4, rng)
        p = a @ a.conj().T + 0.3 * np.eye(4)
        s, t = rng.uniform(-10, 10, size=2)
        lhs = matrix_imaginary_power(p, s) @ matrix_imaginary_power(p, t)
        rhs = matrix_imaginary_power(p, s + t)
        assert linalg.frob(lhs - rhs) < 1e-9
        u = matrix_imaginary_power(p, t)
        assert linalg.frob(u.conj().T @ u - np.eye(4)) < 1e-11


def test_imaginary_power_rejects_singular():
    with pytest.raises(NotPositiveDefinite):
        matrix_imaginary_power(np.diag([1.0, 0.0]), 1.0)


def test_subspace_equality_same_plane():
    s1 = Subspace.from_span(np.array([[1, 1, 0], [1, -1, 0]], dtype=complex), 3)
    s2 = Subspace.from_span(np.array([[1, 0, 0], [0, 1, 0]], dtype=complex), 3)
    assert subspace_equal(s1, s2)
    assert s1.equals(s1)


def test_subspace_distinct_lines():
    e1 = Subspace.from_span(np.array([[1, 0]], dtype=complex), 2)
    e2 = Subspace.from_span(np.array([[0, 1]], dtype=complex), 2)
    assert not subspace_equal(e1, e2)
    assert not subspace_contains(e1, e2)


def test_subspace_dimension_mismatch():
    s1 = Subspace.from_span(np.array([[1, 0]], dtype=complex), 2)
    s2 = Subspace.from_span(np.array([[1, 0, 0]], dtype=complex), 3)
    with pytest.raises(DimensionMismatch):
        subspace_equal(s1, s2)


def test_subspace_intersection(rng):
    # span{e1,e2} cap span{e2,e3} = span{e2}
    a = Subspace.from_span(np.eye(4, dtype=complex)[[0, 1]], 4)
    b = Subspace.from_span(np.eye(4, dtype=complex)[[1, 2]], 4)
    inter = a.intersect(b)
    assert inter.dim == 1
    assert abs(np.abs(inter.basis[1, 0]) - 1.0) < 1e-12
