import numpy as np
import pytest

from dbpsim.errors import DimensionMismatch, NotPositiveDefinite
from dbpsim.numerics import (
    cholesky,
    gram,
    hermitian_inverse,
    inverse_diagonal_from_factor,
    solve_cholesky,
)

rng = np.random.default_rng(1234)


def random_channel(rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_spd(n, ridge=0.5):
    h = random_channel(4 * n, n)
    return gram(h) + ridge * np.eye(n)


def brute_force_gram(h):
    rows, cols = h.shape
    g = np.zeros((cols, cols), dtype=complex)
    for i in range(cols):
        for j in range(cols):
            for k in range(rows):
                g[i, j] += np.conj(h[k, i]) * h[k, j]
    return g


class TestGram:
    def test_identity(self):
        assert np.array_equal(gram(np.eye(2, dtype=complex)), np.eye(2))

    def test_single_column(self):
        h = np.array([[1.0], [1j]])
        g = gram(h)
        assert g.shape == (1, 1)
        assert g[0, 0] == pytest.approx(2.0)

    def test_matches_brute_force(self):
        h = random_channel(4, 2)
        g = gram(h)
        ref = brute_force_gram(h)
        assert np.max(np.abs(g - ref)) <= 1e-13 * np.max(np.abs(ref))

    def test_exactly_hermitian(self):
        for _ in range(10):
            g = gram(random_channel(32, 16))
            assert np.array_equal(g, g.conj().T)

    def test_positive_semidefinite(self):
        g = gram(random_channel(8, 8))
        assert np.linalg.eigvalsh(g).min() >= -1e-12

    def test_rejects_nonfinite(self):
        h = np.full((2, 2), np.nan, dtype=complex)
        with pytest.raises(ValueError):
            gram(h)


class TestCholesky:
    def test_identity(self):
        assert np.array_equal(cholesky(np.eye(3, dtype=complex)), np.eye(3))

    def test_hand_worked_2x2(self):
        # L L^H reconstructs [[2, i], [-i, 2]] with L = [[sqrt2, 0], [-i/sqrt2, sqrt(3/2)]]
        a = np.array([[2.0, 1j], [-1j, 2.0]])
        l = cholesky(a)
        expected = np.array([[np.sqrt(2), 0], [-1j / np.sqrt(2), np.sqrt(1.5)]])
        assert np.max(np.abs(l - expected)) < 1e-12
        assert np.max(np.abs(l @ l.conj().T - a)) < 1e-12

    def test_reconstruction_recovers_factor(self):
        n = 12
        l0 = np.tril(random_channel(n, n), -1) + np.diag(rng.uniform(0.5, 2.0, n))
        a = l0 @ l0.conj().T
        a = np.tril(a, -1) + np.tril(a, -1).conj().T + np.diag(a.diagonal().real)
        l = cholesky(a)
        assert np.max(np.abs(l - l0)) < 1e-10
        assert np.all(l.diagonal().real > 0)
        assert np.array_equal(l, np.tril(l))

    def test_residual_tolerance(self):
        a = random_spd(16)
        l = cholesky(a)
        rel = np.linalg.norm(l @ l.conj().T - a) / np.linalg.norm(a)
        assert rel < 1e-10

    def test_rejects_non_hermitian(self):
        a = np.array([[1.0, 0.5], [0.0, 1.0]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            cholesky(a)

    def test_rank_deficient_raises(self):
        # Gram of a wide block (fewer antennas than users) is singular
        h = random_channel(3, 8)
        with pytest.raises(NotPositiveDefinite):
            cholesky(gram(h))

    def test_indefinite_raises_with_pivot_info(self):
        a = np.diag([1.0, -1.0]).astype(complex)
        with pytest.raises(NotPositiveDefinite) as info:
            cholesky(a)
        assert info.value.pivot <= info.value.threshold

    def test_non_square_raises(self):
        with pytest.raises(DimensionMismatch):
            cholesky(np.ones((2, 3), dtype=complex))


class TestSolveCholesky:
    def test_identity_factor(self):
        b = np.array([1 + 2j, 3.0])
        assert np.array_equal(solve_cholesky(np.eye(2, dtype=complex), b), b)

    def test_diagonal_system(self):
        l = np.diag([2.0, 3.0]).astype(complex)
        x = solve_cholesky(l, np.array([4.0, 9.0], dtype=complex))
        assert x == pytest.approx([1.0, 1.0])

    def test_matches_inverse_oracle(self):
        a = random_spd(10)
        b = random_channel(10, 1)[:, 0]
        x = solve_cholesky(cholesky(a), b)
        ref = hermitian_inverse(a) @ b
        assert np.max(np.abs(x - ref)) < 1e-9

    def test_matches_dense_solve_oracle(self):
        a = random_spd(10)
        b = random_channel(10, 1)[:, 0]
        x = solve_cholesky(cholesky(a), b)
        assert np.max(np.abs(x - np.linalg.solve(a, b))) < 1e-9

    def test_residual(self):
        a = random_spd(16)
        b = random_channel(16, 3)
        x = solve_cholesky(cholesky(a), b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_cholesky(np.eye(3, dtype=complex), np.ones(4, dtype=complex))


class TestHermitianInverse:
    def test_identity(self):
        assert np.array_equal(hermitian_inverse(np.eye(4, dtype=complex)), np.eye(4))

    def test_diagonal(self):
        inv = hermitian_inverse(np.diag([2.0, 4.0]).astype(complex))
        assert np.allclose(inv, np.diag([0.5, 0.25]), atol=1e-15)

    def test_inverse_residual_8x8(self):
        a = random_spd(8)
        inv = hermitian_inverse(a)
        assert np.linalg.norm(a @ inv - np.eye(8)) < 1e-9
        assert np.array_equal(inv, inv.conj().T)

    def test_matches_columnwise_solves(self):
        a = random_spd(6)
        l = cholesky(a)
        cols = solve_cholesky(l, np.eye(6, dtype=complex))
        assert np.max(np.abs(hermitian_inverse(a) - cols)) < 1e-12

    def test_propagates_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            hermitian_inverse(gram(random_channel(2, 5)))


def test_inverse_diagonal_from_factor():
    a = random_spd(9)
    l = cholesky(a)
    d = inverse_diagonal_from_factor(l)
    assert np.max(np.abs(d - hermitian_inverse(a).diagonal().real)) < 1e-11
