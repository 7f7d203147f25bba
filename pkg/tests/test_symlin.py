"""Tests for packed symmetric storage and the row-solve kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmica.exceptions import DimensionMismatch, NotPositiveDefinite
from mmica.symlin import (PackedSym, congruent, pack, solve_row, sym_rank1_update,
                          tril_indices, unpack)


def random_spd(rng, p, cond=10.0):
    """Oracle-side SPD generator with controlled conditioning."""
    Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    evals = np.geomspace(1.0, cond, p)
    return (Q * evals) @ Q.T


def near_diagonal_K(rng, p, n):
    """K as produced by independent unit-variance rows: off-diagonals O(1/sqrt(n))."""
    Y = rng.laplace(size=(p, n)) / np.sqrt(2.0)
    u = 1.0 / (1.0 + Y[0] ** 2)
    return (Y * u) @ Y.T / n


class TestPacking:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        for p in [2, 3, 7]:
            M = rng.standard_normal((p, p))
            M = M + M.T
            np.testing.assert_array_equal(unpack(pack(M), p), M)

    def test_packed_length(self):
        for p in [2, 5, 11]:
            rows, cols = tril_indices(p)
            assert rows.size == p * (p + 1) // 2

    def test_identity(self):
        I3 = PackedSym.identity(3)
        np.testing.assert_array_equal(I3.to_dense(), np.eye(3))

    def test_from_dense_requires_square(self):
        with pytest.raises(DimensionMismatch):
            PackedSym.from_dense(np.zeros((2, 3)))


class TestRank1:
    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        p = 6
        A = random_spd(rng, p)
        x = rng.standard_normal(p)
        w = 0.37
        expected = A + w * np.outer(x, x)
        got = sym_rank1_update(PackedSym.from_dense(A), x, w)
        np.testing.assert_allclose(got.to_dense(), expected, rtol=1e-14)

    def test_in_place_accumulates(self):
        rng = np.random.default_rng(2)
        p = 4
        acc = PackedSym(p)
        dense = np.zeros((p, p))
        for _ in range(20):
            x = rng.standard_normal(p)
            w = rng.uniform(-1, 1)
            acc.rank1_update(x, w)
            dense += w * np.outer(x, x)
        np.testing.assert_allclose(acc.to_dense(), dense, atol=1e-12)


class TestCongruent:
    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(3)
        p = 5
        A = random_spd(rng, p)
        W = rng.standard_normal((p, p))
        K = congruent(W, PackedSym.from_dense(A))
        np.testing.assert_allclose(K.to_dense(), W @ A @ W.T, atol=1e-12)

    def test_accepts_dense(self):
        rng = np.random.default_rng(4)
        A = random_spd(rng, 3)
        W = rng.standard_normal((3, 3))
        K = congruent(W, A)
        np.testing.assert_allclose(K.to_dense(), W @ A @ W.T, atol=1e-12)


class TestSolveRow:
    def test_matches_numpy_solve(self):
        rng = np.random.default_rng(5)
        for trial in range(30):
            p = int(rng.integers(2, 9))
            K = random_spd(rng, p, cond=50.0)
            i = int(rng.integers(p))
            z, report = solve_row(K, i)
            e = np.zeros(p)
            e[i] = 1.0
            np.testing.assert_allclose(z, np.linalg.solve(K, e), atol=1e-8)
            assert report.relative_residual <= 1e-8

    def test_matches_cholesky_large(self):
        rng = np.random.default_rng(6)
        for trial in range(50):
            p = int(rng.integers(10, 51))
            K = random_spd(rng, p, cond=100.0)
            i = int(rng.integers(p))
            z, _ = solve_row(K, i)
            e = np.zeros(p)
            e[i] = 1.0
            ref = np.linalg.solve(K, e)
            np.testing.assert_allclose(z, ref, atol=1e-8 * np.abs(ref).max())

    def test_diagonal_K_needs_no_iterations(self):
        K = np.diag([2.0, 3.0, 4.0])
        z, report = solve_row(K, 1)
        np.testing.assert_allclose(z, [0.0, 1.0 / 3.0, 0.0], rtol=1e-14)
        assert report.iterations == 0

    def test_near_diagonal_converges_fast(self):
        rng = np.random.default_rng(7)
        for trial in range(20):
            K = near_diagonal_K(rng, 5, 10_000)
            _, report = solve_row(K, 0, tol=1e-10)
            assert report.method == "pcg"
            assert report.iterations <= 5

    def test_packed_input(self):
        rng = np.random.default_rng(8)
        K = random_spd(rng, 4)
        z_dense, _ = solve_row(K, 2)
        z_packed, _ = solve_row(PackedSym.from_dense(K), 2)
        np.testing.assert_allclose(z_packed, z_dense, rtol=1e-12)

    def test_not_positive_definite(self):
        K = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(NotPositiveDefinite):
            solve_row(K, 0)

    def test_singular_K_rejected(self):
        K = np.ones((3, 3))
        with pytest.raises(NotPositiveDefinite):
            solve_row(K, 0)

    def test_out_of_range_index(self):
        with pytest.raises(DimensionMismatch):
            solve_row(np.eye(3), 3)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), p=st.integers(2, 10))
    def test_residual_property(self, seed, p):
        rng = np.random.default_rng(seed)
        K = random_spd(rng, p, cond=30.0)
        i = int(rng.integers(p))
        z, _ = solve_row(K, i, tol=1e-10)
        e = np.zeros(p)
        e[i] = 1.0
        assert np.linalg.norm(K @ z - e) <= 1e-8
