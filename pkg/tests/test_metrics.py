"""Tests for Amari distance, left-out loss, and gradient norm."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmica.exceptions import DegenerateRow, DimensionMismatch
from mmica.metrics import amari_distance, grad_norm, leftout_loss
from mmica.mm_engine import empirical_loss
from mmica.baselines import full_batch_mm_run
from mmica.datakit import gen_laplace_mixture


def amari_oracle(W, A):
    """Direct double-sum evaluation, written independently."""
    R = W @ A
    r = R ** 2
    total = 0.0
    p = R.shape[0]
    for i in range(p):
        total += r[i].sum() / r[i].max() - 1.0
    for j in range(p):
        total += r[:, j].sum() / r[:, j].max() - 1.0
    return total


def random_scaled_permutation(rng, p):
    perm = rng.permutation(p)
    scales = rng.uniform(0.5, 2.0, p) * rng.choice([-1.0, 1.0], p)
    P = np.zeros((p, p))
    P[np.arange(p), perm] = scales
    return P


class TestAmari:
    def test_zero_at_inverse(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((4, 4)) + 2 * np.eye(4)
        assert amari_distance(np.linalg.inv(A), A) <= 1e-12

    def test_zero_for_scaled_permutation(self):
        W = np.array([[0.0, 2.0], [-3.0, 0.0]])
        assert amari_distance(W, np.eye(2)) == 0.0

    def test_hand_value_upper_triangular(self):
        # R = [[1,1],[0,1]]: rows give (2/1-1)+(1/1-1)=1, columns give
        # (1/1-1)+(2/1-1)=1, total 2
        W = np.array([[1.0, 1.0], [0.0, 1.0]])
        np.testing.assert_allclose(amari_distance(W, np.eye(2)), 2.0)

    def test_matches_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = int(rng.integers(2, 7))
            W = rng.standard_normal((p, p))
            A = rng.standard_normal((p, p))
            np.testing.assert_allclose(amari_distance(W, A), amari_oracle(W, A),
                                       rtol=1e-12)

    def test_invariant_under_signed_permutation(self):
        # left-multiplying W by a signed permutation relabels and flips the
        # recovered sources; the distance is unchanged exactly
        rng = np.random.default_rng(2)
        for _ in range(30):
            p = int(rng.integers(2, 6))
            W = rng.standard_normal((p, p)) + np.eye(p)
            A = rng.standard_normal((p, p)) + np.eye(p)
            perm = rng.permutation(p)
            P = np.zeros((p, p))
            P[np.arange(p), perm] = rng.choice([-1.0, 1.0], p)
            d0 = amari_distance(W, A)
            d1 = amari_distance(P @ W, A)
            np.testing.assert_allclose(d1, d0, atol=1e-12 * max(1.0, abs(d0)))

    def test_zero_set_invariant_under_any_scaled_permutation(self):
        # arbitrary row rescaling keeps a perfect unmixer perfect
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = int(rng.integers(2, 6))
            A = rng.standard_normal((p, p)) + 2 * np.eye(p)
            P = random_scaled_permutation(rng, p)
            assert amari_distance(P @ np.linalg.inv(A), A) <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(2, 6))
        W = rng.standard_normal((p, p))
        A = rng.standard_normal((p, p))
        assert amari_distance(W, A) >= 0.0

    def test_degenerate_row(self):
        W = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DegenerateRow):
            amari_distance(W, np.eye(2))

    def test_shape_check(self):
        with pytest.raises(DimensionMismatch):
            amari_distance(np.eye(2), np.eye(3))


class TestLeftoutLoss:
    def test_zero_on_zero_data(self):
        assert leftout_loss(np.eye(3), np.zeros((3, 7)), "huber") == 0.0

    def test_equals_empirical_loss(self):
        rng = np.random.default_rng(3)
        W = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
        X = rng.standard_normal((3, 40))
        assert leftout_loss(W, X, "student") == empirical_loss(W, X, "student")


class TestGradNorm:
    def test_zero_data(self):
        # gradient is -I, so the norm is sqrt(p)
        for p in (2, 4, 7):
            np.testing.assert_allclose(grad_norm(np.eye(p), np.zeros((p, 9)), "huber"),
                                       np.sqrt(p), rtol=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        W = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
        X = rng.standard_normal((3, 50))
        shuffled = X[:, rng.permutation(50)]
        np.testing.assert_allclose(grad_norm(W, X, "huber"),
                                   grad_norm(W, shuffled, "huber"), rtol=1e-12)

    def test_small_at_mm_fixed_point(self):
        ds = gen_laplace_mixture(4, 5000, seed=5)
        W, _ = full_batch_mm_run(ds.X, "huber", epochs=120)
        assert grad_norm(W, ds.X, "huber") <= 1e-4
