"""Separation and convergence metrics: Amari distance, left-out loss,
full-batch relative gradient norm."""

import numpy as np

from .baselines import relative_gradient
from .exceptions import DegenerateRow, DimensionMismatch
from .mm_engine import empirical_loss
from .trace import MetricRecord, RunTrace, TRACE_COLUMNS

__all__ = ["amari_distance", "leftout_loss", "grad_norm",
           "MetricRecord", "RunTrace", "TRACE_COLUMNS"]


def amari_distance(W, A):
    """Permutation- and scale-invariant distance between W A and identity.

    With R = W A and r_ij = R_ij^2:

        sum_i (sum_j r_ij / max_l r_il - 1) + sum_j (sum_i r_ij / max_l r_lj - 1)

    Nonnegative; zero iff R is a scaled permutation, i.e. W unmixes A
    perfectly up to the ICA indeterminacies.
    """
    W = np.asarray(W, dtype=float)
    A = np.asarray(A, dtype=float)
    if W.ndim != 2 or W.shape != A.shape or W.shape[0] != W.shape[1]:
        raise DimensionMismatch(f"need square same-shape matrices, got {W.shape}, {A.shape}")
    R2 = (W @ A) ** 2
    row_max = R2.max(axis=1)
    col_max = R2.max(axis=0)
    if np.any(row_max == 0.0) or np.any(col_max == 0.0):
        raise DegenerateRow("W A has an all-zero row or column")
    rows = (R2.sum(axis=1) / row_max - 1.0).sum()
    cols = (R2.sum(axis=0) / col_max - 1.0).sum()
    return float(rows + cols)


def leftout_loss(W, X_test, model):
    """Empirical loss on held-out columns (the caller guarantees disjointness)."""
    return empirical_loss(W, X_test, model)


def grad_norm(W, X, model, include_identity=True):
    """Frobenius norm of the full-batch relative gradient; zero at stationarity."""
    return float(np.linalg.norm(relative_gradient(W, X, model,
                                                  include_identity=include_identity)))
