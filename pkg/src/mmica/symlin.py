"""Small dense symmetric linear algebra.

Symmetric p x p matrices are stored packed: the lower triangle in row-major
order, p*(p+1)/2 floats, so a bank of p such matrices costs p^2*(p+1)/2
memory.  Dense scratch buffers are used freely inside operations.

``solve_row`` solves K z = e_i for a symmetric positive definite K with a
Jacobi (diagonal) preconditioned conjugate gradient, falling back to a
Cholesky solve on breakdown or non-convergence.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "PackedSym",
    "SolveReport",
    "tril_indices",
    "pack",
    "unpack",
    "sym_rank1_update",
    "congruent",
    "solve_row",
]

_TRIL_CACHE = {}


def tril_indices(p):
    """(rows, cols) index arrays of the lower triangle, row-major, cached."""
    if p not in _TRIL_CACHE:
        _TRIL_CACHE[p] = np.tril_indices(p)
    return _TRIL_CACHE[p]


def pack(dense):
    """Lower triangle of a symmetric matrix as a packed 1-d array."""
    dense = np.asarray(dense, dtype=float)
    p = dense.shape[0]
    if dense.shape != (p, p):
        raise DimensionMismatch(f"expected square matrix, got {dense.shape}")
    rows, cols = tril_indices(p)
    return dense[rows, cols].copy()


def unpack(data, p):
    """Packed 1-d array back to a dense symmetric p x p matrix."""
    data = np.asarray(data, dtype=float)
    if data.shape != (p * (p + 1) // 2,):
        raise DimensionMismatch(
            f"packed data has {data.shape}, expected ({p * (p + 1) // 2},)"
        )
    out = np.zeros((p, p))
    rows, cols = tril_indices(p)
    out[rows, cols] = data
    out[cols, rows] = data
    return out


class PackedSym:
    """Symmetric p x p matrix in packed lower-triangular storage."""

    __slots__ = ("dim", "data")

    def __init__(self, dim, data=None):
        self.dim = int(dim)
        ntri = self.dim * (self.dim + 1) // 2
        if data is None:
            self.data = np.zeros(ntri)
        else:
            data = np.asarray(data, dtype=float)
            if data.shape != (ntri,):
                raise DimensionMismatch(
                    f"packed data has shape {data.shape}, expected ({ntri},)"
                )
            self.data = data

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=float)
        return cls(dense.shape[0], pack(dense))

    @classmethod
    def identity(cls, p):
        return cls.from_dense(np.eye(p))

    def to_dense(self):
        return unpack(self.data, self.dim)

    def copy(self):
        return PackedSym(self.dim, self.data.copy())

    def rank1_update(self, x, w):
        """In-place self += w * x x^T; cost p*(p+1)/2 multiply-adds."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"vector has shape {x.shape}, matrix dim {self.dim}")
        rows, cols = tril_indices(self.dim)
        self.data += w * x[rows] * x[cols]
        return self

    def __repr__(self):
        return f"PackedSym(dim={self.dim})"


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    method: str  # "pcg" | "cholesky"


def sym_rank1_update(A, x, w):
    """Return A + w * x x^T as a new PackedSym; A is left untouched."""
    return A.copy().rank1_update(x, w)


def congruent(W, A, out=None):
    """K = W A W^T for a symmetric A (packed or dense)."""
    W = np.asarray(W, dtype=float)
    if not isinstance(A, PackedSym):
        A = PackedSym.from_dense(np.asarray(A, dtype=float))
    p = A.dim
    if W.shape != (p, p):
        raise DimensionMismatch(f"W has shape {W.shape}, expected ({p}, {p})")
    K = W @ A.to_dense() @ W.T
    K = 0.5 * (K + K.T)  # kill roundoff asymmetry
    if out is None:
        return PackedSym.from_dense(K)
    out.data[:] = pack(K)
    return out


def _cholesky_solve(K, b):
    try:
        c, low = scipy.linalg.cho_factor(K, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return scipy.linalg.cho_solve((c, low), b, check_finite=False)


def solve_row(K, i, tol=1e-10, max_iter=None):
    """Solve K z = e_i for symmetric positive definite K (dense or packed).

    Runs Jacobi-preconditioned conjugate gradient started from the
    preconditioned right-hand side; on breakdown or non-convergence within
    ``max_iter`` (default 2p) falls back to a Cholesky solve.

    Returns (z, SolveReport).  Raises NotPositiveDefinite when the Cholesky
    fallback hits a non-PD pivot as well.
    """
    if isinstance(K, PackedSym):
        K = K.to_dense()
    else:
        K = np.asarray(K, dtype=float)
    p = K.shape[0]
    if K.shape != (p, p):
        raise DimensionMismatch(f"K has shape {K.shape}, expected square")
    if not 0 <= i < p:
        raise DimensionMismatch(f"row index {i} out of range for p={p}")
    if max_iter is None:
        max_iter = 2 * p

    b = np.zeros(p)
    b[i] = 1.0
    diag = np.diag(K).copy()
    if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
        z = _cholesky_solve(K, b)
        res = float(np.linalg.norm(K @ z - b))
        return z, SolveReport(0, res, "cholesky")

    # Jacobi guess: exact for diagonal K, one iteration ahead otherwise.
    z = b / diag
    r = b - K @ z
    resid = float(np.linalg.norm(r))
    if resid <= tol:
        return z, SolveReport(0, resid, "pcg")

    s = r / diag
    d = s.copy()
    rs = float(r @ s)
    for it in range(1, max_iter + 1):
        Kd = K @ d
        dKd = float(d @ Kd)
        if dKd <= 0.0 or not np.isfinite(dKd):
            break  # non-PD direction or numerical breakdown
        alpha = rs / dKd
        z += alpha * d
        r -= alpha * Kd
        resid = float(np.linalg.norm(r))
        if resid <= tol:
            return z, SolveReport(it, resid, "pcg")
        s = r / diag
        rs_new = float(r @ s)
        d = s + (rs_new / rs) * d
        rs = rs_new

    z = _cholesky_solve(K, b)
    resid = float(np.linalg.norm(K @ z - b))
    return z, SolveReport(max_iter, resid, "cholesky")
