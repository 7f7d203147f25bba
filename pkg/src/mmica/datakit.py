"""Synthetic data generation, whitening initialization, and dataset I/O.

File formats
------------
Datasets ("ICAD"): magic ``ICAD``, u32 version (=1), u64 p, u64 n, then
p*n little-endian float64 in column-major order (samples contiguous, so
online fetches are sequential reads), then a CRC32 (u32) of the raw value
bytes.  Matrices ("ICAM") are the same with p rows, q cols, row-major.

CSV import: first line ``p,n``, then one line per sample with p values.
"""

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .exceptions import ChecksumError, DimensionMismatch, DomainError, FormatError, RankDeficient

__all__ = [
    "Dataset",
    "gen_laplace_mixture",
    "whiten_init",
    "save_dataset",
    "load_dataset",
    "save_matrix",
    "load_matrix",
    "load_dataset_csv",
]

_DATA_MAGIC = b"ICAD"
_MATRIX_MAGIC = b"ICAM"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


@dataclass
class Dataset:
    """Samples X (p x n, float64) with optional ground-truth mixing matrix."""

    X: np.ndarray
    mixing: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[0] < 2 or self.X.shape[1] < 1:
            raise DimensionMismatch(f"need a p x n array with p >= 2, got {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise DomainError("dataset contains non-finite values")

    @property
    def p(self):
        return self.X.shape[0]

    @property
    def n(self):
        return self.X.shape[1]


def gen_laplace_mixture(p, n, seed):
    """X = A S with S iid Laplace (density exp(-|x|)/2) and A iid N(0, 1).

    A is redrawn while |det A| < 1e-6 times its Hadamard bound (product of
    row norms), so the mixing is never near-singular.  Laplace samples come
    from the inverse CDF of a uniform draw; a fixed seed gives a
    bit-identical dataset.
    """
    if p < 2:
        raise DimensionMismatch("p >= 2 required")
    if n < 1:
        raise DimensionMismatch("n >= 1 required")
    rng = np.random.default_rng(seed)
    v = rng.random((p, n)) - 0.5
    S = -np.sign(v) * np.log1p(-2.0 * np.abs(v))
    while True:
        A = rng.standard_normal((p, p))
        scale = np.prod(np.linalg.norm(A, axis=1))
        if np.abs(np.linalg.det(A)) >= 1e-6 * scale:
            break
    return Dataset(A @ S, mixing=A)


def whiten_init(X, subsample_size=10_000, seed=0, mode="random"):
    """Inverse square root of a subsample covariance, for initializing W.

    ``mode="random"`` subsamples columns uniformly without replacement
    (finite-sum setting); ``mode="head"`` takes the first columns (online
    setting, where only the start of the stream has been fetched).  The
    returned W0 satisfies W0 C W0^T = I for the subsample covariance C.
    """
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    m = int(min(max(subsample_size, p), n))
    if mode == "head":
        sub = X[:, :m]
    elif mode == "random":
        idx = np.random.default_rng(seed).choice(n, size=m, replace=False)
        sub = X[:, idx]
    else:
        raise ValueError(f"unknown subsample mode {mode!r}")
    C = sub @ sub.T / m
    evals, evecs = np.linalg.eigh(C)
    if evals[0] < 1e-12 * evals[-1]:
        raise RankDeficient(
            f"subsample covariance eigenvalue ratio {evals[0] / evals[-1]:.3e}"
        )
    return (evecs / np.sqrt(evals)) @ evecs.T


def _write_blob(path, magic, rows, cols, values):
    payload = values.astype("<f8", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, _VERSION, rows, cols))
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def _read_blob(path, magic):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + 4:
        raise FormatError(f"{path}: truncated header")
    got_magic, version, rows, cols = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise FormatError(f"{path}: bad magic {got_magic!r}, expected {magic!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    nbytes = rows * cols * 8
    if len(raw) != _HEADER.size + nbytes + 4:
        raise FormatError(
            f"{path}: expected {_HEADER.size + nbytes + 4} bytes, found {len(raw)}"
        )
    payload = raw[_HEADER.size : _HEADER.size + nbytes]
    (crc,) = struct.unpack_from("<I", raw, _HEADER.size + nbytes)
    if crc != zlib.crc32(payload):
        raise ChecksumError(f"{path}: payload CRC mismatch")
    return np.frombuffer(payload, dtype="<f8"), rows, cols


def save_dataset(path, dataset):
    """Write samples column-major under the ICAD format (lossless)."""
    X = dataset.X if isinstance(dataset, Dataset) else np.asarray(dataset, float)
    p, n = X.shape
    _write_blob(path, _DATA_MAGIC, p, n, np.asfortranarray(X).ravel(order="F"))


def load_dataset(path):
    values, p, n = _read_blob(path, _DATA_MAGIC)
    return Dataset(values.reshape((p, n), order="F"))


def save_matrix(path, M):
    """Write a dense matrix row-major under the ICAM format (lossless)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {M.shape}")
    _write_blob(path, _MATRIX_MAGIC, M.shape[0], M.shape[1], np.ascontiguousarray(M).ravel())


def load_matrix(path):
    values, rows, cols = _read_blob(path, _MATRIX_MAGIC)
    return values.reshape((rows, cols)).copy()


def load_dataset_csv(path):
    """Read the interop CSV format: header line ``p,n``, one sample per line."""
    with open(path) as fh:
        header = fh.readline()
        try:
            p, n = (int(tok) for tok in header.strip().split(","))
        except ValueError:
            raise FormatError(f"{path}: header must be 'p,n', got {header!r}") from None
        try:
            rows = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
    if rows.shape != (n, p):
        raise FormatError(f"{path}: body has shape {rows.shape}, header says ({n}, {p})")
    return Dataset(rows.T)
