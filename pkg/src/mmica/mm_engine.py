"""Majorization-minimization engine for maximum-likelihood ICA.

State layout.  The unmixing iterate W is a plain (p, p) float array with
nonzero determinant.  The sufficient statistics are p symmetric matrices

    A^i = (1/n) sum_j U_ij x_j x_j^T,

held packed as a (p, p*(p+1)/2) array (one packed lower triangle per row).
The incremental algorithm additionally keeps a memory of the weights U and
of their conjugate values f(U), one pair per (source, sample).

The surrogate risk

    -log|det W| + (1/n) sum_ij [ U_ij (WX)_ij^2 / 2 + f(U_ij) ]

majorizes the empirical risk for any admissible U, with equality at
U = ustar(WX).  A majorization step tightens selected entries of U (and the
A^i along with them); a minimization step descends in W one row at a time,
each row minimized in closed form, so the surrogate never increases.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import datakit
from .density import get_density
from .exceptions import DegenerateStats, DimensionMismatch, NotPositiveDefinite, SingularMatrix
from .symlin import PackedSym, congruent, solve_row, tril_indices
from .trace import MetricRecord, RunTrace

__all__ = [
    "MMConfig",
    "UMemory",
    "SufficientStats",
    "empirical_loss",
    "surrogate_loss",
    "compute_gap",
    "majorize_incremental",
    "majorize_online",
    "minimize_row",
    "minimization_sweep",
    "run_incremental",
    "run_online",
]

SELECTIONS = ("greedy", "random", "full")


@dataclass
class MMConfig:
    """Knobs shared by the incremental and online MM solvers."""

    batch_size: int = 1000
    q: int = 2
    alpha: float = 0.5
    selection: str = "greedy"
    pcg_tol: float = 1e-10
    pcg_max_iter: int | None = None  # None = 2p
    seed: int = 0
    mem_init: str = "refresh"  # "refresh" = full first pass; "zero" = literal zeros
    rho_counter: str = "per_matrix"  # or "global"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if not 0.5 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0.5, 1)")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.mem_init not in ("refresh", "zero"):
            raise ValueError("mem_init must be 'refresh' or 'zero'")
        if self.rho_counter not in ("per_matrix", "global"):
            raise ValueError("rho_counter must be 'per_matrix' or 'global'")


@dataclass
class UMemory:
    """Stored weights U and their conjugate values f(U), shape (p, n) each.

    ``visited`` tracks which entries hold a real weight; with the literal
    zero initialization an unvisited entry has u = fu = 0 and is forced to
    the front of the selection queue via an infinite gap.
    """

    u: np.ndarray
    fu: np.ndarray
    visited: np.ndarray

    @classmethod
    def zeros(cls, p, n):
        return cls(np.zeros((p, n)), np.zeros((p, n)), np.zeros((p, n), dtype=bool))

    @classmethod
    def refreshed(cls, W, X, model):
        """Memory after one full majorization pass at W (u = ustar(WX))."""
        u, fu = model.f_at_ustar(W @ X)
        return cls(u, fu, np.ones(u.shape, dtype=bool))


class SufficientStats:
    """Bank of p packed-symmetric matrices A^i plus update counters."""

    def __init__(self, p, n):
        self.p = p
        self.n = n  # dataset size (incremental); 1/n is the update weight
        self.data = np.zeros((p, p * (p + 1) // 2))
        self.counts = np.zeros(p, dtype=np.int64)  # rank-one updates per matrix
        self.samples_seen = 0  # stream position (online)

    @classmethod
    def from_memory(cls, X, u):
        """Rebuild A^i = (1/n) sum_j u_ij x_j x_j^T from scratch."""
        p, n = X.shape
        stats = cls(p, n)
        stats.data = _weighted_outer_bank(X, u) / n
        stats.counts[:] = n
        stats.samples_seen = n
        return stats

    def as_packed(self, i):
        """Packed view of A^i (shares storage, do not mutate concurrently)."""
        return PackedSym(self.p, self.data[i])

    def to_dense(self, i):
        return self.as_packed(i).to_dense()


def _weighted_outer_bank(X, u, chunk=8192):
    """All p weighted outer-product sums sum_j u_ij x_j x_j^T, packed."""
    p, n = X.shape
    rows, cols = tril_indices(p)
    out = np.zeros((u.shape[0], rows.size))
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        P = X[rows, sl] * X[cols, sl]
        out += u[:, sl] @ P.T
    return out


def _logabsdet(W):
    sign, logdet = np.linalg.slogdet(W)
    if sign == 0:
        raise SingularMatrix("det(W) = 0")
    return logdet


def empirical_loss(W, X, model):
    """-log|det W| + mean_j sum_i G((WX)_ij)."""
    model = get_density(model)
    W = np.asarray(W, dtype=float)
    X = np.asarray(X, dtype=float)
    if W.shape[0] != W.shape[1] or W.shape[1] != X.shape[0]:
        raise DimensionMismatch(f"W {W.shape} incompatible with X {X.shape}")
    return float(-_logabsdet(W) + np.sum(model.G(W @ X)) / X.shape[1])


def surrogate_loss(W, U, fU, X):
    """-log|det W| + (1/n) sum_ij [U_ij (WX)_ij^2 / 2 + fU_ij]."""
    W = np.asarray(W, dtype=float)
    U = np.asarray(U, dtype=float)
    fU = np.asarray(fU, dtype=float)
    X = np.asarray(X, dtype=float)
    if U.shape != fU.shape or U.shape != (W.shape[0], X.shape[1]):
        raise DimensionMismatch(
            f"U {U.shape} / fU {fU.shape} inconsistent with W {W.shape}, X {X.shape}"
        )
    Y = W @ X
    return float(-_logabsdet(W) + np.sum(0.5 * U * Y * Y + fU) / X.shape[1])


def compute_gap(model, u_mem, fu_mem, y):
    """Surrogate decrease (times n) from refreshing one memory entry.

    gap = u_mem * y^2 / 2 + fu_mem - G(y), nonnegative whenever the stored
    pair is admissible, zero iff u_mem is already ustar(y).  Vectorized.
    """
    model = get_density(model)
    y = np.asarray(y, dtype=float)
    return 0.5 * np.asarray(u_mem) * y * y + np.asarray(fu_mem) - model.G(y)


def _surrogate_from_state(W, stats, mem):
    """Surrogate loss evaluated from the packed statistics and the memory.

    Identical (up to roundoff) to ``surrogate_loss`` whenever the stats are
    consistent with the memory; costs O(p^3 + p n) instead of O(p^2 n).
    """
    rows, cols = tril_indices(stats.p)
    coef = np.where(rows == cols, 1.0, 2.0)
    PW = W[:, rows] * W[:, cols]
    quad = 0.5 * np.sum(stats.data * (PW * coef))
    return float(-_logabsdet(W) + quad + np.sum(mem.fu) / stats.n)


def _selection_mask(gaps, q, selection, rng):
    """Boolean (p, batch) mask of the source indices refreshed per sample."""
    p = gaps.shape[0]
    if selection == "full" or q >= p:
        return np.ones(gaps.shape, dtype=bool)
    if selection == "greedy":
        # stable sort on -gap: ties (and equal +inf gaps) go to the lowest index
        order = np.argsort(-gaps, axis=0, kind="stable")
    elif selection == "random":
        order = np.argsort(rng.random(gaps.shape), axis=0)
    else:
        raise ValueError(f"unknown selection {selection!r}")
    mask = np.zeros(gaps.shape, dtype=bool)
    np.put_along_axis(mask, order[:q], True, axis=0)
    return mask


def majorize_incremental(stats, mem, W, X, batch, model, q=2, selection="greedy", rng=None):
    """One incremental majorization pass over a mini-batch.

    For each sample j in ``batch``: compute the candidate weights
    ustar(W x_j), score every source by its gap, refresh the q selected
    (source, sample) entries, and fold the weight deltas into the A^i with
    coefficient 1/n.  Unselected entries leave stats and memory untouched.
    Returns the (p, len(batch)) gap matrix.
    """
    model = get_density(model)
    batch = np.asarray(batch, dtype=np.intp)
    Xb = X[:, batch]
    Y = W @ Xb
    Gy = model.G(Y)
    u_new = model.ustar(Y)
    fu_new = Gy - 0.5 * u_new * Y * Y

    u_old = mem.u[:, batch]
    gaps = 0.5 * u_old * Y * Y + mem.fu[:, batch] - Gy
    fresh = ~mem.visited[:, batch]
    if np.any(fresh):
        gaps = np.where(fresh, np.inf, gaps)

    mask = _selection_mask(gaps, q, selection, rng)
    du = np.where(mask, u_new - u_old, 0.0)

    rows, cols = tril_indices(stats.p)
    P = Xb[rows] * Xb[cols]
    stats.data += (du / stats.n) @ P.T

    mem.u[:, batch] = np.where(mask, u_new, u_old)
    mem.fu[:, batch] = np.where(mask, fu_new, mem.fu[:, batch])
    mem.visited[:, batch] |= mask
    return gaps


def _majorize_online_batch(stats, W, Xb, model, q, alpha, rng, rho_counter="per_matrix"):
    """Fold a batch of streamed samples into the A^i.

    Equivalent to applying, sample by sample in column order,

        A^i <- (1 - rho) A^i + rho * u_i * x x^T,   rho = 1 / count^alpha,

    to q uniformly chosen matrices per sample; the sequential recurrence is
    evaluated per matrix with suffix products so the whole batch is one
    matmul per source.
    """
    model = get_density(model)
    p, nb = Xb.shape
    U = model.ustar(W @ Xb)
    if q >= p:
        mask = np.ones((p, nb), dtype=bool)
    else:
        order = np.argsort(rng.random((p, nb)), axis=0)
        mask = np.zeros((p, nb), dtype=bool)
        np.put_along_axis(mask, order[:q], True, axis=0)

    rows, cols = tril_indices(p)
    P = Xb[rows] * Xb[cols]
    if rho_counter == "global":
        rho_stream = 1.0 / (stats.samples_seen + 1.0 + np.arange(nb)) ** alpha
    for i in range(p):
        js = np.flatnonzero(mask[i])
        if js.size == 0:
            continue
        if rho_counter == "per_matrix":
            rhos = 1.0 / (stats.counts[i] + 1.0 + np.arange(js.size)) ** alpha
        else:
            rhos = rho_stream[js]
        keep = 1.0 - rhos
        suffix = np.ones(js.size)
        if js.size > 1:
            suffix[:-1] = np.cumprod(keep[::-1])[::-1][1:]
        stats.data[i] *= np.prod(keep)
        stats.data[i] += P[:, js] @ (rhos * suffix * U[i, js])
        stats.counts[i] += js.size
    stats.samples_seen += nb
    return mask


def majorize_online(stats, W, x, model, q, alpha, rng, n_seen=None):
    """Online majorization for a single streamed sample (Alg. 2 inner step).

    ``n_seen`` overrides the stream position when the global-counter policy
    is wanted; by default each A^i uses its own update count, which keeps
    rho(n) = 1/n unbiased under random subset selection.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    if n_seen is not None:
        stats.samples_seen = int(n_seen) - 1
        counter = "global"
    else:
        counter = "per_matrix"
    return _majorize_online_batch(stats, W, x, model, q, alpha, rng, rho_counter=counter)


def minimize_row(W, A_i, i, pcg_tol=1e-10, pcg_max_iter=None):
    """Exact partial minimization of the surrogate over row i of W.

    With K = W A^i W^T, the minimizing multiplicative update is
    m = (K^{-1})_{i,:} / sqrt((K^{-1})_{ii}); the returned matrix equals W
    except for row i, replaced by m W.  Raises DegenerateStats when K is
    not positive definite.
    """
    W = np.asarray(W, dtype=float)
    K = congruent(W, A_i)
    try:
        z, _ = solve_row(K, i, tol=pcg_tol, max_iter=pcg_max_iter)
    except NotPositiveDefinite as exc:
        raise DegenerateStats(f"row {i}: {exc}") from None
    if not np.all(np.isfinite(z)) or z[i] <= 0.0:
        raise DegenerateStats(f"row {i}: K^-1 has non-positive diagonal entry {z[i]!r}")
    m = z / np.sqrt(z[i])
    out = W.copy()
    out[i] = m @ W
    return out


def minimization_sweep(W, stats, pcg_tol=1e-10, pcg_max_iter=None, rows=None, skipped=None):
    """Apply minimize_row for each requested row in order, reusing the
    partially updated W.  Rows whose K is degenerate are skipped; their
    indices are appended to ``skipped`` when a list is given."""
    W = np.asarray(W, dtype=float).copy()
    if rows is None:
        rows = range(stats.p)
    for i in rows:
        A_i = stats.as_packed(i)
        try:
            K = congruent(W, A_i)
            z, _ = solve_row(K, i, tol=pcg_tol, max_iter=pcg_max_iter)
            if not np.all(np.isfinite(z)) or z[i] <= 0.0:
                raise DegenerateStats(f"row {i}")
        except (NotPositiveDefinite, DegenerateStats):
            if skipped is not None:
                skipped.append(i)
            continue
        W[i] = (z / np.sqrt(z[i])) @ W
    return W


def _resolve_init(init, X, cfg, mode):
    if isinstance(init, np.ndarray):
        return init.astype(float).copy()
    p = X.shape[0]
    if init == "identity":
        return np.eye(p)
    if init == "whiten":
        # subsample seed derived from the run seed; "head" for streams
        return datakit.whiten_init(X, seed=np.random.SeedSequence(cfg.seed).spawn(1)[0], mode=mode)
    raise ValueError(f"unknown init {init!r}")


def _blocks(n, batch_size):
    edges = np.arange(0, n, batch_size)
    return [np.arange(start, min(start + batch_size, n)) for start in edges]


def run_incremental(X, model, cfg=None, epochs=10, init="whiten", callback=None,
                    half_step_hook=None):
    """Incremental MM solver on a fixed dataset X (p x n).

    Per epoch, mini-batch blocks are visited in a freshly shuffled order;
    each block gets one majorization pass followed by a full minimization
    sweep.  ``callback(epoch, W) -> MetricRecord | None`` is invoked once
    after initialization (epoch 0) and once per epoch; the engine stamps
    epoch, elapsed wall time, and its own surrogate value on the record.
    ``half_step_hook(stage, surrogate)`` is called with stage "major" or
    "min" after every half-step (test instrumentation; adds O(p n) work).

    Returns (W, RunTrace).
    """
    model = get_density(model)
    cfg = cfg or MMConfig()
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    if cfg.q > p:
        raise ValueError(f"q={cfg.q} exceeds p={p}")
    rng = np.random.default_rng(cfg.seed)
    W = _resolve_init(init, X, cfg, mode="random")

    if cfg.mem_init == "refresh":
        mem = UMemory.refreshed(W, X, model)
        stats = SufficientStats.from_memory(X, mem.u)
    else:
        mem = UMemory.zeros(p, n)
        stats = SufficientStats(p, n)
        stats.samples_seen = n

    blocks = _blocks(n, cfg.batch_size)
    trace = RunTrace(algo="incremental_mm", seed=cfg.seed)
    t0 = time.perf_counter()

    def record(epoch):
        rec = callback(epoch, W) if callback is not None else None
        rec = rec or MetricRecord()
        rec.epoch = epoch
        rec.wall_time_s = time.perf_counter() - t0
        rec.surrogate_loss = _surrogate_from_state(W, stats, mem)
        trace.append(rec)

    record(0)
    if half_step_hook is not None:
        half_step_hook("init", _surrogate_from_state(W, stats, mem))
    for epoch in range(1, epochs + 1):
        for b in rng.permutation(len(blocks)):
            majorize_incremental(stats, mem, W, X, blocks[b], model,
                                 q=cfg.q, selection=cfg.selection, rng=rng)
            if half_step_hook is not None:
                half_step_hook("major", _surrogate_from_state(W, stats, mem))
            W = minimization_sweep(W, stats, pcg_tol=cfg.pcg_tol,
                                   pcg_max_iter=cfg.pcg_max_iter)
            if half_step_hook is not None:
                half_step_hook("min", _surrogate_from_state(W, stats, mem))
        record(epoch)
    return W, trace


def _iter_stream_batches(stream, p, batch_size, max_samples):
    """Yield (p, k) column blocks from an array or an iterable of samples."""
    if isinstance(stream, np.ndarray):
        n = min(stream.shape[1], max_samples)
        for start in range(0, n, batch_size):
            yield np.asarray(stream[:, start:min(start + batch_size, n)], dtype=float)
        return
    buf = []
    taken = 0
    for x in stream:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != p:
            raise DimensionMismatch(f"stream sample has size {x.size}, expected {p}")
        buf.append(x)
        taken += 1
        if len(buf) == batch_size:
            yield np.stack(buf, axis=1)
            buf = []
        if taken >= max_samples:
            break
    if buf:
        yield np.stack(buf, axis=1)


def run_online(stream, model, cfg=None, max_samples=None, init="whiten", callback=None,
               samples_per_epoch=None, p=None, whiten_subsample=10_000):
    """Online MM solver; every sample is folded into the statistics once.

    ``stream`` is a (p, n) array or an iterable of p-vectors (``p`` must be
    given in the latter case if ``init`` is not an explicit matrix).  One
    trace "epoch" spans ``samples_per_epoch`` samples (default: all of
    them), so finite-sum and online runs share an x-axis.  With whitening
    init the first ``whiten_subsample`` samples are buffered to build W0
    and then replayed as ordinary training samples.

    A row enters the minimization sweep only once its A^i has collected at
    least p rank-one updates and factorizes; before that it is left alone.
    """
    model = get_density(model)
    cfg = cfg or MMConfig()
    if max_samples is None:
        if not isinstance(stream, np.ndarray):
            raise ValueError("max_samples is required for iterator streams")
        max_samples = stream.shape[1]

    if isinstance(stream, np.ndarray):
        stream = np.asarray(stream, dtype=float)
        p = stream.shape[0]
    elif p is None:
        if isinstance(init, np.ndarray):
            p = init.shape[0]
        else:
            raise ValueError("p is required for iterator streams")

    batches = _iter_stream_batches(stream, p, cfg.batch_size, max_samples)
    pending = []  # batches buffered for whitening, replayed below
    if isinstance(init, np.ndarray) or init == "identity":
        W = _resolve_init(init, np.empty((p, 0)), cfg, mode="head")
    else:
        need = min(whiten_subsample, max_samples)
        got = 0
        for Xb in batches:
            pending.append(Xb)
            got += Xb.shape[1]
            if got >= need:
                break
        head = np.concatenate(pending, axis=1)
        W = datakit.whiten_init(head, subsample_size=need, mode="head")

    stats = SufficientStats(p, 1)
    samples_per_epoch = samples_per_epoch or max_samples
    trace = RunTrace(algo="online_mm", seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()

    def record(epoch):
        rec = callback(epoch, W) if callback is not None else None
        rec = rec or MetricRecord()
        rec.epoch = epoch
        rec.wall_time_s = time.perf_counter() - t0
        trace.append(rec)

    record(0)
    seen = 0
    next_epoch = 1
    ready = np.zeros(p, dtype=bool)

    def all_batches():
        yield from pending
        yield from batches

    for Xb in all_batches():
        _majorize_online_batch(stats, W, Xb, model, cfg.q, cfg.alpha, rng,
                               rho_counter=cfg.rho_counter)
        if not ready.all():
            ready = stats.counts >= p
        rows = np.flatnonzero(ready)
        if rows.size:
            W = minimization_sweep(W, stats, pcg_tol=cfg.pcg_tol,
                                   pcg_max_iter=cfg.pcg_max_iter, rows=rows)
        seen += Xb.shape[1]
        if seen >= next_epoch * samples_per_epoch:
            record(next_epoch)
            next_epoch += 1
    if trace.records[-1].epoch < next_epoch and seen > (next_epoch - 1) * samples_per_epoch:
        record(next_epoch)
    return W, trace
