"""Comparison solvers: relative-gradient SGD, SAG, full-batch MM, noisy EM.

All gradient methods work in the multiplicative parameterization
W <- (I - rho * G) W with G the relative gradient of the empirical risk,
which keeps them equivariant like the MM solvers.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import mm_engine
from .density import get_density
from .exceptions import DimensionMismatch, Diverged, SingularMatrix
from .mm_engine import MMConfig, empirical_loss, minimization_sweep
from .symlin import pack
from .trace import MetricRecord, RunTrace

__all__ = [
    "SGDConfig",
    "SagState",
    "relative_gradient",
    "sgd_run",
    "sag_run",
    "full_batch_mm_run",
    "noisy_em_update",
]

# a run is abandoned once its loss climbs this far above the starting value
DIVERGENCE_MARGIN = 1e3


@dataclass
class SGDConfig:
    """Step-size policy for the gradient baselines."""

    step: float = 0.1
    schedule: str = "constant"  # or "inv_sqrt": rho = step / sqrt(samples seen)
    batch_size: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.schedule not in ("constant", "inv_sqrt"):
            raise ValueError("schedule must be 'constant' or 'inv_sqrt'")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def relative_gradient(W, X_batch, model, include_identity=True):
    """Relative gradient of the empirical risk at W over a batch.

    Returns G'(Y) Y^T / n_b - I with Y = W X_batch.  The -I term comes from
    -log|det W|; with it, a zero gradient is exactly stationarity of the
    loss.  ``include_identity=False`` drops it, giving the data term alone.
    """
    model = get_density(model)
    W = np.asarray(W, dtype=float)
    X_batch = np.asarray(X_batch, dtype=float)
    if X_batch.ndim != 2 or X_batch.shape[1] == 0:
        raise DimensionMismatch("X_batch must be a nonempty p x n_b array")
    Y = W @ X_batch
    G = (model.gprime(Y) @ Y.T) / X_batch.shape[1]
    if include_identity:
        G -= np.eye(W.shape[0])
    return G


def _check_divergence(W, loss, loss0, algo, epoch):
    if not np.all(np.isfinite(W)):
        raise Diverged(f"{algo}: non-finite iterate at epoch {epoch}")
    if not np.isfinite(loss) or loss > loss0 + DIVERGENCE_MARGIN:
        raise Diverged(f"{algo}: loss {loss!r} exceeded initial {loss0:.6g} at epoch {epoch}")


def _safe_loss(W, X, model):
    if not np.all(np.isfinite(W)):
        return np.inf
    try:
        return empirical_loss(W, X, model)
    except SingularMatrix:
        return np.inf


def _gradient_run(X, model, cfg, epochs, init, callback, algo, step_fn,
                  max_samples=None, samples_per_epoch=None, p=None,
                  include_identity=True):
    """Shared driver for SGD in finite-sum and streaming modes."""
    model = get_density(model)
    rng = np.random.default_rng(cfg.seed)
    finite_sum = isinstance(X, np.ndarray)
    if finite_sum:
        X = np.asarray(X, dtype=float)
        p = X.shape[0]
        n = X.shape[1]
        blocks = mm_engine._blocks(n, cfg.batch_size)
    else:
        if max_samples is None:
            raise ValueError("max_samples is required for iterator streams")
        if p is None and not isinstance(init, np.ndarray):
            raise ValueError("p is required for iterator streams")
        if p is None:
            p = init.shape[0]
        samples_per_epoch = samples_per_epoch or max_samples

    if not finite_sum and not isinstance(init, np.ndarray) and init == "whiten":
        raise ValueError("streaming SGD needs an explicit or identity init")
    W = mm_engine._resolve_init(init, X if finite_sum else np.empty((p, 0)), MMConfig(seed=cfg.seed),
                                mode="random" if finite_sum else "head")

    trace = RunTrace(algo=algo, seed=cfg.seed)
    t0 = time.perf_counter()

    def record(epoch):
        rec = callback(epoch, W) if callback is not None else None
        rec = rec or MetricRecord()
        rec.epoch = epoch
        rec.wall_time_s = time.perf_counter() - t0
        trace.append(rec)
        return rec

    record(0)
    seen = 0
    eye = np.eye(p)
    try:
        if finite_sum:
            loss0 = empirical_loss(W, X, model)
            for epoch in range(1, epochs + 1):
                for b in rng.permutation(len(blocks)):
                    Xb = X[:, blocks[b]]
                    seen += Xb.shape[1]
                    G = relative_gradient(W, Xb, model, include_identity=include_identity)
                    W = (eye - step_fn(cfg, seen) * G) @ W
                _check_divergence(W, _safe_loss(W, X, model), loss0, algo, epoch)
                record(epoch)
        else:
            next_epoch = 1
            for Xb in mm_engine._iter_stream_batches(X, p, cfg.batch_size, max_samples):
                seen += Xb.shape[1]
                G = relative_gradient(W, Xb, model, include_identity=include_identity)
                W = (eye - step_fn(cfg, seen) * G) @ W
                if not np.all(np.isfinite(W)):
                    raise Diverged(f"{algo}: non-finite iterate after {seen} samples")
                if seen >= next_epoch * samples_per_epoch:
                    record(next_epoch)
                    next_epoch += 1
            if trace.records[-1].epoch < next_epoch and seen > (next_epoch - 1) * samples_per_epoch:
                record(next_epoch)
    except Diverged as exc:
        exc.trace = trace  # partial trace for the caller to flush
        raise
    return W, trace


def _sgd_step(cfg, samples_seen):
    if cfg.schedule == "constant":
        return cfg.step
    return cfg.step / np.sqrt(samples_seen)


def sgd_run(X, model, cfg=None, epochs=10, init="whiten", callback=None,
            max_samples=None, samples_per_epoch=None, p=None, include_identity=True):
    """Relative-gradient SGD: per mini-batch W <- (I - rho G) W.

    Finite-sum mode (X an array) shuffles fixed blocks each epoch with a
    constant or inv-sqrt step; streaming mode (X an iterator, max_samples
    required) makes a single pass, where the inv_sqrt schedule gives the
    classic rho = step / sqrt(n_seen).  Raises Diverged when the loss goes
    non-finite or climbs 1e3 above its starting value.
    """
    cfg = cfg or SGDConfig()
    return _gradient_run(X, model, cfg, epochs, init, callback, "sgd", _sgd_step,
                         max_samples=max_samples, samples_per_epoch=samples_per_epoch,
                         p=p, include_identity=include_identity)


@dataclass
class SagState:
    """Per-block gradient table plus its running average.

    The average is maintained incrementally (avg += (g_new - g_old)/B) and
    must equal the mean of the table at all times.
    """

    stored: np.ndarray  # (num_blocks, p, p)
    average: np.ndarray  # (p, p)

    @classmethod
    def zeros(cls, num_blocks, p):
        return cls(np.zeros((num_blocks, p, p)), np.zeros((p, p)))

    def update_block(self, b, grad):
        self.average += (grad - self.stored[b]) / self.stored.shape[0]
        self.stored[b] = grad


def sag_run(X, model, cfg=None, epochs=10, init="whiten", callback=None,
            include_identity=True):
    """Stochastic average gradient over the fixed mini-batch partition.

    Finite-sum only.  Visiting block b replaces its stored relative
    gradient, refreshes the running average incrementally, and steps
    W <- (I - rho avg) W.  Stored gradients start at zero.
    """
    model = get_density(model)
    cfg = cfg or SGDConfig()
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    rng = np.random.default_rng(cfg.seed)
    blocks = mm_engine._blocks(n, cfg.batch_size)
    W = mm_engine._resolve_init(init, X, MMConfig(seed=cfg.seed), mode="random")
    state = SagState.zeros(len(blocks), p)
    eye = np.eye(p)

    trace = RunTrace(algo="sag", seed=cfg.seed)
    t0 = time.perf_counter()

    def record(epoch):
        rec = callback(epoch, W) if callback is not None else None
        rec = rec or MetricRecord()
        rec.epoch = epoch
        rec.wall_time_s = time.perf_counter() - t0
        trace.append(rec)

    record(0)
    loss0 = empirical_loss(W, X, model)
    seen = 0
    try:
        for epoch in range(1, epochs + 1):
            for b in rng.permutation(len(blocks)):
                seen += blocks[b].size
                grad = relative_gradient(W, X[:, blocks[b]], model,
                                         include_identity=include_identity)
                state.update_block(b, grad)
                W = (eye - _sgd_step(cfg, seen) * state.average) @ W
            _check_divergence(W, _safe_loss(W, X, model), loss0, "sag", epoch)
            record(epoch)
    except Diverged as exc:
        exc.trace = trace
        raise
    return W, trace


def _dense_stats(X, U):
    """Packed A^i bank computed row by row with dense matmuls.

    Deliberately independent of the engine's incremental bookkeeping so the
    two routes check each other.
    """
    p, n = X.shape
    out = np.empty((p, p * (p + 1) // 2))
    for i in range(p):
        out[i] = pack((X * U[i]) @ X.T / n)
    return out


def full_batch_mm_run(X, model, epochs=10, init="whiten", callback=None, cfg=None):
    """Full-batch MM: refresh every U entry, rebuild the A^i, sweep all rows.

    Reference implementation for the incremental solver; with selection
    "full" and one mini-batch spanning the data the two trajectories agree.
    """
    model = get_density(model)
    cfg = cfg or MMConfig()
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    W = mm_engine._resolve_init(init, X, cfg, mode="random")

    trace = RunTrace(algo="batch_mm", seed=cfg.seed)
    t0 = time.perf_counter()
    stats = mm_engine.SufficientStats(p, n)

    def record(epoch, surrogate):
        rec = callback(epoch, W) if callback is not None else None
        rec = rec or MetricRecord()
        rec.epoch = epoch
        rec.wall_time_s = time.perf_counter() - t0
        rec.surrogate_loss = surrogate
        trace.append(rec)

    U, fU = model.f_at_ustar(W @ X)
    stats.data = _dense_stats(X, U)
    record(0, mm_engine.surrogate_loss(W, U, fU, X))
    for epoch in range(1, epochs + 1):
        W = minimization_sweep(W, stats, pcg_tol=cfg.pcg_tol, pcg_max_iter=cfg.pcg_max_iter)
        U, fU = model.f_at_ustar(W @ X)
        stats.data = _dense_stats(X, U)
        record(epoch, mm_engine.surrogate_loss(W, U, fU, X))
    return W, trace


def noisy_em_update(A, Lambda, Sigma, X):
    """One EM update of the mixing matrix under x = A s + noise(0, Sigma).

    Posterior moments (Gaussian prior scales Lambda on the sources):

        E[s|x]      = (A^T Sigma^-1 A + Lambda^-1)^-1 A^T Sigma^-1 x
        E[s s^T|x]  = (A^T Sigma^-1 A + Lambda^-1)^-1 + E[s|x] E[s|x]^T

    and A_new = (sum_j x_j E[s|x_j]^T)(sum_j E[s s^T|x_j])^-1.  For
    Sigma = 0 the moments collapse to E[s|x] = A^-1 x, which makes the
    update a fixed point: the EM iteration is frozen without noise.
    """
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    p, n = X.shape
    if A.shape != (p, p):
        raise DimensionMismatch(f"A has shape {A.shape}, expected ({p}, {p})")
    Lambda = np.asarray(Lambda, dtype=float)
    if Lambda.ndim == 2:
        Lambda = np.diag(Lambda)
    Lambda = np.broadcast_to(Lambda, (p,)).astype(float)
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim == 0:
        Sigma = float(Sigma) * np.eye(p)

    try:
        if not Sigma.any():
            S = np.linalg.solve(A, X)
            cross = X @ S.T
            scatter = S @ S.T
        else:
            Sinv_A = np.linalg.solve(Sigma, A)
            M = A.T @ Sinv_A + np.diag(1.0 / Lambda)
            Sbar = np.linalg.solve(M, Sinv_A.T @ X)
            cross = X @ Sbar.T
            scatter = n * np.linalg.inv(M) + Sbar @ Sbar.T
        return np.linalg.solve(scatter.T, cross.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from None
