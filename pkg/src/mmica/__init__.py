"""Stochastic majorization-minimization solvers for maximum-likelihood ICA.

Incremental and online MM algorithms built on per-source sufficient
statistics, plus relative-gradient SGD/SAG baselines, synthetic data
generation, separation metrics, and a benchmark CLI (``mmica``).
"""

from .baselines import (SagState, SGDConfig, full_batch_mm_run, noisy_em_update,
                        relative_gradient, sag_run, sgd_run)
from .datakit import (Dataset, gen_laplace_mixture, load_dataset, load_dataset_csv,
                      load_matrix, save_dataset, save_matrix, whiten_init)
from .density import DENSITIES, Density, Huber, LogCosh, Student, get_density
from .exceptions import (ChecksumError, DegenerateRow, DegenerateStats,
                         DimensionMismatch, Diverged, DomainError, FormatError,
                         IoError, MmicaError, NotPositiveDefinite, RankDeficient,
                         SingularMatrix, UnsupportedConjugate)
from .metrics import amari_distance, grad_norm, leftout_loss
from .mm_engine import (MMConfig, SufficientStats, UMemory, compute_gap,
                        empirical_loss, majorize_incremental, majorize_online,
                        minimization_sweep, minimize_row, run_incremental,
                        run_online, surrogate_loss)
from .symlin import PackedSym, SolveReport, congruent, pack, solve_row, sym_rank1_update, unpack
from .trace import TRACE_COLUMNS, MetricRecord, RunTrace

__version__ = "0.1.0"

__all__ = [
    "MMConfig", "SufficientStats", "UMemory", "run_incremental", "run_online",
    "majorize_incremental", "majorize_online", "minimize_row", "minimization_sweep",
    "empirical_loss", "surrogate_loss", "compute_gap",
    "Density", "Huber", "Student", "LogCosh", "DENSITIES", "get_density",
    "PackedSym", "SolveReport", "pack", "unpack", "congruent", "solve_row",
    "sym_rank1_update",
    "Dataset", "gen_laplace_mixture", "whiten_init", "save_dataset", "load_dataset",
    "load_dataset_csv", "save_matrix", "load_matrix",
    "SGDConfig", "SagState", "relative_gradient", "sgd_run", "sag_run",
    "full_batch_mm_run", "noisy_em_update",
    "amari_distance", "leftout_loss", "grad_norm",
    "MetricRecord", "RunTrace", "TRACE_COLUMNS",
    "MmicaError", "DomainError", "UnsupportedConjugate", "DimensionMismatch",
    "NotPositiveDefinite", "SingularMatrix", "DegenerateStats", "DegenerateRow",
    "RankDeficient", "Diverged", "FormatError", "ChecksumError", "IoError",
    "__version__",
]
