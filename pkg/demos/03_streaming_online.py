"""Online MM on an endless sample stream, no dataset ever materialized.

Each incoming sample is folded into the per-source statistics with a
decaying weight rho = 1 / count^alpha and is then discarded; memory usage is
O(p^3) regardless of how long the stream runs.  The first samples are
buffered only to build the whitening initializer, then replayed.

Run:  python3 demos/03_streaming_online.py
"""

import numpy as np

from mmica.datakit import gen_laplace_mixture
from mmica.metrics import amari_distance
from mmica.mm_engine import MMConfig, run_online

P, SEED = 5, 0
MAX_SAMPLES = 200_000
SAMPLES_PER_EPOCH = 20_000


def sample_stream(mixing, seed):
    """Yield mixed super-Gaussian samples one at a time, forever."""
    rng = np.random.default_rng(seed)
    while True:
        yield mixing @ rng.laplace(size=P)


if __name__ == "__main__":
    mixing = gen_laplace_mixture(P, 1, seed=SEED).mixing
    values = []

    def cb(epoch, W):
        values.append(amari_distance(W, mixing))

    W, trace = run_online(sample_stream(mixing, SEED), "huber",
                          MMConfig(seed=SEED, alpha=0.5),
                          max_samples=MAX_SAMPLES, p=P,
                          samples_per_epoch=SAMPLES_PER_EPOCH, callback=cb)

    print(f"{'samples seen':>14s}  amari distance")
    for rec, amari in zip(trace.records, values):
        print(f"{rec.epoch * SAMPLES_PER_EPOCH:14d}  {amari:.5f}")
    print(f"\nproduct W @ mixing (should be a scaled permutation):\n"
          f"{np.array_str(W @ mixing, precision=3, suppress_small=True)}")
