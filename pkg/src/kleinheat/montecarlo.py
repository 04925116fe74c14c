"""Deterministic batched Monte Carlo means.

Each batch draws from its own seed, spawned from the user seed with
``SeedSequence``, so results do not depend on the number of threads.  Batch
sums are reduced in batch order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np

__all__ = ["MCResult", "batched_mean", "batch_seeds", "z_score"]

DEFAULT_BATCH = 1 << 16


class MCResult(NamedTuple):
    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def batch_seeds(seed: int, n_batches: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(n_batches)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children]


def batched_mean(
    draw: Callable[[int, int], np.ndarray],
    n: int,
    seed: int,
    *,
    batch: int = DEFAULT_BATCH,
    threads: int = 1,
) -> MCResult:
    """Mean and standard error of ``draw(batch_seed, m)`` pooled over ``n`` samples.

    ``draw`` returns an array of shape ``(m,)`` or ``(m, k)``.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    sizes = [batch] * (n // batch) + ([n % batch] if n % batch else [])
    seeds = batch_seeds(seed, len(sizes))

    def run(args):
        s, m = args
        v = np.asarray(draw(s, m), dtype=float)
        mu = v.mean(axis=0)
        return m, mu, ((v - mu) ** 2).sum(axis=0)

    jobs = list(zip(seeds, sizes))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    # Chan et al. pairwise update, applied in batch order
    cnt, mean, m2 = parts[0]
    for m, mu, q in parts[1:]:
        delta = mu - mean
        tot = cnt + m
        mean = mean + delta * (m / tot)
        m2 = m2 + q + delta * delta * (cnt * m / tot)
        cnt = tot
    var = m2 / (n - 1)
    return MCResult(mean, np.sqrt(var / n), n)


def z_score(mean: float, stderr: float, target: float) -> float:
    if stderr == 0:
        return 0.0 if mean == target else math.copysign(math.inf, mean - target)
    return (mean - target) / stderr
