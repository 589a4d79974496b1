"""Reproducible random streams for replicated simulations.

Replicates are grouped in fixed blocks of ``BLOCK_SIZE``.  Block ``b`` of a run
seeded with ``seed`` always draws from ``SeedSequence(seed, spawn_key=(b,))``,
so replicate ``i`` is the same whatever ``n`` is, and whichever order or
worker the blocks are executed in.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

BLOCK_SIZE = 1024
THREADS_ENV = "TRACETHRESH_THREADS"


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def n_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def run_blocks(kernel: Callable[[np.random.Generator, int], np.ndarray], n: int, seed: int) -> np.ndarray:
    """Concatenate ``kernel(rng_b, size_b)`` over blocks covering ``n`` replicates.

    The compiled kernels release the GIL, so blocks run on a thread pool
    capped by ``TRACETHRESH_THREADS``.
    """
    sizes = [min(BLOCK_SIZE, n - start) for start in range(0, n, BLOCK_SIZE)]
    jobs = [(b, size) for b, size in enumerate(sizes)]
    workers = min(n_threads(), len(jobs)) or 1
    if workers == 1:
        parts = [kernel(block_rng(seed, b), size) for b, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: kernel(block_rng(seed, job[0]), job[1]), jobs))
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts)
