"""Deterministic RNG streams and thread-invariant parallel evaluation.

All randomness comes from counter-based Philox streams keyed by
(seed, *context).  Randomness is always drawn up front in a fixed order by a
single thread; worker threads only evaluate pure functions over fixed chunk
boundaries and results are reduced in chunk order, so outputs are
byte-identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "DVINETS_THREADS"


def stream(seed, *key):
    """Independent Generator keyed by (seed, *key)."""
    ss = np.random.SeedSequence(entropy=(int(seed),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def resolve_threads(value=None):
    if value is not None and int(value) >= 1:
        return int(value)
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunk_slices(n, n_chunks=32):
    """Fixed chunk boundaries over range(n); independent of thread count."""
    n_chunks = max(1, min(int(n_chunks), n))
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [slice(int(bounds[i]), int(bounds[i + 1]))
            for i in range(n_chunks) if bounds[i + 1] > bounds[i]]


def map_chunks(func, n, threads, n_chunks=32):
    """Apply func(slice) over fixed chunks; results returned in chunk order."""
    slices = chunk_slices(n, n_chunks)
    if threads <= 1 or len(slices) <= 1:
        return [func(s) for s in slices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, slices))
