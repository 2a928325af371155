"""Replication-parallel execution with order-independent, deterministic results."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def run_replications(reps: int, width: int, fn, threads: int = 1) -> np.ndarray:
    """Fill a (reps, width) array with fn(r) per replication index r.

    Each replication must be a pure function of its index (it owns stream_id = r),
    so the result is bitwise identical for any thread count.
    """
    out = np.empty((reps, width))

    def run_range(lo: int, hi: int):
        for r in range(lo, hi):
            out[r, :] = fn(r)

    if threads <= 1 or reps == 1:
        run_range(0, reps)
        return out

    bounds = np.linspace(0, reps, min(threads, reps) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run_range, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for fut in futures:
            fut.result()
    return out
