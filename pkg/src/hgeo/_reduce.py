"""Deterministic chunked summation.

Chunk boundaries are fixed by the array length only, so the result is
bit-identical whatever number of worker threads is used.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 14


def worker_count() -> int:
    raw = os.environ.get("HGEO_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _pairwise(parts: list[float]) -> float:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0] if parts else 0.0


def tree_sum(values: np.ndarray, workers: int | None = None) -> float:
    """Sum a 1-D array with a fixed pairwise tree over fixed-size chunks."""
    v = np.ascontiguousarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    chunks = [v[i:i + CHUNK] for i in range(0, v.size, CHUNK)]
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(chunks) == 1:
        parts = [float(np.sum(c)) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(lambda c: float(np.sum(c)), chunks))
    return _pairwise(parts)
