"""Deterministic summation and chunked parallel evaluation over time grids."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import numpy as np

CHUNK = 4096


def neumaier_sum(terms: Iterable[np.ndarray], shape) -> np.ndarray:
    """Elementwise compensated sum of arrays, in the order given."""
    s = np.zeros(shape)
    comp = np.zeros(shape)
    for t in terms:
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        comp += np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    return s + comp


def chunked_map(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, threads: int = 1,
                chunk: int = CHUNK) -> np.ndarray:
    """Apply ``func`` over fixed-size chunks of x and join the results along the last axis.

    ``func`` must treat each element of x independently. Chunk boundaries do not
    depend on the thread count, so results are identical for any ``threads``.
    """
    x = np.asarray(x)
    if x.dtype.kind in "iub":
        x = x.astype(float)
    if x.size == 0:
        return np.zeros(0)
    pieces = [x[i:i + chunk] for i in range(0, x.size, chunk)]
    if threads <= 1 or len(pieces) == 1:
        out = [func(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(func, pieces))
    return np.concatenate(out, axis=-1)
