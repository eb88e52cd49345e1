"""Pure numpy versions of the compiled kernels; same signatures and results."""

from __future__ import annotations

import math

import numpy as np


def chunk_distances(table: np.ndarray, y: np.ndarray, erased: int) -> np.ndarray:
    """dist[k, m, s] = number of unerased offsets where table[k, m, s, :] differs from y[k, :]."""
    y = np.asarray(y)
    live = y != erased
    diff = (table != y[:, None, None, :]) & live[:, None, None, :]
    return diff.sum(axis=3, dtype=np.int32)


def distance_polys(dist: np.ndarray, maxdeg: int) -> tuple[np.ndarray, float]:
    """Per-message distance enumerators, rescaled per chunk like the compiled version."""
    K, M, S = dist.shape
    width = maxdeg + 1
    cur = np.zeros((M, width))
    cur[:, 0] = 1.0
    log_scale = 0.0
    rows = np.arange(M)
    for k in range(K):
        nxt = np.zeros((M, width))
        for s in range(S):
            shift = dist[k, :, s]
            for d in np.unique(shift):
                sel = rows[shift == d]
                if d < width:
                    nxt[sel, d:] += cur[sel, : width - d]
        peak = nxt.max()
        if peak > 0:
            nxt /= peak
            log_scale += math.log(peak)
        cur = nxt
    return cur, log_scale


def prefix_min_distances(table: np.ndarray, y: np.ndarray, erased: int) -> np.ndarray:
    """pre[k, m] = sum over chunks < k of the minimum over secrets of the chunk distance."""
    dmin = chunk_distances(table, y, erased).min(axis=2)
    K, M = dmin.shape
    out = np.zeros((K + 1, M), dtype=np.int32)
    for k in range(K):
        out[k + 1] = out[k] + dmin[k]
    return out
