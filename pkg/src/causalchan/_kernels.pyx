# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for brute-force distance scans over the codebook table."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

ctypedef fused sym_t:
    cnp.uint8_t
    cnp.uint16_t


def chunk_distances(const sym_t[:, :, :, ::1] table, const cnp.int32_t[:, ::1] y, int erased):
    """dist[k, m, s] = number of unerased offsets where table[k, m, s, :] differs from y[k, :]."""
    cdef Py_ssize_t K = table.shape[0], M = table.shape[1], S = table.shape[2], L = table.shape[3]
    cdef Py_ssize_t k, m, s, j
    cdef int c, yj
    out = np.zeros((K, M, S), dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] o = out
    for k in range(K):
        for m in range(M):
            for s in range(S):
                c = 0
                for j in range(L):
                    yj = y[k, j]
                    if yj != erased and table[k, m, s, j] != yj:
                        c += 1
                o[k, m, s] = c
    return out


def distance_polys(const cnp.int32_t[:, :, ::1] dist, Py_ssize_t maxdeg):
    """Per-message distance enumerators.

    poly[m, d] is proportional to the number of secret sequences whose
    total distance is d. Rows are rescaled after each chunk by a common
    factor; the natural log of the total factor is returned alongside.
    """
    cdef Py_ssize_t K = dist.shape[0], M = dist.shape[1], S = dist.shape[2]
    cdef Py_ssize_t k, m, s, d, dd, width = maxdeg + 1
    cdef double peak, log_scale = 0.0
    cur_arr = np.zeros((M, width), dtype=np.float64)
    nxt_arr = np.zeros((M, width), dtype=np.float64)
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] nxt = nxt_arr
    cdef double[:, ::1] tmp
    for m in range(M):
        cur[m, 0] = 1.0
    for k in range(K):
        peak = 0.0
        for m in range(M):
            for d in range(width):
                nxt[m, d] = 0.0
            for d in range(width):
                if cur[m, d] == 0.0:
                    continue
                for s in range(S):
                    dd = d + dist[k, m, s]
                    if dd < width:
                        nxt[m, dd] += cur[m, d]
            for d in range(width):
                if nxt[m, d] > peak:
                    peak = nxt[m, d]
        if peak > 0.0:
            for m in range(M):
                for d in range(width):
                    nxt[m, d] /= peak
            log_scale += log(peak)
        tmp = cur
        cur = nxt
        nxt = tmp
    return np.asarray(cur).copy(), log_scale


def prefix_min_distances(const sym_t[:, :, :, ::1] table, const cnp.int32_t[:, ::1] y, int erased):
    """pre[k, m] = sum over chunks < k of the minimum over secrets of the chunk distance."""
    cdef Py_ssize_t K = table.shape[0], M = table.shape[1], S = table.shape[2], L = table.shape[3]
    cdef Py_ssize_t k, m, s, j
    cdef int c, best, yj
    out = np.zeros((K + 1, M), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] o = out
    for k in range(K):
        for m in range(M):
            best = L + 1
            for s in range(S):
                c = 0
                for j in range(L):
                    yj = y[k, j]
                    if yj != erased and table[k, m, s, j] != yj:
                        c += 1
                if c < best:
                    best = c
            o[k + 1, m] = o[k, m] + best
    return out
