from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalchan import _kernels_py, kernels

compiled = kernels.BACKENDS.get("compiled")
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _instance(seed, q, K, M, S, L):
    rng = np.random.default_rng(seed)
    dtype = np.uint8 if q <= 256 else np.uint16
    table = rng.integers(0, q, size=(K, M, S, L)).astype(dtype)
    y = rng.integers(0, q + 1, size=(K, L)).astype(np.int32)
    return table, y


dims = dict(seed=st.integers(0, 2**31), q=st.sampled_from([2, 3, 5, 300]), K=st.integers(1, 6),
            M=st.integers(1, 7), S=st.integers(1, 4), L=st.integers(1, 6))


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(**dims)
def test_backends_agree(seed, q, K, M, S, L):
    table, y = _instance(seed, q, K, M, S, L)
    a = compiled.chunk_distances(table, y, q)
    b = _kernels_py.chunk_distances(table, y, q)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(compiled.prefix_min_distances(table, y, q),
                                  _kernels_py.prefix_min_distances(table, y, q))
    deg = K * L
    pa, sa = compiled.distance_polys(a, deg)
    pb, sb = _kernels_py.distance_polys(b, deg)
    assert sa == pytest.approx(sb)
    np.testing.assert_allclose(pa, pb, rtol=1e-12, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(**dims)
def test_distance_polys_count_secret_sequences(seed, q, K, M, S, L):
    table, y = _instance(seed, q, min(K, 4), M, min(S, 3), L)
    K, S = table.shape[0], table.shape[2]
    dist = _kernels_py.chunk_distances(table, y, q)
    deg = K * L
    polys, log_scale = kernels.distance_polys(dist, deg)
    counts = polys * np.exp(log_scale)
    import itertools

    for m in range(M):
        direct = np.zeros(deg + 1)
        for sec in itertools.product(range(S), repeat=K):
            direct[sum(int(dist[k, m, s]) for k, s in enumerate(sec))] += 1
        np.testing.assert_allclose(counts[m], direct, rtol=1e-9, atol=1e-9)


def test_use_backend_switch():
    before = kernels.BACKEND
    kernels.use_backend("python")
    assert kernels.BACKEND == "python"
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")
    kernels.use_backend(before)
