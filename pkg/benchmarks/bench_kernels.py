"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from causalchan import _kernels_py, kernels
from causalchan.codec import bob_decode, encode, generate_codebook
from causalchan.params import ChannelParams

CASES = [
    # (q, chunks, messages, secrets, chunk_len)
    (2, 400, 4, 2, 4),
    (2, 128, 8192, 1, 1),
    (16, 50, 64, 8, 10),
]


def _instance(q, K, M, S, L, seed=0):
    rng = np.random.default_rng(seed)
    table = rng.integers(0, q, size=(K, M, S, L)).astype(np.uint8)
    y = rng.integers(0, q + 1, size=(K, L)).astype(np.int32)
    return table, y


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    compiled = kernels.BACKENDS.get("compiled")
    if compiled is None:
        print("compiled extension not built; only the fallback is available")
    backends = {"python": _kernels_py, **({"compiled": compiled} if compiled else {})}

    print(f"{'kernel':<22}{'shape (q,K,M,S,L)':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for q, K, M, S, L in CASES:
        table, y = _instance(q, K, M, S, L)
        dist = np.ascontiguousarray(_kernels_py.chunk_distances(table, y, q)[:, :64])
        jobs = {
            "chunk_distances": lambda b: b.chunk_distances(table, y, q),
            "prefix_min_distances": lambda b: b.prefix_min_distances(table, y, q),
            "distance_polys": lambda b: b.distance_polys(dist, K * L),
        }
        for name, job in jobs.items():
            times = {b: _best(lambda: job(mod), args.repeat) for b, mod in backends.items()}
            speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
            print(f"{name:<22}{str((q, K, M, S, L)):<24}"
                  + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.1f}x")

    P = ChannelParams(q=2, p=0.05, p_star=0.05, epsilon=0.3, n=1600, chunk_len=4, message_count=4, secret_count=2)
    cb = generate_codebook(P, 1)
    y = encode(cb, 1, np.zeros(P.n_chunks, dtype=int))
    times = {}
    for b in backends:
        kernels.use_backend(b)
        times[b] = _best(lambda: bob_decode(cb, y), args.repeat)
    kernels.use_backend("compiled" if compiled else "python")
    speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
    print(f"{'bob_decode':<22}{'n=1600 toy':<24}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
          + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
