"""Chunked stochastic code and Bob's iterative list/consistency decoder.

The codebook is a table indexed (chunk, message, secret, offset). A codeword
for message m is the concatenation of one block per chunk, each block picked
by an independent secret. Received words use the value q for an erasure.

Because secrets are independent across chunks, the minimum distance from a
received prefix to any codeword prefix of message m is the sum over chunks
of the per-chunk minimum over secrets. The decoder therefore only needs the
table of per-chunk distances, which the kernels compute by brute force.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .params import ChannelParams
from .rng import stream
from .trajectory import (
    lambda_profile_from_word,
    list_size_bound,
    p_hat_t,
    stop_point,
    t_zero,
)

MAX_TABLE_SYMBOLS = 1 << 28

DECODED = "decoded"
AMBIGUOUS = "ambiguous"
EXHAUSTED = "exhausted"
UNIQUE = "unique"
NONE = "none"


class CodebookTooLarge(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class Codebook:
    params: ChannelParams
    table: np.ndarray
    seed: int = 0

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def n_chunks(self) -> int:
        return self.table.shape[0]

    @property
    def message_count(self) -> int:
        return self.table.shape[1]

    @property
    def secret_count(self) -> int:
        return self.table.shape[2]

    @property
    def chunk_len(self) -> int:
        return self.table.shape[3]

    def with_params(self, params: ChannelParams) -> "Codebook":
        """Attach channel parameters (p, p*, eps, rate) to a code with the same shape."""
        p = self.params
        if (params.q, params.n, params.chunk_len) != (p.q, p.n, p.chunk_len):
            raise ValueError("parameters do not match the codebook shape")
        if (params.message_count, params.secret_count) != (self.message_count, self.secret_count):
            raise ValueError("message/secret counts do not match the codebook")
        return Codebook(params, self.table, self.seed)


def _symbol_dtype(q: int):
    if q <= 256:
        return np.uint8
    if q <= 65536:
        return np.uint16
    raise ValueError("alphabets above 65536 are not supported")


def generate_codebook(params: ChannelParams, seed: int, max_symbols: int = MAX_TABLE_SYMBOLS) -> Codebook:
    """Draw every block uniformly and independently from the codebook stream of ``seed``."""
    if params.message_count is None:
        raise ValueError("message count (or rate) must be set to build a codebook")
    K, M, S, L = params.n_chunks, params.message_count, params.secret_count, params.chunk_len
    size = K * M * S * L
    if size > max_symbols:
        raise CodebookTooLarge(f"codebook needs {size} symbols, cap is {max_symbols}")
    rng = stream(seed, "codebook")
    table = rng.integers(0, params.q, size=(K, M, S, L), dtype=_symbol_dtype(params.q))
    table.setflags(write=False)
    return Codebook(params, table, seed)


def encode(cb: Codebook, m: int, secrets) -> np.ndarray:
    """Concatenate the blocks chosen by ``secrets`` (one id per chunk)."""
    secrets = np.asarray(secrets, dtype=np.int64)
    if secrets.shape != (cb.n_chunks,):
        raise IndexError(f"need {cb.n_chunks} secret ids, got shape {secrets.shape}")
    if not (0 <= m < cb.message_count):
        raise IndexError(f"message id {m} out of range")
    if np.any(secrets < 0) or np.any(secrets >= cb.secret_count):
        raise IndexError("secret id out of range")
    return cb.table[np.arange(cb.n_chunks), m, secrets, :].reshape(-1).astype(np.int64)


# distance tables


def _as_chunks(cb: Codebook, y) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.int32)
    if y.shape != (cb.params.n,):
        raise ValueError(f"received word must have length {cb.params.n}")
    return y.reshape(cb.n_chunks, cb.chunk_len)


def chunk_distance_table(cb: Codebook, y) -> np.ndarray:
    """dist[k, m, s]: disagreements between chunk k of y and block (k, m, s), erasures ignored."""
    return kernels.chunk_distances(cb.table, _as_chunks(cb, y), cb.q)


@dataclass
class DistanceIndex:
    """Cumulative per-message minimum distances for fast prefix/suffix queries."""

    prefix: np.ndarray  # (K + 1, M): prefix[k] = min distance over chunks < k

    @classmethod
    def build(cls, cb: Codebook, y) -> "DistanceIndex":
        return cls(kernels.prefix_min_distances(cb.table, _as_chunks(cb, y), cb.q))

    def prefix_distance(self, k: int) -> np.ndarray:
        return self.prefix[k]

    def suffix_distance(self, k: int) -> np.ndarray:
        return self.prefix[-1] - self.prefix[k]


def _floor(r: float) -> int:
    return int(math.floor(r + 1e-9))


def list_radius(t: int, lam: int, params: ChannelParams) -> int:
    return _floor((t - lam) * p_hat_t(t, lam, params))


def consistency_radius(t: int, lam: int, params: ChannelParams) -> int:
    """Largest disagreement count on unerased suffix positions still called consistent.

    Negative when no suffix can be consistent.
    """
    n, ps = params.n, params.p_star
    r = (n - n * ps - t + lam) * (params.half_gap - params.margin) - n * ps / (2.0 * params.q)
    return _floor(r) if r >= 0 else -1


def list_decode_prefix(cb: Codebook, y, t: int, radius: int, index: DistanceIndex | None = None) -> list[int]:
    """Messages with some codeword prefix within ``radius`` of y[:t] on unerased positions."""
    if t % cb.chunk_len:
        raise ValueError("t must be a chunk end")
    index = index or DistanceIndex.build(cb, y)
    d = index.prefix_distance(t // cb.chunk_len)
    return [int(m) for m in np.nonzero(d <= radius)[0]]


@dataclass(frozen=True)
class ConsistencyResult:
    kind: str  # UNIQUE, NONE or AMBIGUOUS
    message: int | None
    consistent: tuple[int, ...]


def consistency_decode(cb: Codebook, y, t: int, listed, params: ChannelParams,
                       index: DistanceIndex | None = None, radius: int | None = None) -> ConsistencyResult:
    """Check which listed messages have a secret suffix consistent with y after t."""
    if t % cb.chunk_len:
        raise ValueError("t must be a chunk end")
    index = index or DistanceIndex.build(cb, y)
    if radius is None:
        lam = int(np.count_nonzero(np.asarray(y)[:t] == cb.q))
        radius = consistency_radius(t, lam, params)
    d = index.suffix_distance(t // cb.chunk_len)
    ok = tuple(int(m) for m in listed if d[m] <= radius)
    if len(ok) == 1:
        return ConsistencyResult(UNIQUE, ok[0], ok)
    if len(ok) == 0:
        return ConsistencyResult(NONE, None, ok)
    return ConsistencyResult(AMBIGUOUS, None, ok)


@dataclass(frozen=True)
class Attempt:
    t: int
    lambda_t: int
    p_hat: float
    list_radius: int
    listed: tuple[int, ...]
    consistency_radius: int
    consistent: tuple[int, ...]
    list_bound: float | None

    def to_dict(self) -> dict:
        return {
            "t": self.t, "lambda_t": self.lambda_t, "p_hat": self.p_hat,
            "list_radius": self.list_radius, "listed": list(self.listed),
            "consistency_radius": self.consistency_radius,
            "consistent": list(self.consistent), "list_bound": self.list_bound,
        }


@dataclass
class DecodeOutcome:
    kind: str  # DECODED, AMBIGUOUS or EXHAUSTED
    message: int | None = None
    t: int | None = None
    trace: list[Attempt] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "t": self.t,
                "trace": [a.to_dict() for a in self.trace]}


def bob_decode(cb: Codebook, y, params: ChannelParams | None = None) -> DecodeOutcome:
    """Try chunk ends from the start point to the stop point.

    At each t: list-decode the prefix with radius (t - lambda) p_hat_t, then
    keep listed messages whose suffix is consistent. One survivor decodes,
    two or more is a declared decoding error, none moves on to the next t.
    """
    params = params or cb.params
    y = np.asarray(y)
    lam_profile = lambda_profile_from_word(y, params)
    t0 = t_zero(lam_profile, params)
    stop = stop_point(lam_profile, params)
    index = DistanceIndex.build(cb, y)
    L = params.chunk_len
    rate = params.rate if params.rate is not None else 0.0
    out = DecodeOutcome(EXHAUSTED)
    for t in range(t0, stop + 1, L):
        lam = int(lam_profile[t // L - 1])
        ph = p_hat_t(t, lam, params)
        lr = _floor((t - lam) * ph)
        listed = list_decode_prefix(cb, y, t, lr, index)
        cr = consistency_radius(t, lam, params)
        res = consistency_decode(cb, y, t, listed, params, index, cr)
        out.trace.append(Attempt(t, lam, ph, lr, tuple(listed), cr, res.consistent,
                                 list_size_bound(t, lam, params, rate)))
        if res.kind == UNIQUE:
            out.kind, out.message, out.t = DECODED, res.message, t
            return out
        if res.kind == AMBIGUOUS:
            out.kind, out.t = AMBIGUOUS, t
            return out
    return out


# goodness diagnostic


@dataclass(frozen=True, eq=False)
class GoodnessReport:
    threshold: float
    distances: np.ndarray  # one entry per secret suffix, lexicographic order
    good: np.ndarray

    @property
    def fraction_good(self) -> float:
        return float(np.mean(self.good)) if len(self.good) else 1.0


def suffix_goodness(cb: Codebook, m: int, excl_list, t: int, max_suffixes: int = 1 << 16) -> GoodnessReport:
    """Distance of every codeword suffix of ``m`` (one per secret suffix) to an excluded list.

    A suffix is good when its distance exceeds
    (n-t)(q-1)/q - 2(n-t) eps^2/(9 q^3).
    """
    P = cb.params
    if t % cb.chunk_len:
        raise ValueError("t must be a chunk end")
    k0 = t // cb.chunk_len
    chunks = range(k0, cb.n_chunks)
    count = cb.secret_count ** len(chunks)
    if count > max_suffixes:
        raise CodebookTooLarge(f"{count} secret suffixes exceed the enumeration cap {max_suffixes}")
    rem = P.n - t
    thr = rem * (P.q - 1) / P.q - rem * 2.0 * P.epsilon**2 / (9.0 * P.q**3)
    excl = [np.asarray(e) for e in excl_list]
    dists = np.full(count, math.inf)
    for i, sec in enumerate(itertools.product(range(cb.secret_count), repeat=len(chunks))):
        word = cb.table[np.arange(k0, cb.n_chunks), m, list(sec), :].reshape(-1)
        if excl:
            dists[i] = min(int(np.count_nonzero(word != e)) for e in excl)
    return GoodnessReport(thr, dists, dists > thr)


# serialization

_MAGIC = b"CCBK"
_HEADER = struct.Struct("<4sHIIIIIIQB")
_VERSION = 1


def save_codebook(cb: Codebook, path) -> None:
    """Binary header then the row-major (chunk, message, secret, offset) table."""
    P = cb.params
    g = math.gcd(P.chunk_len, P.n)
    width = np.dtype(cb.table.dtype).itemsize
    head = _HEADER.pack(_MAGIC, _VERSION, P.q, P.n, P.chunk_len // g, P.n // g,
                        cb.message_count, cb.secret_count, cb.seed, width)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(cb.table).astype(cb.table.dtype.newbyteorder("<")).tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a codebook header")
    magic, ver, q, n, tnum, tden, M, S, seed, width = _HEADER.unpack(raw)
    if magic != _MAGIC:
        raise ValueError("not a codebook file")
    if ver != _VERSION:
        raise ValueError(f"unsupported codebook version {ver}")
    return {"q": q, "n": n, "theta_num": tnum, "theta_den": tden, "message_count": M,
            "secret_count": S, "seed": seed, "symbol_bytes": width}


def load_codebook(path, params: ChannelParams | None = None) -> Codebook:
    h = read_header(path)
    n = h["n"]
    chunk_len = n * h["theta_num"] // h["theta_den"]
    dtype = np.dtype("<u1") if h["symbol_bytes"] == 1 else np.dtype("<u2")
    K = n // chunk_len
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        data = np.frombuffer(fh.read(), dtype=dtype)
    shape = (K, h["message_count"], h["secret_count"], chunk_len)
    if data.size != math.prod(shape):
        raise ValueError("codebook table size does not match its header")
    table = data.reshape(shape).astype(_symbol_dtype(h["q"]))
    table.setflags(write=False)
    base = ChannelParams(q=h["q"], p=0.0, n=n, chunk_len=chunk_len,
                         message_count=h["message_count"], secret_count=h["secret_count"])
    cb = Codebook(base, table, h["seed"])
    return cb.with_params(params) if params is not None else cb
