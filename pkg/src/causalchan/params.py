"""Channel and code parameters shared by every stage of the pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

REGION_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a parameter set is inconsistent.

    ``violations`` lists every broken constraint, not just the first one.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def default_theta(q: int, epsilon: float) -> float:
    """Chunk fraction used when none is given: eps^2 / (9 q^2)."""
    return epsilon**2 / (9.0 * q * q)


def chunk_len_from_theta(n: int, theta: float) -> int:
    """Convert a chunk fraction into an integer chunk length, or raise."""
    raw = n * theta
    k = round(raw)
    errs = []
    if theta <= 0:
        errs.append(f"theta must be positive, got {theta}")
    elif abs(raw - k) > 1e-9 * max(1.0, raw) or k < 1:
        errs.append(f"n*theta = {raw:.12g} is not a positive integer (n={n}, theta={theta})")
    elif n % k != 0:
        errs.append(f"chunk length n*theta = {k} does not divide n = {n}")
    if errs:
        raise ParameterError(errs)
    return int(k)


@dataclass(frozen=True)
class ChannelParams:
    """Everything needed to build, attack and decode one code.

    ``chunk_len`` is n*theta, the number of symbols per chunk. Either ``rate``
    or ``message_count`` may be given; the other is derived.
    """

    q: int
    p: float
    p_star: float = 0.0
    epsilon: float = 0.1
    n: int = 1
    chunk_len: int = 1
    rate: float | None = None
    message_count: int | None = None
    secret_count: int = 1
    theoretical_mode: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        errs = self.basic_violations()
        if errs:
            raise ParameterError(errs)
        if self.message_count is None and self.rate is not None:
            k = self.n * self.rate
            if k * math.log2(self.q) < 1000:
                m = int(round(self.q ** k))
            else:  # beyond float range: nearest integral exponent, exact
                m = self.q ** int(round(k))
            m = max(2, m)
            object.__setattr__(self, "message_count", m)
        if self.rate is None and self.message_count is not None:
            object.__setattr__(self, "rate", math.log(self.message_count, self.q) / self.n)

    # construction helpers

    @classmethod
    def build(
        cls,
        q: int,
        p: float,
        p_star: float = 0.0,
        epsilon: float = 0.1,
        n: int = 1,
        theta: float | None = None,
        chunk_len: int | None = None,
        **kw,
    ) -> "ChannelParams":
        """Construct from a chunk fraction ``theta`` (default eps^2/(9q^2)) or a chunk length."""
        if chunk_len is None:
            if theta is None:
                theta = default_theta(q, epsilon)
            chunk_len = chunk_len_from_theta(n, theta)
        return cls(q=q, p=p, p_star=p_star, epsilon=epsilon, n=n, chunk_len=chunk_len, **kw)

    @classmethod
    def theoretical(cls, q: int, p: float, p_star: float, epsilon: float, n: int) -> "ChannelParams":
        """Parameters tied together as in the asymptotic construction.

        theta = eps^2/(9q^2), secret rate theta^3/q^2, rate C - eps.
        """
        from .capacity import capacity

        theta = default_theta(q, epsilon)
        chunk_len = chunk_len_from_theta(n, theta)
        secret_rate = theta**3 / q**2
        secrets = int(math.ceil(q ** (n * secret_rate)))
        rate = capacity(q, p, p_star).value - epsilon
        if rate <= 0:
            raise ParameterError([f"rate C - eps = {rate:.6g} is not positive"])
        return cls(
            q=q, p=p, p_star=p_star, epsilon=epsilon, n=n, chunk_len=chunk_len,
            rate=rate, secret_count=max(1, secrets), theoretical_mode=True,
        )

    def with_(self, **changes) -> "ChannelParams":
        return replace(self, **changes)

    # derived quantities

    @property
    def theta(self) -> float:
        return self.chunk_len / self.n

    @property
    def n_chunks(self) -> int:
        return self.n // self.chunk_len

    @property
    def error_cap(self) -> int:
        return int(math.floor(self.p * self.n + 1e-9))

    @property
    def erasure_cap(self) -> int:
        return int(math.floor(self.p_star * self.n + 1e-9))

    @property
    def margin(self) -> float:
        """The slack eps^2/(9 q^2) that appears throughout the trajectory analysis."""
        return self.epsilon**2 / (9.0 * self.q * self.q)

    @property
    def half_gap(self) -> float:
        """(q-1)/(2q)."""
        return (self.q - 1) / (2.0 * self.q)

    def chunk_ends(self) -> range:
        """Chunk boundaries t = n*theta, 2 n*theta, ..., n - n*theta."""
        return range(self.chunk_len, self.n, self.chunk_len)

    # validation

    def basic_violations(self) -> list[str]:
        errs = []
        if int(self.q) != self.q or self.q < 2:
            errs.append(f"q must be an integer >= 2, got {self.q}")
        for name in ("p", "p_star"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                errs.append(f"{name} must lie in [0, 1], got {v}")
        if self.epsilon <= 0:
            errs.append(f"epsilon must be positive, got {self.epsilon}")
        if self.n < 1:
            errs.append(f"n must be positive, got {self.n}")
        if self.chunk_len < 1:
            errs.append(f"chunk length must be positive, got {self.chunk_len}")
        elif self.n >= 1 and self.n % self.chunk_len != 0:
            errs.append(f"chunk length {self.chunk_len} does not divide n = {self.n}")
        if self.secret_count < 1:
            errs.append(f"secret_count must be >= 1, got {self.secret_count}")
        if self.message_count is not None and self.message_count < 1:
            errs.append(f"message_count must be >= 1, got {self.message_count}")
        return errs

    def region_violations(self) -> list[str]:
        """Constraints needed before a positive rate can be claimed."""
        c = (self.q - 1) / self.q
        errs = []
        if self.p > c / 2 + REGION_TOL:
            errs.append(f"p = {self.p} exceeds (q-1)/(2q) = {c / 2:.6g}")
        if self.p_star > c + REGION_TOL:
            errs.append(f"p* = {self.p_star} exceeds (q-1)/q = {c:.6g}")
        if self.p + self.p_star > c + REGION_TOL:
            errs.append(f"p + p* = {self.p + self.p_star:.6g} exceeds (q-1)/q = {c:.6g}")
        return errs

    def coding_violations(self) -> list[str]:
        """Region constraints plus the slack condition 2p + p* + eps <= (q-1)/q."""
        errs = self.region_violations()
        c = (self.q - 1) / self.q
        s = 2 * self.p + self.p_star + self.epsilon
        if s > c + REGION_TOL:
            errs.append(f"2p + p* + eps = {s:.6g} exceeds (q-1)/q = {c:.6g}")
        if self.message_count is None:
            errs.append("message count (or rate) is required for coding")
        return errs

    def to_dict(self) -> dict:
        return {
            "q": self.q, "p": self.p, "p_star": self.p_star, "epsilon": self.epsilon,
            "n": self.n, "chunk_len": self.chunk_len, "theta": self.theta,
            "rate": self.rate, "message_count": self.message_count,
            "secret_count": self.secret_count, "theoretical_mode": self.theoretical_mode,
        }
