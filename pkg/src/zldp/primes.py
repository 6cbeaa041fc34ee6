"""Prime generation, Moebius values and range-restricted factor counting.

Prime ranges live on the doubly-logarithmic scale used throughout: a range
(t_lo, t_hi] denotes the primes p with loglog p in that interval, i.e.
exp(e^t_lo) < p <= exp(e^t_hi).  The sieve is a process-wide lazily grown
table, plain Eratosthenes up to 1e8 and segmented above, with a hard cap
(default 2**34) so a typo cannot eat the machine.  Everything is pure and
read-only after the table is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError

HARD_CAP = 2**34
_SEGMENT_BYTES = 1 << 23
_PLAIN_SIEVE_LIMIT = 10**8
_SPF_LIMIT = 10**7

SIEVE_CACHE_MAGIC = b"ZLDPPRM1"

_primes: np.ndarray = np.empty(0, dtype=np.int64)
_sieved_to: int = 1
_spf: np.ndarray | None = None


@dataclass(frozen=True)
class PrimeRange:
    """Primes p with loglog p in (t_lo, t_hi]; t_lo = -inf admits p = 2."""

    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not self.t_lo <= self.t_hi:
            raise DomainError(f"PrimeRange needs t_lo <= t_hi, got ({self.t_lo}, {self.t_hi})")

    @property
    def lower(self) -> float:
        """Exclusive lower bound on p."""
        if math.isinf(self.t_lo) and self.t_lo < 0:
            return 0.0
        return math.exp(math.exp(self.t_lo))

    @property
    def upper(self) -> float:
        """Inclusive upper bound on p."""
        return math.exp(math.exp(self.t_hi))

    def is_empty(self) -> bool:
        return self.t_lo == self.t_hi

    def contains(self, p: int) -> bool:
        return self.lower < p <= self.upper


def _plain_sieve(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def _segmented_sieve(limit: int) -> np.ndarray:
    base = _plain_sieve(math.isqrt(limit))
    chunks = [base]
    lo = int(base[-1]) + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT_BYTES, limit + 1)
        mask = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            mask[start - lo :: p] = False
        chunks.append((np.nonzero(mask)[0] + lo).astype(np.int64))
        lo = hi
    return np.concatenate(chunks)


def ensure_sieved(limit: int, hard_cap: int = HARD_CAP) -> None:
    """Grow the shared prime table to cover ``limit``."""
    global _primes, _sieved_to
    limit = int(limit)
    if limit > hard_cap:
        raise ResourceError(f"sieve limit {limit} exceeds the hard cap {hard_cap}")
    if limit <= _sieved_to:
        return
    if limit <= _PLAIN_SIEVE_LIMIT:
        _primes = _plain_sieve(limit)
    else:
        _primes = _segmented_sieve(limit)
    _sieved_to = limit


def sieve_primes(limit: int, hard_cap: int = HARD_CAP) -> np.ndarray:
    """All primes <= limit, ascending."""
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    ensure_sieved(limit, hard_cap)
    idx = np.searchsorted(_primes, limit, side="right")
    return _primes[:idx]


def primes_in_range(rng: PrimeRange, hard_cap: int = HARD_CAP) -> np.ndarray:
    """Primes p with loglog p in (rng.t_lo, rng.t_hi]."""
    if rng.is_empty():
        return np.empty(0, dtype=np.int64)
    upper = rng.upper
    if not math.isfinite(upper):
        raise ResourceError(f"prime range upper bound exp(e^{rng.t_hi}) is not representable")
    hi = int(math.floor(upper))
    if hi > hard_cap:
        raise ResourceError(f"prime range needs sieving to {hi}, beyond the hard cap {hard_cap}")
    if hi < 2:
        return np.empty(0, dtype=np.int64)
    ps = sieve_primes(hi, hard_cap)
    lo = rng.lower
    start = np.searchsorted(ps, math.floor(lo), side="right") if lo > 0 else 0
    # floor() can admit p == floor(lower) when lower is non-integral; re-check
    while start < len(ps) and ps[start] <= lo:
        start += 1
    return ps[start:]


def _ensure_spf() -> np.ndarray:
    global _spf
    if _spf is None:
        n = _SPF_LIMIT
        spf = np.zeros(n + 1, dtype=np.int32)
        for i in range(2, math.isqrt(n) + 1):
            if spf[i] == 0:
                sl = spf[i * i :: i]
                sl[sl == 0] = i
        _spf = spf
    return _spf


def factorize(m: int) -> list[tuple[int, int]]:
    """(prime, exponent) pairs of m >= 1."""
    if m < 1:
        raise DomainError(f"cannot factor {m}; need m >= 1")
    out: list[tuple[int, int]] = []
    if m < _SPF_LIMIT:
        spf = _ensure_spf()
        while m > 1:
            p = int(spf[m]) or m
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        return out
    for p in sieve_primes(math.isqrt(m)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return out


def mobius(n: int):
    """Moebius mu(n): 0 on squarefull n, else (-1)^(number of prime factors)."""
    if n < 1:
        raise DomainError(f"mobius undefined for n={n}")
    if n == 1:
        return 1
    k = 0
    for _, e in factorize(n):
        if e > 1:
            return 0
        k += 1
    return -1 if k % 2 else 1


def omega_in_range(m: int, rng: PrimeRange) -> int:
    """Multiplicity-weighted count of prime factors of m inside the range."""
    if m < 1:
        raise DomainError(f"omega_in_range needs m >= 1, got {m}")
    if m == 1 or rng.is_empty():
        return 0
    return sum(e for p, e in factorize(m) if rng.contains(p))


def save_sieve_cache(path, limit: int | None = None) -> int:
    """Write the sieve as magic + little-endian uint64 primes; returns count."""
    ps = _primes if limit is None else sieve_primes(limit)
    with open(path, "wb") as fh:
        fh.write(SIEVE_CACHE_MAGIC)
        fh.write(ps.astype("<u8").tobytes())
    return len(ps)


def load_sieve_cache(path) -> int:
    """Adopt an on-disk prime table if it extends the in-memory one."""
    global _primes, _sieved_to
    with open(path, "rb") as fh:
        magic = fh.read(len(SIEVE_CACHE_MAGIC))
        if magic != SIEVE_CACHE_MAGIC:
            raise DomainError(f"{path} is not a sieve cache (bad magic {magic!r})")
        data = np.frombuffer(fh.read(), dtype="<u8").astype(np.int64)
    if len(data) and data[-1] > _sieved_to:
        _primes = data
        _sieved_to = int(data[-1])
    return len(data)


def reset_for_tests() -> None:
    global _primes, _sieved_to, _spf
    _primes = np.empty(0, dtype=np.int64)
    _sieved_to = 1
    _spf = None
