"""Exact integer arithmetic substrate: primality, Moebius, totient, primorials.

All tables are immutable after construction and safe for concurrent reads.
Arithmetic is exact; anything that would leave 63-bit signed range is
rejected rather than wrapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Packed-bit storage keeps a 10^9 table at 125 MB.
MAX_SIEVE_LIMIT = 2**33
_SEGMENT_BITS = 1 << 22

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

# Largest w with prod(primes < w) < 2^63.
MAX_PRIMORIAL_W = 52


def _simple_bool_sieve(limit: int) -> np.ndarray:
    """Plain Eratosthenes as a bool array over [0, limit]."""
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return is_p


@dataclass(frozen=True)
class PrimeTable:
    """Primality bitset over [0, limit]; bit n set iff n is prime."""

    limit: int
    bits: np.ndarray  # packed uint8, little bit order

    def is_prime(self, n: int) -> bool:
        if n < 0 or n > self.limit:
            raise ValueError(f"n={n} outside table range [0, {self.limit}]")
        return bool((self.bits[n >> 3] >> (n & 7)) & 1)

    def bitset(self, upto: int | None = None) -> np.ndarray:
        """Unpacked bool array b with b[n] = is_prime(n), n <= upto."""
        upto = self.limit if upto is None else upto
        if upto > self.limit:
            raise ValueError(f"upto={upto} exceeds table limit {self.limit}")
        nbytes = (upto + 8) // 8
        flat = np.unpackbits(self.bits[:nbytes], bitorder="little")
        return flat[: upto + 1].astype(bool)

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        """All primes in [lo, hi] as an int64 array."""
        hi = self.limit if hi is None else hi
        if hi > self.limit:
            raise ValueError(f"hi={hi} exceeds table limit {self.limit}")
        if hi < lo:
            return np.array([], dtype=np.int64)
        lo_byte, hi_byte = lo >> 3, hi >> 3
        flat = np.unpackbits(self.bits[lo_byte : hi_byte + 1], bitorder="little")
        idx = np.flatnonzero(flat).astype(np.int64) + (lo_byte << 3)
        return idx[(idx >= lo) & (idx <= hi)]

    def count(self, x: int) -> int:
        """Exact number of primes <= x."""
        if x > self.limit:
            raise ValueError(f"x={x} exceeds table limit {self.limit}")
        if x < 2:
            return 0
        full, rem = (x + 1) >> 3, (x + 1) & 7
        total = int(_POPCOUNT8[self.bits[:full]].sum())
        if rem:
            total += int(_POPCOUNT8[self.bits[full] & ((1 << rem) - 1)])
        return total


def sieve_primes(limit: int, *, max_limit: int = MAX_SIEVE_LIMIT) -> PrimeTable:
    """Segmented Eratosthenes sieve; exact primality for all n <= limit."""
    if limit < 2:
        raise ConfigError(f"sieve limit must be >= 2, got {limit}")
    if limit > max_limit:
        raise ConfigError(f"sieve limit {limit} exceeds memory budget {max_limit}")
    base = _simple_bool_sieve(math.isqrt(limit))
    base_primes = [int(p) for p in np.flatnonzero(base)]
    out = np.zeros((limit + 8) // 8, dtype=np.uint8)
    for lo in range(0, limit + 1, _SEGMENT_BITS):
        hi = min(lo + _SEGMENT_BITS, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        if lo == 0:
            seg[:2] = False
        for p in base_primes:
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start < hi:
                seg[start - lo :: p] = False
        packed = np.packbits(seg, bitorder="little")
        out[lo >> 3 : (lo >> 3) + len(packed)] = packed
    out.setflags(write=False)
    return PrimeTable(limit, out)


def prime_count(table: PrimeTable, x: int) -> int:
    """Exact pi(x) from a prime table."""
    return table.count(x)


@dataclass(frozen=True)
class MobiusTable:
    """mu(d) for d in [0, limit]; mu[0] is 0 by convention."""

    limit: int
    mu: np.ndarray  # int8


def mobius_table(limit: int) -> MobiusTable:
    """Moebius function table up to limit.

    mu(1) = 1; mu(d) = (-1)^k for d a product of k distinct primes;
    mu(d) = 0 when a squared prime divides d.
    """
    if limit < 1:
        raise ConfigError(f"mobius limit must be >= 1, got {limit}")
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    is_p = _simple_bool_sieve(limit)
    for p in np.flatnonzero(is_p):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
    mu.setflags(write=False)
    return MobiusTable(limit, mu)


def primorial(w: int) -> int:
    """Product of all primes strictly below w, exact in 63-bit range."""
    if w < 2:
        raise ValueError(f"w must be >= 2, got {w}")
    if w > MAX_PRIMORIAL_W:
        raise ConfigError(
            f"primorial(w={w}) exceeds 63-bit signed range (max w is {MAX_PRIMORIAL_W})"
        )
    out = 1
    for p in np.flatnonzero(_simple_bool_sieve(w)):
        if p < w:
            out *= int(p)
    return out


def euler_phi(n: int) -> int:
    """Euler totient: count of m in [1, n] coprime to n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    result = n
    rest = n
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            while rest % p == 0:
                rest //= p
            result -= result // p
        p += 1
    if rest > 1:
        result -= result // rest
    return result
