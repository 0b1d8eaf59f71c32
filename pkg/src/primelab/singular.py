"""Hardy-Littlewood singular series for k-term progressions of step r.

The series is the Euler product over primes

    G(k, r) = prod_p (1 - 1/p)^(-k) * (1 - nu_p(r)/p),

where nu_p(r) counts residues a mod p for which some entry a, a+r, ...,
a+(k-1)r vanishes mod p.  Products are evaluated as compensated sums of
logs; the truncation at a finite prime cutoff carries an explicit tail
bound.  G(k, r) vanishes exactly when nu_p(r) = p for some prime, which is
detected by integer comparison, never by a float test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import PrimeTable

__all__ = [
    "SingularQuery",
    "SingularValue",
    "PartialSum",
    "local_root_count",
    "singular_series",
    "singular_partial_sum",
    "exp_minus_one",
]


def exp_minus_one(x: float) -> float:
    """e^x - 1 with full relative accuracy near zero."""
    return math.expm1(x)


def _is_prime_trial(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def local_root_count(k: int, r: int, p: int) -> int:
    """nu_p(r): number of residues a mod p with some a + i*r = 0 mod p, i < k.

    Equals 1 when p | r (all entries share one residue) and min(k, p)
    otherwise.  Computed by enumerating the residue set rather than by the
    closed form, so it stays honest for any input.
    """
    if not _is_prime_trial(p):
        raise ValueError(f"p={p} is not prime")
    if r == 0:
        raise ValueError("step r must be nonzero")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return len({(-i * r) % p for i in range(min(k, p))})


@dataclass(frozen=True)
class SingularQuery:
    k: int
    r: int
    cutoff: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.r == 0:
            raise ValueError("step r must be nonzero")
        if self.cutoff < 2:
            raise ValueError(f"cutoff must be >= 2, got {self.cutoff}")


@dataclass(frozen=True)
class SingularValue:
    value: float
    terms: int
    tail_estimate: float


def _tail_bound(k: int, cutoff: int) -> float:
    # |log factor| <= (k/p)^2 for p >= 2k, and sum_{p>cutoff} 1/p^2 <= 1/cutoff.
    if cutoff < 2 * k:
        return math.inf
    return k * k / cutoff


def singular_series(query: SingularQuery, table: PrimeTable) -> SingularValue:
    """Truncated Euler product for G(k, r) over primes p <= cutoff.

    The tail estimate bounds the omitted log-contribution of p > cutoff
    assuming nu_p = k there (valid when r has no prime factor above the
    cutoff and cutoff >= 2k; otherwise the bound is reported as inf).
    """
    k, r, cutoff = query.k, query.r, query.cutoff
    if table.limit < cutoff:
        raise ValueError(f"prime table limit {table.limit} below cutoff {cutoff}")
    ps = table.primes(2, cutoff)
    terms = len(ps)
    tail = _tail_bound(k, cutoff)

    # Primes p <= k can force nu_p = p, which zeroes the product exactly.
    small = ps[ps <= k]
    log_parts: list[float] = []
    for p in small:
        p = int(p)
        nu = local_root_count(k, r, p)
        if nu == p:
            return SingularValue(0.0, terms, tail)
        log_parts.append(-k * math.log1p(-1.0 / p) + math.log1p(-nu / p))

    big = ps[ps > k].astype(np.float64)
    if len(big):
        divides = (query.r % ps[ps > k]) == 0
        inv = 1.0 / big
        base = -k * np.log1p(-inv)
        with_k = base + np.log1p(-k * inv)  # nu_p = k branch
        with_1 = base + np.log1p(-inv)  # nu_p = 1 branch (p | r)
        log_parts.extend(np.where(divides, with_1, with_k).tolist())

    return SingularValue(math.exp(math.fsum(log_parts)), terms, tail)


@dataclass(frozen=True)
class PartialSum:
    total: float
    ratio: float
    bound: int
    nonzero_terms: int


def singular_partial_sum(
    k: int, M: int, cutoff: int, table: PrimeTable
) -> PartialSum:
    """sum_{0 < r < M} G(k, r) with each term truncated at the prime cutoff.

    Uses the structure of the product: for p <= k the factor is zero unless
    p | r, so only steps divisible by every prime <= k contribute; for p > k
    the factor depends only on whether p | r, which a divisor-sieve pass over
    [1, M) accumulates in one shot.  Agrees with summing singular_series
    term by term (tested), but runs in O(M log M + pi(cutoff)) instead of
    O(M * pi(cutoff)).
    """
    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")
    if table.limit < cutoff:
        raise ValueError(f"prime table limit {table.limit} below cutoff {cutoff}")

    small = [int(p) for p in table.primes(2, min(k, cutoff))]
    step = 1
    log_small = 0.0
    for p in small:
        step *= p
        # Qualifying r have p | r: factor (1 - 1/p)^(1-k).
        log_small += (1 - k) * math.log1p(-1.0 / p)

    big = table.primes(k + 1, cutoff).astype(np.float64)
    inv = 1.0 / big
    log_base = math.fsum((np.log1p(-k * inv) - k * np.log1p(-inv)).tolist())

    corr = np.zeros(M, dtype=np.float64)
    for q in table.primes(k + 1, min(M - 1, cutoff)):
        q = int(q)
        corr[q::q] += math.log1p(-1.0 / q) - math.log1p(-k / q)

    r_values = np.arange(step, M, step)
    if len(r_values) == 0:
        return PartialSum(0.0, 0.0, M, 0)
    series = np.exp(log_small + log_base + corr[r_values])
    total = math.fsum(series.tolist())
    return PartialSum(total, total / M, M, len(r_values))
