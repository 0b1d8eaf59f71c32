"""Progression search in integer sets, narrow-progression-free subsets of
the primes, and the Cramer random-model simulation.

Searches iterate the step r on the outside and scan start points with
vectorized bitset conjunctions, so a full pass is O(r_max * N) with O(1)
membership tests.  Natural log is used throughout for the polylog step
bounds.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .arith import PrimeTable
from .poly import IntPoly
from .rng import stream

__all__ = [
    "IntSet",
    "ProgressionHit",
    "NarrowFreeResult",
    "StrategyOutcome",
    "CramerTrialReport",
    "find_progressions",
    "min_step",
    "narrow_free_subset",
    "cramer_trial",
]


@dataclass(frozen=True, eq=False)
class IntSet:
    """Subset of [1, N] with O(1) membership via a bool array."""

    universe: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=bool)
        if bits.shape != (self.universe + 1,):
            raise ValueError("bits must have length universe + 1")
        if bits[0]:
            raise ValueError("0 is outside the universe [1, N]")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_iterable(cls, universe: int, items: Iterable[int]) -> "IntSet":
        bits = np.zeros(universe + 1, dtype=bool)
        arr = np.fromiter((int(a) for a in items), dtype=np.int64)
        arr = arr[(arr >= 1) & (arr <= universe)]
        bits[arr] = True
        return cls(universe, bits)

    @classmethod
    def from_primes(cls, table: PrimeTable, universe: int) -> "IntSet":
        bits = table.bitset(universe).copy()
        bits[0] = False
        return cls(universe, bits)

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.bits).astype(np.int64)

    def __contains__(self, n: int) -> bool:
        return 1 <= n <= self.universe and bool(self.bits[n])

    def __len__(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class ProgressionHit:
    a: int
    r: int
    k: int
    witnesses: tuple[int, ...]


def _pattern_polys(system: "Sequence[IntPoly] | int") -> tuple[IntPoly, ...]:
    if isinstance(system, int):
        if system < 1:
            raise ValueError(f"progression length must be >= 1, got {system}")
        m = IntPoly.variable(0, 1)
        return tuple(i * m for i in range(system))
    polys = tuple(system)
    if not polys:
        raise ValueError("need at least one pattern polynomial")
    return polys


def _hits_for_step(
    bits: np.ndarray, universe: int, offsets: list[int]
) -> np.ndarray:
    """Start points a with a + offset in the set for every offset."""
    lo = max(1, 1 - min(offsets))
    hi = universe - max(offsets)
    if hi < lo:
        return np.array([], dtype=np.int64)
    conj = bits[lo + offsets[0] : hi + offsets[0] + 1].copy()
    for off in offsets[1:]:
        conj &= bits[lo + off : hi + off + 1]
    return np.flatnonzero(conj).astype(np.int64) + lo


def find_progressions(
    A: IntSet,
    system: "Sequence[IntPoly] | int",
    r_max: int,
    limit: int | None = None,
) -> list[ProgressionHit]:
    """All (a, r) with 0 < r <= r_max and a + P_i(r) in A for every i.

    Results come in (r, a) lexicographic order, truncated at limit hits.
    Every emitted hit re-validates its witnesses against the set.
    """
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    polys = _pattern_polys(system)
    k = len(polys)
    hits: list[ProgressionHit] = []
    for r in range(1, r_max + 1):
        offsets = [q.evaluate((r,)) for q in polys]
        for a in _hits_for_step(A.bits, A.universe, offsets):
            a = int(a)
            witnesses = tuple(a + off for off in offsets)
            assert all(w in A for w in witnesses)
            hits.append(ProgressionHit(a, r, k, witnesses))
            if limit is not None and len(hits) >= limit:
                return hits
    return hits


def min_step(
    A: IntSet, system: "Sequence[IntPoly] | int", r_max: int
) -> int | None:
    """Least r in [1, r_max] admitting a full progression, else None."""
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    polys = _pattern_polys(system)
    for r in range(1, r_max + 1):
        offsets = [q.evaluate((r,)) for q in polys]
        if len(_hits_for_step(A.bits, A.universe, offsets)):
            return r
    return None


@dataclass(frozen=True)
class NarrowFreeResult:
    """A progression-free-by-construction prime subset plus diagnostics."""

    subset: IntSet
    survivor_fraction: float
    r_bound: int  # removal covered 0 < r <= r_bound
    removal_counts: dict[int, int] = field(repr=False)
    removed_total: int = 0
    prime_count: int = 0
    half_pnt_target: float = 0.0


def narrow_free_subset(
    N: int, k: int, eps: float, table: PrimeTable
) -> NarrowFreeResult:
    """Primes in [N] minus every base point of an all-prime k-progression
    with step 0 < r < eps * log(N)^(k-1).

    Removing base points kills every such progression that lies inside the
    returned set, so a re-scan finds nothing (the construction is a fixed
    point).  The per-step base counts N_r are reported against the
    N / (2 log N) budget that makes the surviving fraction positive.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    prime_bits = table.bitset(N).copy()
    prime_bits[0] = False
    n_primes = int(prime_bits.sum())
    survivors = prime_bits.copy()

    bound = eps * math.log(N) ** (k - 1)
    r_bound = math.ceil(bound) - 1  # strict: r < bound
    removal_counts: dict[int, int] = {}
    removed = 0
    for r in range(1, r_bound + 1):
        offsets = [i * r for i in range(k)]
        bases = _hits_for_step(prime_bits, N, offsets)
        removal_counts[r] = len(bases)
        removed_now = int(np.sum(survivors[bases]))
        survivors[bases] = False
        removed += removed_now

    subset = IntSet(N, survivors)
    fraction = len(subset) / n_primes if n_primes else 0.0
    return NarrowFreeResult(
        subset,
        fraction,
        r_bound,
        removal_counts,
        removed,
        n_primes,
        0.5 * N / math.log(N),
    )


@dataclass(frozen=True)
class StrategyOutcome:
    name: str
    subset_size: int
    found: bool
    witness: ProgressionHit | None
    bad_intervals: int
    degenerate: bool


@dataclass(frozen=True)
class CramerTrialReport:
    N: int
    k: int
    C: float
    delta: float
    seed: int
    model_size: int
    r_bound: int
    interval_count: int
    interval_min_len: int
    interval_max_len: int
    outcomes: tuple[StrategyOutcome, ...]

    def found_by(self, name: str) -> bool:
        for o in self.outcomes:
            if o.name == name:
                return o.found
        raise KeyError(name)


def _interval_edges(N: int, target_len: int) -> list[int]:
    m = max(1, -(-N // target_len))  # ceil
    return [round(i * N / m) for i in range(m + 1)]


def _greedy_breaker(
    model: np.ndarray, universe: int, k: int, r_bound: int, keep: int
) -> np.ndarray:
    """Remove elements hitting the most progressions until none remain or
    the removal budget is spent.  Removal never creates progressions, so a
    single enumeration pass suffices.  Selection uses a lazy max-heap with
    smallest-element tie-breaking."""
    bits = np.zeros(universe + 1, dtype=bool)
    bits[model] = True
    budget = len(model) - keep
    if budget <= 0:
        return bits
    prog_sets: list[tuple[int, ...]] = []
    incident: dict[int, list[int]] = {}
    for r in range(1, r_bound + 1):
        offsets = [i * r for i in range(k)]
        for a in _hits_for_step(bits, universe, offsets):
            idx = len(prog_sets)
            ws = tuple(int(a) + off for off in offsets)
            prog_sets.append(ws)
            for w in ws:
                incident.setdefault(w, []).append(idx)
    counts = {w: len(idxs) for w, idxs in incident.items()}
    heap = [(-c, w) for w, c in counts.items()]
    heapq.heapify(heap)
    alive = np.ones(len(prog_sets), dtype=bool)
    removed: set[int] = set()
    while budget > 0 and heap:
        neg_c, w = heapq.heappop(heap)
        if w in removed or -neg_c != counts[w]:
            continue  # stale entry
        if counts[w] == 0:
            break
        removed.add(w)
        bits[w] = False
        budget -= 1
        for idx in incident[w]:
            if alive[idx]:
                alive[idx] = False
                for v in prog_sets[idx]:
                    if v not in removed:
                        counts[v] -= 1
                        heapq.heappush(heap, (-counts[v], v))
    return bits


def cramer_trial(
    N: int,
    k: int,
    C: float,
    delta: float,
    adversaries: Sequence[str] = ("greedy", "random", "concentrated"),
    seed: int = 0,
) -> CramerTrialReport:
    """One trial of the random prime model against subset adversaries.

    Draws a model set P в [N] with independent inclusion probability
    1/log N, partitions [N] into intervals of length between
    (C/2) log^{k-1} N and C log^{k-1} N, and asks each adversary for a
    subset A of P with |A| >= delta |P|.  Reported per adversary: whether A
    contains a k-progression with step 0 < r <= C log^{k-1} N, plus the
    count of intervals that are locally dense in A yet progression-free
    (the obstruction intervals of the partition argument).
    """
    if N < 10**3:
        raise ValueError(f"N must be >= 10^3, got {N}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    gen = stream(seed, "cramer-model")
    include = gen.random(N) < 1.0 / math.log(N)
    model = np.flatnonzero(include).astype(np.int64) + 1

    r_bound = max(1, math.floor(C * math.log(N) ** (k - 1)))
    edges = _interval_edges(N, r_bound)
    lengths = [edges[i + 1] - edges[i] for i in range(len(edges) - 1)]

    target = math.ceil(delta * len(model))
    degenerate = target < k or len(model) == 0
    model_bits = np.zeros(N + 1, dtype=bool)
    model_bits[model] = True

    outcomes = []
    for name in adversaries:
        if len(model) == 0:
            bits = np.zeros(N + 1, dtype=bool)
        elif name == "greedy":
            bits = _greedy_breaker(model, N, k, r_bound, target)
        elif name == "random":
            sub_gen = stream(seed, "cramer-random-subset")
            chosen = sub_gen.choice(model, size=target, replace=False, shuffle=False)
            bits = np.zeros(N + 1, dtype=bool)
            bits[chosen] = True
        elif name == "concentrated":
            per_interval = []
            for i in range(len(edges) - 1):
                inside = model[(model > edges[i]) & (model <= edges[i + 1])]
                per_interval.append(inside)
            order = sorted(
                range(len(per_interval)),
                key=lambda i: (-len(per_interval[i]), i),
            )
            bits = np.zeros(N + 1, dtype=bool)
            need = target
            for i in order:
                if need <= 0:
                    break
                take = per_interval[i][:need]
                bits[take] = True
                need -= len(take)
        else:
            raise ValueError(f"unknown adversary strategy {name!r}")

        subset = IntSet(N, bits)
        found = find_progressions(subset, k, r_bound, limit=1)
        witness = found[0] if found else None

        bad = 0
        for i in range(len(edges) - 1):
            lo, hi = edges[i] + 1, edges[i + 1]
            in_model = int(model_bits[lo : hi + 1].sum())
            in_sub = int(bits[lo : hi + 1].sum())
            if in_model == 0 or in_sub < 0.5 * delta * in_model:
                continue
            window = np.zeros(hi - lo + 2, dtype=bool)
            window[1:] = bits[lo : hi + 1]
            local = IntSet(hi - lo + 1, window)
            if not find_progressions(local, k, hi - lo, limit=1):
                bad += 1

        outcomes.append(
            StrategyOutcome(name, len(subset), bool(found), witness, bad, degenerate)
        )

    return CramerTrialReport(
        N,
        k,
        C,
        delta,
        seed,
        len(model),
        r_bound,
        len(lengths),
        min(lengths),
        max(lengths),
        tuple(outcomes),
    )
