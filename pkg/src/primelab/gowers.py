"""Local and averaged Gowers uniformity norms, dual functions, and the
polynomial counting form.

The local norm of order d along integer directions (a_1, ..., a_d) at scale
S raises f to the 2^d power through the cube average

    ||f||^{2^d} = E_{m^0, m^1 in [S]^d} int_X prod_{w in {0,1}^d}
                  T^{m_1^{(w_1)} a_1 + ... + m_d^{(w_d)} a_d} f.

The averaged variant draws the direction tuple from polynomials
Q_i(h_1, ..., h_t, W) with h ranging over [H]^t.  Dual functions invert the
pairing: int f * dual(f) recovers the 2^d power exactly.  Exact mode
enumerates the full parameter grid; sampled mode estimates the 2^d power
(unbiased, may dip below zero) with counter-based randomness, and the root
is taken after clamping at zero with the raw value kept on the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cyclic import CyclicFn
from .envelope import EnvelopeSieve
from .errors import ConfigError
from .poly import IntPoly
from .rng import stream

__all__ = [
    "GowersSpec",
    "DirectionFamily",
    "ProgressionSystem",
    "NormEval",
    "GcsResult",
    "DualSquareResult",
    "local_gowers_norm",
    "averaged_gowers_norm",
    "dual_function",
    "gowers_cauchy_schwarz_check",
    "square_padded_tuple",
    "dual_square_check",
    "counting_form",
    "sieve_deviation_norm",
]

MAX_EXACT_ORDER = 4
MIN_SAMPLED_BUDGET = 1000
_H_EXACT_CAP = 10**4
_MAX_EXACT_COMBOS = 1 << 22
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class GowersSpec:
    """Directions, scale, and evaluation mode for a local norm."""

    directions: tuple[int, ...]
    scale: int
    mode: str = "exact"
    budget: int | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.directions) < 1:
            raise ValueError("need at least one direction")
        if self.scale < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled":
            if self.budget is None or self.budget < MIN_SAMPLED_BUDGET:
                raise ConfigError(
                    f"sampled mode needs budget >= {MIN_SAMPLED_BUDGET}"
                )


@dataclass(frozen=True)
class DirectionFamily:
    """Direction polynomials Q_1..Q_d in (h_1..h_t, W), with the h-range H,
    the W value, and the cube scale S."""

    t: int
    polys: tuple[IntPoly, ...]
    H: int
    W: int
    S: int

    def __post_init__(self):
        if self.H < 1 or self.S < 1 or self.W < 1:
            raise ValueError("H, W, S must all be >= 1")
        if len(self.polys) < 1:
            raise ValueError("need at least one direction polynomial")
        for q in self.polys:
            if q.nvars != self.t:
                raise ValueError(
                    f"polynomial {q} has {q.nvars} variables, expected {self.t}"
                )
            if q.specialize_w(self.W).is_zero:
                raise ValueError(f"direction polynomial {q} is identically zero")

    @property
    def d(self) -> int:
        return len(self.polys)

    def directions_at(self, h: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(q.evaluate(h, self.W) for q in self.polys)

    def doubled(self) -> "DirectionFamily":
        """The 2d-tuple (Q_1..Q_d, Q_1..Q_d) over a doubled h-block.

        The second copy of each polynomial is rewritten in fresh variables
        h_{t+1}..h_{2t}, so the two halves average independently; this is
        what makes the square of a dual function another dual function.
        """
        first = tuple(q.reindex(0, 2 * self.t) for q in self.polys)
        second = tuple(q.reindex(self.t, 2 * self.t) for q in self.polys)
        return DirectionFamily(2 * self.t, first + second, self.H, self.W, self.S)


@dataclass(frozen=True)
class ProgressionSystem:
    """Integer pattern polynomials P_1..P_k in one variable, with the
    W-trick modulus and the coarse scale M of the step range."""

    k: int
    polys: tuple[IntPoly, ...]
    W: int
    M: int

    def __post_init__(self):
        if self.k != len(self.polys):
            raise ValueError("k must match the number of polynomials")
        if self.M < 1 or self.W < 1:
            raise ValueError("M and W must be >= 1")
        offsets = {q.evaluate((0,), self.W) for q in self.polys}
        if len(offsets) != 1:
            raise ValueError("pattern polynomials must share their value at 0")

    @classmethod
    def linear(cls, k: int, W: int, M: int) -> "ProgressionSystem":
        m = IntPoly.variable(0, 1)
        return cls(k, tuple((i * m) for i in range(k)), W, M)

    def centered_polys(self) -> tuple[IntPoly, ...]:
        c = self.polys[0].evaluate((0,), self.W)
        const = IntPoly.constant(c, 1)
        return tuple(q - const for q in self.polys)


@dataclass(frozen=True)
class NormEval:
    """A norm evaluation: the root, the raw and clamped 2^d powers, and
    sampling metadata when applicable."""

    norm: float
    power_raw: float
    power: float
    order: int
    mode: str
    samples: int | None = None
    stderr: float | None = None
    degenerate_fraction: float = 0.0


def _combo_grid(S: int, cols: int) -> np.ndarray:
    """All points of [1, S]^cols as an (S^cols, cols) int64 array."""
    if S**cols > _MAX_EXACT_COMBOS:
        raise ConfigError(
            f"exact grid [1..{S}]^{cols} has {S**cols} points, over the budget"
        )
    grids = np.meshgrid(*([np.arange(1, S + 1, dtype=np.int64)] * cols), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _cube_rows(
    funcs: Sequence[np.ndarray], shifts: np.ndarray, N: int
) -> np.ndarray:
    """Row means int_X prod_w f_w(x + s_w) for each combo row.

    funcs lists one value array per vertex w (bitmask order); shifts has
    shape (2^d, C).  Processes combos in chunks to bound memory.
    """
    C = shifts.shape[1]
    rows = np.empty(C, dtype=np.float64)
    x = np.arange(N, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMS // max(N, 1))
    for lo in range(0, C, chunk):
        hi = min(lo + chunk, C)
        idx = np.mod(x[None, :] + shifts[0, lo:hi, None], N)
        prod = funcs[0][idx]
        for mask in range(1, len(funcs)):
            idx = np.mod(x[None, :] + shifts[mask, lo:hi, None], N)
            prod = prod * funcs[mask][idx]
        rows[lo:hi] = prod.mean(axis=1)
    return rows


def _vertex_shifts(combos: np.ndarray, directions: np.ndarray, N: int) -> np.ndarray:
    """Shift sum_i m_i^{(w_i)} a_i mod N for every vertex w and combo row.

    combos columns are (m_1^{(0)}..m_d^{(0)}, m_1^{(1)}..m_d^{(1)}).
    """
    d = len(directions)
    out = np.empty((1 << d, combos.shape[0]), dtype=np.int64)
    for mask in range(1 << d):
        cols = [i + d * ((mask >> i) & 1) for i in range(d)]
        out[mask] = np.mod(combos[:, cols] @ directions, N)
    return out


def _clamped_root(power_raw: float, order: int) -> tuple[float, float]:
    power = max(power_raw, 0.0)
    return power, power ** (1.0 / (1 << order))


def _warn_seminorm(d: int) -> None:
    if d == 1:
        warnings.warn(
            "order-1 cube averages are only seminorms; zero norm does not "
            "imply zero function",
            stacklevel=3,
        )


def local_gowers_norm(f: CyclicFn, spec: GowersSpec) -> NormEval:
    """Local Gowers norm of f along spec.directions at scale spec.scale."""
    d = len(spec.directions)
    _warn_seminorm(d)
    N = f.modulus
    a = np.asarray(spec.directions, dtype=np.int64)
    funcs = [f.values] * (1 << d)
    if spec.mode == "exact":
        if d > MAX_EXACT_ORDER:
            raise ConfigError(
                f"exact mode supports order <= {MAX_EXACT_ORDER}, got {d}"
            )
        combos = _combo_grid(spec.scale, 2 * d)
        rows = _cube_rows(funcs, _vertex_shifts(combos, a, N), N)
        power_raw = float(np.mean(rows))
        power, norm = _clamped_root(power_raw, d)
        return NormEval(norm, power_raw, power, d, "exact")
    gen = stream(spec.seed, "local-gowers")
    combos = gen.integers(1, spec.scale + 1, size=(spec.budget, 2 * d), dtype=np.int64)
    rows = _cube_rows(funcs, _vertex_shifts(combos, a, N), N)
    power_raw = float(np.mean(rows))
    stderr = float(np.std(rows, ddof=1) / math.sqrt(len(rows)))
    power, norm = _clamped_root(power_raw, d)
    return NormEval(norm, power_raw, power, d, "sampled", spec.budget, stderr)


def _h_grid(H: int, t: int) -> np.ndarray:
    if t == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(1, H + 1, dtype=np.int64)] * t), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _family_directions(
    family: DirectionFamily, h_points: np.ndarray, N: int
) -> tuple[np.ndarray, np.ndarray]:
    """Directions (B, d) mod-free ints plus a per-point degeneracy flag
    (some direction vanishing mod N)."""
    cols = [q.eval_many(h_points, family.W) for q in family.polys]
    dirs = np.stack([np.asarray(c, dtype=np.int64) for c in cols], axis=1)
    degenerate = np.any(np.mod(dirs, N) == 0, axis=1)
    return dirs, degenerate


def averaged_gowers_norm(
    f: CyclicFn,
    family: DirectionFamily,
    *,
    budget: int | None = None,
    seed: int = 0,
) -> NormEval:
    """Gowers norm averaged over direction tuples Q(h, W), h in [H]^t.

    Exact when the h-grid has at most 10^4 points and no budget is given;
    otherwise (h, m) pairs are sampled jointly.  Degenerate direction
    tuples (some Q_i(h) = 0 mod N) stay in the average; their fraction is
    reported.
    """
    d = family.d
    _warn_seminorm(d)
    N = f.modulus
    funcs = [f.values] * (1 << d)
    n_h = family.H**family.t
    if budget is None and n_h <= _H_EXACT_CAP:
        if d > MAX_EXACT_ORDER:
            raise ConfigError(
                f"exact mode supports order <= {MAX_EXACT_ORDER}, got {d}"
            )
        h_points = _h_grid(family.H, family.t)
        dirs, degenerate = _family_directions(family, h_points, N)
        combos = _combo_grid(family.S, 2 * d)
        powers = np.empty(len(h_points), dtype=np.float64)
        for j in range(len(h_points)):
            rows = _cube_rows(funcs, _vertex_shifts(combos, dirs[j], N), N)
            powers[j] = rows.mean()
        power_raw = float(np.mean(powers))
        power, norm = _clamped_root(power_raw, d)
        return NormEval(
            norm, power_raw, power, d, "exact",
            degenerate_fraction=float(np.mean(degenerate)),
        )
    if budget is None or budget < MIN_SAMPLED_BUDGET:
        raise ConfigError(
            f"h-grid too large for exact mode; pass budget >= {MIN_SAMPLED_BUDGET}"
        )
    gen = stream(seed, "averaged-gowers")
    h_points = (
        gen.integers(1, family.H + 1, size=(budget, family.t), dtype=np.int64)
        if family.t
        else np.zeros((budget, 0), dtype=np.int64)
    )
    combos = gen.integers(1, family.S + 1, size=(budget, 2 * d), dtype=np.int64)
    dirs, degenerate = _family_directions(family, h_points, N)
    vals = np.empty(budget, dtype=np.float64)
    x = np.arange(N, dtype=np.int64)
    cache: dict[tuple[int, ...], float] = {}
    for j in range(budget):
        shifts = _vertex_shifts(combos[j : j + 1], dirs[j], N)[:, 0]
        key = tuple(int(s) for s in np.mod(shifts - shifts[0], N))
        got = cache.get(key)
        if got is None:
            prod = f.values[np.mod(x + shifts[0], N)]
            for mask in range(1, 1 << d):
                prod = prod * f.values[np.mod(x + shifts[mask], N)]
            got = float(np.mean(prod))
            cache[key] = got
        vals[j] = got
    power_raw = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(budget))
    power, norm = _clamped_root(power_raw, d)
    return NormEval(
        norm, power_raw, power, d, "sampled", budget, stderr,
        float(np.mean(degenerate)),
    )


def _as_vertex_tuple(
    fs: "CyclicFn | Mapping[int, CyclicFn]", d: int
) -> list[CyclicFn]:
    """Functions for the 2^d - 1 nonzero vertices, bitmask order."""
    if isinstance(fs, CyclicFn):
        return [fs] * ((1 << d) - 1)
    missing = [m for m in range(1, 1 << d) if m not in fs]
    if missing:
        raise ValueError(f"missing vertex functions for masks {missing}")
    out = [fs[m] for m in range(1, 1 << d)]
    mods = {g.modulus for g in out}
    if len(mods) != 1:
        raise ValueError(f"vertex functions disagree on modulus: {sorted(mods)}")
    return out


def dual_function(
    fs: "CyclicFn | Mapping[int, CyclicFn]",
    family: DirectionFamily,
    *,
    budget: int | None = None,
    seed: int = 0,
) -> CyclicFn:
    """Dual of a vertex tuple under the averaged local Gowers pairing.

    dual(x) = E_{h in [H]^t} E_{m^0, m^1 in [S]^d}
              prod_{w != 0} F_w(x + sum_i (m_i^{(w_i)} - m_i^{(0)}) Q_i(h)).

    With every F_w = f this is the function whose inner product with f
    returns the 2^d power of the averaged norm, exactly in exact mode.
    Sampled mode reuses the same joint (h, m) sampling scheme as
    averaged_gowers_norm.
    """
    d = family.d
    verts = _as_vertex_tuple(fs, d)
    N = verts[0].modulus
    n_h = family.H**family.t
    x = np.arange(N, dtype=np.int64)

    def accumulate(out, combos, dirs_row):
        diffs = combos[:, family.d :] - combos[:, : family.d]  # m^1 - m^0
        deltas = diffs * dirs_row[None, :]
        chunk = max(1, _CHUNK_ELEMS // max(N, 1))
        for lo in range(0, len(combos), chunk):
            hi = min(lo + chunk, len(combos))
            prod = None
            for mask in range(1, 1 << d):
                bits = [i for i in range(d) if (mask >> i) & 1]
                s = np.mod(deltas[lo:hi, bits].sum(axis=1), N)
                gathered = verts[mask - 1].values[np.mod(x[None, :] + s[:, None], N)]
                prod = gathered if prod is None else prod * gathered
            out += prod.sum(axis=0)

    out = np.zeros(N, dtype=np.float64)
    if budget is None and n_h <= _H_EXACT_CAP:
        if d > MAX_EXACT_ORDER:
            raise ConfigError(
                f"exact mode supports order <= {MAX_EXACT_ORDER}, got {d}"
            )
        h_points = _h_grid(family.H, family.t)
        dirs, _ = _family_directions(family, h_points, N)
        combos = _combo_grid(family.S, 2 * d)
        for j in range(len(h_points)):
            accumulate(out, combos, dirs[j])
        out /= len(h_points) * len(combos)
        return CyclicFn(N, out)
    if budget is None or budget < MIN_SAMPLED_BUDGET:
        raise ConfigError(
            f"h-grid too large for exact mode; pass budget >= {MIN_SAMPLED_BUDGET}"
        )
    gen = stream(seed, "averaged-gowers")
    h_points = (
        gen.integers(1, family.H + 1, size=(budget, family.t), dtype=np.int64)
        if family.t
        else np.zeros((budget, 0), dtype=np.int64)
    )
    combos = gen.integers(1, family.S + 1, size=(budget, 2 * d), dtype=np.int64)
    dirs, _ = _family_directions(family, h_points, N)
    for j in range(budget):
        accumulate(out, combos[j : j + 1], dirs[j])
    out /= budget
    return CyclicFn(N, out)


@dataclass(frozen=True)
class GcsResult:
    lhs: float
    rhs: float
    holds: bool
    slack: float


def gowers_cauchy_schwarz_check(
    fs: Mapping[int, CyclicFn], spec: GowersSpec, slack: float = 1e-9
) -> GcsResult:
    """Check |cube average of a 2^d vertex tuple| <= product of the norms.

    Exact mode only: the inequality is asserted for exact values, so a
    sampled evaluation would conflate estimator noise with a violation.
    """
    if spec.mode != "exact":
        raise ConfigError("the inequality check supports exact mode only")
    d = len(spec.directions)
    if sorted(fs) != list(range(1 << d)):
        raise ValueError(f"need one function per vertex mask 0..{(1 << d) - 1}")
    funcs = [fs[m].values for m in range(1 << d)]
    N = fs[0].modulus
    a = np.asarray(spec.directions, dtype=np.int64)
    combos = _combo_grid(spec.scale, 2 * d)
    rows = _cube_rows(funcs, _vertex_shifts(combos, a, N), N)
    lhs = abs(float(np.mean(rows)))
    rhs = 1.0
    for m in range(1 << d):
        rhs *= local_gowers_norm(fs[m], spec).norm
    return GcsResult(lhs, rhs, lhs <= rhs + slack, slack)


def square_padded_tuple(
    fs: "CyclicFn | Mapping[int, CyclicFn]", d: int, modulus: int
) -> dict[int, CyclicFn]:
    """Pad a d-cube vertex tuple to the 2d-cube whose dual is the square.

    Vertices (a, 0) and (0, b) carry the original functions; mixed vertices
    (a, b) with both halves nonzero carry the constant 1.
    """
    verts = _as_vertex_tuple(fs, d)
    ones = CyclicFn.constant(1.0, modulus)
    out: dict[int, CyclicFn] = {}
    for mask in range(1, 1 << (2 * d)):
        alpha = mask & ((1 << d) - 1)
        beta = mask >> d
        if beta == 0:
            out[mask] = verts[alpha - 1]
        elif alpha == 0:
            out[mask] = verts[beta - 1]
        else:
            out[mask] = ones
    return out


@dataclass(frozen=True)
class DualSquareResult:
    max_abs_deviation: float
    squared: CyclicFn
    padded_dual: CyclicFn


def dual_square_check(
    fs: "CyclicFn | Mapping[int, CyclicFn]", family: DirectionFamily
) -> DualSquareResult:
    """Compare dual(F)^2 against the dual of the padded tuple on the
    doubled direction family, pointwise (exact mode)."""
    base = dual_function(fs, family)
    squared = CyclicFn(base.modulus, np.square(base.values))
    padded = square_padded_tuple(fs, family.d, base.modulus)
    rhs = dual_function(padded, family.doubled())
    dev = float(np.max(np.abs(squared.values - rhs.values)))
    return DualSquareResult(dev, squared, rhs)


def counting_form(fs: Sequence[CyclicFn], system: ProgressionSystem) -> float:
    """E_{m in [M]} int_X prod_i T^{P_i(W m)/W} f_i, exact.

    The shared value P_i(0) is subtracted first, making every P_i(W m)
    divisible by W, so the shift exponents are exact integers.
    """
    if len(fs) != system.k:
        raise ValueError(f"expected {system.k} functions, got {len(fs)}")
    mods = {f.modulus for f in fs}
    if len(mods) != 1:
        raise ValueError(f"functions disagree on modulus: {sorted(mods)}")
    N = fs[0].modulus
    W, M = system.W, system.M
    args = (np.arange(1, M + 1, dtype=np.int64) * W).reshape(-1, 1)
    shifts = np.empty((system.k, M), dtype=np.int64)
    for i, q in enumerate(system.centered_polys()):
        vals = q.eval_many(args, W)
        if vals.dtype == object:
            assert all(int(v) % W == 0 for v in vals)
            shifts[i] = np.array([(int(v) // W) % N for v in vals], dtype=np.int64)
        else:
            assert np.all(vals % W == 0), "pattern polynomial not divisible by W"
            shifts[i] = np.mod(vals // W, N)
    rows = _cube_rows([f.values for f in fs], shifts, N)
    return float(np.mean(rows))


def sieve_deviation_norm(
    sieve: EnvelopeSieve,
    spec: "GowersSpec | DirectionFamily",
    *,
    budget: int | None = None,
    seed: int = 0,
) -> NormEval:
    """Gowers norm of (sieve - 1), the pseudorandomness deviation."""
    g = sieve.values - 1.0
    if isinstance(spec, GowersSpec):
        return local_gowers_norm(g, spec)
    return averaged_gowers_norm(g, spec, budget=budget, seed=seed)
