"""GPY/Selberg-type enveloping sieve: a nonnegative majorant of the
normalized prime indicator in the W-tricked window.

The sieve value at the point representing n is

    nu(n) = (phi(W) log R / W) * ( sum_{d | Wn+b, d <= R} mu(d) chi(log d / log R) )^2

with chi an even cutoff supported on [-1, 1], normalized so that the energy
integral of its derivative over [0, 1] equals 1 and chi(0) >= 1/2.  Because
the divisor sum is squared and the normalizer is positive, nu >= 0
everywhere, exactly.

Construction runs as a sieve pass: each admissible d <= R contributes its
weight mu(d) chi(log d / log R) to the arithmetic progression of n solving
d | Wn + b.  A second, independent evaluation route enumerates the divisors
of Wn + b directly; both routes add the same weights in the same (ascending
d) order, so they agree bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .arith import MobiusTable, euler_phi
from .cyclic import CyclicFn, SieveConfig
from .errors import ConfigError
from .poly import IntPoly
from .rng import stream

__all__ = [
    "CutoffFn",
    "EnvelopeSieve",
    "FormsEstimate",
    "default_cutoff",
    "tent_cutoff",
    "make_cutoff",
    "build_sieve",
    "divisor_sum_value",
    "shifted_product_mean",
    "forms_condition_estimate",
]

MAX_SHIFTED_FACTORS = 8


@dataclass(frozen=True)
class CutoffFn:
    """Even cutoff on [-1, 1] with unit derivative energy on [0, 1]."""

    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None
    value_at_zero: float
    derivative_sq_integral: float


def _gauss_legendre_01(n: int = 96) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _derivative_energy(cut_fn, deriv) -> float:
    nodes, weights = _gauss_legendre_01()
    if deriv is not None:
        dv = np.asarray(deriv(nodes), dtype=np.float64)
    else:
        h = 1e-6
        dv = (np.asarray(cut_fn(nodes + h)) - np.asarray(cut_fn(nodes - h))) / (2 * h)
    return float(np.sum(weights * dv * dv))


def make_cutoff(fn, derivative=None) -> CutoffFn:
    """Validate and wrap a cutoff: even, supported on [-1,1], unit energy,
    value at zero at least 1/2."""
    probe = np.linspace(0.0, 0.999, 64)
    vals = np.asarray(fn(probe), dtype=np.float64)
    mirror = np.asarray(fn(-probe), dtype=np.float64)
    if not np.allclose(vals, mirror, atol=1e-9):
        raise ConfigError("cutoff must be an even function")
    outside = np.asarray(fn(np.array([1.0 + 1e-9, 2.0, -3.0])), dtype=np.float64)
    if np.any(outside != 0.0):
        raise ConfigError("cutoff must vanish outside [-1, 1]")
    energy = _derivative_energy(fn, derivative)
    if abs(energy - 1.0) > 1e-6:
        raise ConfigError(
            f"cutoff derivative energy on [0,1] is {energy!r}, must equal 1"
        )
    at_zero = float(np.asarray(fn(np.array([0.0])))[0])
    if at_zero < 0.5:
        raise ConfigError(f"cutoff value at zero is {at_zero}, must be >= 1/2")
    return CutoffFn(fn, derivative, at_zero, energy)


def default_cutoff() -> CutoffFn:
    """Scaled cosine (2 sqrt 2 / pi) cos(pi t / 2) on [-1, 1].

    Its derivative energy on [0, 1] is exactly 1 and its value at zero,
    2 sqrt 2 / pi = 0.9003, comfortably clears the 1/2 floor.  It is C^1
    rather than C-infinity; smoothness beyond that only matters for
    asymptotics, not for finite evaluation, and alternatives can be plugged
    in through make_cutoff for sensitivity studies.
    """
    amp = 2.0 * math.sqrt(2.0) / math.pi

    def fn(t):
        t = np.asarray(t, dtype=np.float64)
        inside = np.abs(t) <= 1.0
        return np.where(inside, amp * np.cos(0.5 * np.pi * t), 0.0)

    def deriv(t):
        t = np.asarray(t, dtype=np.float64)
        inside = np.abs(t) <= 1.0
        return np.where(inside, -amp * 0.5 * np.pi * np.sin(0.5 * np.pi * t), 0.0)

    return make_cutoff(fn, deriv)


def tent_cutoff() -> CutoffFn:
    """Classical Selberg tent 1 - |t| on [-1, 1].

    Unit derivative energy exactly, value 1 at zero.  At finite truncation
    levels its sieve mean sits much closer to 1 than the cosine default
    (the deficit constant in the 1/log R error term is smaller), which makes
    it the better weight for desk-scale pseudorandomness experiments.
    """

    def fn(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(np.abs(t) <= 1.0, 1.0 - np.abs(t), 0.0)

    def deriv(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(np.abs(t) <= 1.0, -np.sign(t), 0.0)

    return make_cutoff(fn, deriv)


@dataclass(frozen=True)
class EnvelopeSieve:
    """Enveloping sieve values on Z/NZ plus the divisor weights that built them."""

    cfg: SieveConfig
    cutoff: CutoffFn
    values: CyclicFn
    divisor_weights: np.ndarray  # weight of divisor d at index d; 0 when skipped

    @property
    def normalizer(self) -> float:
        return euler_phi(self.cfg.W) * math.log(self.cfg.R) / self.cfg.W

    def value_at_n(self, n: int) -> float:
        """Sieve value at the class of n in [1, N]."""
        return float(self.values.values[n % self.cfg.N])


def build_sieve(
    cfg: SieveConfig, cutoff: CutoffFn, mobius: MobiusTable
) -> EnvelopeSieve:
    """Evaluate the sieve at every point of Z/NZ by a divisor-sieve pass.

    For each squarefree d <= R coprime to W, the congruence
    Wn + b = 0 mod d has the unique solution n = -b W^{-1} mod d; the weight
    mu(d) chi(log d / log R) is added along that progression.  Divisors
    sharing a factor with W cannot divide Wn + b and are skipped.
    """
    N, W, b, R = cfg.N, cfg.W, cfg.b, cfg.R
    if mobius.limit < R:
        raise ConfigError(f"mobius table limit {mobius.limit} below R={R}")
    if R * R > cfg.N_prime * W + W:
        raise ConfigError(f"R^2 = {R * R} exceeds N'W + W; shrink eps0")

    d_all = np.arange(R + 1, dtype=np.int64)
    log_ratio = np.zeros(R + 1)
    log_ratio[1:] = np.log(d_all[1:]) / math.log(R)
    weights = mobius.mu[: R + 1].astype(np.float64) * cutoff.fn(log_ratio)
    weights[0] = 0.0
    weights[np.gcd(d_all, W) != 1] = 0.0
    weights.setflags(write=False)

    acc = np.zeros(N + 1, dtype=np.float64)
    for d in range(1, R + 1):
        c = weights[d]
        if c == 0.0:
            continue
        t = (-b * pow(W, -1, d)) % d
        start = t if t >= 1 else d
        acc[start::d] += c

    nu = euler_phi(W) * math.log(R) / W * np.square(acc[1:])
    values = np.empty(N, dtype=np.float64)
    values[1:] = nu[: N - 1]
    values[0] = nu[N - 1]
    return EnvelopeSieve(cfg, cutoff, CyclicFn(N, values), weights)


def divisor_sum_value(sieve: EnvelopeSieve, n: int) -> float:
    """Independent evaluation at n in [1, N] by direct divisor enumeration.

    Trial-divides Wn + b by every d <= R in ascending order, accumulating
    the same weights the sieve pass used in the same order, so the result
    is bitwise equal to the sieve-pass value.
    """
    cfg = sieve.cfg
    if not 1 <= n <= cfg.N:
        raise ValueError(f"n={n} outside [1, {cfg.N}]")
    m = cfg.W * n + cfg.b
    total = 0.0
    for d in range(1, min(cfg.R, m) + 1):
        if m % d == 0:
            total += sieve.divisor_weights[d]
    return sieve.normalizer * (total * total)


def _product_mean(values: np.ndarray, shifts: Sequence[int]) -> float:
    # np.sum is pairwise and single-threaded: accurate and thread-independent.
    prod = np.roll(values, -int(shifts[0]))
    for h in shifts[1:]:
        prod = prod * np.roll(values, -int(h))
    return float(np.sum(prod)) / len(values)


def shifted_product_mean(sieve: EnvelopeSieve, shifts: Sequence[int]) -> float:
    """Mean over X of the product of shifted sieves, prod_j T^{h_j} nu."""
    if len(shifts) == 0:
        raise ValueError("need at least one shift")
    if len(shifts) > MAX_SHIFTED_FACTORS:
        raise ConfigError(
            f"at most {MAX_SHIFTED_FACTORS} shifted factors supported, got {len(shifts)}"
        )
    bound = math.isqrt(sieve.cfg.N)
    for h in shifts:
        if abs(h) > bound:
            raise ValueError(f"shift {h} outside [-sqrt(N), sqrt(N)] = [-{bound}, {bound}]")
    return _product_mean(sieve.values.values, shifts)


@dataclass(frozen=True)
class FormsEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    exhaustive: bool
    degenerate_fraction: float


def _box_points(box: Sequence[tuple[int, int]]) -> int:
    vol = 1
    for lo, hi in box:
        vol *= hi - lo + 1
    return vol


def forms_condition_estimate(
    sieve: EnvelopeSieve,
    polys: Sequence[IntPoly],
    box: Sequence[tuple[int, int]],
    samples: int,
    seed: int,
    *,
    fine_scale: int,
    coarse_scale: int | None = None,
) -> FormsEstimate:
    """Monte-Carlo estimate of E_{h in box} int_X prod_j T^{Q_j(h)} nu.

    The box is axis-aligned with integer corners; its inradius (smallest
    half-sidelength) must be at least sqrt(fine_scale), and when a coarse
    scale M is supplied the box must fit inside [-M^2, M^2]^t.  Pairwise
    differences of the direction polynomials must be non-constant, matching
    the pseudorandomness statement being probed.  When the sample budget
    covers the whole box the average is exhaustive, so the estimator and a
    direct enumeration coincide.  Sampling is counter-based on (seed,
    samples), hence reproducible independent of thread count.
    """
    if len(polys) == 0:
        raise ValueError("need at least one direction polynomial")
    if len(polys) > MAX_SHIFTED_FACTORS:
        raise ConfigError(f"at most {MAX_SHIFTED_FACTORS} factors supported")
    W = sieve.cfg.W
    t = polys[0].nvars
    for q in polys:
        if q.nvars != t:
            raise ValueError("direction polynomials must share a variable count")
        if q.specialize_w(W).is_zero:
            raise ValueError(f"direction polynomial {q} is identically zero")
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if (polys[i] - polys[j]).is_constant(W):
                raise ValueError(
                    f"difference of directions {i + 1} and {j + 1} is constant"
                )
    if len(box) != t:
        raise ValueError(f"box has {len(box)} axes but polynomials have {t} variables")
    inradius = min((hi - lo) / 2.0 for lo, hi in box)
    if inradius < math.sqrt(fine_scale):
        raise ValueError(
            f"box inradius {inradius} below sqrt(fine scale) = {math.sqrt(fine_scale):.3f}"
        )
    if coarse_scale is not None:
        m2 = coarse_scale * coarse_scale
        for lo, hi in box:
            if lo < -m2 or hi > m2:
                raise ValueError(f"box axis ({lo}, {hi}) outside [-M^2, M^2]")
    if samples < 1:
        raise ValueError("samples must be >= 1")

    volume = _box_points(box)
    exhaustive = samples >= volume
    if exhaustive:
        axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        n_samples = volume
    else:
        gen = stream(seed, "forms-condition")
        cols = [
            gen.integers(lo, hi + 1, size=samples, dtype=np.int64) for lo, hi in box
        ]
        points = np.stack(cols, axis=1)
        n_samples = samples

    N = sieve.cfg.N
    shift_cols = [np.mod(q.eval_many(points, W), N).astype(np.int64) for q in polys]
    shifts = np.stack(shift_cols, axis=1)  # (n_samples, J)
    rel = np.mod(shifts - shifts[:, :1], N)

    degenerate = int(np.sum(np.any(shifts == 0, axis=1)))
    vals = np.empty(n_samples, dtype=np.float64)
    cache: dict[tuple[int, ...], float] = {}
    nu = sieve.values.values
    for i in range(n_samples):
        key = tuple(int(v) for v in rel[i, 1:])
        got = cache.get(key)
        if got is None:
            got = _product_mean(nu, (0,) + key)
            cache[key] = got
        vals[i] = got

    estimate = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return FormsEstimate(
        estimate, stderr, n_samples, seed, exhaustive, degenerate / n_samples
    )
