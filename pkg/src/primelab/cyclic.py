"""Real-valued functions on Z/NZ with shifts, means, and the W-trick.

The cyclic group carries the uniform probability measure, so mean() is
(1/N) * sum of values, computed with compensated summation.  Shifts act by
T^h f(x) = f(x + h mod N) and satisfy the composition and product laws
exactly.  The W-trick maps a set A of integers to the residue class
b mod W with the most mass, then embeds n -> nW + b membership into Z/NZ
as a normalized, edge-truncated indicator.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .arith import euler_phi, primorial
from .errors import ConfigError

__all__ = ["CyclicFn", "SieveConfig", "select_residue", "build_normalized_indicator"]


@dataclass(frozen=True, eq=False)
class CyclicFn:
    """A function X = Z/NZ -> R stored as a length-N float array."""

    modulus: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.modulus,):
            raise ValueError(
                f"values shape {vals.shape} does not match modulus {self.modulus}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c: float, modulus: int) -> "CyclicFn":
        return cls(modulus, np.full(modulus, float(c)))

    def shift(self, h: int) -> "CyclicFn":
        """T^h f with T^h f(x) = f(x + h mod N)."""
        return CyclicFn(self.modulus, np.roll(self.values, -h))

    def mean(self) -> float:
        """Haar-uniform mean (1/N) sum f(x), compensated summation."""
        return math.fsum(self.values.tolist()) / self.modulus

    def _check(self, other: "CyclicFn") -> None:
        if self.modulus != other.modulus:
            raise ValueError(
                f"modulus mismatch: {self.modulus} vs {other.modulus}"
            )

    def __mul__(self, other: "CyclicFn | float") -> "CyclicFn":
        if isinstance(other, CyclicFn):
            self._check(other)
            return CyclicFn(self.modulus, self.values * other.values)
        return CyclicFn(self.modulus, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "CyclicFn | float") -> "CyclicFn":
        if isinstance(other, CyclicFn):
            self._check(other)
            return CyclicFn(self.modulus, self.values + other.values)
        return CyclicFn(self.modulus, self.values + float(other))

    def __sub__(self, other: "CyclicFn | float") -> "CyclicFn":
        if isinstance(other, CyclicFn):
            self._check(other)
            return CyclicFn(self.modulus, self.values - other.values)
        return CyclicFn(self.modulus, self.values - float(other))

    def to_bytes(self) -> bytes:
        """Flat binary record: modulus as little-endian int64, then N doubles."""
        return struct.pack("<q", self.modulus) + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "CyclicFn":
        (n,) = struct.unpack_from("<q", blob)
        vals = np.frombuffer(blob, dtype="<f8", offset=8, count=n)
        return cls(n, vals.astype(np.float64))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("index,value\n")
            for i, v in enumerate(self.values):
                fh.write(f"{i},{v!r}\n")

    @classmethod
    def from_csv(cls, path) -> "CyclicFn":
        vals = []
        with open(path) as fh:
            next(fh)
            for line in fh:
                vals.append(float(line.split(",")[1]))
        return cls(len(vals), np.array(vals))


@dataclass(frozen=True)
class SieveConfig:
    """Ambient parameters (N', w, W, b, N, eps0, R) for the W-tricked setup.

    N = floor(N'/W) is the cyclic-group size, R = floor(N^eps0) the divisor
    cutoff of the enveloping sieve.
    """

    N_prime: int
    w: int
    W: int
    b: int
    N: int
    eps0: float
    R: int

    def __post_init__(self):
        if math.gcd(self.b, self.W) != 1:
            raise ConfigError(f"b={self.b} is not coprime to W={self.W}")
        if not 0 < self.eps0 < 1:
            raise ConfigError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if self.R < 2:
            raise ConfigError(f"R={self.R} below 2; raise eps0 or N'")
        if self.N < 16:
            raise ConfigError(f"N={self.N} below 16; edge truncation leaves nothing")

    @classmethod
    def create(cls, N_prime: int, w: int, b: int, eps0: float) -> "SieveConfig":
        W = primorial(w)
        N = N_prime // W
        if N < 16:
            raise ConfigError(f"N' = {N_prime} too small for w={w} (N={N})")
        R = math.floor(N**eps0)
        return cls(N_prime, w, W, b, N, eps0, R)


def select_residue(A: Iterable[int], N_prime: int, w: int) -> int:
    """The b in [W] coprime to W maximizing |{n in [N]: nW + b in A}|.

    Ties break toward the smallest b.  Raises ValueError when no element of
    A lands in a coprime class within range.
    """
    W = primorial(w)
    N = N_prime // W
    arr = np.fromiter((int(a) for a in A), dtype=np.int64)
    if len(arr) == 0:
        raise ValueError("A is empty")
    res = np.mod(arr, W)
    coprime = np.gcd(res, W) == 1
    # n = (a - b) / W must land in [1, N]
    b_vals = np.where(res == 0, W, res)  # representative in [1, W]
    n_vals = (arr - b_vals) // W
    ok = coprime & (n_vals >= 1) & (n_vals <= N)
    if not ok.any():
        raise ValueError(
            "no element of A is coprime to W within the sampled range"
        )
    counts = np.bincount(b_vals[ok], minlength=W + 1)
    return int(np.argmax(counts))  # argmax returns the smallest maximizer


def build_normalized_indicator(
    A: Iterable[int] | np.ndarray, cfg: SieveConfig
) -> CyclicFn:
    """Normalized indicator of {n : nW + b in A} embedded in Z/NZ.

    Value (eps0/10) * phi(W) log(N) / W on qualifying n with
    sqrt(N) < n <= N - sqrt(N), zero elsewhere.  The edge truncation rules
    out wraparound when progressions of polylog width are counted later.
    """
    N, W, b = cfg.N, cfg.W, cfg.b
    top = N * W + b
    members = np.zeros(top + 1, dtype=bool)
    arr = np.fromiter((int(a) for a in A), dtype=np.int64)
    arr = arr[(arr >= 0) & (arr <= top)]
    members[arr] = True

    scale = (cfg.eps0 / 10.0) * euler_phi(W) * math.log(N) / W
    s = math.isqrt(N)
    n_range = np.arange(s + 1, N - s + 1, dtype=np.int64)
    values = np.zeros(N, dtype=np.float64)
    hit = members[n_range * W + b]
    values[np.mod(n_range[hit], N)] = scale
    return CyclicFn(N, values)
