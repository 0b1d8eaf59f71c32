"""Exact multivariate integer polynomials in variables (h1, ..., ht, W).

The last slot of every exponent tuple is reserved for the symbol W so that
direction polynomials can carry the small-prime modulus symbolically and be
specialized late.  Evaluation is exact (Python integers); the vectorized path
falls back from int64 to object arithmetic when a bound check says values
could leave 63-bit range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

Exps = tuple[int, ...]


def _merge(terms: Iterable[tuple[Exps, int]]) -> tuple[tuple[Exps, int], ...]:
    acc: dict[Exps, int] = {}
    for exps, coeff in terms:
        acc[exps] = acc.get(exps, 0) + coeff
    return tuple(sorted((e, c) for e, c in acc.items() if c != 0))


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial; terms maps (e1, ..., et, eW) -> coefficient."""

    nvars: int
    terms: tuple[tuple[Exps, int], ...] = field(default=())

    def __post_init__(self):
        for exps, _ in self.terms:
            if len(exps) != self.nvars + 1:
                raise ValueError(
                    f"exponent tuple {exps} does not match nvars={self.nvars}"
                )

    @classmethod
    def constant(cls, c: int, nvars: int) -> "IntPoly":
        if c == 0:
            return cls(nvars, ())
        return cls(nvars, (((0,) * (nvars + 1), c),))

    @classmethod
    def variable(cls, i: int, nvars: int) -> "IntPoly":
        """The variable h_{i+1} (0-based index i)."""
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        exps = tuple(1 if j == i else 0 for j in range(nvars + 1))
        return cls(nvars, ((exps, 1),))

    @classmethod
    def w_symbol(cls, nvars: int) -> "IntPoly":
        exps = (0,) * nvars + (1,)
        return cls(nvars, ((exps, 1),))

    @classmethod
    def from_terms(cls, terms: Mapping[Exps, int], nvars: int) -> "IntPoly":
        return cls(nvars, _merge(terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self, W: int | None = None) -> bool:
        """True when no h-variable appears (after specializing W if given)."""
        if W is None:
            return all(all(e == 0 for e in exps[:-1]) for exps, _ in self.terms)
        return self.specialize_w(W).is_constant()

    def __add__(self, other: "IntPoly") -> "IntPoly":
        self._check(other)
        return IntPoly(self.nvars, _merge(self.terms + other.terms))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __neg__(self) -> "IntPoly":
        return IntPoly(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __mul__(self, other: "IntPoly | int") -> "IntPoly":
        if isinstance(other, int):
            if other == 0:
                return IntPoly(self.nvars, ())
            return IntPoly(self.nvars, _merge((e, c * other) for e, c in self.terms))
        self._check(other)
        prods = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                prods.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return IntPoly(self.nvars, _merge(prods))

    __rmul__ = __mul__

    def _check(self, other: "IntPoly") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def specialize_w(self, W: int) -> "IntPoly":
        """Fold the W symbol into the coefficients."""
        folded = []
        for exps, coeff in self.terms:
            folded.append((exps[:-1] + (0,), coeff * W ** exps[-1]))
        return IntPoly(self.nvars, _merge(folded))

    def evaluate(self, hs: tuple[int, ...], W: int = 1) -> int:
        """Exact value at integer point hs with the W symbol set to W."""
        if len(hs) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(hs)}")
        total = 0
        for exps, coeff in self.terms:
            term = coeff * W ** exps[-1]
            for h, e in zip(hs, exps[:-1]):
                if e:
                    term *= h**e
            total += term
        return total

    def eval_many(self, points: np.ndarray, W: int = 1) -> np.ndarray:
        """Exact values at an (n, nvars) int array of points.

        Returns int64 when a conservative magnitude bound fits; otherwise
        evaluates with Python integers (object dtype converted back if safe).
        """
        points = np.asarray(points)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError(f"points must have shape (n, {self.nvars})")
        if not self.terms:
            return np.zeros(len(points), dtype=np.int64)
        max_abs = int(np.abs(points).max()) if points.size else 0
        bound = sum(
            abs(c) * W ** e[-1] * max(1, max_abs) ** sum(e[:-1]) for e, c in self.terms
        )
        if bound < 2**62:
            pts = points.astype(np.int64)
            total = np.zeros(len(points), dtype=np.int64)
            for exps, coeff in self.terms:
                term = np.full(len(points), coeff * W ** exps[-1], dtype=np.int64)
                for i, e in enumerate(exps[:-1]):
                    if e:
                        term *= pts[:, i] ** e
                total += term
            return total
        return np.array(
            [self.evaluate(tuple(int(v) for v in row), W) for row in points],
            dtype=object,
        )

    def reindex(self, offset: int, new_nvars: int) -> "IntPoly":
        """Embed into a wider variable space, shifting h-indices by offset."""
        if offset < 0 or self.nvars + offset > new_nvars:
            raise ValueError("reindex target too narrow")
        out = []
        for exps, coeff in self.terms:
            new_exps = (
                (0,) * offset
                + exps[:-1]
                + (0,) * (new_nvars - self.nvars - offset)
                + (exps[-1],)
            )
            out.append((new_exps, coeff))
        return IntPoly(new_nvars, _merge(out))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self.terms:
            factors = []
            for i, e in enumerate(exps[:-1]):
                if e == 1:
                    factors.append(f"h{i + 1}")
                elif e > 1:
                    factors.append(f"h{i + 1}^{e}")
            if exps[-1] == 1:
                factors.append("W")
            elif exps[-1] > 1:
                factors.append(f"W^{exps[-1]}")
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            elif coeff == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{coeff}*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")
