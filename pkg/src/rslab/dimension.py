"""Exact arithmetic for the dimension function delta = |A| - sum_i alpha_i * w_i(A).

Every delta/e value is carried as a formal integer linear combination
c0 + sum_i c_i * alpha_i, so the asserted rational independence of
{1, alpha_0, ...} turns the zero test into "all coefficients zero".

Sign evaluation is exact: the nominal alpha_i are rationals, so the form
evaluates to an exact Fraction.  When independence is asserted and the
nominal evaluation ties at zero with nonzero coefficients (the nominal
rationals cannot witness the asserted independence), the tie is broken
as if each alpha_i carried its own positive infinitesimal perturbation:
the sign of the first nonzero c_i decides.  This keeps the order total,
additive, and consistent with "nonzero form => nonzero value".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .core import FiniteStructure, Signature

NEGATIVE, ZERO, POSITIVE = -1, 0, 1


@dataclass(frozen=True)
class DimForm:
    """Formal value c0 + sum_i coeffs[i] * alpha_i over a fixed signature."""

    c0: int
    coeffs: tuple[int, ...]
    sig: Signature

    def __post_init__(self):
        if len(self.coeffs) != self.sig.p:
            raise ValueError("coefficient count does not match signature")

    def _check(self, other: "DimForm"):
        if self.sig.alphas != other.sig.alphas:
            raise ValueError("forms over different signatures")

    def __add__(self, other: "DimForm") -> "DimForm":
        self._check(other)
        return DimForm(self.c0 + other.c0,
                       tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.sig)

    def __sub__(self, other: "DimForm") -> "DimForm":
        self._check(other)
        return DimForm(self.c0 - other.c0,
                       tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.sig)

    def __neg__(self) -> "DimForm":
        return DimForm(-self.c0, tuple(-c for c in self.coeffs), self.sig)

    def exact(self) -> Fraction:
        """Value at the nominal (rational) alphas, exactly."""
        total = Fraction(self.c0)
        for c, a in zip(self.coeffs, self.sig.alphas):
            total += c * a
        return total

    @property
    def value(self) -> float:
        return float(self.exact())

    @property
    def is_zero(self) -> bool:
        """Symbolic zero: the only zero form under asserted independence."""
        return self.c0 == 0 and all(c == 0 for c in self.coeffs)

    def sign(self) -> int:
        """NEGATIVE/ZERO/POSITIVE under the signature's independence regime."""
        ex = self.exact()
        if ex > 0:
            return POSITIVE
        if ex < 0:
            return NEGATIVE
        if self.is_zero:
            return ZERO
        if not self.sig.independence:
            return ZERO
        # nominal tie with nonzero coefficients: infinitesimal perturbation rule
        for c in self.coeffs:
            if c != 0:
                return POSITIVE if c > 0 else NEGATIVE
        raise AssertionError("unreachable: exact zero with zero alpha coefficients")

    # total order induced by sign of the difference
    def __lt__(self, other):
        return (self - other).sign() == NEGATIVE

    def __le__(self, other):
        return (self - other).sign() != POSITIVE

    def __gt__(self, other):
        return (self - other).sign() == POSITIVE

    def __ge__(self, other):
        return (self - other).sign() != NEGATIVE

    def to_json_dict(self) -> dict:
        return {"c0": self.c0, "coeffs": list(self.coeffs), "value": self.value}

    def __str__(self):
        terms = [str(self.c0)]
        for c, rel in zip(self.coeffs, self.sig.relations):
            if c:
                op = "+" if c > 0 else "-"
                terms.append(f"{op} {abs(c)}*a[{rel.name}]")
        return f"{' '.join(terms)} = {self.value:.6g}"


def zero_form(sig: Signature) -> DimForm:
    return DimForm(0, (0,) * sig.p, sig)


def delta(M: FiniteStructure) -> DimForm:
    """delta(M) = |M| - sum_i alpha_i * (number of R_i hyperedges)."""
    return DimForm(M.n, tuple(-w for w in M.edge_counts), M.sig)


def delta_of_subset(M: FiniteStructure, S: Iterable[int]) -> DimForm:
    """delta of the substructure induced on S, without materializing it."""
    sset = set(S)
    counts = M.edge_counts_within(sset)
    return DimForm(len(sset), tuple(-w for w in counts), M.sig)


def delta_rel(B: FiniteStructure, baseA: Iterable[int]) -> DimForm:
    """delta(B/A) = delta(B) - delta(A) for A the induced base."""
    base = set(baseA)
    _check_subset(B, base)
    return delta(B) - delta_of_subset(B, base)


def delta_rel_sets(M: FiniteStructure, upper: Iterable[int], lower: Iterable[int]) -> DimForm:
    """delta(U/L) for vertex subsets L subset-of U of a host structure."""
    return delta_of_subset(M, upper) - delta_of_subset(M, lower)


def e_rel(B: FiniteStructure, baseA: Iterable[int]) -> DimForm:
    """Weighted count of hyperedges of B not lying inside the base."""
    base = set(baseA)
    _check_subset(B, base)
    inner = B.edge_counts_within(base)
    return DimForm(0, tuple(w - wi for w, wi in zip(B.edge_counts, inner)), B.sig)


def gamma_prod(B: FiniteStructure, baseA: Iterable[int]) -> float:
    """Product of gamma_i over hyperedges of B not contained in the base."""
    base = set(baseA)
    _check_subset(B, base)
    inner = B.edge_counts_within(base)
    out = Fraction(1)
    for rel, w, wi in zip(B.sig.relations, B.edge_counts, inner):
        out *= rel.gamma ** (w - wi)
    return float(out)


def d_cap(N: FiniteStructure, A: Iterable[int], cap: int) -> DimForm:
    """min delta(B) over A subset-of B subset-of N with |B - A| <= cap.

    Equals the exact infimum-style dimension d(N, A) once cap covers the
    whole complement.  Exponential in cap; meant for desk-size inputs.
    """
    base = sorted(set(A))
    _check_subset(N, base)
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    others = [v for v in range(N.n) if v not in set(base)]
    depth = min(cap, len(others))
    candidates = sum(math.comb(len(others), s) for s in range(1, depth + 1))
    if candidates > 2_000_000:
        raise ValueError(
            f"capped dimension needs {candidates} candidate sets "
            f"({len(others)} free vertices, cap {cap}); lower the cap or shrink the structure"
        )
    best = delta_of_subset(N, base)
    for size in range(1, depth + 1):
        for extra in combinations(others, size):
            cand = delta_of_subset(N, set(base) | set(extra))
            if cand < best:
                best = cand
    return best


def _check_subset(M: FiniteStructure, S: set):
    for v in S:
        if not (0 <= v < M.n):
            raise ValueError(f"vertex {v} outside universe of size {M.n}")
