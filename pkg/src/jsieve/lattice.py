"""Intersection form on the curve basis and exact divisor arithmetic.

Everything here is exact: coefficients are ``Fraction`` (integer-valued in
practice) and determinants are computed over Python integers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .tree import CurveTree, TreeError


@dataclass(frozen=True)
class DivisorClass:
    """Sparse combination sum(c_i E_i); zero coefficients are dropped."""

    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): Fraction(v) for k, v in self.coeffs.items() if v != 0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def __getitem__(self, vid: int) -> Fraction:
        return self.coeffs.get(vid, Fraction(0))

    def __add__(self, other: DivisorClass) -> DivisorClass:
        keys = set(self.coeffs) | set(other.coeffs)
        return DivisorClass({k: self[k] + other[k] for k in keys})

    def __sub__(self, other: DivisorClass) -> DivisorClass:
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, DivisorClass) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(tuple(self.coeffs.items()))

    def scale(self, c) -> DivisorClass:
        return DivisorClass({k: c * v for k, v in self.coeffs.items()})

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.coeffs.values())

    def support(self) -> set[int]:
        return set(self.coeffs)

    @classmethod
    def curve(cls, vid: int) -> DivisorClass:
        return cls({vid: 1})


def intersection_matrix(t: CurveTree, ids: list[int] | None = None) -> list[list[int]]:
    """M[i][j] = E_i . E_j for the listed ids (default: all, sorted)."""
    ids = t.ids() if ids is None else ids
    return [[t.self_int(i) if i == j else int(t.has_edge(i, j)) for j in ids] for i in ids]


def _check_support(t: CurveTree, d: DivisorClass) -> None:
    for k in d.coeffs:
        if k not in t:
            raise TreeError(f"divisor has a coefficient on unknown vertex {k}")


def pair(t: CurveTree, d1: DivisorClass, d2: DivisorClass) -> Fraction:
    _check_support(t, d1)
    _check_support(t, d2)
    total = Fraction(0)
    for i, a in d1.coeffs.items():
        b = d2[i]
        if b:
            total += a * b * t.self_int(i)
        for j in t.neighbors(i):
            b = d2[j]
            if b:
                total += a * b
    return total


def kbar_class(t: CurveTree) -> DivisorClass:
    return DivisorClass({v.id: v.kbar for v in t.vertices})


def canonical_class(t: CurveTree) -> DivisorClass:
    return DivisorClass({v.id: v.kbar - 1 for v in t.vertices})


def bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination; exact for integer matrices."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(map(int, row)) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def determinant_label(t: CurveTree, v: int) -> int:
    """det of the anti-intersection matrix -M with row and column ``v`` removed."""
    t.vertex(v)
    rest = [i for i in t.ids() if i != v]
    m = intersection_matrix(t, rest)
    return bareiss_det([[-x for x in row] for row in m])


def determinant_labels(t: CurveTree) -> dict[int, int]:
    return {v: determinant_label(t, v) for v in t.ids()}


def rr_lower_bound(t: CurveTree, L: DivisorClass) -> Fraction:
    """(L^2 - L.K)/2 + 1, the Riemann-Roch lower bound for h^0(L)."""
    if not L.is_integral():
        raise ValueError("Riemann-Roch bound needs an integral divisor class")
    return (pair(t, L, L) - pair(t, L, canonical_class(t))) / 2 + 1


# -- JSON ---------------------------------------------------------------------

def divisor_to_json(d: DivisorClass) -> dict:
    return {"coeffs": {str(k): f"{v.numerator}/{v.denominator}" for k, v in d.coeffs.items()}}


def divisor_from_json(obj: dict) -> DivisorClass:
    try:
        return DivisorClass({int(k): Fraction(str(v)) for k, v in obj["coeffs"].items()})
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed divisor JSON: {exc}") from None
