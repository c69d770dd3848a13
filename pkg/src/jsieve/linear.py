"""Exact solvers for the pulled-back line class L and its correction Delta.

L is pinned by four conditions:

    L1  coefficient on each type-1 curve is -kbar/2
    L2  L . E = 1 on each type-1 curve
    L3  coefficient 0 on type-3 curves and the type-4 chains behind them
    L4  L . E = 0 on each type-2 curve

Delta lives on type-2 curves only:

    D1  positive integer coefficients on type-2 curves, zero elsewhere
    D2  Delta . E <= 0 on type-2 curves
    D3  Delta . E = 1 on type-1 curves
    D4  Delta . E <= L . E on type-3 curves
    SLOPE  the ratio d_v / L_v has no strict local minimum on type-2 curves
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .curve_types import TypeAssignment, check_assignment
from .lattice import DivisorClass, pair
from .tree import CurveTree

FAILURE_CODES = (
    "SingularNoSolution",
    "Underdetermined",
    "NonIntegral",
    "Condition2Failed",
    "NegativeCoefficient",
)


class PreconditionError(ValueError):
    pass


class SolveFailure(Exception):
    """A solver outcome that is data rather than a bug; ``code`` is one of
    FAILURE_CODES."""

    def __init__(self, code: str, message: str, **data):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.data = data


# -- exact linear algebra -----------------------------------------------------

def echelon(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form of an integer matrix.

    Only the first ``ncols`` columns are used for pivoting; further columns
    (an augmented right-hand side) are carried along.  Returns the reduced
    rows and the pivot columns.
    """
    a = [list(map(int, r)) for r in rows]
    m = len(a)
    width = len(a[0]) if a else 0
    r = 0
    prev = 1
    pivots: list[int] = []
    for c in range(ncols):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, m):
            lead = a[i][c]
            for j in range(c + 1, width):
                num = a[i][j] * piv - lead * a[r][j]
                q, rem = divmod(num, prev)
                assert rem == 0, "Bareiss division must be exact"
                a[i][j] = q
            a[i][c] = 0
        prev = piv
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def _back_substitute(a, pivots, n, rhs_col, free_values) -> list[Fraction]:
    x = [Fraction(0)] * n
    for f, val in free_values.items():
        x[f] = Fraction(val)
    for row in reversed(range(len(pivots))):
        c = pivots[row]
        s = Fraction(a[row][rhs_col]) if rhs_col is not None else Fraction(0)
        for j in range(c + 1, n):
            if a[row][j]:
                s -= a[row][j] * x[j]
        x[c] = s / a[row][c]
    return x


def solve_exact(A: list[list[int]], b: list[int]) -> tuple[list[Fraction] | None, list[list[int]]]:
    """Solve A x = b over the rationals.

    Returns ``(particular, kernel)``; ``particular`` is ``None`` when the
    system is inconsistent (the kernel of A is still returned).  Kernel vectors are primitive integer vectors.
    """
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    if not aug:
        return [Fraction(0)] * n, [[int(i == j) for i in range(n)] for j in range(n)]
    red, pivots = echelon(aug, n)
    free = [c for c in range(n) if c not in pivots]
    kernel = []
    for f in free:
        v = _back_substitute(red, pivots, n, None, {g: int(g == f) for g in free})
        den = math.lcm(*(q.denominator for q in v))
        ints = [int(q * den) for q in v]
        g = math.gcd(*ints)
        kernel.append([k // g for k in ints])
    if any(red[i][n] != 0 for i in range(len(pivots), len(red))):
        return None, kernel
    return _back_substitute(red, pivots, n, n, {f: 0 for f in free}), kernel


# -- L ------------------------------------------------------------------------

@dataclass(frozen=True)
class LSolution:
    L: DivisorClass
    residuals: dict = field(default_factory=dict)


def _fixed_L(t: CurveTree, ta: TypeAssignment) -> dict[int, Fraction]:
    fixed = {}
    for v, ty in ta.types.items():
        if ty == 1:
            fixed[v] = Fraction(-t.kbar(v), 2)
        elif ty in (3, 4):
            fixed[v] = Fraction(0)
    return fixed


def validate_L(t: CurveTree, ta: TypeAssignment, L: DivisorClass,
               allow_negative: bool = False) -> list[tuple[str, bool, str]]:
    """Per-condition (rule, passed, detail) lines for a candidate L."""
    out = []
    fixed = _fixed_L(t, ta)
    t1 = ta.of_type(1)
    t2 = ta.of_type(2)
    bad1 = [v for v in t1 if L[v] != fixed[v]]
    out.append(("L1", not bad1, f"type-1 coefficients off at {bad1}" if bad1 else "type-1 coefficients are -kbar/2"))
    bad2 = {v: pair(t, L, DivisorClass.curve(v)) for v in t1}
    bad2 = {v: p for v, p in bad2.items() if p != 1}
    out.append(("L2", not bad2, f"L.E != 1 at {_fmt(bad2)}" if bad2 else "L.E = 1 on type-1 curves"))
    bad3 = [v for v, ty in ta.types.items() if ty in (3, 4) and L[v] != 0]
    out.append(("L3", not bad3, f"nonzero on type 3/4 at {bad3}" if bad3 else "zero on type 3/4 curves"))
    bad4 = {v: pair(t, L, DivisorClass.curve(v)) for v in t2}
    bad4 = {v: p for v, p in bad4.items() if p != 0}
    out.append(("L4", not bad4, f"L.E != 0 at {_fmt(bad4)}" if bad4 else "L.E = 0 on type-2 curves"))
    out.append(("integral", L.is_integral(), "integer coefficients" if L.is_integral() else "non-integer coefficients"))
    if not allow_negative:
        neg = [v for v, c in L.coeffs.items() if c < 0]
        out.append(("nonnegative", not neg, f"negative at {neg}" if neg else "coefficients >= 0"))
    return out


def _fmt(d: dict) -> str:
    return "{" + ", ".join(f"{k}: {v}" for k, v in sorted(d.items())) + "}"


def _L_system(t: CurveTree, ta: TypeAssignment):
    fixed = _fixed_L(t, ta)
    t2 = ta.of_type(2)
    A = [[t.self_int(i) if i == j else int(t.has_edge(i, j)) for j in t2] for i in t2]
    b = [-sum((fixed[u] for u in t.neighbors(i) if u in fixed), Fraction(0)) for i in t2]
    den = math.lcm(1, *(q.denominator for q in b))
    if den != 1:  # only reachable for unchecked assignments with odd type-1 labels
        A = [[den * x for x in row] for row in A]
    return fixed, t2, A, [int(q * den) for q in b]


def _finish_L(t, ta, fixed, t2, x, allow_negative) -> LSolution:
    coeffs = dict(fixed)
    coeffs.update(zip(t2, x))
    L = DivisorClass(coeffs)
    if not L.is_integral():
        raise SolveFailure("NonIntegral", "L has non-integer coefficients",
                           L=L, at=[v for v, c in L.coeffs.items() if c.denominator != 1])
    off = {v: pair(t, L, DivisorClass.curve(v)) for v in ta.of_type(1)}
    off = {v: p for v, p in off.items() if p != 1}
    if off:
        raise SolveFailure("Condition2Failed", f"L.E != 1 on type-1 curves {_fmt(off)}", L=L, at=off)
    if not allow_negative:
        neg = [v for v, c in L.coeffs.items() if c < 0]
        if neg:
            raise SolveFailure("NegativeCoefficient", f"negative coefficients at {neg}", L=L, at=neg)
    checks = validate_L(t, ta, L, allow_negative)
    assert all(ok for _, ok, _ in checks), checks
    residuals = {
        "type1": {v: pair(t, L, DivisorClass.curve(v)) - 1 for v in ta.of_type(1)},
        "type2": {v: pair(t, L, DivisorClass.curve(v)) for v in t2},
    }
    return LSolution(L, residuals)


def solve_L(t: CurveTree, ta: TypeAssignment, allow_negative: bool = False,
            check: bool = True, finals: set[int] | None = None,
            require_type1: bool = True) -> LSolution:
    """Solve for L; raises SolveFailure with a reason code otherwise."""
    if check:
        bad = check_assignment(t, ta, finals, require_type1)
        if bad:
            raise PreconditionError("assignment is not admissible: " + "; ".join(map(str, bad)))
    fixed, t2, A, b = _L_system(t, ta)
    x, kernel = solve_exact(A, b)
    if x is None:
        raise SolveFailure("SingularNoSolution", "type-2 system is inconsistent")
    if kernel:
        raise SolveFailure("Underdetermined", f"kernel of dimension {len(kernel)}",
                           particular=dict(zip(t2, x)),
                           kernel=[dict(zip(t2, k)) for k in kernel])
    return _finish_L(t, ta, fixed, t2, x, allow_negative)


def candidate_Ls(t: CurveTree, ta: TypeAssignment, allow_negative: bool = False,
                 box: int = 1, finals: set[int] | None = None,
                 require_type1: bool = True, check: bool = True) -> list[LSolution]:
    """Like ``solve_L`` but expands an underdetermined system into the
    coset representatives particular + sum k_i kernel_i, |k_i| <= box, that
    pass every condition.  Still raises SolveFailure when none do."""
    try:
        return [solve_L(t, ta, allow_negative, check, finals, require_type1)]
    except SolveFailure as exc:
        if exc.code != "Underdetermined":
            raise
        part, kernel = exc.data["particular"], exc.data["kernel"]
    fixed, t2, _, _ = _L_system(t, ta)
    from itertools import product

    found: list[LSolution] = []
    last: SolveFailure | None = None
    for ks in product(range(-box, box + 1), repeat=len(kernel)):
        x = [part[v] + sum(k * kv[v] for k, kv in zip(ks, kernel)) for v in t2]
        try:
            found.append(_finish_L(t, ta, fixed, t2, x, allow_negative))
        except SolveFailure as e:
            last = e
    if not found:
        raise SolveFailure("Underdetermined", f"no coset representative within box {box} passes"
                           + (f" (last: {last.code})" if last else ""), kernel=kernel)
    return found


# -- Delta --------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaSolution:
    Delta: DivisorClass
    slope: dict  # type-2 id -> Fraction, or None where L vanishes


@dataclass
class DeltaSearch:
    solutions: list[DeltaSolution]
    truncated: bool = False      # result cap reached
    cap_touched: bool = False    # some solution sits on the coefficient cap
    nodes: int = 0


def slopes(ta: TypeAssignment, L: DivisorClass, d: dict[int, int]) -> dict[int, Fraction | None]:
    return {v: (Fraction(d[v]) / L[v] if L[v] != 0 else None) for v in ta.of_type(2)}


def slope_minima(t: CurveTree, ta: TypeAssignment, ratio: dict[int, Fraction | None]) -> list[int]:
    """Type-2 vertices whose ratio is strictly below every comparable type-2
    neighbour; vertices with undefined ratio take no part."""
    out = []
    for v, r in ratio.items():
        if r is None:
            continue
        nb = [ratio[u] for u in t.neighbors(v) if u in ratio and ratio[u] is not None]
        if nb and all(r < q for q in nb):
            out.append(v)
    return out


def validate_Delta(t: CurveTree, ta: TypeAssignment, L: DivisorClass,
                   Delta: DivisorClass) -> list[tuple[str, bool, str]]:
    out = []
    t2 = set(ta.of_type(2))
    bad1 = [v for v in t.ids()
            if (v in t2 and not (Delta[v] > 0 and Delta[v].denominator == 1))
            or (v not in t2 and Delta[v] != 0)]
    out.append(("D1", not bad1, f"bad coefficients at {sorted(bad1)}" if bad1 else "positive integers exactly on type 2"))
    p = {v: pair(t, Delta, DivisorClass.curve(v)) for v in t.ids()}
    bad2 = {v: p[v] for v in t2 if p[v] > 0}
    out.append(("D2", not bad2, f"Delta.E > 0 at {_fmt(bad2)}" if bad2 else "Delta.E <= 0 on type 2"))
    bad3 = {v: p[v] for v in ta.of_type(1) if p[v] != 1}
    out.append(("D3", not bad3, f"Delta.E != 1 at {_fmt(bad3)}" if bad3 else "Delta.E = 1 on type 1"))
    bad4 = {v: p[v] for v in ta.of_type(3) if p[v] > pair(t, L, DivisorClass.curve(v))}
    out.append(("D4", not bad4, f"Delta.E > L.E at {_fmt(bad4)}" if bad4 else "Delta.E <= L.E on type 3"))
    if not bad1:
        mins = slope_minima(t, ta, slopes(ta, L, {v: int(Delta[v]) for v in t2}))
        out.append(("SLOPE", not mins, f"local slope minimum at {mins}" if mins else "no local slope minimum"))
    return out


def solve_Delta(t: CurveTree, ta: TypeAssignment, L: DivisorClass,
                cap: int = 64, result_cap: int = 128) -> DeltaSearch:
    """Depth-first search with interval propagation over 1 <= d_v <= cap.

    Solutions come out in lexicographic order of the coefficient vector
    (type-2 vertices in id order).
    """
    if cap < 1 or result_cap < 1:
        raise ValueError("caps must be >= 1")
    t2 = ta.of_type(2)
    n = len(t2)
    idx = {v: k for k, v in enumerate(t2)}
    lo = [1] * n
    hi = [cap] * n
    for v in ta.of_type(1):
        for u in t.neighbors(v):
            if u in idx:
                lo[idx[u]] = max(lo[idx[u]], 1)
                hi[idx[u]] = min(hi[idx[u]], 1)
    for v in ta.of_type(3):
        lim = pair(t, L, DivisorClass.curve(v))
        for u in t.neighbors(v):
            if u in idx:
                hi[idx[u]] = min(hi[idx[u]], math.floor(lim))

    # D2 at each type-2 vertex: sum_j c_j d_j <= 0 over the vertex and its type-2 neighbours
    cons = []
    for v in t2:
        terms = [(idx[v], t.self_int(v))] + [(idx[u], 1) for u in t.neighbors(v) if u in idx]
        cons.append([(j, c) for j, c in terms if c != 0])
    touching = [[] for _ in range(n)]
    for ci, terms in enumerate(cons):
        for j, _ in terms:
            touching[j].append(ci)

    def propagate(lo, hi) -> bool:
        queue = list(range(len(cons)))
        queued = set(queue)
        while queue:
            ci = queue.pop()
            queued.discard(ci)
            terms = cons[ci]
            mins = [c * (lo[j] if c > 0 else hi[j]) for j, c in terms]
            total = sum(mins)
            if total > 0:
                return False
            for (j, c), m in zip(terms, mins):
                slack = -(total - m)  # c * d_j <= slack
                if c > 0:
                    nb = slack // c
                    if nb < hi[j]:
                        hi[j] = nb
                    else:
                        continue
                else:
                    nb = -(slack // -c)  # ceil(slack / c) for c < 0
                    if nb > lo[j]:
                        lo[j] = nb
                    else:
                        continue
                if lo[j] > hi[j]:
                    return False
                for cj in touching[j]:
                    if cj not in queued:
                        queued.add(cj)
                        queue.append(cj)
        return True

    adj2 = [[idx[u] for u in t.neighbors(v) if u in idx] for v in t2]
    Lc = [L[v] for v in t2]

    def slope_ok(lo, hi, k) -> bool:
        for w in [k] + adj2[k]:
            if Lc[w] == 0 or lo[w] != hi[w]:
                continue
            nb = [u for u in adj2[w] if Lc[u] != 0]
            if not nb or any(lo[u] != hi[u] for u in nb):
                continue
            r = Fraction(lo[w]) / Lc[w]
            if all(r < Fraction(lo[u]) / Lc[u] for u in nb):
                return False
        return True

    result = DeltaSearch([])
    if any(l > h for l, h in zip(lo, hi)) or not propagate(lo, hi):
        return result

    def dfs(lo, hi) -> bool:
        result.nodes += 1
        k = next((j for j in range(n) if lo[j] != hi[j]), None)
        if k is None:
            d = {v: lo[idx[v]] for v in t2}
            if slope_minima(t, ta, slopes(ta, L, d)):
                return True
            delta = DivisorClass(d)
            assert all(ok for _, ok, _ in validate_Delta(t, ta, L, delta))
            result.solutions.append(DeltaSolution(delta, slopes(ta, L, d)))
            if any(x == cap for x in d.values()):
                result.cap_touched = True
            if len(result.solutions) >= result_cap:
                result.truncated = True
                return False
            return True
        for val in range(lo[k], hi[k] + 1):
            lo2, hi2 = lo[:], hi[:]
            lo2[k] = hi2[k] = val
            if propagate(lo2, hi2) and slope_ok(lo2, hi2, k):
                if not dfs(lo2, hi2):
                    return False
        return True

    if n == 0:
        return result
    dfs(lo, hi)
    return result
