"""Assignments of the four curve types and the structural rules they obey.

Types: 1 maps onto the line at infinity, 2 to a point on it, 3 onto another
curve, 4 to a point off it.  Rule ids C1..C11 are stable and appear in every
violation and audit line.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping

from .tree import CurveTree, TreeError, _connected, final_curves

TYPES = (1, 2, 3, 4)

RULES = {
    "C1": "origin curve is type 2",
    "C2": "type 1 has negative even kbar",
    "C3": "type 3 has positive kbar",
    "C4": "types 1 and 2 form a connected subtree containing the origin and all negative curves",
    "C5": "no two type-1 curves are adjacent",
    "C6": "type 3 has exactly one type-2 neighbour and only a type-4 chain beyond it",
    "C7": "type 4 only inside such chains, never touching types 1 or 2",
    "C8": "every final curve is type 1 or 3",
    "C9": "every type-1 curve is a leaf",
    "C10": "at least one type-3 curve",
    "C11": "at least one type-1 curve",
}


@dataclass(frozen=True)
class TypeAssignment:
    types: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "types", dict(sorted((int(k), int(v)) for k, v in self.types.items())))

    def __getitem__(self, vid: int) -> int:
        return self.types[vid]

    def __eq__(self, other) -> bool:
        return isinstance(other, TypeAssignment) and self.types == other.types

    def __hash__(self) -> int:
        return hash(tuple(self.types.items()))

    def of_type(self, k: int) -> list[int]:
        return [v for v, t in self.types.items() if t == k]

    def ramification(self, t: CurveTree, v: int) -> int:
        """Ramification index of a type-1 curve, read off as -kbar/2."""
        if self.types[v] != 1:
            raise ValueError(f"vertex {v} is not type 1")
        return -t.kbar(v) // 2

    def to_json(self) -> dict:
        return {"types": {str(k): v for k, v in self.types.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> TypeAssignment:
        try:
            types = {int(k): int(v) for k, v in obj["types"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"malformed type assignment JSON: {exc}") from None
        bad = {k: v for k, v in types.items() if v not in TYPES}
        if bad:
            raise ValueError(f"types outside 1..4: {bad}")
        return cls(types)


@dataclass(frozen=True)
class TypeViolation:
    rule: str
    vertices: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.detail}"


def _chain_beyond(t: CurveTree, v: int, came_from: int) -> list[int] | None:
    """Vertices past ``v`` (away from ``came_from``) if they form a simple
    path starting at ``v``; ``None`` if the far side branches."""
    out = []
    prev, cur = came_from, v
    while True:
        nxt = [u for u in t.neighbors(cur) if u != prev]
        if not nxt:
            return out
        if len(nxt) > 1:
            return None
        prev, cur = cur, nxt[0]
        out.append(cur)


def check_assignment(t: CurveTree, ta: TypeAssignment, finals: set[int] | None = None,
                     require_type1: bool = True) -> list[TypeViolation]:
    """All rule violations of ``ta`` on ``t``; empty iff admissible."""
    missing = set(t.ids()) - set(ta.types)
    extra = set(ta.types) - set(t.ids())
    if missing or extra:
        raise TreeError(f"assignment must be total over the tree (missing {sorted(missing)}, "
                        f"unknown {sorted(extra)})")
    if finals is None:
        finals = final_curves(t)
    ty = ta.types
    out: list[TypeViolation] = []

    def bad(rule, vs, detail):
        out.append(TypeViolation(rule, tuple(vs), detail))

    o = t.origin
    if ty[o] != 2:
        bad("C1", [o], f"origin {o} has type {ty[o]}")
    for v in t.ids():
        a = t.kbar(v)
        if ty[v] == 1 and not (a < 0 and a % 2 == 0):
            bad("C2", [v], f"type-1 vertex {v} has kbar {a}")
        if ty[v] == 3 and a <= 0:
            bad("C3", [v], f"type-3 vertex {v} has kbar {a}")

    core = [v for v in t.ids() if ty[v] in (1, 2)]
    neg_out = [v for v in t.ids() if t.kbar(v) < 0 and ty[v] not in (1, 2)]
    if not _connected(t, core) or o not in core or neg_out:
        detail = "type 1/2 vertices are not connected" if not _connected(t, core) else ""
        if o not in core:
            detail += "; origin not in type 1/2 part"
        if neg_out:
            detail += f"; negative vertices {neg_out} not typed 1/2"
        bad("C4", sorted(set(neg_out) | {o}), detail.lstrip("; "))

    for i, j in sorted(t.edges):
        if ty[i] == 1 and ty[j] == 1:
            bad("C5", [i, j], f"type-1 vertices {i} and {j} are adjacent")

    chain_members: set[int] = set()
    for v in ta.of_type(3):
        nbrs = t.neighbors(v)
        t2 = [u for u in nbrs if ty[u] == 2]
        if len(t2) != 1:
            bad("C6", [v], f"type-3 vertex {v} has {len(t2)} type-2 neighbours")
            continue
        chain = _chain_beyond(t, v, t2[0])
        if chain is None or any(ty[u] != 4 for u in chain):
            bad("C6", [v], f"beyond type-3 vertex {v} is not a simple chain of type-4 curves")
            continue
        chain_members.update(chain)

    for v in ta.of_type(4):
        touching = [u for u in t.neighbors(v) if ty[u] in (1, 2)]
        if touching:
            bad("C7", [v] + touching, f"type-4 vertex {v} touches type 1/2 vertices {touching}")
        elif v not in chain_members:
            bad("C7", [v], f"type-4 vertex {v} is not in a chain behind a type-3 curve")

    for v in sorted(finals):
        if ty[v] not in (1, 3):
            bad("C8", [v], f"final vertex {v} has type {ty[v]}")
    for v in ta.of_type(1):
        if t.degree(v) != 1:
            bad("C9", [v], f"type-1 vertex {v} has degree {t.degree(v)}")
    if not ta.of_type(3):
        bad("C10", [], "no type-3 curve")
    if require_type1 and not ta.of_type(1):
        bad("C11", [], "no type-1 curve")
    return out


def admissible_assignments(t: CurveTree, finals: set[int] | None = None,
                           require_type1: bool = True) -> list[TypeAssignment]:
    """Every assignment passing ``check_assignment``, built structurally.

    Rooted at the origin, the type 1/2 part is a subtree closed under taking
    parents.  Anything hanging off it starts with a type-3 curve whose far
    side is a path of type-4 curves; type-1 curves are leaves.
    """
    if finals is None:
        finals = final_curves(t)
    for v in finals:
        a = t.kbar(v)
        if not (a < 0 and a % 2 == 0) and a <= 0:
            return []  # a final curve fit for neither type 1 nor type 3

    def options(v: int, parent: int) -> list[dict[int, int]]:
        a = t.kbar(v)
        kids = [u for u in t.neighbors(v) if u != parent]
        opts: list[dict[int, int]] = []
        if v not in finals:
            for combo in product(*(options(u, v) for u in kids)):
                d = {v: 2}
                for c in combo:
                    d.update(c)
                opts.append(d)
        if not kids and a < 0 and a % 2 == 0:
            opts.append({v: 1})
        if a > 0:
            chain = _chain_beyond(t, v, parent)
            if chain is not None and not any(u in finals or t.kbar(u) < 0 for u in chain):
                d = {v: 3}
                d.update({u: 4 for u in chain})
                opts.append(d)
        return opts

    o = t.origin
    if o in finals:
        return []
    found = []
    for combo in product(*(options(u, o) for u in t.neighbors(o))):
        d = {o: 2}
        for c in combo:
            d.update(c)
        ta = TypeAssignment(d)
        if not check_assignment(t, ta, finals, require_type1):
            found.append(ta)
    return sorted(set(found), key=lambda a: tuple(a.types.values()))

