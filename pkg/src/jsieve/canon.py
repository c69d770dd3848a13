"""Rooted canonical form (AHU style) of a curve tree, rooted at the origin."""
from __future__ import annotations

from .tree import CurveTree


def _encode(t: CurveTree, v: int, parent: int | None, extra) -> str:
    x = t.vertex(v)
    kids = sorted(_encode(t, u, v, extra) for u in t.neighbors(v) if u != parent)
    tag = f"{x.kbar},{x.self_int}"
    if extra is not None:
        tag += f",{extra[v]}"
    return "(" + tag + "".join(kids) + ")"


def canonical_key(t: CurveTree, extra: dict | None = None) -> bytes:
    """Equal for two trees iff a root- and label-preserving isomorphism exists.

    ``extra`` optionally attaches one more label per vertex (e.g. a curve type).
    """
    return _encode(t, t.origin, None, extra).encode()


def canonical_order(t: CurveTree) -> list[int]:
    """Vertex ids in a canonical preorder (ties broken arbitrarily but
    consistently among isomorphic subtrees)."""
    order: list[int] = []

    def walk(v: int, parent: int | None) -> None:
        order.append(v)
        kids = [u for u in t.neighbors(v) if u != parent]
        kids.sort(key=lambda u: _encode(t, u, v, None))
        for u in kids:
            walk(u, v)

    walk(t.origin, None)
    return order
