from __future__ import annotations

from .lattice import DivisorClass
from .tree import CurveTree


def _num(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_dot(t: CurveTree, types: dict[int, int] | None = None, L: DivisorClass | None = None,
           deltas: list[DivisorClass] = (), name: str = "curves") -> str:
    """Undirected DOT graph; node label ``id: kbar/self_int[/type]``."""
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in t.vertices:
        label = f"{v.id}: {v.kbar}/{v.self_int}"
        if types is not None:
            label += f"/{types[v.id]}"
        attrs = [f'label="{label}"']
        if v.is_origin:
            attrs.append("peripheries=2")
        extra = []
        if L is not None:
            extra.append(f"L={_num(L[v.id])}")
        for k, d in enumerate(deltas):
            extra.append(f"D{k}={_num(d[v.id])}")
        if extra:
            attrs.append(f'xlabel="{" ".join(extra)}"')
        lines.append(f"  v{v.id} [{', '.join(attrs)}];")
    for i, j in sorted(t.edges):
        lines.append(f"  v{i} -- v{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
