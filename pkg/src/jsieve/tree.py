"""Trees of exceptional curves over the line at infinity.

Each vertex is one curve, labelled by its coefficient in the augmented
canonical class (``kbar``) and by its self-intersection.  Trees are immutable;
every move returns a fresh tree.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union


class TreeError(ValueError):
    """Raised for operations that reference missing vertices or edges."""


class NotContractible(TreeError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: int
    kbar: int
    self_int: int
    is_origin: bool = False


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class CurveTree:
    vertices: tuple[Vertex, ...]
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda v: v.id)))
        object.__setattr__(self, "edges", frozenset(_edge(i, j) for i, j in self.edges))

    # -- lookup -----------------------------------------------------------
    @cached_property
    def _by_id(self) -> dict[int, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def _adj(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v.id: [] for v in self.vertices}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return {k: tuple(sorted(ns)) for k, ns in adj.items()}

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vid: int) -> bool:
        return vid in self._by_id

    def ids(self) -> list[int]:
        return [v.id for v in self.vertices]

    def vertex(self, vid: int) -> Vertex:
        try:
            return self._by_id[vid]
        except KeyError:
            raise TreeError(f"unknown vertex id {vid}") from None

    def neighbors(self, vid: int) -> tuple[int, ...]:
        self.vertex(vid)
        return self._adj[vid]

    def degree(self, vid: int) -> int:
        return len(self.neighbors(vid))

    def kbar(self, vid: int) -> int:
        return self.vertex(vid).kbar

    def self_int(self, vid: int) -> int:
        return self.vertex(vid).self_int

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edges

    @property
    def origin(self) -> int:
        return next(v.id for v in self.vertices if v.is_origin)

    def next_id(self) -> int:
        return max(self._by_id) + 1 if self.vertices else 0

    def validate_structure(self) -> None:
        """Raise TreeError unless this is a tree with exactly one origin."""
        if not self.vertices:
            raise TreeError("empty tree")
        if len(self._by_id) != len(self.vertices):
            raise TreeError("duplicate vertex ids")
        origins = [v.id for v in self.vertices if v.is_origin]
        if len(origins) != 1:
            raise TreeError(f"expected exactly one origin vertex, found {len(origins)}")
        for i, j in self.edges:
            if i == j or i not in self._by_id or j not in self._by_id:
                raise TreeError(f"bad edge ({i}, {j})")
        if len(self.edges) != len(self.vertices) - 1 or not _connected(self, self.ids()):
            raise TreeError("edges do not form a tree")

    def _with(self, vertices: Iterable[Vertex], edges: Iterable[tuple[int, int]]) -> CurveTree:
        return CurveTree(tuple(vertices), frozenset(edges))


def _connected(t: CurveTree, subset: Iterable[int]) -> bool:
    subset = set(subset)
    if not subset:
        return True
    start = next(iter(subset))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in t._adj[u]:
            if w in subset and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen == subset


# -- moves ------------------------------------------------------------------

def initial_tree() -> CurveTree:
    """The projective plane: the line at infinity alone, kbar -2, E^2 = +1."""
    return CurveTree((Vertex(0, -2, 1, True),))


def blowup_point(t: CurveTree, v: int) -> CurveTree:
    """Blow up a general point of curve ``v``: a new leaf labelled kbar(v)+1."""
    parent = t.vertex(v)
    w = t.next_id()
    verts = [replace(x, self_int=x.self_int - 1) if x.id == v else x for x in t.vertices]
    verts.append(Vertex(w, parent.kbar + 1, -1))
    return t._with(verts, t.edges | {_edge(v, w)})


def blowup_edge(t: CurveTree, i: int, j: int) -> CurveTree:
    """Blow up the intersection point of curves ``i`` and ``j``."""
    if not t.has_edge(i, j):
        raise TreeError(f"({i}, {j}) is not an edge")
    w = t.next_id()
    kb = t.kbar(i) + t.kbar(j)
    verts = [replace(x, self_int=x.self_int - 1) if x.id in (i, j) else x for x in t.vertices]
    verts.append(Vertex(w, kb, -1))
    edges = (t.edges - {_edge(i, j)}) | {_edge(i, w), _edge(w, j)}
    return t._with(verts, edges)


# -- scripts ----------------------------------------------------------------

class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class PointBlowup:
    v: int

    def __str__(self) -> str:
        return f"P {self.v}"


@dataclass(frozen=True)
class EdgeBlowup:
    i: int
    j: int

    def __str__(self) -> str:
        return f"E {self.i} {self.j}"


Step = Union[PointBlowup, EdgeBlowup]


@dataclass(frozen=True)
class BlowupScript:
    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def then(self, step: Step) -> BlowupScript:
        return BlowupScript(self.steps + (step,))

    def to_text(self) -> str:
        return "".join(f"{s}\n" for s in self.steps)

    @classmethod
    def parse(cls, text: str) -> BlowupScript:
        steps: list[Step] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                args = [int(p) for p in parts[1:]]
            except ValueError:
                raise ScriptError(f"line {lineno}: non-integer id in {raw!r}") from None
            if parts[0] == "P" and len(args) == 1:
                steps.append(PointBlowup(*args))
            elif parts[0] == "E" and len(args) == 2:
                steps.append(EdgeBlowup(*args))
            else:
                raise ScriptError(f"line {lineno}: malformed step {raw!r}")
        return cls(tuple(steps))


def apply_step(t: CurveTree, step: Step) -> CurveTree:
    if isinstance(step, PointBlowup):
        return blowup_point(t, step.v)
    if isinstance(step, EdgeBlowup):
        return blowup_edge(t, step.i, step.j)
    raise ScriptError(f"unknown step {step!r}")


def replay(script: BlowupScript) -> CurveTree:
    t = initial_tree()
    for n, step in enumerate(script.steps):
        try:
            t = apply_step(t, step)
        except TreeError as exc:
            raise ScriptError(f"step {n} ({step}): {exc}") from None
    return t


# -- invariants -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: str
    vertices: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.detail}"


def check_invariants(t: CurveTree) -> list[Violation]:
    """Label invariants every legal tree satisfies (coprime neighbours,
    connected negative part, zero curves touching only +-1)."""
    out: list[Violation] = []
    for i, j in sorted(t.edges):
        a, b = t.kbar(i), t.kbar(j)
        if math.gcd(a, b) != 1:
            out.append(Violation("gcd", (i, j), f"gcd(kbar {i}={a}, kbar {j}={b}) = {math.gcd(a, b)}"))
    neg = [v.id for v in t.vertices if v.kbar < 0]
    if not _connected(t, neg):
        out.append(Violation("negative-connected", tuple(neg),
                             "vertices with negative kbar do not induce a connected subgraph"))
    for v in t.vertices:
        if v.kbar != 0:
            continue
        bad = tuple(u for u in t.neighbors(v.id) if t.kbar(u) not in (-1, 1))
        if bad:
            out.append(Violation("zero-adjacency", (v.id,) + bad,
                                 f"kbar-0 vertex {v.id} adjacent to {list(bad)} with kbar outside {{-1, 1}}"))
    return out


def adjunction_self_int(t: CurveTree, v: int) -> Fraction | None:
    """Recover E_v^2 from the kbar labels; ``None`` when kbar(v) = 0."""
    a = t.kbar(v)
    if a == 0:
        return None
    nbrs = t.neighbors(v)
    return Fraction(-2 + len(nbrs) - sum(t.kbar(u) for u in nbrs), a)


# -- blowing down -----------------------------------------------------------

def contraction_kind(t: CurveTree, v: int) -> str | None:
    """``"point"`` or ``"edge"`` if ``v`` can be blown down, else ``None``."""
    x = t.vertex(v)
    if x.is_origin or x.self_int != -1:
        return None
    nbrs = t.neighbors(v)
    if len(nbrs) == 1 and x.kbar == t.kbar(nbrs[0]) + 1:
        return "point"
    if len(nbrs) == 2 and x.kbar == t.kbar(nbrs[0]) + t.kbar(nbrs[1]):
        return "edge"
    return None


def contractible(t: CurveTree) -> list[int]:
    return [v.id for v in t.vertices if contraction_kind(t, v.id)]


def contract(t: CurveTree, v: int) -> CurveTree:
    kind = contraction_kind(t, v)
    if kind is None:
        raise NotContractible(f"vertex {v} is not contractible")
    nbrs = t.neighbors(v)
    verts = [replace(x, self_int=x.self_int + 1) if x.id in nbrs else x
             for x in t.vertices if x.id != v]
    edges = {e for e in t.edges if v not in e}
    if kind == "edge":
        edges.add(_edge(*nbrs))
    return t._with(verts, edges)


_REALIZABLE: dict[bytes, bool] = {}


def _is_initial(t: CurveTree) -> bool:
    if len(t) != 1:
        return False
    v = t.vertices[0]
    return v.is_origin and v.kbar == -2 and v.self_int == 1


def realizable(t: CurveTree) -> bool:
    """True iff some sequence of blow-downs reduces ``t`` to the initial tree."""
    from .canon import canonical_key

    key = canonical_key(t)
    hit = _REALIZABLE.get(key)
    if hit is not None:
        return hit
    if len(t) == 1:
        ok = _is_initial(t)
    else:
        ok = any(realizable(contract(t, v)) for v in contractible(t))
    _REALIZABLE[key] = ok
    return ok


def final_curves_oracle(t: CurveTree) -> set[int]:
    """Curves that some construction order blows up last, by brute force."""
    return {v for v in contractible(t) if realizable(contract(t, v))}


def accelerated_finals(t: CurveTree, creation_ordered: bool = False) -> tuple[set[int], set[int]]:
    """Cheap local rules deciding finality for some vertices.

    Returns ``(final, not_final)``.  A kbar >= 2 vertex that is a (weak) local
    maximum is final; a kbar-1 vertex is final exactly when its neighbours
    are {0} or {0, 1}.  With ``creation_ordered`` the ids are taken as
    creation order and a vertex newer than all its neighbours is final.
    """
    yes: set[int] = set()
    no: set[int] = set()
    for x in t.vertices:
        if x.is_origin:
            no.add(x.id)
            continue
        nbrs = t.neighbors(x.id)
        labels = sorted(t.kbar(u) for u in nbrs)
        if x.kbar >= 2 and all(x.kbar >= a for a in labels):
            yes.add(x.id)
        elif x.kbar == 1:
            (yes if labels in ([0], [0, 1]) else no).add(x.id)
        elif creation_ordered and all(u < x.id for u in nbrs):
            yes.add(x.id)
    return yes, no


def final_curves(t: CurveTree) -> set[int]:
    if not realizable(t):
        raise TreeError("final curves are only defined for realizable trees")
    yes, no = accelerated_finals(t)
    rest = {v for v in contractible(t) if v not in yes and v not in no}
    return yes | {v for v in rest if realizable(contract(t, v))}


# -- JSON -------------------------------------------------------------------

def tree_to_json(t: CurveTree) -> dict:
    return {
        "vertices": [{"id": v.id, "kbar": v.kbar, "self_int": v.self_int, "origin": v.is_origin}
                     for v in t.vertices],
        "edges": [list(e) for e in sorted(t.edges)],
    }


def tree_from_json(obj: dict) -> CurveTree:
    """Parse and structurally validate a tree; raises TreeError on bad input."""
    try:
        verts = tuple(Vertex(int(v["id"]), int(v["kbar"]), int(v["self_int"]), bool(v.get("origin", False)))
                      for v in obj["vertices"])
        edges = [(int(i), int(j)) for i, j in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeError(f"malformed tree JSON: {exc}") from None
    t = CurveTree(verts, frozenset(_edge(i, j) for i, j in edges))
    if len(set(map(frozenset, edges))) != len(edges):
        raise TreeError("duplicate edges")
    t.validate_structure()
    return t
