"""Cut objects and primitives: interception tests, atomic-cut verification,
bounded simple/non-simple cut enumeration, and S-equivalence of realizable
pairs.

Conventions: a cut is named by one vertex side V'.  The cut-set is the set of
distinct boundary edges; the cut *size* counts multiplicities.  A cut is
"simple" when its named side induces a connected subgraph, "atomic" when both
sides do.  A (t, c)-cut has size <= c and named side of <= t vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .dynforest import GraphDS
from .errors import RejectedOp
from .multigraph import EdgeKey, MultiGraph, VertexId, edge_key

VertexSet = FrozenSet[VertexId]
EdgeSet = FrozenSet[EdgeKey]


def boundary(g: MultiGraph, side: Iterable[VertexId]) -> EdgeSet:
    """Distinct edges with exactly one endpoint in `side`."""
    s = set(side)
    out = set()
    for v in s:
        if not g.has_vertex(v):
            raise RejectedOp("boundary", f"vertex {v} absent")
        for w in g.neighbors(v):
            if w not in s:
                out.add(edge_key(v, w))
    return frozenset(out)


def cut_size(g: MultiGraph, side: Iterable[VertexId]) -> int:
    """Multiplicity-weighted size of the cut named by `side`."""
    return sum(g.multiplicity(u, v) for u, v in boundary(g, side))


def _reachable(g: MultiGraph, start: VertexId, banned_edges: Set[EdgeKey],
               within: Optional[Set[VertexId]] = None,
               limit: Optional[int] = None) -> Set[VertexId]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v in seen:
                continue
            if within is not None and v not in within:
                continue
            if edge_key(u, v) in banned_edges:
                continue
            seen.add(v)
            queue.append(v)
            if limit is not None and len(seen) > limit:
                return seen
    return seen


def is_connected_subset(g: MultiGraph, side: Iterable[VertexId]) -> bool:
    s = set(side)
    if not s:
        return False
    start = min(s)
    return _reachable(g, start, set(), within=s) == s


def is_simple_cut(g: MultiGraph, side: Iterable[VertexId]) -> bool:
    return is_connected_subset(g, side)


def is_atomic_cut(g: MultiGraph, side: Iterable[VertexId],
                  universe: Optional[Set[VertexId]] = None) -> bool:
    """Both sides connected; the complement is taken within `universe`
    (default: the connected component containing the side)."""
    s = set(side)
    if universe is None:
        universe = component_of(g, min(s))
    other = universe - s
    if not s or not other:
        return False
    return is_connected_subset(g, s) and is_connected_subset(g, other)


def component_of(g: MultiGraph, x: VertexId) -> Set[VertexId]:
    return _reachable(g, x, set())


def components(g: MultiGraph, banned_edges: Set[EdgeKey] = frozenset()
               ) -> List[Set[VertexId]]:
    seen: Set[VertexId] = set()
    out = []
    for v in g.vertex_list():
        if v in seen:
            continue
        comp = _reachable(g, v, banned_edges)
        seen |= comp
        out.append(comp)
    return out


@dataclass(frozen=True)
class Cut:
    """A cut named by one side, with cached cut-set and size."""
    side: VertexSet
    cutset: EdgeSet
    size: int

    @classmethod
    def of(cls, g: MultiGraph, side: Iterable[VertexId]) -> "Cut":
        s = frozenset(side)
        b = boundary(g, s)
        return cls(s, b, sum(g.multiplicity(u, v) for u, v in b))


# -- interception ----------------------------------------------------------

def intercepts(g: MultiGraph, f: Iterable[EdgeKey],
               cut) -> bool:
    """True iff no connected component of g minus f contains every edge of
    the cut's cut-set (an edge is contained when both its endpoints are).
    `cut` may be a Cut or a bare iterable of edges."""
    cutset = cut.cutset if isinstance(cut, Cut) else cut
    cut_edges = [edge_key(u, v) for u, v in cutset]
    if not cut_edges:
        return False
    banned = {edge_key(u, v) for u, v in f}
    first = cut_edges[0]
    comp = _reachable(g, first[0], banned)
    for u, v in cut_edges:
        if u not in comp or v not in comp:
            return True
    return False


# -- atomic cut verification ----------------------------------------------

def atomic_cut_verify(ds: GraphDS, e0: Iterable[EdgeKey]) -> bool:
    """True iff e0 is the cut-set of an atomic cut of some connected
    component; the DS is restored before returning."""
    edges = sorted({edge_key(u, v) for u, v in e0})
    if not edges:
        raise RejectedOp("atomic-cut-verify", "empty edge set")
    for u, v in edges:
        if not ds.g.has_edge(u, v):
            raise RejectedOp("atomic-cut-verify", f"edge ({u},{v}) absent")
    comps = {ds.comp_id(u) for u, v in edges} | {ds.comp_id(v) for u, v in edges}
    if len(comps) > 1:
        return False
    from .multigraph import DeleteEdge
    mark = ds.mark()
    try:
        for u, v in edges:
            ds.ds_update(DeleteEdge(u, v))
        sides = set()
        for u, v in edges:
            iu, iv = ds.comp_id(u), ds.comp_id(v)
            if iu == iv:
                return False
            sides.add(iu)
            sides.add(iv)
        return len(sides) == 2
    finally:
        ds.rollback_to(mark)


def induces_atomic_cut(g: MultiGraph, e0: Iterable[EdgeKey]) -> bool:
    """Standalone version of atomic_cut_verify over a plain multigraph."""
    edges = {edge_key(u, v) for u, v in e0}
    if not edges:
        return False
    anchor = next(iter(edges))[0]
    comp = component_of(g, anchor)
    for u, v in edges:
        if u not in comp or v not in comp:
            return False
    sides = set()
    for u, v in edges:
        cu = frozenset(_reachable(g, u, edges, within=comp))
        cv = frozenset(_reachable(g, v, edges, within=comp))
        if cu == cv:
            return False
        sides.add(cu)
        sides.add(cv)
    return len(sides) == 2


def induced_cut_side(g: MultiGraph, e0: Iterable[EdgeKey],
                     inner: Iterable[VertexId]) -> Set[VertexId]:
    """The side L of the cut induced by e0 that contains `inner`, within the
    connected component of `inner`."""
    edges = {edge_key(u, v) for u, v in e0}
    vs = set(inner)
    z = min(vs)
    comp = component_of(g, z)
    banned_comp = _reachable(g, z, edges, within=comp)
    # L = union of components of (comp minus e0) on the inner side: grow by
    # adding components reachable without crossing e0 from any inner vertex
    side = set()
    for v in vs:
        if v not in side:
            side |= _reachable(g, v, edges, within=comp)
    return side


# -- bounded cut enumeration ----------------------------------------------

def enumerate_simple_cuts(ds_or_g, x: VertexId, c: int, t: int,
                          excluded: Iterable[VertexId] = ()
                          ) -> Set[VertexSet]:
    """All V' with x in V', |V'| <= t, G[V'] connected, cut size <= c,
    and V' disjoint from `excluded`.

    Include/exclude branching on the next undecided neighbor of the grown
    side, with the remaining multiplicity budget tracked incrementally:
    every valid side is one leaf, and any branch whose committed boundary
    already exceeds c dies immediately.
    """
    g: MultiGraph = ds_or_g.g if isinstance(ds_or_g, GraphDS) else ds_or_g
    if not g.has_vertex(x):
        raise RejectedOp("enumerate-simple-cuts", f"vertex {x} absent")
    out: Set[VertexSet] = set()
    side: Set[VertexId] = {x}
    shut: Set[VertexId] = set(excluded) - {x}
    adj: Dict[VertexId, List[Tuple[VertexId, int]]] = {}

    def nbrs(v: VertexId) -> List[Tuple[VertexId, int]]:
        if v not in adj:
            adj[v] = sorted((w, g.multiplicity(v, w))
                            for w in g.neighbors(v))
        return adj[v]

    queue: List[VertexId] = [w for w, _ in nbrs(x)]

    def rec(budget: int, i: int) -> None:
        while i < len(queue) and (queue[i] in side or queue[i] in shut):
            i += 1
        if i == len(queue):
            out.add(frozenset(side))
            return
        v = queue[i]
        cost_in = sum(m for w, m in nbrs(v) if w in shut)
        if len(side) < t and budget >= cost_in:
            side.add(v)
            mark = len(queue)
            queue.extend(w for w, _ in nbrs(v)
                         if w not in side and w not in shut)
            rec(budget - cost_in, i + 1)
            del queue[mark:]
            side.remove(v)
        cost_out = sum(m for w, m in nbrs(v) if w in side)
        if budget >= cost_out:
            shut.add(v)
            rec(budget - cost_out, i + 1)
            shut.remove(v)

    start = c - sum(g.multiplicity(x, w) for w in g.neighbors(x)
                    if w in shut)
    if start >= 0:
        rec(start, 0)
    return out


def enumerate_anchored_cuts(ds_or_g, anchors: Iterable[VertexId], c: int,
                            t: int) -> List[Tuple[VertexId, VertexSet]]:
    """Every side meeting `anchors` exactly once, tagged with the smallest
    anchor it contains and ordered by (anchor, side).  Matches the union of
    per-anchor enumerations processed with first-hit deduplication."""
    out: List[Tuple[VertexId, VertexSet]] = []
    done: List[VertexId] = []
    for x in sorted(set(anchors)):
        sides = enumerate_simple_cuts(ds_or_g, x, c, t, excluded=done)
        out.extend((x, side) for side in
                   sorted(sides, key=lambda v: tuple(sorted(v))))
        done.append(x)
    return out


def _bfs_tree(g: MultiGraph, x: VertexId, banned: EdgeSet, cap: int
              ) -> Tuple[Set[VertexId], List[EdgeKey]]:
    """BFS from x avoiding banned edges, stopping once `cap` vertices are
    reached; returns (visited set, tree edges in discovery order)."""
    seen = {x}
    tree: List[EdgeKey] = []
    queue = deque([x])
    while queue and len(seen) < cap:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v in seen or edge_key(u, v) in banned:
                continue
            seen.add(v)
            tree.append(edge_key(u, v))
            queue.append(v)
            if len(seen) >= cap:
                break
    return seen, tree


def enumerate_cuts(ds1: GraphDS, ds2: GraphDS, t_prime: Iterable[VertexId],
                   c: int, t: int) -> Set[VertexSet]:
    """All (T', (T1 u T2) \\ T', t, c)-cut sides V' such that every connected
    component of G[V'] contains a vertex of T'.  Empty if |T'| > t."""
    tp = frozenset(t_prime)
    if len(tp) > t:
        return set()
    g = ds1.g
    terms = frozenset(ds1.terminals) | frozenset(ds2.terminals)
    if not tp <= terms:
        raise RejectedOp("enumerate-cuts", "T' not within the terminal sets")
    universe: Set[VertexSet] = \
        {side for _, side in enumerate_anchored_cuts(ds1, tp, c, t)}
    # keep only pieces whose terminal trace stays within T'
    pieces = sorted((v for v in universe if (v & terms) <= tp),
                    key=lambda s: tuple(sorted(s)))
    out: Set[VertexSet] = set()

    def extend(start: int, union: Set[VertexId], depth: int) -> None:
        if union and (frozenset(union) & terms) == tp:
            b = boundary(g, union)
            if sum(g.multiplicity(u, v) for u, v in b) <= c:
                out.add(frozenset(union))
        if depth == c:
            return
        for idx in range(start, len(pieces)):
            piece = pieces[idx]
            if union & piece:
                continue
            if len(union) + len(piece) > t:
                continue
            extend(idx + 1, union | piece, depth + 1)

    extend(0, set(), 0)
    return out


# -- realizable pairs and S-equivalence -----------------------------------

@dataclass(frozen=True)
class RealizablePair:
    """(E', V'): V' names a simple (t, c)-cut and E' is a subset of its
    boundary inducing an atomic cut."""
    edges: EdgeSet
    side: VertexSet

    @classmethod
    def of(cls, edges: Iterable[EdgeKey], side: Iterable[VertexId]
           ) -> "RealizablePair":
        return cls(frozenset(edge_key(u, v) for u, v in edges),
                   frozenset(side))


def check_realizable_pair(g: MultiGraph, pair: RealizablePair,
                          c: Optional[int] = None, t: Optional[int] = None
                          ) -> bool:
    if not pair.side:
        return False
    if t is not None and len(pair.side) > t:
        return False
    if not is_simple_cut(g, pair.side):
        return False
    b = boundary(g, pair.side)
    if c is not None and sum(g.multiplicity(u, v) for u, v in b) > c:
        return False
    if not pair.edges <= b:
        return False
    return induces_atomic_cut(g, pair.edges)


def s_equivalent(ds: GraphDS, p1: RealizablePair, p2: RealizablePair,
                 c: Optional[int] = None, t: Optional[int] = None,
                 validate: bool = True) -> bool:
    """True iff the atomic cuts induced by the two pairs agree on the
    terminal set S of `ds` (L1 n S = L2 n S); the DS is restored."""
    g = ds.g
    if validate:
        for p in (p1, p2):
            if not check_realizable_pair(g, p, c, t):
                raise RejectedOp("s-equivalent", f"invalid realizable pair {p}")
    s = ds.terminals
    l1 = induced_cut_side(g, p1.edges, p1.side)
    l2 = induced_cut_side(g, p2.edges, p2.side)
    return (l1 & s) == (l2 & s)
