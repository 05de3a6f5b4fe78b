"""Interception-anchor (IA) edge sets and their decremental maintenance.

An IA set for (T, t, q, d, c) is the intercluster edge set of a
connected-cluster vertex partition such that every small terminal-separating
cut has a q-side replacement whose cut-set is spread c-deep across clusters.
When vertices are removed from the ambient graph, a small "repair set" of
extra edges restores IA validity for the surviving terminals; the repair set
is assembled from three sub-sets, one per class of terminal bipartition,
via an elimination procedure over realizable pairs.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .cutprimitives import (
    RealizablePair,
    atomic_cut_verify,
    boundary,
    components,
    cut_size,
    enumerate_cuts,
    enumerate_anchored_cuts,
    enumerate_simple_cuts,
    induced_cut_side,
    induces_atomic_cut,
)
from .dynforest import GraphDS
from .errors import RejectedOp
from .multigraph import DeleteEdge, EdgeKey, MultiGraph, VertexId, edge_key

EdgeSet = FrozenSet[EdgeKey]

# (|S|, |W|, c) per repair_set call; consumers may clear it between runs.
REPAIR_LOG: List[Tuple[int, int, int]] = []


@dataclass(frozen=True)
class IAParams:
    t: int
    q: int
    d: int
    c: int

    def __post_init__(self):
        if not (self.q >= self.t >= 1 and self.d >= self.c >= 1):
            raise RejectedOp("ia-params", f"invalid parameters {self}")


@dataclass
class IASet:
    edges: Set[EdgeKey]
    params: IAParams
    # layer derivation: list of (edge set, t_i, q_i) in composition order
    derivation: List[Tuple[FrozenSet[EdgeKey], int, int]] = field(
        default_factory=list)


@dataclass
class BipartitionSystem:
    pairs: List[RealizablePair]
    s_partitions: List[FrozenSet[VertexId]]


def _edge_subsets(edges: Iterable[EdgeKey]) -> List[EdgeSet]:
    """Nonempty subsets, deterministic order."""
    es = sorted(edges)
    out = []
    for r in range(1, len(es) + 1):
        for combo in itertools.combinations(es, r):
            out.append(frozenset(combo))
    return out


def _ends(edges: Iterable[EdgeKey]) -> Set[VertexId]:
    return {v for e in edges for v in e}


def _canon(pair: RealizablePair):
    return (tuple(sorted(pair.side)), tuple(sorted(pair.edges)))


def _separates(g: MultiGraph, e0: EdgeSet, side: Iterable[VertexId],
               x: VertexId) -> bool:
    """The atomic cut induced by e0 puts x opposite `side`."""
    return x not in induced_cut_side(g, e0, side)


# -- elimination procedure -------------------------------------------------

def elimination(ds_t: GraphDS, ds_s: GraphDS, gamma, c: int, t: int
                ) -> Set[EdgeKey]:
    """Boundary edges of a maximal chain of pairs from `gamma`; the output
    intercepts a small terminal-separating cut for every pair."""
    pool = [p if isinstance(p, RealizablePair) else RealizablePair.of(*p)
            for p in gamma]
    remaining = sorted({_canon(p): p for p in pool}.values(), key=_canon)
    if not remaining:
        return set()
    g = ds_t.g
    terms = frozenset(ds_t.terminals) | frozenset(ds_s.terminals)
    w: Set[EdgeKey] = set()
    # witness cuts per pair: boundary endpoint sets in the original graph
    witness: Dict[RealizablePair, List[Tuple[VertexId, ...]]] = {}
    for pair in remaining:
        b = boundary(g, pair.side)
        h = enumerate_cuts(ds_t, ds_s, pair.side & terms,
                           sum(g.multiplicity(u, v) for u, v in b),
                           len(pair.side))
        witness[pair] = [tuple(sorted(_ends(boundary(g, v)))) for v in
                         sorted(h, key=lambda s: tuple(sorted(s)))]
    mark = ds_t.mark()
    try:
        while remaining:
            chosen = None
            for cand in remaining:
                if not any(_ends(other.edges) <= cand.side
                           for other in remaining if other is not cand):
                    chosen = cand
                    break
            if chosen is None:
                chosen = remaining[0]
            w |= set(boundary(g, chosen.side))
            for u, v in sorted(chosen.edges):
                if ds_t.g.has_edge(u, v):
                    ds_t.ds_update(DeleteEdge(u, v))
            remaining.remove(chosen)
            kept = []
            for pair in remaining:
                split = any(len({ds_t.comp_id(x) for x in ends}) > 1
                            for ends in witness[pair])
                if not split:
                    kept.append(pair)
            remaining = kept
    finally:
        ds_t.rollback_to(mark)
    return w


# -- bipartition system ----------------------------------------------------

def bipartition_system(ds: GraphDS, c: int, t: int) -> BipartitionSystem:
    """A maximal pairwise-laminar family of realizable pairs splitting the
    terminal set S nontrivially; at most 2(|S|-1) pairs."""
    g = ds.g
    s = frozenset(ds.terminals)
    u: List[Tuple[RealizablePair, EdgeSet]] = []
    seen = set()
    for _, side in enumerate_anchored_cuts(ds, s, c, t):
        b = boundary(g, side)
        for e_sub in _edge_subsets(b):
            if not induces_atomic_cut(g, e_sub):
                continue
            l_side = frozenset(induced_cut_side(g, e_sub, side))
            trace = l_side & s
            if not trace or trace == s:
                continue
            pair = RealizablePair(e_sub, frozenset(side))
            key = _canon(pair)
            if key not in seen:
                seen.add(key)
                u.append((pair, trace))
    u.sort(key=lambda item: _canon(item[0]))
    equivalent: Dict[int, List[int]] = defaultdict(list)
    for i, (p1, tr1) in enumerate(u):
        for j, (p2, tr2) in enumerate(u):
            if i != j and (p1.side & p2.side) and tr1 == tr2:
                equivalent[i].append(j)
    alive = [True] * len(u)
    pairs: List[RealizablePair] = []
    traces: List[FrozenSet[VertexId]] = []
    mark = ds.mark()
    try:
        for i, (pair, trace) in enumerate(u):
            if not alive[i]:
                continue
            ends = _ends(boundary(g, pair.side))
            if len({ds.comp_id(x) for x in ends}) > 1:
                alive[i] = False
                continue
            if any(tr == trace or tr == s - trace for tr in traces):
                # laminarity rule: distinct S-partitions only
                alive[i] = False
                continue
            pairs.append(pair)
            traces.append(trace)
            for x, y in sorted(boundary(g, pair.side)):
                if ds.g.has_edge(x, y):
                    ds.ds_update(DeleteEdge(x, y))
            for j in equivalent[i]:
                alive[j] = False
            alive[i] = False
    finally:
        ds.rollback_to(mark)
    return BipartitionSystem(pairs, traces)


# -- type 1 / 2 / 3 repair sets -------------------------------------------

def _same_comp_with_terminal(ds3: GraphDS, ends: Set[VertexId]) -> bool:
    ids = {ds3.comp_id(x) for x in ends}
    if len(ids) != 1:
        return False
    return ds3.terminal_number(next(iter(ends))) > 0


def type_one_repair_set(ds1: GraphDS, ds2: GraphDS, ds3: GraphDS,
                        c: int, t: int) -> Set[EdgeKey]:
    """Repair edges for terminal bipartitions that split S nontrivially."""
    g = ds1.g
    s = frozenset(ds1.terminals)
    if not s:
        return set()
    system = bipartition_system(ds1, c, t)
    w1: Set[EdgeKey] = set()
    for pair, trace in zip(system.pairs, system.s_partitions):
        buckets: Dict[VertexId, List[RealizablePair]] = defaultdict(list)
        seen = set()
        for _, side in enumerate_anchored_cuts(ds1, pair.side, c, t):
            if not (side & s):
                continue
            b = boundary(g, side)
            if not _same_comp_with_terminal(ds3, _ends(b)):
                continue
            for e_sub in _edge_subsets(b):
                if not induces_atomic_cut(g, e_sub):
                    continue
                l_side = frozenset(induced_cut_side(g, e_sub, side))
                if (l_side & s) != trace:
                    continue
                cand = RealizablePair(e_sub, frozenset(side))
                key = _canon(cand)
                if key in seen:
                    continue
                seen.add(key)
                cid = ds3.comp_id(next(iter(_ends(e_sub))))
                buckets[cid].append(cand)
        w1 |= set(boundary(g, pair.side))
        for cid in sorted(buckets):
            w1 |= elimination(ds2, ds1, buckets[cid], c, t)
    return w1


def type_two_repair_set(ds1: GraphDS, ds2: GraphDS, ds3: GraphDS,
                        c: int, t: int, q: int) -> Set[EdgeKey]:
    """Repair edges for terminal bipartitions avoiding S entirely."""
    g = ds1.g
    s = frozenset(ds1.terminals)
    t_set = frozenset(ds2.terminals)
    w2: Set[EdgeKey] = set()
    for s_v in sorted(s):
        reach: Set[VertexId] = set()
        for side in enumerate_simple_cuts(ds1, s_v, c, q):
            reach |= (side & t_set)
        gamma: List[RealizablePair] = []
        seen = set()
        for _, side in enumerate_anchored_cuts(ds1, reach, c, t):
            if side & s:
                continue
            b = boundary(g, side)
            ends = _ends(b)
            ids = {ds3.comp_id(y) for y in ends}
            if len(ids) != 1 or next(iter(ids)) != ds3.comp_id(s_v):
                continue
            ok = True
            for alt in enumerate_cuts(ds1, ds2, side & t_set,
                                      sum(g.multiplicity(u, v)
                                          for u, v in b), q):
                alt_ends = _ends(boundary(g, alt))
                if len({ds3.comp_id(y) for y in alt_ends}) > 1:
                    ok = False
                    break
            if not ok:
                continue
            for e_sub in _edge_subsets(b):
                if (induces_atomic_cut(g, e_sub)
                        and _separates(g, e_sub, side, s_v)):
                    cand = RealizablePair(e_sub, frozenset(side))
                    key = _canon(cand)
                    if key not in seen:
                        seen.add(key)
                        gamma.append(cand)
        w2 |= elimination(ds2, ds1, gamma, c, t)
    return w2


def type_three_repair_set(ds1: GraphDS, ds2: GraphDS, ds3: GraphDS,
                          c: int, t: int) -> Set[EdgeKey]:
    """Repair edges for terminal bipartitions containing all of S."""
    g = ds1.g
    s = frozenset(ds1.terminals)
    t_set = frozenset(ds2.terminals)
    w3: Set[EdgeKey] = set()
    if 0 < len(s | t_set) <= t:
        h = enumerate_cuts(ds1, ds2, s | t_set, c, t)
        if h:
            best = min(h, key=lambda v: (cut_size(g, v), tuple(sorted(v))))
            w3 |= set(boundary(g, best))
    if not s:
        return w3
    cc = {ds3.comp_id(x) for x in s}
    buckets: Dict[VertexId, List[FrozenSet[VertexId]]] = defaultdict(list)
    s0 = min(s)
    for side in sorted(enumerate_simple_cuts(ds1, s0, c, t),
                       key=lambda v: tuple(sorted(v))):
        if (side & s) != s or (side & t_set) == t_set:
            continue
        ends = _ends(boundary(g, side))
        ids = {ds3.comp_id(y) for y in ends}
        if len(ids) == 1 and next(iter(ids)) in cc:
            buckets[next(iter(ids))].append(frozenset(side))
    for cid in sorted(buckets):
        best_e: EdgeSet = frozenset()
        best_size = None
        root: Optional[VertexId] = None
        for side in buckets[cid]:
            b = boundary(g, side)
            for e_sub in _edge_subsets(b):
                if not atomic_cut_verify(ds1, e_sub):
                    continue
                outside = sorted(_ends(e_sub) - side)
                if not outside:
                    continue
                x = outside[0]
                mark = ds2.mark()
                try:
                    for u, v in sorted(e_sub):
                        if ds2.g.has_edge(u, v):
                            ds2.ds_update(DeleteEdge(u, v))
                    if ds2.terminal_number(x) > 0:
                        vn = ds2.vertex_number(x)
                        if t < vn and (best_size is None or vn < best_size):
                            best_size = vn
                            best_e = e_sub
                            root = ds2.one_terminal(x)
                finally:
                    ds2.rollback_to(mark)
        gamma: List[RealizablePair] = []
        if root is not None:
            seen = set()
            for side in buckets[cid]:
                if root in side:
                    continue
                for e_sub in _edge_subsets(boundary(g, side)):
                    if (induces_atomic_cut(g, e_sub)
                            and _separates(g, e_sub, side, root)):
                        cand = RealizablePair(e_sub, frozenset(side))
                        key = _canon(cand)
                        if key not in seen:
                            seen.add(key)
                            gamma.append(cand)
        w3 |= set(best_e)
        w3 |= elimination(ds2, ds1, gamma, c, t)
    return w3


# -- full repair set and initial construction ------------------------------

def repair_set(ds1: GraphDS, ds2: GraphDS, ds3: GraphDS,
               s: Iterable[VertexId], c: int, t: int, q: int
               ) -> Set[EdgeKey]:
    """Union of the three typed repair sets; terminal mutations on the three
    data structures are rolled back before returning."""
    from .dynforest import DeleteTerminal, InsertTerminal
    s_set = sorted(set(s))
    marks = (ds1.mark(), ds2.mark(), ds3.mark())
    try:
        for x in s_set:
            ds1.ds_update(InsertTerminal(x))
            ds3.ds_update(InsertTerminal(x))
            ds2.ds_update(DeleteTerminal(x))
        w = type_one_repair_set(ds1, ds2, ds3, c, t)
        w |= type_two_repair_set(ds1, ds2, ds3, c, t, q)
        w |= type_three_repair_set(ds1, ds2, ds3, c, t)
    finally:
        ds1.rollback_to(marks[0])
        ds2.rollback_to(marks[1])
        ds3.rollback_to(marks[2])
    REPAIR_LOG.append((len(s_set), len(w), c))
    return w


def initial_ia(ds: GraphDS, t_verts: Iterable[VertexId], t: int, q: int,
               d: int) -> Set[EdgeKey]:
    """An IA(T, t, q, d, 1) set built as a repair set against an empty prior
    IA set (all of T treated as boundary terminals)."""
    t_verts = sorted(set(t_verts))
    if len(t_verts) <= 1:
        return set()
    if q < 3 * t:
        raise RejectedOp("initial-ia", f"need q >= 3t, got q={q} t={t}")
    g = ds.g
    ds2 = GraphDS(g.copy(), set(t_verts))
    ds3 = GraphDS(g.copy(), set())
    return repair_set(ds, ds2, ds3, t_verts, d, t, q - t)


def layered_ia(g: MultiGraph, t_verts: Iterable[VertexId],
               layers: List[Tuple[int, int]], d: int) -> IASet:
    """Compose per-layer IA sets: layer i is built on the graph minus all
    earlier layers, with the earlier boundary endpoints added as terminals.
    `layers` lists (t_i, q_i); the union is an IA set of strength k at depth
    budget d (composition requires q_i * (d+1) <= t_{i+1})."""
    for (t_i, q_i), (t_n, _) in zip(layers, layers[1:]):
        if q_i * (d + 1) > t_n:
            raise RejectedOp("layered-ia",
                             f"composition needs q_i(d+1) <= t_next: "
                             f"{q_i}*{d + 1} > {t_n}")
    edges: Set[EdgeKey] = set()
    terms = set(t_verts)
    derivation = []
    h = g.copy()
    for i, (t_i, q_i) in enumerate(layers):
        ds = GraphDS(h.copy(), set())
        layer = initial_ia(ds, terms, t_i, q_i, max(d - i, 1))
        derivation.append((frozenset(layer), t_i, q_i))
        edges |= layer
        terms |= _ends(layer)
        for u, v in layer:
            h.remove_edge(u, v)
    k = len(layers)
    params = IAParams(layers[0][0], layers[-1][1] * (d + 1), d, min(k, d))
    return IASet(edges, params, derivation)


# -- brute-force IA validity checker ---------------------------------------

def verify_ia(g: MultiGraph, t_verts: Iterable[VertexId],
              edges: Iterable[EdgeKey], params: IAParams) -> bool:
    """Exhaustive check of both IA conditions; components must be small."""
    edges = {edge_key(u, v) for u, v in edges}
    t_all = set(t_verts)
    for e in edges:
        if not g.has_edge(*e):
            return False
    clusters = components(g, banned_edges=edges)
    cluster_of = {}
    for i, comp in enumerate(clusters):
        for v in comp:
            cluster_of[v] = i
    crossing = {e for e in g.edge_keys() if cluster_of[e[0]] != cluster_of[e[1]]}
    if crossing != edges:
        return False
    for comp in components(g):
        if len(comp) > 16:
            raise RejectedOp("verify-ia", f"component too large ({len(comp)})")
        if not _verify_ia_component(g, comp, t_all & comp, edges, params):
            return False
    return True


def _verify_ia_component(g, comp, t_comp, edges, params):
    if len(t_comp) < 2:
        return True
    verts = sorted(comp)
    by_trace = defaultdict(list)
    for r in range(1, len(verts)):
        for sub in itertools.combinations(verts, r):
            side = frozenset(sub)
            cs = boundary(g, side)
            size = sum(g.multiplicity(u, v) for u, v in cs)
            by_trace[side & frozenset(t_comp)].append((size, len(side), cs))
    cluster_of = {}
    for i, cl in enumerate(components(g, banned_edges=edges)):
        for v in cl:
            cluster_of[v] = i
    slack = params.d - params.c
    for r in range(1, len(t_comp)):
        for t_sub in itertools.combinations(sorted(t_comp), r):
            trace = frozenset(t_sub)
            entries = by_trace.get(trace, [])
            small = [sz for sz, nv, _ in entries
                     if nv <= params.t and sz <= params.d]
            if not small:
                continue
            alpha = min(small)
            found = False
            for sz, nv, cs in entries:
                if nv > params.q or sz > alpha:
                    continue
                per_cluster = defaultdict(int)
                for u, v in cs:
                    if cluster_of[u] == cluster_of[v]:
                        per_cluster[cluster_of[u]] += 1
                if all(k <= max(alpha - params.c, 0)
                       for k in per_cluster.values()):
                    found = True
                    break
            if not found:
                return False
    return True
