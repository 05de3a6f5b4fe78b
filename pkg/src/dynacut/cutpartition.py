"""Layered cut-partition data structure over an expander decomposition.

A CutPartitionDS holds the input multigraph plus a chain of layer graphs:
layer 0 is the graph restricted to expander clusters, and each deeper layer
removes a set of small-cut witness edges so that the final layer's
components form a partition whose boundary contains a minimum
terminal-separating cut-set for every small cut inside a cluster.

Two structure profiles exist: the plain profile with `c` layers, and the
pre-update profile with c^2+2c layers whose stronger parameter chain leaves
enough slack for `update_partition` to rebuild a plain structure after new
intercluster edges appear.  `build_sparsifier` contracts the final layer
into superedges and keeps intercluster edges verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .cutprimitives import components
from .dynforest import DeleteTerminal, GraphDS, InsertTerminal
from .errors import RejectedOp
from .expander import decremental_single_expander, expander_decomposition
from .multigraph import (
    DeleteEdge, DeleteVertex, EdgeKey, InsertEdge, InsertVertex, MultiGraph,
    UpdateOp, UpdateSeq, VertexId, apply_seq, edge_key, induced_subgraph,
    simple_view,
)
from .repair import initial_ia, repair_set


@dataclass(frozen=True)
class LayerParams:
    """Per-layer (t_i, q_i) chain for a strength-`c` structure.

    The plain profile has `c` layers and chain factor c+1; the strict
    profile has c^2+2c layers and chain factor ((c^2+2c)+2)^2, which is what
    update_partition consumes.
    """
    t: int
    c: int
    pairs: Tuple[Tuple[int, int], ...]
    strict: bool = False

    def __post_init__(self):
        n = self.layer_count()
        if len(self.pairs) != n:
            raise RejectedOp("layer-params",
                             f"expected {n} layers, got {len(self.pairs)}")
        if self.t < 1 or self.c < 1:
            raise RejectedOp("layer-params", "t and c must be positive")
        if self.t > self.pairs[0][0]:
            raise RejectedOp("layer-params", "need t <= t_1")
        factor = self.chain_factor()
        for i, (t_i, q_i) in enumerate(self.pairs):
            if t_i > q_i:
                raise RejectedOp("layer-params", f"need t_{i+1} <= q_{i+1}")
            if i + 1 < n and q_i * factor > self.pairs[i + 1][0]:
                raise RejectedOp(
                    "layer-params",
                    f"chain broken: q_{i+1}*{factor} > t_{i+2}")

    def layer_count(self) -> int:
        return self.c * self.c + 2 * self.c if self.strict else self.c

    def chain_factor(self) -> int:
        n = self.c * self.c + 2 * self.c
        return (n + 2) ** 2 if self.strict else self.c + 1

    def t_at(self, h: int) -> int:
        """t_h with the convention t_0 = t."""
        return self.t if h == 0 else self.pairs[h - 1][0]

    def q_at(self, h: int) -> int:
        return self.pairs[h - 1][1]


def default_params(t: int, c: int, strict: bool = False) -> LayerParams:
    """A conforming chain with q_i = 3 t_i (the slack initial_ia needs)."""
    n = c * c + 2 * c if strict else c
    factor = (n + 2) ** 2 if strict else c + 1
    pairs = []
    t_i = t
    for _ in range(n):
        q_i = 3 * t_i
        pairs.append((t_i, q_i))
        t_i = q_i * factor
    return LayerParams(t, c, tuple(pairs), strict)


@dataclass
class CutPartitionDS:
    ds: GraphDS                                   # the input graph, no terminals
    layers: List[Tuple[GraphDS, GraphDS]]         # (with terminals, without)
    params: LayerParams
    gamma: int
    phi: Fraction

    def partition(self) -> List[Set[VertexId]]:
        """The expander clusters: components of the layer-0 graph."""
        return components(self.layers[0][0].g)

    def cut_partition(self) -> List[Set[VertexId]]:
        """The refined partition: components of the final layer's graph."""
        return components(self.layers[-1][0].g)

    def clone(self) -> "CutPartitionDS":
        return CutPartitionDS(self.ds.clone(),
                              [(a.clone(), b.clone()) for a, b in self.layers],
                              self.params, self.gamma, self.phi)

    def fingerprint(self) -> Tuple:
        return (self.ds.fingerprint(),
                tuple(a.fingerprint() + b.fingerprint()
                      for a, b in self.layers))


def _remove_edges(g: MultiGraph, edges) -> MultiGraph:
    h = g.copy()
    for u, v in edges:
        if h.has_edge(u, v):
            h.remove_edge(u, v)
    return h


def _ends(edges) -> Set[VertexId]:
    return {v for e in edges for v in e}


def _layer_ia(g: MultiGraph, terms: Set[VertexId], t_i: int, q_i: int,
              depth: int) -> Set[EdgeKey]:
    """One composition step: a strength-1 witness set per cluster of g."""
    ia: Set[EdgeKey] = set()
    for comp in components(g):
        local = terms & set(comp)
        if len(local) < 2:
            continue
        sub = GraphDS(induced_subgraph(g, comp), local)
        ia |= initial_ia(sub, local, t_i, q_i, depth)
    return ia


def cut_partition_preprocess(g: MultiGraph, phi: Fraction, c: int, t: int,
                             params: Optional[LayerParams] = None,
                             gamma: Optional[int] = None,
                             backend: str = "auto") -> CutPartitionDS:
    """Build the structure from scratch: expander decomposition, then one
    witness layer per composition step."""
    if params is None:
        params = default_params(t, c)
    if params.c != c or params.t != t:
        raise RejectedOp("cut-partition", "params disagree with (t, c)")
    phi = Fraction(phi)
    deco = expander_decomposition(simple_view(g), phi, backend)
    inter = {e for e in deco.intercluster if g.has_edge(*e)}
    n = params.layer_count()
    cur = _remove_edges(g, inter)
    terms = _ends(inter)
    layers = [(GraphDS(cur.copy(), terms), GraphDS(cur.copy(), set()))]
    for i in range(1, n + 1):
        t_i, q_i = params.pairs[i - 1]
        ia = _layer_ia(cur, terms, t_i, q_i, n - i + 1)
        cur = _remove_edges(cur, ia)
        terms = terms | _ends(ia)
        layers.append((GraphDS(cur.copy(), terms),
                       GraphDS(cur.copy(), set())))
    return CutPartitionDS(GraphDS(g.copy(), set()), layers, params,
                          gamma if gamma is not None else c + 1,
                          deco.phi_certified)


def build_sparsifier(ods: CutPartitionDS, gamma: Optional[int] = None
                     ) -> MultiGraph:
    """Superedges of the final layer's terminal contraction at multiplicity
    gamma, plus every intercluster edge at its original multiplicity."""
    gamma = ods.gamma if gamma is None else gamma
    if gamma <= ods.params.c:
        raise RejectedOp("sparsifier", f"need gamma > c, got {gamma}")
    return _sparsifier_graph(ods.ds.g, ods.layers[-1][0], gamma)


def _sparsifier_graph(g: MultiGraph, ds_q: GraphDS, gamma: int) -> MultiGraph:
    out = MultiGraph()
    cg = ds_q.contracted().graph
    for v in cg.vertex_list():
        out.add_vertex(v)
    for (u, v), _ in cg.edge_items():
        out.add_edge(u, v, gamma)
    for (u, v), m in g.edge_items():
        if not ds_q.g.has_edge(u, v):
            for w in (u, v):
                if not out.has_vertex(w):
                    out.add_vertex(w)
            out.add_edge(u, v, m)
    return out


def transformed_params(params: LayerParams, t: int, c: int) -> LayerParams:
    """The plain c-layer chain a strict structure degrades to: layer i keeps
    t from layer w_{i-1}+1 and q from layer w_i, paying one chain factor."""
    n = c * c + 2 * c
    w_prev = 0
    pairs = []
    factor = n + 2
    for i in range(1, c + 1):
        w_i = w_prev + 2 * (c - i) + 3
        pairs.append((params.pairs[w_prev][0],
                      params.pairs[w_i - 1][1] * factor))
        w_prev = w_i
    return LayerParams(t, c, tuple(pairs), strict=False)


def _restricted_ds(g: MultiGraph, verts: Set[VertexId],
                   terms: Set[VertexId]) -> GraphDS:
    keep = {v for v in verts if g.has_vertex(v)}
    return GraphDS(induced_subgraph(g, keep), terms & keep)


def update_partition(ods: CutPartitionDS, r_edges, t: int, c: int,
                     gamma: int, params: Optional[LayerParams] = None
                     ) -> Tuple[CutPartitionDS, UpdateSeq]:
    """Consume a strict (c^2+2c)-layer structure and a set R of newly
    intercluster edges; emit a plain c-layer structure for the refined
    partition plus the update sequence for its sparsifier."""
    params = ods.params if params is None else params
    if not params.strict or params.c != c or params.t != t:
        raise RejectedOp("update-partition",
                         "need a strict structure of matching strength")
    if gamma <= c:
        raise RejectedOp("update-partition", f"need gamma > c, got {gamma}")
    n = params.layer_count()
    r_cur = {edge_key(u, v) for u, v in r_edges}
    g0 = ods.layers[0][0].g
    present = {e for e in r_cur if g0.has_edge(*e)}
    if present:
        rest = _remove_edges(g0, present)
        comp_of = {}
        for i, comp in enumerate(components(rest)):
            for v in comp:
                comp_of[v] = i
        for u, v in present:
            if comp_of[u] == comp_of[v]:
                raise RejectedOp("update-partition",
                                 f"edge ({u},{v}) does not refine the "
                                 f"partition")
    h = 0
    selected = [0]
    for i in range(c, 0, -1):
        ds_h, dsp_h = ods.layers[h]
        dsp_h2i = ods.layers[h + 2 * i][1]
        r_next = {e for e in r_cur if ds_h.g.has_edge(*e)}
        for e in sorted(r_next):
            ds_h.ds_update(DeleteEdge(*e))
            dsp_h.ds_update(DeleteEdge(*e))
            if dsp_h2i.g.has_edge(*e):
                dsp_h2i.ds_update(DeleteEdge(*e))
        buckets: Dict[VertexId, Set[VertexId]] = {}
        for e in r_next:
            for x in e:
                buckets.setdefault(ds_h.comp_id(x), set()).add(x)
        for cid in sorted(buckets):
            comp = dsp_h.component_vertices(cid)
            ds1 = _restricted_ds(dsp_h.g, comp, set())
            ds2 = _restricted_ds(ds_h.g, comp, ds_h.terminals)
            ds3 = _restricted_ds(dsp_h2i.g, comp, set())
            w = repair_set(ds1, ds2, ds3, buckets[cid], i,
                           params.t_at(h), params.q_at(h + 2 * i) * (c + 1))
            r_next |= w
        for e in sorted(r_cur):
            for x in e:
                if ds_h.g.has_vertex(x):
                    ds_h.ds_update(InsertTerminal(x))
        h += 2 * i + 1
        selected.append(h)
        r_cur = r_next
    ds_h, dsp_h = ods.layers[h]
    # shadow copy of the current sparsifier: the contraction diffs below are
    # merged into it so vertex ops that are absorbed by the intercluster part
    # (shared endpoints) are dropped from the emitted sequence
    shadow = _sparsifier_graph(ods.ds.g, ds_h, gamma)
    new_seq: UpdateSeq = []

    def emit(op: UpdateOp) -> None:
        if isinstance(op, InsertVertex) and shadow.has_vertex(op.v):
            return
        if isinstance(op, DeleteVertex) and (
                not shadow.has_vertex(op.v) or shadow.degree(op.v) > 0):
            return
        from .multigraph import apply_update
        apply_update(shadow, op)
        new_seq.append(op)

    r_final = []
    for e in sorted(r_cur):
        if dsp_h.g.has_edge(*e):
            dsp_h.ds_update(DeleteEdge(*e))
            seq = ds_h.ds_update(InsertTerminal(e[0]))
            seq += ds_h.ds_update(InsertTerminal(e[1]))
            seq += ds_h.ds_update(DeleteEdge(*e))
            for op in seq:
                if isinstance(op, InsertEdge):
                    emit(InsertEdge(op.u, op.v, gamma))
                else:
                    emit(op)
            r_final.append(e)
    for u, v in r_final:
        for w in (u, v):
            emit(InsertVertex(w))
        emit(InsertEdge(u, v, ods.ds.g.multiplicity(u, v)))
    new_params = transformed_params(params, t, c)
    new_layers = [ods.layers[j] for j in selected]
    return (CutPartitionDS(ods.ds, new_layers, new_params, gamma, ods.phi),
            new_seq)


def _involved(seq: UpdateSeq) -> List[VertexId]:
    out: Set[VertexId] = set()
    for op in seq:
        if isinstance(op, (InsertEdge, DeleteEdge)):
            out |= {op.u, op.v}
        else:
            out.add(op.v)
    return sorted(out)


def cut_partition_update(ods: CutPartitionDS, seq: UpdateSeq, phi: Fraction,
                         c: int, t: int, gamma: int,
                         params: Optional[LayerParams] = None
                         ) -> Tuple[CutPartitionDS, UpdateSeq]:
    """Apply a multigraph update batch: isolate every touched vertex into a
    singleton cluster via pruning + re-decomposition, rebuild the layer
    chain with update_partition, then replay the batch on the base graph."""
    params = ods.params if params is None else params
    if not params.strict:
        raise RejectedOp("cut-partition-update", "need a strict structure")
    phi = Fraction(phi)
    touched = _involved(seq)
    ds0 = ods.layers[0][0]
    r: Set[EdgeKey] = set()
    buckets: Dict[VertexId, List[VertexId]] = {}
    for x in touched:
        if ds0.g.has_vertex(x):
            buckets.setdefault(ds0.comp_id(x), []).append(x)
    for cid in sorted(buckets):
        w_id = buckets[cid]
        d_id = {edge_key(u, v) for u in w_id for v in ds0.g.neighbors(u)}
        comp = ds0.component_vertices(cid)
        sub = simple_view(induced_subgraph(ds0.g, comp))
        r_id = decremental_single_expander(GraphDS(sub, set()), phi, d_id)
        r |= r_id | d_id
    new_ods, new_seq = update_partition(ods, r, t, c, gamma, params)
    base = new_ods.ds.g
    for x in touched:
        if base.has_vertex(x) and base.is_isolated(x):
            new_seq.append(InsertVertex(x))
            for ds_i, _ in new_ods.layers:
                ds_i.ds_update(InsertTerminal(x))
    new_seq = new_seq + list(seq)
    for op in seq:
        new_ods.ds.ds_update(op)
    for x in touched:
        if new_ods.ds.g.has_vertex(x) and new_ods.ds.g.is_isolated(x):
            new_seq.append(DeleteVertex(x))
            for ds_i, _ in new_ods.layers:
                ds_i.ds_update(DeleteTerminal(x))
    return new_ods, new_seq
