"""Dynamic spanning forest, superedge contraction, and the queryable graph
data structure GraphDS.

GraphDS wraps a multigraph plus a terminal set, maintains a spanning forest of
the simple view, and keeps the terminal contraction of the forest: connecting
paths between terminals are compressed into superedges whose endpoints are
terminals or branch vertices (forest degree >= 3 within the pruned Steiner
forest).  Every update returns the exact update sequence that transforms the
previous contracted graph into the new one.

All mutations are journaled; rollback_to() restores graph, terminals, and
forest bit-exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .errors import RejectedOp
from .multigraph import (
    DeleteEdge, DeleteVertex, EdgeKey, InsertEdge, InsertVertex, MultiGraph,
    UpdateOp, UpdateSeq, VertexId, edge_key, induced_subgraph,
)


def contract_partition(g: MultiGraph, partition, gamma: int = 1) -> MultiGraph:
    """Contraction of g over a vertex partition: intercluster edges at their
    original multiplicity plus per-cluster superedges (w.r.t. terminals =
    endpoints of intercluster edges) at multiplicity gamma.

    Preserves connectivity among its vertices and has vertex+edge count at
    most 3x the number of distinct intercluster edges.
    """
    comp_of: Dict[VertexId, int] = {}
    for i, part in enumerate(partition):
        for v in part:
            if v in comp_of:
                raise RejectedOp("contract-partition", f"vertex {v} repeated")
            comp_of[v] = i
    boundary = [((u, v), m) for (u, v), m in g.edge_items()
                if comp_of[u] != comp_of[v]]
    terminals_per: Dict[int, Set[VertexId]] = {}
    for (u, v), _ in boundary:
        terminals_per.setdefault(comp_of[u], set()).add(u)
        terminals_per.setdefault(comp_of[v], set()).add(v)
    out = MultiGraph()
    for (u, v), _ in boundary:
        for w in (u, v):
            if not out.has_vertex(w):
                out.add_vertex(w)
    for i, part in enumerate(partition):
        terms = terminals_per.get(i)
        if not terms:
            continue
        ds = GraphDS(induced_subgraph(g, part), terms)
        cg = ds.contracted().graph
        for v in cg.vertex_list():
            if not out.has_vertex(v):
                out.add_vertex(v)
        for (a, b), _ in cg.edge_items():
            out.add_edge(a, b, gamma)
    for (u, v), m in boundary:
        out.add_edge(u, v, m)
    return out


@dataclass(frozen=True)
class InsertTerminal:
    v: VertexId


@dataclass(frozen=True)
class DeleteTerminal:
    v: VertexId


DsOp = object  # UpdateOp | InsertTerminal | DeleteTerminal


class ContractedGraph:
    """Simple graph of superedges plus the forest-edge -> superedge cover map."""

    def __init__(self, graph: MultiGraph, cover: Dict[EdgeKey, EdgeKey]):
        self.graph = graph
        self.cover = cover


def contracted_diff(old: MultiGraph, new: MultiGraph) -> UpdateSeq:
    """Ops (delete edges, delete vertices, insert vertices, insert edges)
    turning `old` into `new`; replayable as a valid sequence."""
    seq: UpdateSeq = []
    for u, v in old.edge_keys():
        if not new.has_edge(u, v):
            seq.append(DeleteEdge(u, v))
    for v in old.vertex_list():
        if not new.has_vertex(v):
            seq.append(DeleteVertex(v))
    for v in new.vertex_list():
        if not old.has_vertex(v):
            seq.append(InsertVertex(v))
    for u, v in new.edge_keys():
        if not old.has_edge(u, v):
            seq.append(InsertEdge(u, v, 1))
    return seq


@dataclass
class _UndoRecord:
    graph_undo: Optional[UpdateOp]
    terminal_add: Optional[VertexId]      # re-add this terminal on rollback
    terminal_remove: Optional[VertexId]   # remove this terminal on rollback
    forest_added: Set[EdgeKey] = field(default_factory=set)
    forest_removed: Set[EdgeKey] = field(default_factory=set)


class GraphDS:
    """Queryable dynamic graph with terminals, spanning forest, contraction."""

    def __init__(self, graph: MultiGraph, terminals=()):
        self.g = graph
        self.terminals: Set[VertexId] = set(terminals)
        for t in self.terminals:
            if not graph.has_vertex(t):
                raise RejectedOp("graphds-init", f"terminal {t} absent")
        self.forest: Set[EdgeKey] = set()
        self._build_forest()
        self._journal: List[_UndoRecord] = []
        self._dirty = True
        self._comp: Dict[VertexId, VertexId] = {}
        self._comp_stats: Dict[VertexId, Tuple[int, int, int, Optional[VertexId]]] = {}
        self._contracted: Optional[ContractedGraph] = None

    # -- forest -----------------------------------------------------------
    def _build_forest(self) -> None:
        seen: Set[VertexId] = set()
        for root in self.g.vertex_list():
            if root in seen:
                continue
            seen.add(root)
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v in self.g.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        self.forest.add(edge_key(u, v))
                        queue.append(v)

    def _forest_adj(self) -> Dict[VertexId, List[VertexId]]:
        adj: Dict[VertexId, List[VertexId]] = {v: [] for v in self.g.vertices}
        for u, v in self.forest:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def _forest_side(self, x: VertexId, banned: EdgeKey) -> Set[VertexId]:
        """Vertices reachable from x in the forest avoiding `banned`."""
        adj = self._forest_adj()
        side = {x}
        queue = deque([x])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if edge_key(u, v) == banned or v in side:
                    continue
                side.add(v)
                queue.append(v)
        return side

    # -- component caches -------------------------------------------------
    def _refresh(self) -> None:
        if not self._dirty:
            return
        comp: Dict[VertexId, VertexId] = {}
        adj = self._forest_adj()
        for root in self.g.vertex_list():
            if root in comp:
                continue
            members = [root]
            comp[root] = root
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if v not in comp:
                        comp[v] = root
                        members.append(v)
                        queue.append(v)
            label = min(members)
            for v in members:
                comp[v] = label
        stats: Dict[VertexId, List] = {}
        for v, label in comp.items():
            if label not in stats:
                stats[label] = [0, 0, 0, None]
            stats[label][0] += 1
        for (u, v), _ in self.g.edge_items():
            stats[comp[u]][1] += 1
        for t in sorted(self.terminals):
            s = stats[comp[t]]
            s[2] += 1
            if s[3] is None:
                s[3] = t
        self._comp = comp
        self._comp_stats = {k: tuple(v) for k, v in stats.items()}
        self._contracted = self._compute_contraction()
        self._dirty = False

    # -- queries (Figure-5 vocabulary) ------------------------------------
    def _check_vertex(self, x: VertexId) -> None:
        if not self.g.has_vertex(x):
            raise RejectedOp("ds-query", f"vertex {x} absent")

    def comp_id(self, x: VertexId) -> VertexId:
        self._check_vertex(x)
        self._refresh()
        return self._comp[x]

    def vertex_number(self, x: VertexId) -> int:
        self._check_vertex(x)
        self._refresh()
        return self._comp_stats[self._comp[x]][0]

    def distinct_edge_number(self, x: VertexId) -> int:
        self._check_vertex(x)
        self._refresh()
        return self._comp_stats[self._comp[x]][1]

    def terminal_number(self, x: VertexId) -> int:
        self._check_vertex(x)
        self._refresh()
        return self._comp_stats[self._comp[x]][2]

    def one_terminal(self, x: VertexId) -> Optional[VertexId]:
        self._check_vertex(x)
        self._refresh()
        return self._comp_stats[self._comp[x]][3]

    def component_vertices(self, x: VertexId) -> Set[VertexId]:
        label = self.comp_id(x)
        return {v for v, c in self._comp.items() if c == label}

    def component_labels(self) -> Set[VertexId]:
        self._refresh()
        return set(self._comp_stats)

    def component_map(self) -> Dict[VertexId, VertexId]:
        self._refresh()
        return dict(self._comp)

    # -- contraction ------------------------------------------------------
    def contracted(self) -> ContractedGraph:
        self._refresh()
        assert self._contracted is not None
        return self._contracted

    def _compute_contraction(self) -> ContractedGraph:
        adj = self._forest_adj()
        sdeg = {v: len(nbrs) for v, nbrs in adj.items()}
        alive = set(self.g.vertices)
        # prune non-terminal leaves (and isolated non-terminals)
        queue = deque(v for v in alive
                      if sdeg[v] <= 1 and v not in self.terminals)
        while queue:
            v = queue.popleft()
            if v not in alive:
                continue
            alive.discard(v)
            for w in adj[v]:
                if w in alive:
                    sdeg[w] -= 1
                    if sdeg[w] <= 1 and w not in self.terminals:
                        queue.append(w)
        # remaining degree within the pruned forest
        def alive_neighbors(v):
            return [w for w in adj[v] if w in alive]
        nodes = set()
        for v in alive:
            d = len(alive_neighbors(v))
            if v in self.terminals and d >= 1:
                nodes.add(v)
            elif d >= 3:
                nodes.add(v)
        cg = MultiGraph()
        cover: Dict[EdgeKey, EdgeKey] = {}
        for v in sorted(nodes):
            cg.add_vertex(v)
        visited_edges: Set[EdgeKey] = set()
        for u in sorted(nodes):
            for first in sorted(alive_neighbors(u)):
                e0 = edge_key(u, first)
                if e0 in visited_edges:
                    continue
                path_edges = [e0]
                visited_edges.add(e0)
                prev, cur = u, first
                while cur not in nodes:
                    nxt = [w for w in alive_neighbors(cur) if w != prev]
                    assert len(nxt) == 1, "interior path vertex must have degree 2"
                    e = edge_key(cur, nxt[0])
                    path_edges.append(e)
                    visited_edges.add(e)
                    prev, cur = cur, nxt[0]
                se = edge_key(u, cur)
                if not cg.has_edge(*se):
                    cg.add_edge(se[0], se[1], 1)
                for e in path_edges:
                    cover[e] = se
        return ContractedGraph(cg, cover)

    def covering_edge(self, x: VertexId, y: VertexId) -> Optional[EdgeKey]:
        e = edge_key(x, y)
        if e not in self.forest:
            raise RejectedOp("covering-edge", f"({x},{y}) not a forest edge")
        return self.contracted().cover.get(e)

    # -- updates ----------------------------------------------------------
    def ds_update(self, op: DsOp) -> UpdateSeq:
        old = self.contracted().graph
        rec = self._apply(op)
        self._journal.append(rec)
        self._dirty = True
        new = self.contracted().graph
        return contracted_diff(old, new)

    def _apply(self, op: DsOp) -> _UndoRecord:
        rec = _UndoRecord(None, None, None)
        if isinstance(op, InsertVertex):
            self.g.add_vertex(op.v)
            rec.graph_undo = DeleteVertex(op.v)
        elif isinstance(op, DeleteVertex):
            if op.v in self.terminals:
                raise RejectedOp("ds-update", f"vertex {op.v} still a terminal")
            self.g.remove_vertex(op.v)
            rec.graph_undo = InsertVertex(op.v)
        elif isinstance(op, InsertEdge):
            self.g.add_edge(op.u, op.v, op.mult)
            rec.graph_undo = DeleteEdge(op.u, op.v)
            if self.comp_or_none(op.u) != self.comp_or_none(op.v):
                e = edge_key(op.u, op.v)
                self.forest.add(e)
                rec.forest_added.add(e)
        elif isinstance(op, DeleteEdge):
            mult = self.g.multiplicity(op.u, op.v)
            if mult == 0:
                raise RejectedOp("ds-update", f"edge ({op.u},{op.v}) absent")
            e = edge_key(op.u, op.v)
            self.g.remove_edge(op.u, op.v)
            rec.graph_undo = InsertEdge(op.u, op.v, mult)
            if e in self.forest:
                self.forest.discard(e)
                rec.forest_removed.add(e)
                side = self._forest_side(op.u, e)
                repl = None
                for a in sorted(side):
                    for b in self.g.neighbors(a):
                        if b not in side:
                            k = edge_key(a, b)
                            if repl is None or k < repl:
                                repl = k
                if repl is not None:
                    self.forest.add(repl)
                    rec.forest_added.add(repl)
        elif isinstance(op, InsertTerminal):
            if not self.g.has_vertex(op.v):
                raise RejectedOp("ds-update", f"vertex {op.v} absent")
            if op.v not in self.terminals:
                self.terminals.add(op.v)
                rec.terminal_remove = op.v
        elif isinstance(op, DeleteTerminal):
            if op.v in self.terminals:
                self.terminals.discard(op.v)
                rec.terminal_add = op.v
        else:
            raise RejectedOp("ds-update", f"unknown op {op!r}")
        return rec

    def comp_or_none(self, x: VertexId) -> Optional[VertexId]:
        if not self.g.has_vertex(x):
            return None
        return self.comp_id(x)

    # -- journal ----------------------------------------------------------
    def mark(self) -> int:
        return len(self._journal)

    def rollback_to(self, mark: int) -> None:
        while len(self._journal) > mark:
            rec = self._journal.pop()
            if rec.graph_undo is not None:
                op = rec.graph_undo
                if isinstance(op, InsertEdge):
                    self.g.add_edge(op.u, op.v, op.mult)
                elif isinstance(op, DeleteEdge):
                    self.g.remove_edge(op.u, op.v)
                elif isinstance(op, InsertVertex):
                    self.g.add_vertex(op.v)
                elif isinstance(op, DeleteVertex):
                    self.g.remove_vertex(op.v)
            if rec.terminal_add is not None:
                self.terminals.add(rec.terminal_add)
            if rec.terminal_remove is not None:
                self.terminals.discard(rec.terminal_remove)
            for e in rec.forest_added:
                self.forest.discard(e)
            for e in rec.forest_removed:
                self.forest.add(e)
            self._dirty = True

    def clone(self) -> "GraphDS":
        ds = GraphDS.__new__(GraphDS)
        ds.g = self.g.copy()
        ds.terminals = set(self.terminals)
        ds.forest = set(self.forest)
        ds._journal = []
        ds._dirty = True
        ds._comp = {}
        ds._comp_stats = {}
        ds._contracted = None
        return ds

    def fingerprint(self) -> Tuple:
        return (tuple(sorted((e, m) for e, m in self.g.edge_items())),
                tuple(self.g.vertex_list()),
                tuple(sorted(self.terminals)),
                tuple(sorted(self.forest)))

    # -- invariant checking (tests) ---------------------------------------
    def check_forest(self) -> None:
        for u, v in self.forest:
            assert self.g.has_edge(u, v), "forest edge missing from graph"
        # acyclic and spanning: per component, forest edges = vertices - 1
        self._dirty = True
        self._refresh()
        per_comp_edges: Dict[VertexId, int] = {}
        for u, v in self.forest:
            assert self._comp[u] == self._comp[v]
            per_comp_edges[self._comp[u]] = per_comp_edges.get(self._comp[u], 0) + 1
        # graph connectivity must match forest connectivity
        seen: Set[VertexId] = set()
        for root in self.g.vertex_list():
            if root in seen:
                continue
            comp_vertices = set()
            queue = deque([root])
            seen.add(root)
            comp_vertices.add(root)
            while queue:
                u = queue.popleft()
                for v in self.g.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        comp_vertices.add(v)
                        queue.append(v)
            labels = {self._comp[v] for v in comp_vertices}
            assert len(labels) == 1, "forest does not span a component"
            label = labels.pop()
            assert per_comp_edges.get(label, 0) == len(comp_vertices) - 1
