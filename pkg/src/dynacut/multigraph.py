"""Multigraph data model, the update-operation vocabulary, and the
constant-degree reduction gadget.

A multigraph stores vertices plus edges keyed by unordered vertex pair with a
positive integer multiplicity.  No self-loops.  Deleting an edge removes all
of its multiplicity at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from .errors import RejectedOp

VertexId = int
EdgeKey = Tuple[int, int]


def edge_key(u: VertexId, v: VertexId) -> EdgeKey:
    return (u, v) if u <= v else (v, u)


class MultiGraph:
    """Vertices plus unordered-pair edges with multiplicity >= 1."""

    __slots__ = ("_adj", "_distinct_edges")

    def __init__(self) -> None:
        self._adj: Dict[VertexId, Dict[VertexId, int]] = {}
        self._distinct_edges = 0

    # -- queries ----------------------------------------------------------
    @property
    def vertices(self) -> Set[VertexId]:
        return set(self._adj)

    def vertex_list(self) -> List[VertexId]:
        return sorted(self._adj)

    def has_vertex(self, v: VertexId) -> bool:
        return v in self._adj

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return u in self._adj and v in self._adj[u]

    def multiplicity(self, u: VertexId, v: VertexId) -> int:
        if not self.has_edge(u, v):
            return 0
        return self._adj[u][v]

    def neighbors(self, v: VertexId) -> List[VertexId]:
        return sorted(self._adj[v])

    def degree(self, v: VertexId) -> int:
        """Number of distinct neighbors."""
        return len(self._adj[v])

    def weighted_degree(self, v: VertexId) -> int:
        return sum(self._adj[v].values())

    def vertex_count(self) -> int:
        return len(self._adj)

    def distinct_edge_count(self) -> int:
        return self._distinct_edges

    def edge_items(self) -> Iterator[Tuple[EdgeKey, int]]:
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield (u, v), self._adj[u][v]

    def edge_keys(self) -> List[EdgeKey]:
        return [k for k, _ in self.edge_items()]

    def is_isolated(self, v: VertexId) -> bool:
        return not self._adj[v]

    # -- mutation ---------------------------------------------------------
    def add_vertex(self, v: VertexId) -> None:
        if v in self._adj:
            raise RejectedOp("insert-vertex", f"vertex {v} already present")
        self._adj[v] = {}

    def remove_vertex(self, v: VertexId) -> None:
        if v not in self._adj:
            raise RejectedOp("delete-vertex", f"vertex {v} absent")
        if self._adj[v]:
            raise RejectedOp("delete-vertex", f"vertex {v} not isolated")
        del self._adj[v]

    def add_edge(self, u: VertexId, v: VertexId, mult: int = 1) -> None:
        if u == v:
            raise RejectedOp("insert-edge", "self-loop rejected")
        if mult < 1:
            raise RejectedOp("insert-edge", f"multiplicity {mult} < 1")
        if u not in self._adj or v not in self._adj:
            raise RejectedOp("insert-edge", f"endpoint of ({u},{v}) absent")
        if v in self._adj[u]:
            raise RejectedOp("insert-edge", f"edge ({u},{v}) already present")
        self._adj[u][v] = mult
        self._adj[v][u] = mult
        self._distinct_edges += 1

    def remove_edge(self, u: VertexId, v: VertexId) -> None:
        """Delete the edge entirely, regardless of multiplicity."""
        if not self.has_edge(u, v):
            raise RejectedOp("delete-edge", f"edge ({u},{v}) absent")
        del self._adj[u][v]
        del self._adj[v][u]
        self._distinct_edges -= 1

    # -- misc -------------------------------------------------------------
    def copy(self) -> "MultiGraph":
        g = MultiGraph()
        g._adj = {v: dict(nbrs) for v, nbrs in self._adj.items()}
        g._distinct_edges = self._distinct_edges
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self._adj == other._adj

    def __hash__(self):  # pragma: no cover - mutable container
        raise TypeError("MultiGraph is unhashable")

    def __repr__(self) -> str:
        return (f"MultiGraph(n={self.vertex_count()}, "
                f"m={self.distinct_edge_count()})")

    @classmethod
    def from_edges(cls, vertices, edges) -> "MultiGraph":
        """Build from an iterable of vertices and (u, v[, mult]) tuples."""
        g = cls()
        for v in vertices:
            g.add_vertex(v)
        for e in edges:
            if len(e) == 2:
                u, v, mult = e[0], e[1], 1
            else:
                u, v, mult = e
            for w in (u, v):
                if not g.has_vertex(w):
                    g.add_vertex(w)
            g.add_edge(u, v, mult)
        return g


def induced_subgraph(g: MultiGraph, vertices) -> MultiGraph:
    keep = set(vertices)
    sub = MultiGraph()
    for v in sorted(keep):
        if not g.has_vertex(v):
            raise RejectedOp("induced-subgraph", f"vertex {v} absent")
        sub.add_vertex(v)
    for (u, v), mult in g.edge_items():
        if u in keep and v in keep:
            sub.add_edge(u, v, mult)
    return sub


def simple_view(g: MultiGraph) -> MultiGraph:
    """Same vertices and distinct edges, all multiplicities 1."""
    s = MultiGraph()
    for v in g.vertex_list():
        s.add_vertex(v)
    for (u, v), _ in g.edge_items():
        s.add_edge(u, v, 1)
    return s


# -- update operations ----------------------------------------------------

@dataclass(frozen=True)
class InsertEdge:
    u: VertexId
    v: VertexId
    mult: int = 1


@dataclass(frozen=True)
class DeleteEdge:
    u: VertexId
    v: VertexId


@dataclass(frozen=True)
class InsertVertex:
    v: VertexId


@dataclass(frozen=True)
class DeleteVertex:
    v: VertexId


@dataclass(frozen=True)
class CompositeOp:
    """Several ops applied as one unit of an op stream."""
    ops: Tuple["UpdateOp", ...]


UpdateOp = Union[InsertEdge, DeleteEdge, InsertVertex, DeleteVertex,
                 CompositeOp]
UpdateSeq = List[UpdateOp]


def apply_update(g: MultiGraph, op: UpdateOp) -> MultiGraph:
    """Apply one update op in place; precondition violations raise RejectedOp."""
    if isinstance(op, InsertEdge):
        g.add_edge(op.u, op.v, op.mult)
    elif isinstance(op, DeleteEdge):
        g.remove_edge(op.u, op.v)
    elif isinstance(op, InsertVertex):
        g.add_vertex(op.v)
    elif isinstance(op, DeleteVertex):
        g.remove_vertex(op.v)
    elif isinstance(op, CompositeOp):
        for sub in op.ops:
            apply_update(g, sub)
    else:
        raise RejectedOp("apply-update", f"unknown op {op!r}")
    return g


def apply_seq(g: MultiGraph, seq: UpdateSeq) -> MultiGraph:
    for op in seq:
        apply_update(g, op)
    return g


def inverse_op(g: MultiGraph, op: UpdateOp) -> UpdateOp:
    """The op that undoes `op` relative to the pre-state graph g."""
    if isinstance(op, InsertEdge):
        return DeleteEdge(op.u, op.v)
    if isinstance(op, DeleteEdge):
        return InsertEdge(op.u, op.v, g.multiplicity(op.u, op.v))
    if isinstance(op, InsertVertex):
        return DeleteVertex(op.v)
    if isinstance(op, DeleteVertex):
        return InsertVertex(op.v)
    raise RejectedOp("inverse-op", f"unknown op {op!r}")


# -- degree reduction ------------------------------------------------------

_GADGET_SHIFT = 32


def gadget_id(u: VertexId, w: VertexId) -> VertexId:
    """Deterministic 64-bit id for the gadget vertex tracking edge slot (u, w)."""
    if u < 0 or w < 0 or u >= (1 << _GADGET_SHIFT) or w >= (1 << _GADGET_SHIFT):
        raise RejectedOp("gadget-id", f"vertex id out of 32-bit range: {u},{w}")
    return (u << _GADGET_SHIFT) | w


class ReductionImage:
    """Constant-degree multigraph image of a tracked simple graph.

    Each original vertex u becomes a path of gadget vertices v_{u,w} (one per
    incident edge, in insertion order) anchored at v_{u,u}; path edges carry
    multiplicity c+1 and each original edge (u, w) becomes one multiplicity-1
    edge (v_{u,w}, v_{w,u}).  Every gadget vertex has at most 3 distinct
    neighbors, and min(c, edge connectivity) is preserved between anchors.
    """

    def __init__(self, c: int):
        if c < 1:
            raise RejectedOp("degree-reduce", f"c must be >= 1, got {c}")
        self.c = c
        self.simple = MultiGraph()      # tracked original simple graph
        self.multigraph = MultiGraph()  # the reduced image
        # per-vertex gadget path as a linked list over neighbor slots;
        # slot key is the neighbor w (anchor slot key is u itself)
        self._succ: Dict[VertexId, Dict[VertexId, Optional[VertexId]]] = {}
        self._pred: Dict[VertexId, Dict[VertexId, Optional[VertexId]]] = {}
        self._tail: Dict[VertexId, VertexId] = {}

    def anchor(self, u: VertexId) -> VertexId:
        return gadget_id(u, u)

    def neighbor_order(self, u: VertexId) -> List[VertexId]:
        out = []
        w = self._succ[u][u]
        while w is not None:
            out.append(w)
            w = self._succ[u][w]
        return out

    # -- construction -----------------------------------------------------
    def add_original_vertex(self, u: VertexId) -> UpdateSeq:
        if self.simple.has_vertex(u):
            raise RejectedOp("reduce-update", f"vertex {u} already tracked")
        self.simple.add_vertex(u)
        self._succ[u] = {u: None}
        self._pred[u] = {u: None}
        self._tail[u] = u
        seq: UpdateSeq = [InsertVertex(self.anchor(u))]
        apply_seq(self.multigraph, seq)
        return seq

    def insert_edge(self, u: VertexId, w: VertexId) -> UpdateSeq:
        if not (self.simple.has_vertex(u) and self.simple.has_vertex(w)):
            raise RejectedOp("reduce-update", f"endpoint of ({u},{w}) absent")
        if self.simple.has_edge(u, w):
            raise RejectedOp("reduce-update", f"edge ({u},{w}) already present")
        self.simple.add_edge(u, w, 1)
        seq: UpdateSeq = []
        for a, b in ((u, w), (w, u)):
            tail_slot = self._tail[a]
            seq.append(InsertVertex(gadget_id(a, b)))
            seq.append(InsertEdge(gadget_id(a, tail_slot) if tail_slot != a
                                  else self.anchor(a),
                                  gadget_id(a, b), self.c + 1))
            self._succ[a][tail_slot] = b
            self._pred[a][b] = tail_slot
            self._succ[a][b] = None
            self._tail[a] = b
        seq.append(InsertEdge(gadget_id(u, w), gadget_id(w, u), 1))
        apply_seq(self.multigraph, seq)
        return seq

    def delete_edge(self, u: VertexId, w: VertexId) -> UpdateSeq:
        if not self.simple.has_edge(u, w):
            raise RejectedOp("reduce-update", f"edge ({u},{w}) absent")
        self.simple.remove_edge(u, w)
        seq: UpdateSeq = [DeleteEdge(gadget_id(u, w), gadget_id(w, u))]
        for a, b in ((u, w), (w, u)):
            slot = gadget_id(a, b)
            p = self._pred[a][b]
            s = self._succ[a][b]
            pv = self.anchor(a) if p == a else gadget_id(a, p)
            seq.append(DeleteEdge(pv, slot))
            if s is not None:
                seq.append(DeleteEdge(slot, gadget_id(a, s)))
                seq.append(InsertEdge(pv, gadget_id(a, s), self.c + 1))
            seq.append(DeleteVertex(slot))
            self._succ[a][p] = s
            if s is not None:
                self._pred[a][s] = p
            else:
                self._tail[a] = p
            del self._succ[a][b]
            del self._pred[a][b]
        apply_seq(self.multigraph, seq)
        return seq

    def reduce_update(self, op: UpdateOp) -> UpdateSeq:
        """Translate a simple-graph edge op into an O(1) multigraph sequence."""
        if isinstance(op, InsertEdge):
            return self.insert_edge(op.u, op.v)
        if isinstance(op, DeleteEdge):
            return self.delete_edge(op.u, op.v)
        raise RejectedOp("reduce-update", f"unsupported op {op!r}")

    # -- invariant checking -----------------------------------------------
    def check_invariants(self) -> None:
        g = self.multigraph
        expect_vertices = set()
        for u in self.simple.vertex_list():
            expect_vertices.add(self.anchor(u))
            for w in self.simple.neighbors(u):
                expect_vertices.add(gadget_id(u, w))
        assert g.vertices == expect_vertices, "gadget vertex set mismatch"
        # one multiplicity-1 edge per original edge
        for (u, w), _ in self.simple.edge_items():
            assert g.multiplicity(gadget_id(u, w), gadget_id(w, u)) == 1
        # per-vertex gadget path with multiplicity c+1
        path_edges = 0
        for u in self.simple.vertex_list():
            order = self.neighbor_order(u)
            assert sorted(order) == self.simple.neighbors(u)
            prev = self.anchor(u)
            for w in order:
                cur = gadget_id(u, w)
                assert g.multiplicity(prev, cur) == self.c + 1
                prev = cur
                path_edges += 1
        # no extra edges
        assert g.distinct_edge_count() == \
            self.simple.distinct_edge_count() + path_edges
        for v in g.vertex_list():
            assert g.degree(v) <= 3, f"gadget vertex {v} has degree > 3"


def degree_reduce(g: MultiGraph, c: int) -> ReductionImage:
    """Build the reduction image of a simple graph (neighbor order sorted)."""
    img = ReductionImage(c)
    for v in g.vertex_list():
        img.add_original_vertex(v)
    for (u, v), mult in g.edge_items():
        if mult != 1:
            raise RejectedOp("degree-reduce", f"input not simple at ({u},{v})")
        img.insert_edge(u, v)
    return img
