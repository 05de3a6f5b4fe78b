"""Top-level fully dynamic c-edge-connectivity engine and brute-force oracle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .cutpartition import build_sparsifier, cut_partition_update
from .errors import RejectedOp
from .multigraph import (CompositeOp, DeleteEdge, InsertEdge, InsertVertex,
                         MultiGraph,
                         ReductionImage, UpdateOp, UpdateSeq, VertexId,
                         apply_seq, degree_reduce)
from .multilevel import (MultiLevelDS, ParamSchedule, make_schedule,
                         preprocess_multi_level)
from .onlinebatch import Scheduler, scheduler_init, scheduler_step


def _capped_maxflow(g: MultiGraph, x: VertexId, y: VertexId, cap: int) -> int:
    """Max x-y flow with per-edge capacities min(multiplicity, cap), itself
    capped at cap.  At most cap augmentations."""
    res: Dict[Tuple[VertexId, VertexId], int] = {}
    for (u, v), mult in g.edge_items():
        w = min(mult, cap)
        res[(u, v)] = w
        res[(v, u)] = w
    flow = 0
    while flow < cap:
        parent: Dict[VertexId, VertexId] = {x: x}
        queue = deque([x])
        while queue and y not in parent:
            u = queue.popleft()
            for v in g.neighbors(u):
                if v not in parent and res.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if y not in parent:
            break
        bottleneck = cap - flow
        v = y
        while v != x:
            u = parent[v]
            bottleneck = min(bottleneck, res[(u, v)])
            v = u
        v = y
        while v != x:
            u = parent[v]
            res[(u, v)] -= bottleneck
            res[(v, u)] += bottleneck
            v = u
        flow += bottleneck
    return flow


def offline_oracle(g: MultiGraph, x: VertexId, y: VertexId, c: int) -> bool:
    """True iff x and y are c-edge connected (c edge-disjoint paths exist)."""
    if not (g.has_vertex(x) and g.has_vertex(y)):
        raise RejectedOp("offline-oracle", f"vertex {x} or {y} absent")
    if x == y:
        return True
    return _capped_maxflow(g, x, y, c) >= c


def edge_connectivity(g: MultiGraph, x: VertexId, y: VertexId, cap_at: int) -> int:
    """min(cap_at, x-y edge connectivity)."""
    if x == y:
        return cap_at
    return _capped_maxflow(g, x, y, cap_at)

# -- fully dynamic engine --------------------------------------------------

class StackDS:
    """Batchable wrapper over the sparsifier stack: every batch replays the
    ops onto the pre-batch graph and rebuilds the stack from scratch.  The
    desk schedules have no spare update rounds, so rebuilding is the
    deterministic batch rule; the round-consuming update path is what
    queries exercise."""

    def __init__(self, sched: ParamSchedule):
        self.sched = sched
        self.steps = 0

    def initialize(self, g: MultiGraph) -> MultiLevelDS:
        self.steps += g.vertex_count() + g.distinct_edge_count() + 1
        return preprocess_multi_level(g, self.sched)

    def batch_update(self, inst: MultiLevelDS, g_before: MultiGraph,
                     seq: UpdateSeq) -> MultiLevelDS:
        self.steps += len(seq)
        return self.initialize(apply_seq(g_before.copy(), seq))

    def clone(self, inst: MultiLevelDS) -> MultiLevelDS:
        return inst.clone()

    def fingerprint(self, inst: MultiLevelDS) -> Tuple:
        return inst.fingerprint()


def _flat_schedule(c: int, n_cap: int) -> ParamSchedule:
    """Desk schedule whose conductance floor sits below every component
    conductance any simple graph on n_cap vertices can reach after degree
    reduction, so preprocessing always certifies whole components."""
    edges_cap = max(n_cap * (n_cap - 1) // 2, 1)
    volume_cap = 2 * edges_cap * (2 * c + 3)
    n_image = n_cap + 2 * edges_cap
    return make_schedule(c, max(n_image, 2), "desk", {
        "phi": Fraction(1, 4 * volume_cap * volume_cap),
        "n_max": n_image,
    })


@dataclass
class Engine:
    c: int
    reduction: ReductionImage
    scheduler: Scheduler
    schedule: ParamSchedule
    current: MultiLevelDS
    query_stats: List[Dict[str, int]] = field(default_factory=list)

    def fingerprint(self) -> Tuple:
        return (tuple(sorted(self.reduction.simple.edge_items())),
                tuple(sorted(self.reduction.multigraph.edge_items())),
                self.current.fingerprint(),
                self.scheduler.now,
                self.scheduler.impl.steps)


def engine_preprocess(g: MultiGraph, c: int, profile: str = "desk",
                      n_cap: Optional[int] = None) -> Engine:
    if c < 1:
        raise RejectedOp("engine", f"c must be >= 1, got {c}")
    if profile not in ("desk", "paper-validate"):
        raise RejectedOp("engine", f"unknown profile {profile!r}")
    n_cap = max(n_cap or 0, g.vertex_count(), 2)
    sched = _flat_schedule(c, n_cap)
    reduction = degree_reduce(g, c)
    xi, w = 1, 12
    scheduler = scheduler_init(StackDS(sched), reduction.multigraph, xi, w)
    return Engine(c, reduction, scheduler, sched,
                  scheduler.impl.clone(scheduler._pinned.inst))


def engine_update(e: Engine, op: UpdateOp) -> None:
    """Apply one simple-graph edge op: translate it to the constant-size
    image sequence and feed that, op by op, through the scheduler."""
    seq: UpdateSeq = []
    if isinstance(op, (InsertEdge, DeleteEdge)):
        if isinstance(op, InsertEdge):
            for v in (op.u, op.v):
                if not e.reduction.simple.has_vertex(v):
                    seq.extend(e.reduction.add_original_vertex(v))
        seq.extend(e.reduction.reduce_update(op))
    else:
        raise RejectedOp("engine", f"unsupported op {op!r}")
    e.current = scheduler_step(e.scheduler, CompositeOp(tuple(seq)))


_ATTACH_A = -1   # v':  pendant forcing v_{u,u} into End(boundary)
_ATTACH_B = -2   # v'': pendant forcing v_{w,w} into End(boundary)


def engine_query(e: Engine, u: VertexId, w: VertexId) -> bool:
    """True iff u and w are c-edge connected in the tracked simple graph.

    Attaches one pendant vertex to each anchor with multiplicity c+1, pushes
    the four-op sequence through cloned copies of every level, applies the
    final emitted sequence to the (edgeless) top sparsifier and answers by
    brute force on that small graph.  The clones are discarded, so the
    engine state is untouched."""
    if not (e.reduction.simple.has_vertex(u) and
            e.reduction.simple.has_vertex(w)):
        raise RejectedOp("engine-query", f"vertex {u} or {w} absent")
    if u == w:
        return True
    sched = e.schedule
    mds = e.current
    au, aw = e.reduction.anchor(u), e.reduction.anchor(w)
    seq: UpdateSeq = [InsertVertex(_ATTACH_A), InsertVertex(_ATTACH_B),
                      InsertEdge(au, _ATTACH_A, e.c + 1),
                      InsertEdge(aw, _ATTACH_B, e.c + 1)]
    target = sched.chain[mds.round + 1]
    phi = sched.phi_at(mds.round + 1)
    expansion = [len(seq)]
    top = build_sparsifier(mds.levels[-1], sched.gamma)
    for ods in mds.levels:
        scratch = ods.clone()
        _, seq = cut_partition_update(scratch, seq, phi, target, sched.t,
                                      sched.gamma, scratch.params)
        expansion.append(len(seq))
    h = apply_seq(top, seq)
    if not (h.has_vertex(au) and h.has_vertex(aw)):
        raise RejectedOp("engine-query",
                         f"anchor missing from final graph for ({u},{w})")
    e.query_stats.append({"levels": len(mds.levels),
                          "h_vertices": h.vertex_count(),
                          "h_edges": h.distinct_edge_count(),
                          "expansion": tuple(expansion)})
    return offline_oracle(h, au, aw, e.c)
