"""Generic online-batch to worst-case scheduler.

A data structure with batch preprocessing/update routines is wrapped in a
pipeline of 2^(xi+2)-2 copies, indexed by binary strings of length 1 to
xi+1.  Level-i snapshots are rebuilt every d_i = s^(xi-i) updates with the
work spread over half a period, so every incoming update pays a bounded
number of primitive steps while the instance served at time j always equals
the lattice state D_{xi,j}: level 0 re-initializes from scratch, and level
i > 0 applies one update batch of at most w operations on top of a level
i-1 snapshot.  Each served instance has absorbed at most xi batches.

Background work is cooperative: a task's cost (instrumented primitive
steps) is measured when its window opens and charged to the window's ticks
at ceil(total/len) per tick; results install when the window closes.
Snapshots are journaled clones, so "reverse back" is a clone restore.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

from .errors import RejectedOp, RejectedSchedule
from .multigraph import MultiGraph, UpdateOp, UpdateSeq, apply_seq


class BatchableDS(Protocol):
    """Deterministic batch-updatable structure with instrumented work.

    `steps` is a monotone primitive-step counter bumped by initialize and
    batch_update; the scheduler charges cost by reading its deltas.
    """
    steps: int

    def initialize(self, g: MultiGraph): ...

    def batch_update(self, inst, g_before: MultiGraph, seq: UpdateSeq): ...

    def clone(self, inst): ...

    def fingerprint(self, inst) -> Tuple: ...


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def batch_index(i: int, j: int, s: int) -> Tuple[int, ...]:
    """b_{i,j}: the copy prefix responsible for lattice state (i, j)."""
    if i == 0:
        return (j % 2,)
    return batch_index(i - 1, _ceil_div(j, s) - 2, s) + (j % 2,)


def lattice_parent(j: int, s: int) -> int:
    """The level-(i-1) index feeding state (i, j)."""
    return _ceil_div(j, s) - 2


def dependency_chain(xi: int, j: int, s: int) -> List[Tuple[int, int]]:
    """[(xi, j), (xi-1, j'), ...] down to level 0 per the lattice."""
    chain = [(xi, j)]
    for i in range(xi, 0, -1):
        j = lattice_parent(j, s)
        chain.append((i - 1, j))
    return chain


def dependency_audit(xi: int, w: int, j: int) -> bool:
    """Every realized dependency satisfies t_{i,j} <= t_{i',j'+2} + d_{i'}/2."""
    s = _scale(xi, w)
    d = [s ** (xi - i) for i in range(xi + 1)]
    chain = dependency_chain(xi, j, s)
    for a in range(len(chain)):
        i, ja = chain[a]
        for b in range(a + 1, len(chain)):
            ip, jb = chain[b]
            t_ij = max(ja, 0) * d[i]
            t_p2 = max(jb + 2, 0) * d[ip]
            if not 2 * t_ij <= 2 * t_p2 + d[ip]:
                return False
    return True


def _scale(xi: int, w: int) -> int:
    # s = floor((w/2)^{1/xi}): largest s with 2 s^xi <= w
    s = 1
    while 2 * (s + 1) ** xi <= w:
        s += 1
    return s


# -- reference executor ----------------------------------------------------

class ReferenceExecutor:
    """Direct, memoized evaluation of the snapshot lattice: the ground truth
    the scheduler must reproduce at every time step."""

    def __init__(self, impl: BatchableDS, g: MultiGraph, xi: int, w: int):
        self.impl = impl
        self.g0 = g.copy()
        self.xi = xi
        self.s = _scale(xi, w)
        self.d = [self.s ** (xi - i) for i in range(xi + 1)]
        self.updates: List[UpdateOp] = []
        self._memo: Dict[Tuple[int, int], Tuple[MultiGraph, object]] = {}

    def push(self, op: UpdateOp) -> None:
        self.updates.append(op)

    def _t(self, i: int, j: int) -> int:
        return max(j, 0) * self.d[i]

    def state(self, i: int, j: int) -> Tuple[MultiGraph, object]:
        """(G_{i,j}, D_{i,j}), computed per the lattice definition."""
        j = max(j, 0)
        key = (i, j)
        if key in self._memo:
            return self._memo[key]
        if i == 0 or j == 0:
            g = apply_seq(self.g0.copy(), self.updates[:self._t(0, j)])
            inst = self.impl.initialize(g)
            out = (g, inst)
        else:
            jp = lattice_parent(j, self.s)
            pg, pinst = self.state(i - 1, jp)
            seq = self.updates[self._t(i - 1, jp):self._t(i, j)]
            inst = self.impl.batch_update(self.impl.clone(pinst), pg, seq)
            out = (apply_seq(pg.copy(), seq), inst)
        self._memo[key] = out
        return out

    def served(self, j: int) -> object:
        """D_{xi,j}: what the scheduler must output at time j."""
        self._memo.pop((self.xi, j), None)
        return self.state(self.xi, j)[1]


# -- the production scheduler ----------------------------------------------

@dataclass
class _State:
    g: MultiGraph
    inst: object
    batches: Tuple[int, ...]          # update-batch sizes since initialize


@dataclass
class _Copy:
    g: MultiGraph
    inst: object
    batches: Tuple[int, ...]
    snaps: Dict[int, _State] = field(default_factory=dict)


@dataclass
class _Task:
    level: int
    j: int
    start: int
    end: int
    total: int                        # measured primitive steps
    charged: int = 0
    result: Optional[_State] = None
    targets: Tuple[Tuple[int, ...], ...] = ()

    def tick(self, now: int) -> int:
        if now == self.end:
            steps = self.total - self.charged
        else:
            length = self.end - self.start + 1
            steps = min(_ceil_div(self.total, length),
                        self.total - self.charged)
        self.charged += steps
        return steps


class Scheduler:
    def __init__(self, impl: BatchableDS, g: MultiGraph, xi: int, w: int):
        if xi < 1:
            raise RejectedSchedule("xi must be at least 1")
        if w < 2 * 6 ** xi:
            raise RejectedSchedule(f"w = {w} < 2*6^xi = {2 * 6 ** xi}")
        self.impl = impl
        self.xi = xi
        self.w = w
        self.s = _scale(xi, w)
        self.d = [self.s ** (xi - i) for i in range(xi + 1)]
        self.updates: List[UpdateOp] = []
        self.now = 0
        before = impl.steps
        base = impl.initialize(g.copy())
        self.preprocess_steps = impl.steps - before
        self._pinned = _State(g.copy(), base, ())
        self.copies: Dict[Tuple[int, ...], _Copy] = {}
        for length in range(1, xi + 2):
            for idx in range(2 ** length):
                beta = tuple((idx >> (length - 1 - b)) & 1
                             for b in range(length))
                self.copies[beta] = _Copy(g.copy(), impl.clone(base), ())
        self.tasks: List[_Task] = []
        self.steps_per_update: List[int] = []
        self.serve_audit: List[Tuple[int, Tuple[int, ...]]] = []

    def copy_count(self) -> int:
        return len(self.copies)

    # -- internals ---------------------------------------------------------

    def _t(self, i: int, j: int) -> int:
        return max(j, 0) * self.d[i]

    def _parent_state(self, i: int, j: int) -> _State:
        """The level-(i-1) snapshot feeding state (i, j); j' <= 0 is pinned
        to the preprocessing state."""
        jp = lattice_parent(j, self.s)
        if jp <= 0:
            return self._pinned
        prefix = batch_index(i, j, self.s)
        snap = self.copies[prefix].snaps.get(i - 1)
        if snap is None:
            raise RejectedOp("scheduler", f"missing snapshot for {prefix}")
        return snap

    def _measure(self, fn):
        before = self.impl.steps
        out = fn()
        return out, self.impl.steps - before

    def _open(self, i: int, j: int) -> None:
        start = self._t(i, j) + self.d[i] // 2 + 1
        end = self._t(i, j + 1)
        if i == 0:
            parity = j % 2
            targets = tuple(sorted(b for b in self.copies if b[0] == parity))
            seq = self.updates[self._t(0, j - 2):self._t(0, j)]
            base = self.copies[targets[0]].snaps.get(0, self._pinned)
            g_new = apply_seq(base.g.copy(), seq)
            (inst, cost) = self._measure(
                lambda: self.impl.initialize(g_new))
            result = _State(g_new, inst, ())
            total = (cost + len(seq)) * len(targets)
        else:
            prefix = batch_index(i, j, self.s)
            targets = tuple(sorted(
                b for b in self.copies
                if len(b) >= i + 1 and b[:i + 1] == prefix))
            parent = self._parent_state(i, j)
            jp = lattice_parent(j, self.s)
            seq = self.updates[self._t(i - 1, jp):self._t(i, j)]
            inst = self.impl.clone(parent.inst)
            (inst, cost) = self._measure(
                lambda: self.impl.batch_update(inst, parent.g, seq))
            g_new = apply_seq(parent.g.copy(), seq)
            result = _State(g_new, inst, parent.batches + (len(seq),))
            total = (cost + len(seq)) * len(targets)
        self.tasks.append(_Task(i, j, start, end, total,
                                result=result, targets=targets))

    def _close(self, task: _Task) -> None:
        for beta in task.targets:
            copy = self.copies[beta]
            r = task.result
            copy.g = r.g.copy()
            copy.inst = self.impl.clone(r.inst)
            copy.batches = r.batches
            copy.snaps[task.level] = _State(r.g.copy(),
                                            self.impl.clone(r.inst),
                                            r.batches)

    def step(self, op: UpdateOp):
        """Consume one update; return the instance equal to D_{xi, now}."""
        self.updates.append(op)
        self.now += 1
        tau = self.now
        charged = 0
        # open the windows starting now (one candidate j per level)
        for i in range(self.xi):
            num = tau - self.d[i] // 2 - 1
            if num > 0 and num % self.d[i] == 0:
                self._open(i, num // self.d[i])
        # charge active windows, install the ones that end now
        remaining = []
        for task in self.tasks:
            charged += task.tick(tau)
            if task.end == tau:
                self._close(task)
            else:
                remaining.append(task)
        self.tasks = remaining
        # serve level xi: revert to the parent snapshot and apply the tail
        parent = self._parent_state(self.xi, tau)
        jp = lattice_parent(tau, self.s)
        seq = self.updates[self._t(self.xi - 1, jp):tau]
        inst = self.impl.clone(parent.inst)
        (inst, cost) = self._measure(
            lambda: self.impl.batch_update(inst, parent.g, seq))
        charged += cost + len(seq)
        beta = batch_index(self.xi, tau, self.s)
        copy = self.copies[beta]
        copy.g = apply_seq(parent.g.copy(), seq)
        copy.inst = inst
        copy.batches = parent.batches + (len(seq),)
        self.steps_per_update.append(charged)
        self.serve_audit.append((len(copy.batches), copy.batches))
        return inst

    # -- statistics --------------------------------------------------------

    def batch_count_audit(self) -> Dict[str, int]:
        """Batches absorbed by each served instance (Lemma 1.2 bounds)."""
        if not self.serve_audit:
            return {"max_batches": 0, "max_batch_size": 0, "serves": 0}
        return {
            "max_batches": max(n for n, _ in self.serve_audit),
            "max_batch_size": max((max(sizes) if sizes else 0)
                                  for _, sizes in self.serve_audit),
            "serves": len(self.serve_audit),
        }

    def work_stats(self) -> Dict[str, int]:
        spu = self.steps_per_update
        return {
            "max_steps_per_update": max(spu) if spu else 0,
            "total_steps": sum(spu),
            "preprocess_steps": self.preprocess_steps,
        }


def scheduler_init(impl: BatchableDS, g: MultiGraph, xi: int, w: int
                   ) -> Scheduler:
    return Scheduler(impl, g, xi, w)


def scheduler_step(sched: Scheduler, op: UpdateOp):
    return sched.step(op)
