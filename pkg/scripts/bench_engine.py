#!/usr/bin/env python3
"""Timing snapshot: per-update and per-query wall-clock cost of the engine.

Usage: python3 scripts/bench_engine.py [--n 16] [--ops 100] [--c 2]
"""

import argparse
import random
import statistics
import time

from dynacut.connectivity import engine_preprocess, engine_query, \
    engine_update
from dynacut.multigraph import DeleteEdge, InsertEdge, MultiGraph


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--ops", type=int, default=100)
    ap.add_argument("--c", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    t0 = time.time()
    e = engine_preprocess(MultiGraph(), args.c, n_cap=args.n)
    pre = time.time() - t0
    shadow = MultiGraph()
    upd, qry = [], []
    for _ in range(args.ops):
        present = [(u, v) for (u, v), _ in shadow.edge_items()]
        if present and rng.random() < 0.4:
            u, v = rng.choice(present)
            op = DeleteEdge(u, v)
            shadow.remove_edge(u, v)
        else:
            while True:
                u, v = rng.sample(range(args.n), 2)
                if not shadow.has_edge(u, v):
                    break
            op = InsertEdge(u, v, 1)
            for x in (u, v):
                if not shadow.has_vertex(x):
                    shadow.add_vertex(x)
            shadow.add_edge(u, v, 1)
        t0 = time.time()
        engine_update(e, op)
        upd.append(time.time() - t0)
        if shadow.vertex_count() >= 2 and rng.random() < 0.2:
            x, y = rng.sample(shadow.vertex_list(), 2)
            t0 = time.time()
            engine_query(e, x, y)
            qry.append(time.time() - t0)
    print(f"n={args.n} c={args.c} ops={args.ops} queries={len(qry)}")
    print(f"preprocess: {pre * 1000:.1f} ms")
    print(f"update:  mean {statistics.mean(upd) * 1000:.2f} ms, "
          f"max {max(upd) * 1000:.2f} ms")
    if qry:
        print(f"query:   mean {statistics.mean(qry) * 1000:.2f} ms, "
              f"max {max(qry) * 1000:.2f} ms")
    print("scheduler:", e.scheduler.work_stats())


if __name__ == "__main__":
    main()
