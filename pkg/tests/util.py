"""Shared helpers for randomized tests."""

import random

from dynacut.multigraph import MultiGraph


def random_simple_graph(rng: random.Random, n: int, p: float) -> MultiGraph:
    g = MultiGraph()
    for v in range(n):
        g.add_vertex(v)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v, 1)
    return g


def random_multigraph(rng: random.Random, n: int, p: float,
                      max_mult: int = 3) -> MultiGraph:
    g = MultiGraph()
    for v in range(n):
        g.add_vertex(v)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v, rng.randint(1, max_mult))
    return g


def random_connected_graph(rng: random.Random, n: int, extra: int) -> MultiGraph:
    """Random spanning tree plus `extra` random non-tree edges."""
    g = MultiGraph()
    g.add_vertex(0)
    for v in range(1, n):
        g.add_vertex(v)
        g.add_edge(v, rng.randrange(v), 1)
    added = 0
    attempts = 0
    while added < extra and attempts < 20 * (extra + 1):
        attempts += 1
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v, 1)
            added += 1
    return g


def barbell() -> MultiGraph:
    """Two triangles {0,1,2} and {3,4,5} joined by the bridge (2,3)."""
    return MultiGraph.from_edges(
        range(6),
        [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])


def path_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(range(n), [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(
        range(n), [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(
        range(n), [(u, v) for u in range(n) for v in range(u + 1, n)])
