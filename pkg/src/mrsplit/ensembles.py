"""Seeded random graph generation for trajectories, verification trials,
and the synthetic training task. All draws go through an explicit
numpy Generator so runs are reproducible from a single seed.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, graph_from_pairs


def random_connected_graph(
    rng: np.random.Generator, n: int, extra_edges: int
) -> Graph:
    """Connected undirected graph: random spanning tree plus extra edges.

    Stored as symmetric arc pairs; with extra_edges ~ n the undirected edge
    count is close to 2n, matching small molecule-like graphs.
    """
    if n < 1:
        raise ValueError("need at least one node")
    pairs: set[tuple[int, int]] = set()
    order = rng.permutation(n)
    for idx in range(1, n):
        a = int(order[idx])
        b = int(order[rng.integers(0, idx)])
        pairs.add((min(a, b), max(a, b)))
    attempts = 0
    target = len(pairs) + extra_edges
    while len(pairs) < target and attempts < 50 * (extra_edges + 1):
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
        attempts += 1
    arcs = []
    for a, b in sorted(pairs):
        arcs.append((a, b, 1.0))
        arcs.append((b, a, 1.0))
    return graph_from_pairs(n, arcs, undirected=True)


def random_er_graph(
    rng: np.random.Generator, n: int, edge_prob: float
) -> Graph:
    """Erdos-Renyi style undirected graph (no connectivity guarantee)."""
    pairs = [
        (a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < edge_prob
    ]
    arcs = []
    for a, b in pairs:
        arcs.append((a, b, 1.0))
        arcs.append((b, a, 1.0))
    return graph_from_pairs(n, arcs, undirected=True)


def random_dag(rng: np.random.Generator, n: int, edge_prob: float) -> Graph:
    """Random DAG: sample node pairs and orient every edge along a random
    permutation of the nodes."""
    rank = rng.permutation(n)
    pos = np.empty(n, dtype=np.int64)
    pos[rank] = np.arange(n)
    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                if pos[a] < pos[b]:
                    edges.append((a, b, 1.0))
                else:
                    edges.append((b, a, 1.0))
    return graph_from_pairs(n, edges, undirected=False)


def random_connected_dag(rng: np.random.Generator, n: int) -> Graph:
    """DAG whose underlying undirected graph is connected: orient the edges
    of a random connected graph along a random node permutation."""
    base = random_connected_graph(rng, n, extra_edges=max(1, n // 8))
    rank = rng.permutation(n)
    pos = np.empty(n, dtype=np.int64)
    pos[rank] = np.arange(n)
    edges = [
        (a, b, w) for a, b, w in base.edges if pos[a] < pos[b]
    ]
    return graph_from_pairs(n, edges, undirected=False)


def molecule_like_graph(rng: np.random.Generator, n_lo: int, n_hi: int) -> Graph:
    """Connected graph with n in [n_lo, n_hi] and about 2n undirected edges."""
    n = int(rng.integers(n_lo, n_hi + 1))
    return random_connected_graph(rng, n, extra_edges=n + 1)
