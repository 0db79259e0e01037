"""Small builders shared by the test modules."""

import itertools

import numpy as np

from monoembed.graphcore import MultipartiteGraph
from monoembed.hprep import TargetGraph


def graph_from_edges(r, N, edges):
    """Host from (i, a, j, b) tuples."""
    blocks = {}
    for i, a, j, b in edges:
        if i > j:
            i, a, j, b = j, b, i, a
        blocks.setdefault((i, j), np.zeros((N, N), dtype=bool))[a, b] = True
    return MultipartiteGraph(r, N, blocks)


def naive_congestion(G, F, U):
    total = 0
    for K in F:
        for u in U.members:
            if all(G.has_edge(w, (U.part, u)) for w in K):
                total += 1
    return total


def random_target(seed, n_max=50, d_max=4):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    D = int(rng.integers(1, d_max + 1))
    deg = [0] * n
    edges = []
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    for u, v in pairs[: int(rng.integers(0, 2 * n + 1))]:
        if deg[u] < D and deg[v] < D:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return TargetGraph.from_edges(n, edges), D
