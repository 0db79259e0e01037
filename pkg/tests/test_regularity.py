import itertools
import math

import numpy as np
import pytest

from monoembed.graphcore import (Color, MultipartiteGraph, ParameterError, coloring_from_pair_colors,
                                 color_edges, complete_multipartite, generate_random, monochrome_view,
                                 pair_density)
from monoembed.oracles import turan_number
from monoembed.regularity import (CliqueSelection, ReducedGraph, RegularityPartition, SelectionFailure,
                                  boundedness_audit, find_regular_clique, iter_regular_cliques,
                                  reduced_graph, refine_partition, select_dense_mono_clique)


def test_refine_trivial_views():
    K = complete_multipartite(3, 30)
    P = refine_partition(K, 1.0, 0.2, 1, 8)
    assert P.t == 1 and P.certified and P.irregular_fraction == 0.0
    assert P.check_structure(30) == []
    E = MultipartiteGraph(3, 30)
    P = refine_partition(E, 0.5, 0.2, 1, 8)
    assert P.t == 1 and P.certified and P.irregular_fraction == 0.0


def test_refine_random_view_and_reduced_graph():
    G = generate_random(3, 600, 0.3, 1)
    P = refine_partition(G, 0.3, 0.25, 2, 16)
    assert P.certified and P.irregular_fraction <= 0.25 and P.check_structure(600) == []
    P8 = refine_partition(G, 0.3, 0.25, 8, 16)
    assert P8.t == 8 and P8.check_structure(600) == []
    F = reduced_graph(G, P8, 0.3, 0.25)
    assert all(m <= 0.25 * 64 for m in F.missing_per_part_pair().values())


def test_refine_not_certified_is_a_flag():
    # a planted half-dense, half-empty pair cannot be certified at t = 1 with tiny T0
    N = 40
    b = np.zeros((N, N), dtype=bool)
    b[: N // 2, : N // 2] = True
    G = MultipartiteGraph(2, N, {(0, 1): b})
    P = refine_partition(G, 0.25, 0.1, 1, 1)
    assert not P.certified and P.check_structure(N) == []
    Q = refine_partition(G, 0.25, 0.1, 1, 8)
    assert Q.t > 1 and Q.check_structure(N) == []


def test_refine_argument_checks():
    G = complete_multipartite(2, 10)
    with pytest.raises(ParameterError):
        refine_partition(G, 1.0, 0.0, 1, 4)
    with pytest.raises(ParameterError):
        refine_partition(G, 1.0, 0.2, 5, 4)


def test_partition_round_trip():
    P = refine_partition(generate_random(3, 50, 0.5, 2), 0.5, 0.3, 2, 4)
    Q = RegularityPartition.from_dict(P.to_dict())
    assert Q.t == P.t and Q.clusters == P.clusters and Q.exceptional == P.exceptional


def test_boundedness_audit():
    out = boundedness_audit(complete_multipartite(3, 20), 0.5, 0.2, 2.0, 10, 0)
    assert out["max_density"] == 2.0 and out["bounded"]


def test_reduced_graph_trivial():
    for G in (complete_multipartite(3, 20), MultipartiteGraph(3, 20)):
        P = RegularityPartition(2, 0.2, [[], [], []], [[list(range(10)), list(range(10, 20))]] * 3)
        F = reduced_graph(G, P, 0.5, 0.2)
        assert F.edge_count() == 3 * 4


def _k32_edges():
    return [((i, a), (j, b)) for i, j in itertools.combinations(range(3), 2) for a in range(2) for b in range(2)]


def test_find_clique_examples():
    F = ReducedGraph.from_edges(3, 2, _k32_edges())
    res = find_regular_clique(F, 3)
    assert res.status == "found" and res.clusters == [(0, 0), (1, 0), (2, 0)]
    cut = ReducedGraph.from_edges(3, 2, [e for e in _k32_edges() if {e[0][0], e[1][0]} != {0, 1}])
    res = find_regular_clique(cut, 3)
    assert res.status == "absent" and not res.found
    for removed in itertools.combinations(_k32_edges(), 3):
        F = ReducedGraph.from_edges(3, 2, [e for e in _k32_edges() if e not in removed])
        res = find_regular_clique(F, 3)
        assert res.found
        assert all(F.has_edge(a, b) for a, b in itertools.combinations(res.clusters, 2))


def test_find_clique_budget_flag():
    edges = [((i, a), (j, b)) for i, j in itertools.combinations(range(6), 2) for a in range(6) for b in range(6)
             if (a + b + i + j) % 5]
    F = ReducedGraph.from_edges(6, 6, edges)
    res = find_regular_clique(F, 6, budget=3)
    assert res.status in ("budget", "found")
    if not res.found:
        assert res.status == "budget"


def test_counting_bound_guarantees_clique():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        r, t = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        all_edges = [((i, a), (j, b)) for i, j in itertools.combinations(range(r), 2)
                     for a in range(t) for b in range(t)]
        bound = (math.comb(r, 2) - 1) * t * t
        keep = int(rng.integers(bound + 1, len(all_edges) + 1))
        idx = rng.choice(len(all_edges), keep, replace=False)
        F = ReducedGraph.from_edges(r, t, [all_edges[k] for k in idx])
        assert find_regular_clique(F, r).found


def test_turan_tightness_matches_search():
    res = turan_number(3, 2)
    edges = [(tuple(u), tuple(v)) for u, v in res.witness]
    assert not find_regular_clique(ReducedGraph.from_edges(3, 2, edges), 3).found


def test_iter_cliques_enumerates_all_transversals():
    F = ReducedGraph.from_edges(3, 2, _k32_edges())
    cliques = list(iter_regular_cliques(F, 3))
    assert len(cliques) == 8 and len({tuple(c) for c in cliques}) == 8


def _one_cluster_partition(r, N):
    return RegularityPartition(1, 0.1, [[] for _ in range(r)], [[list(range(N))] for _ in range(r)])


def test_select_all_red():
    G = complete_multipartite(5, 8)
    c = color_edges(G, "all-red")
    P = _one_cluster_partition(5, 8)
    sel = select_dense_mono_clique(G, c, P, 1.0, 0.3, 3, [(i, 0) for i in range(5)])
    assert isinstance(sel, CliqueSelection) and sel.color is Color.RED and len(sel.clusters) == 3
    view = monochrome_view(G, c, sel.color)
    assert all(pair_density(view, a, b, 1.0) >= 1 / 3 for a, b in itertools.combinations(sel.sets, 2))


def test_select_k6_always_has_triangle():
    G = complete_multipartite(6, 4)
    P = _one_cluster_partition(6, 4)
    rng = np.random.default_rng(1)
    for _ in range(20):
        pc = {pair: ("R" if rng.random() < 0.5 else "B") for pair in itertools.combinations(range(6), 2)}
        c = coloring_from_pair_colors(G, pc)
        sel = select_dense_mono_clique(G, c, P, 1.0, 0.3, 3, [(i, 0) for i in range(6)])
        assert isinstance(sel, CliqueSelection)
        cols = {pc[tuple(sorted((a[0], b[0])))] for a, b in itertools.combinations(sel.clusters, 2)}
        assert cols == {sel.color.value}


def test_select_pentagon_fails():
    G = complete_multipartite(5, 4)
    pentagon = {(i, (i + 1) % 5) for i in range(5)}
    pc = {pair: ("R" if pair in pentagon or pair[::-1] in pentagon else "B")
          for pair in itertools.combinations(range(5), 2)}
    c = coloring_from_pair_colors(G, pc)
    sel = select_dense_mono_clique(G, c, _one_cluster_partition(5, 4), 1.0, 0.3, 3, [(i, 0) for i in range(5)])
    assert isinstance(sel, SelectionFailure)
    assert sel.best_size == {"R": 2, "B": 2}
