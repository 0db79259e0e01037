import itertools
import math
import time

import pytest

from monoembed.graphcore import VertexSet, generate_random
from monoembed.oracles import (OracleInfeasible, arrow_check, complete_graph, exact_regularity, path_graph,
                               ramsey_bound, turan_number)

from _util import graph_from_edges


def _has_transversal_clique(r, edges):
    es = {frozenset(e) for e in edges}
    k = 1 + max(v[1] for e in edges for v in e) if edges else 1
    for choice in itertools.product(range(k), repeat=r):
        vs = [(i, a) for i, a in enumerate(choice)]
        if all(frozenset((u, v)) in es for u, v in itertools.combinations(vs, 2)):
            return True
    return False


@pytest.mark.parametrize("r,k", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2)])
def test_turan_formula(r, k):
    res = turan_number(r, k)
    assert res.value == (math.comb(r, 2) - 1) * k * k
    assert len(res.witness) == res.value
    if r > 2:
        assert not _has_transversal_clique(r, res.witness)


def test_turan_budget():
    with pytest.raises(OracleInfeasible):
        turan_number(5, 5)
    with pytest.raises(ValueError):
        turan_number(1, 3)


def test_arrow_examples():
    t = time.perf_counter()
    assert arrow_check(complete_graph(6), complete_graph(3))
    assert not arrow_check(complete_graph(5), complete_graph(3))
    assert arrow_check(complete_graph(3), path_graph(3))
    assert time.perf_counter() - t < 60


def test_arrow_monotone_on_nested_chain():
    H = complete_graph(3)
    K6 = complete_graph(6)
    prev = False
    for m in range(len(K6) + 1):
        now = arrow_check(K6[:m], H)
        assert now or not prev
        prev = now
    assert prev


def test_arrow_edge_cases_and_budget():
    assert arrow_check(complete_graph(3), [])
    assert not arrow_check([], [(0, 1)])
    assert arrow_check([(0, 1)], [(0, 1)])
    with pytest.raises(OracleInfeasible):
        arrow_check(complete_graph(7), complete_graph(3))


def test_exact_regularity_examples():
    G = graph_from_edges(2, 2, [(0, 0, 1, 0)])
    X, Y = VertexSet(0, [0, 1]), VertexSet(1, [0, 1])
    v = exact_regularity(G, X, Y, 1.0, 0.3)
    assert not v.regular and v.witness == ((0,), (0,))
    assert exact_regularity(G, X, Y, 1.0, 1.0).regular
    K = generate_random(2, 4, 1.0, 0)
    assert exact_regularity(K, VertexSet(0, range(4)), VertexSet(1, range(4)), 1.0, 0.1).regular
    E = generate_random(2, 4, 0.0, 0)
    assert exact_regularity(E, VertexSet(0, range(4)), VertexSet(1, range(4)), 0.5, 0.1).regular
    with pytest.raises(OracleInfeasible):
        big = generate_random(2, 10, 0.5, 0)
        exact_regularity(big, VertexSet(0, range(10)), VertexSet(1, range(10)), 0.5, 0.3)


def test_ramsey_bounds():
    assert ramsey_bound(2).exact == 2
    assert ramsey_bound(3).exact == 6
    assert ramsey_bound(4).exact == 18
    r18 = ramsey_bound(18)
    assert r18.exact is None and r18.upper == math.comb(34, 17) and r18.lower == 2**9
    # the table entry for m = 3 agrees with the arrow oracle
    assert arrow_check(complete_graph(6), complete_graph(3))
    assert not arrow_check(complete_graph(5), complete_graph(3))
