"""Brute-force ground truth for small instances.

Nothing here is clever on purpose. Each oracle refuses inputs beyond its
budget by raising :class:`OracleInfeasible` instead of approximating.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .graphcore import DomainError, MultipartiteGraph, VertexSet

Edge = Tuple[int, int]

TURAN_BUDGET = 9        # r * k
ARROW_EDGE_BUDGET = 20
REGULARITY_BUDGET = 18  # |X| + |Y|


class OracleInfeasible(RuntimeError):
    """Instance lies outside the oracle's exhaustive budget."""


# ---------------------------------------------------------------------------
# Turan numbers in K_r(k)

@dataclass
class TuranResult:
    r: int
    k: int
    value: int
    witness: List[Tuple[Tuple[int, int], Tuple[int, int]]]


def turan_number(r: int, k: int) -> TuranResult:
    """Maximum number of edges of a K_r-free subgraph of K_r(k), by exhaustive search.

    Equivalent to ``e(K_r(k))`` minus a minimum set of edges meeting every
    transversal K_r. The hitting set is found by branch and bound: pick a
    transversal clique not yet hit, branch on which of its edges to delete,
    and forbid the earlier choices in later branches.
    """
    if r < 2 or k < 1:
        raise DomainError("need r >= 2 and k >= 1")
    if r * k > TURAN_BUDGET:
        raise OracleInfeasible(f"turan search limited to r*k <= {TURAN_BUDGET}, got {r * k}")
    verts = [(i, a) for i in range(r) for a in range(k)]
    vid = {v: n for n, v in enumerate(verts)}
    all_edges = [(vid[u], vid[v]) for u, v in itertools.combinations(verts, 2) if u[0] != v[0]]
    eid = {e: n for n, e in enumerate(all_edges)}
    cliques = []
    for choice in itertools.product(range(k), repeat=r):
        vs = [vid[(i, a)] for i, a in enumerate(choice)]
        cliques.append(frozenset(eid[(min(u, v), max(u, v))] for u, v in itertools.combinations(vs, 2)))

    best: List[Optional[FrozenSet[int]]] = [None]
    best_size = [len(all_edges) + 1]

    def lower_bound(deleted: Set[int]) -> int:
        # greedily packed edge-disjoint unhit cliques each need one more deletion
        used: Set[int] = set()
        lb = 0
        for c in cliques:
            if c & deleted or c & used:
                continue
            used |= c
            lb += 1
        return lb

    def search(deleted: Set[int], kept: Set[int]) -> None:
        if len(deleted) + lower_bound(deleted) >= best_size[0]:
            return
        target = next((c for c in cliques if not (c & deleted)), None)
        if target is None:
            best[0] = frozenset(deleted)
            best_size[0] = len(deleted)
            return
        options = sorted(target - kept)
        added: List[int] = []
        for e in options:
            deleted.add(e)
            search(deleted, kept)
            deleted.discard(e)
            kept.add(e)
            added.append(e)
        for e in added:
            kept.discard(e)

    search(set(), set())
    assert best[0] is not None
    keep = [all_edges[n] for n in range(len(all_edges)) if n not in best[0]]
    witness = [(verts[u], verts[v]) for u, v in keep]
    return TuranResult(r, k, len(keep), witness)


# ---------------------------------------------------------------------------
# arrow relation G -> (H, H)

def _normalize(edges: Sequence[Sequence[int]]) -> List[Edge]:
    out = sorted({(min(u, v), max(u, v)) for u, v in edges if u != v})
    return out


def complete_graph(n: int) -> List[Edge]:
    return list(itertools.combinations(range(n), 2))


def path_graph(n: int) -> List[Edge]:
    return [(i, i + 1) for i in range(n - 1)]


def _contains_copy_through(adj: Dict[int, Set[int]], h_edges: List[Edge], h_adj: Dict[int, Set[int]],
                           edge: Edge) -> bool:
    """Does the graph ``adj`` contain H as a subgraph using ``edge``?"""
    h_verts = sorted(h_adj)
    for hu, hv in h_edges:
        for gu, gv in (edge, edge[::-1]):
            phi = {hu: gu, hv: gv}
            if _extend(adj, h_adj, h_verts, phi, {gu, gv}):
                return True
    return False


def _extend(adj, h_adj, h_verts, phi, used) -> bool:
    # next H vertex: one with a mapped neighbour if possible
    todo = [h for h in h_verts if h not in phi]
    if not todo:
        return True
    todo.sort(key=lambda h: -sum(1 for x in h_adj[h] if x in phi))
    h = todo[0]
    mapped_nbrs = [phi[x] for x in h_adj[h] if x in phi]
    if mapped_nbrs:
        cands = set(adj.get(mapped_nbrs[0], ()))
        for g in mapped_nbrs[1:]:
            cands &= adj.get(g, set())
    else:
        cands = set(adj)
    for g in sorted(cands - used):
        phi[h] = g
        used.add(g)
        if _extend(adj, h_adj, h_verts, phi, used):
            return True
        del phi[h]
        used.discard(g)
    return False


def arrow_check(G_edges: Sequence[Sequence[int]], H_edges: Sequence[Sequence[int]]) -> bool:
    """True iff every red/blue coloring of G contains a monochromatic copy of H.

    Backtracking over edge colors; a branch dies as soon as the newly colored
    edge completes a monochromatic H. The next edge colored is the one
    touching the most already-colored edges. The first edge is fixed Red
    (color swap symmetry).
    """
    G = _normalize(G_edges)
    H = _normalize(H_edges)
    if len(G) > ARROW_EDGE_BUDGET:
        raise OracleInfeasible(f"arrow search limited to e(G) <= {ARROW_EDGE_BUDGET}, got {len(G)}")
    if not H:
        return True
    h_adj: Dict[int, Set[int]] = {}
    for u, v in H:
        h_adj.setdefault(u, set()).add(v)
        h_adj.setdefault(v, set()).add(u)
    if not G:
        return False
    incident: Dict[int, List[int]] = {}
    for n, (u, v) in enumerate(G):
        incident.setdefault(u, []).append(n)
        incident.setdefault(v, []).append(n)
    color: List[Optional[int]] = [None] * len(G)
    adj = [dict(), dict()]

    def add(c: int, e: Edge) -> None:
        u, v = e
        adj[c].setdefault(u, set()).add(v)
        adj[c].setdefault(v, set()).add(u)

    def remove(c: int, e: Edge) -> None:
        u, v = e
        adj[c][u].discard(v)
        adj[c][v].discard(u)

    def pick() -> Optional[int]:
        best, score = None, -1
        for n, (u, v) in enumerate(G):
            if color[n] is not None:
                continue
            s = sum(1 for m in incident[u] + incident[v] if color[m] is not None)
            if s > score:
                best, score = n, s
        return best

    def avoid(first: bool) -> bool:
        n = pick()
        if n is None:
            return True
        for c in ((0,) if first else (0, 1)):
            color[n] = c
            add(c, G[n])
            if not _contains_copy_through(adj[c], H, h_adj, G[n]) and avoid(False):
                return True
            remove(c, G[n])
            color[n] = None
        return False

    return not avoid(True)


# ---------------------------------------------------------------------------
# regularity by full enumeration

@dataclass
class RegularityVerdict:
    regular: bool
    worst_deviation: Fraction
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]


def exact_regularity(G: MultipartiteGraph, X: VertexSet, Y: VertexSet, p: float, eps: float) -> RegularityVerdict:
    """Enumerate every X' subset of X and Y' subset of Y with |X'| >= eps|X|, |Y'| >= eps|Y|.

    Pure Python with exact rational densities; the comparison with eps
    allows 1e-9 of slack against the float value of eps.
    """
    if len(X) + len(Y) > REGULARITY_BUDGET:
        raise OracleInfeasible(f"exact regularity limited to |X| + |Y| <= {REGULARITY_BUDGET}")
    if X.part == Y.part:
        raise DomainError("X and Y lie in the same part")
    xs, ys = list(X.members), list(Y.members)
    adj = {x: {y for y in ys if G.has_edge((X.part, x), (Y.part, y))} for x in xs}
    pf = Fraction(p)
    total = sum(len(adj[x]) for x in xs)
    d = Fraction(total) / (pf * len(xs) * len(ys))
    worst, witness = Fraction(-1), None
    xmin = [s for s in range(1, len(xs) + 1) if s >= eps * len(xs) - 1e-9][0]
    ymin = [s for s in range(1, len(ys) + 1) if s >= eps * len(ys) - 1e-9][0]
    y_subsets = [c for s in range(ymin, len(ys) + 1) for c in itertools.combinations(ys, s)]
    for sx in range(xmin, len(xs) + 1):
        for xsub in itertools.combinations(xs, sx):
            for ysub in y_subsets:
                yset = set(ysub)
                e = sum(len(adj[x] & yset) for x in xsub)
                dev = abs(d - Fraction(e) / (pf * sx * len(ysub)))
                if dev > worst:
                    worst, witness = dev, (xsub, ysub)
    regular = float(worst) <= eps + 1e-9
    return RegularityVerdict(regular, worst, None if regular else witness)


# ---------------------------------------------------------------------------
# Ramsey numbers R(K_m)

@dataclass(frozen=True)
class RamseyValue:
    m: int
    exact: Optional[int]
    lower: int
    upper: int
    source: str


# Classical diagonal values: R(3,3) = 6 (Greenwood-Gleason 1955), R(4,4) = 18 (same).
_RAMSEY_TABLE = {1: 1, 2: 2, 3: 6, 4: 18}


def ramsey_bound(m: int) -> RamseyValue:
    if m < 1:
        raise DomainError("m must be positive")
    if m in _RAMSEY_TABLE:
        v = _RAMSEY_TABLE[m]
        return RamseyValue(m, v, v, v, "classical table (Greenwood-Gleason 1955)")
    lower = math.floor(2 ** (m / 2))
    upper = math.comb(2 * m - 2, m - 1)
    return RamseyValue(m, None, lower, upper, "Erdos 2^(m/2) lower bound, Erdos-Szekeres binomial upper bound")
