"""Desk-scale regularity partitions and the cluster-level search for a
dense monochromatic clique.

``refine_partition`` is a witness-driven surrogate for the sparse regularity
lemma: start from an equitable split, certify every cluster pair with the
sampled regularity checker, and while too many pairs are irregular, double
the cluster count, cutting every cluster along the witness sets that
touched it. All parts keep the same number of equal-size clusters; vertices
that do not fit go to the exceptional set.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .graphcore import Color, EdgeColoring, MultipartiteGraph, ParameterError, VertexSet, monochrome_view, pair_density
from .properties import check_regular_pair

Node = Tuple[int, int]  # (part, cluster index)


@dataclass
class RegularityPartition:
    t: int
    eps: float
    exceptional: List[List[int]]
    clusters: List[List[List[int]]]
    certified: bool = True
    irregular_fraction: float = 0.0
    rounds: int = 0
    boundedness: Dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return len(self.clusters)

    @property
    def cluster_size(self) -> int:
        return len(self.clusters[0][0]) if self.clusters and self.clusters[0] else 0

    def cluster(self, node: Node) -> VertexSet:
        part, a = node
        return VertexSet(part, self.clusters[part][a])

    def nodes(self) -> List[Node]:
        return [(i, a) for i in range(self.r) for a in range(self.t)]

    def check_structure(self, N: int) -> List[str]:
        """Violations of: |V_0| <= eps N, equal cluster sizes, clusters partition each part."""
        bad = []
        size = self.cluster_size
        for i in range(self.r):
            if len(self.exceptional[i]) > self.eps * N + 1e-9:
                bad.append(f"part {i}: exceptional set has {len(self.exceptional[i])} > eps N")
            if len(self.clusters[i]) != self.t:
                bad.append(f"part {i}: {len(self.clusters[i])} clusters, expected {self.t}")
            if any(len(c) != size for c in self.clusters[i]):
                bad.append(f"part {i}: unequal cluster sizes")
            allv = sorted(self.exceptional[i] + [v for c in self.clusters[i] for v in c])
            if allv != list(range(N)):
                bad.append(f"part {i}: clusters and exceptional set do not partition the part")
        return bad

    def to_dict(self) -> Dict:
        return {"t": self.t, "eps": self.eps, "certified": self.certified,
                "irregular_fraction": self.irregular_fraction,
                "parts": [{"exceptional": ex, "clusters": cl} for ex, cl in zip(self.exceptional, self.clusters)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: Dict) -> "RegularityPartition":
        parts = d["parts"]
        return cls(d["t"], d["eps"], [p["exceptional"] for p in parts], [p["clusters"] for p in parts],
                   d.get("certified", True), d.get("irregular_fraction", 0.0))


def _pair_seed(seed: int, a: Node, b: Node, t: int) -> int:
    return (seed * 1_000_003 + ((a[0] * t + a[1]) * 7919 + b[0] * t + b[1])) & 0xFFFFFFFF


def _audit_pairs(G: MultipartiteGraph, P: RegularityPartition, p: float, eps: float, audit: int, seed: int):
    irregular = []
    results = {}
    for (i, a), (j, b) in itertools.combinations(P.nodes(), 2):
        if i == j:
            continue
        cert = check_regular_pair(G, P.cluster((i, a)), P.cluster((j, b)), p, eps, "sampled", audit,
                                  _pair_seed(seed, (i, a), (j, b), P.t))
        results[((i, a), (j, b))] = cert
        if not cert.holds:
            irregular.append(((i, a), (j, b), cert))
    total = math.comb(P.r, 2) * P.t**2
    return results, irregular, (len(irregular) / total if total else 0.0)


def boundedness_audit(G: MultipartiteGraph, p: float, eta: float, lam: float, samples: int, seed: int) -> Dict:
    """Sample subset pairs of size ceil(eta N) and record the largest p-density seen."""
    rng = np.random.Generator(np.random.PCG64(seed))
    size = max(1, min(G.N, math.ceil(eta * G.N)))
    worst = 0.0
    for _ in range(samples):
        i, j = rng.choice(G.r, 2, replace=False)
        d = pair_density(G, VertexSet(int(i), rng.choice(G.N, size, replace=False)),
                         VertexSet(int(j), rng.choice(G.N, size, replace=False)), p)
        worst = max(worst, d)
    return {"eta": eta, "lambda": lam, "subset_size": size, "samples": samples,
            "max_density": worst, "bounded": worst <= lam}


def refine_partition(G_mono: MultipartiteGraph, p: float, eps: float, t0: int, T0: int,
                     audit: int = 40, seed: int = 0, lam: float = 2.0) -> RegularityPartition:
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    if not 1 <= t0 <= T0:
        raise ParameterError("need 1 <= t0 <= T0")
    N = G_mono.N
    if t0 > N:
        raise ParameterError("t0 exceeds the part size")
    rng = np.random.Generator(np.random.PCG64(seed))
    size = N // t0
    exceptional, clusters = [], []
    for i in range(G_mono.r):
        order = [int(v) for v in rng.permutation(N)]
        clusters.append([sorted(order[a * size:(a + 1) * size]) for a in range(t0)])
        exceptional.append(sorted(order[t0 * size:]))
    P = RegularityPartition(t0, eps, exceptional, clusters)
    if P.check_structure(N):
        raise ParameterError(f"initial split into {t0} clusters already breaks |V_0| <= eps N")
    P.boundedness = boundedness_audit(G_mono, p, 1.0 / math.log(max(N, 3)), lam, audit, seed) if p > 0 else {}

    while True:
        _, irregular, frac = _audit_pairs(G_mono, P, p, eps, audit, seed + P.rounds)
        P.irregular_fraction = frac
        if frac <= eps:
            P.certified = True
            return P
        nxt = _split(P, irregular, N)
        if nxt is None or nxt.t > T0:
            P.certified = False
            return P
        nxt.boundedness = P.boundedness
        P = nxt


def _split(P: RegularityPartition, irregular, N: int) -> Optional[RegularityPartition]:
    """Double t: cut each cluster in two along the witness sets that touched it."""
    touching: Dict[Node, List[set]] = {}
    for a, b, cert in irregular:
        w = cert.witness
        if w is None:
            continue
        touching.setdefault(a, []).append(set(w.X.members))
        touching.setdefault(b, []).append(set(w.Y.members))
    half = P.cluster_size // 2
    if half < 1:
        return None
    new_clusters, new_exc = [], []
    for i in range(P.r):
        part_clusters, exc = [], list(P.exceptional[i])
        for a in range(P.t):
            sets = touching.get((i, a), [])
            members = sorted(P.clusters[i][a], key=lambda v: (tuple(v not in s for s in sets), v))
            part_clusters.append(sorted(members[:half]))
            part_clusters.append(sorted(members[half:2 * half]))
            exc.extend(members[2 * half:])
        new_clusters.append(part_clusters)
        new_exc.append(sorted(exc))
    Q = RegularityPartition(2 * P.t, P.eps, new_exc, new_clusters, rounds=P.rounds + 1)
    if Q.check_structure(N):
        return None
    return Q


@dataclass
class ReducedGraph:
    r: int
    t: int
    adj: Dict[Node, set]
    certificates: Dict[Tuple[Node, Node], float]

    @property
    def nodes(self) -> List[Node]:
        return sorted(self.adj)

    def has_edge(self, a: Node, b: Node) -> bool:
        return b in self.adj.get(a, ())

    def edge_count(self) -> int:
        return sum(len(s) for s in self.adj.values()) // 2

    def missing_per_part_pair(self) -> Dict[Tuple[int, int], int]:
        out = {}
        for i, j in itertools.combinations(range(self.r), 2):
            present = sum(1 for a in range(self.t) for b in range(self.t) if self.has_edge((i, a), (j, b)))
            out[(i, j)] = self.t**2 - present
        return out

    @classmethod
    def from_edges(cls, r: int, t: int, edges: Sequence[Tuple[Node, Node]]) -> "ReducedGraph":
        adj: Dict[Node, set] = {(i, a): set() for i in range(r) for a in range(t)}
        for u, v in edges:
            if u[0] == v[0]:
                raise ParameterError("reduced graph edges must join different parts")
            adj[u].add(v)
            adj[v].add(u)
        return cls(r, t, adj, {})


def reduced_graph(G_mono: MultipartiteGraph, P: RegularityPartition, p: float, eps: float,
                  audit: int = 40, seed: int = 0) -> ReducedGraph:
    """Cluster graph whose edges are the pairs passing the sampled regularity check."""
    results, _, _ = _audit_pairs(G_mono, P, p, eps, audit, seed)
    adj: Dict[Node, set] = {n: set() for n in P.nodes()}
    certs = {}
    for (a, b), cert in results.items():
        certs[(a, b)] = cert.extreme
        if cert.holds:
            adj[a].add(b)
            adj[b].add(a)
    return ReducedGraph(P.r, P.t, adj, certs)


@dataclass
class CliqueSearch:
    clusters: Optional[List[Node]]
    status: str  # found | absent | budget
    nodes_visited: int = 0

    @property
    def found(self) -> bool:
        return self.clusters is not None


def iter_regular_cliques(F: ReducedGraph, r_target: int, budget: int = 200_000) -> Iterator[List[Node]]:
    """Transversal cliques of size r_target (one cluster per used part) in
    search order: parts ascending, clusters by degree descending. Stops
    silently after ``budget`` search nodes."""
    yield from _clique_walk(F, r_target, budget, [0])


def _clique_walk(F, r_target, budget, counter):
    deg = {n: len(F.adj[n]) for n in F.adj}
    by_part = {i: sorted((n for n in F.adj if n[0] == i), key=lambda n: (-deg[n], n[1])) for i in range(F.r)}
    chosen: List[Node] = []

    def walk(part: int):
        if len(chosen) == r_target:
            yield list(chosen)
            return
        if part >= F.r or F.r - part < r_target - len(chosen):
            return
        for n in by_part[part]:
            counter[0] += 1
            if counter[0] > budget:
                raise _BudgetExceeded
            if all(F.has_edge(n, c) for c in chosen):
                chosen.append(n)
                yield from walk(part + 1)
                chosen.pop()
        yield from walk(part + 1)

    try:
        yield from walk(0)
    except _BudgetExceeded:
        counter.append("budget")


class _BudgetExceeded(Exception):
    pass


def find_regular_clique(F: ReducedGraph, r_target: int, budget: int = 200_000) -> CliqueSearch:
    if r_target > F.r:
        raise ParameterError("r_target exceeds the number of parts")
    counter: list = [0]
    for clique in _clique_walk(F, r_target, budget, counter):
        assert all(F.has_edge(a, b) for a, b in itertools.combinations(clique, 2))
        return CliqueSearch(clique, "found", counter[0])
    status = "budget" if "budget" in counter else "absent"
    return CliqueSearch(None, status, counter[0])


# ---------------------------------------------------------------------------

@dataclass
class CliqueSelection:
    color: Color
    clusters: List[Node]
    sets: List[VertexSet]
    density_floor: float
    eps0: float
    density_coloring: Dict[Tuple[int, int], str] = field(default_factory=dict)


@dataclass
class SelectionFailure:
    reason: str
    best_size: Dict[str, int]
    density_coloring: Dict[Tuple[int, int], str] = field(default_factory=dict)


def _cliques_of_size(adj: Dict[int, set], verts: List[int], size: int) -> Iterator[List[int]]:
    def grow(clique, cands):
        if len(clique) == size:
            yield list(clique)
            return
        for n, v in enumerate(cands):
            if len(clique) + len(cands) - n < size:
                return
            yield from grow(clique + [v], [u for u in cands[n + 1:] if u in adj[v]])
    yield from grow([], verts)


def _max_clique(adj: Dict[int, set], verts: List[int]) -> int:
    best = 0
    def grow(size, cands):
        nonlocal best
        best = max(best, size)
        for n, v in enumerate(cands):
            if size + len(cands) - n <= best:
                return
            grow(size + 1, [u for u in cands[n + 1:] if u in adj[v]])
    grow(0, verts)
    return best


def _greedy_cliques(adj, verts, size, restarts, rng) -> Iterator[List[int]]:
    for _ in range(restarts):
        order = list(rng.permutation(verts))
        clique = []
        for v in order:
            if all(int(v) in adj[u] for u in clique):
                clique.append(int(v))
            if len(clique) == size:
                yield sorted(clique)
                break


def select_dense_mono_clique(G: MultipartiteGraph, c: EdgeColoring, P: RegularityPartition, p: float,
                             eps0: float, Delta_bar: int, clusters: Sequence[Node], audit: int = 40,
                             seed: int = 0, exhaustive_limit: int = 12, restarts: int = 200,
                             density_min: float = 1 / 3) -> "CliqueSelection | SelectionFailure":
    """Color each pair of the given clusters by its denser monochromatic view and
    look for Delta_bar clusters spanning one color, re-certified (eps0, p)-regular
    with p-density at least 1/3 in that color."""
    k = len(clusters)
    views = {Color.RED: monochrome_view(G, c, Color.RED), Color.BLUE: monochrome_view(G, c, Color.BLUE)}
    sets = [P.cluster(n) for n in clusters]
    pair_color: Dict[Tuple[int, int], Color] = {}
    dens: Dict[Tuple[Color, int, int], float] = {}
    for a, b in itertools.combinations(range(k), 2):
        dR = pair_density(views[Color.RED], sets[a], sets[b], p)
        dB = pair_density(views[Color.BLUE], sets[a], sets[b], p)
        dens[(Color.RED, a, b)], dens[(Color.BLUE, a, b)] = dR, dB
        pair_color[(a, b)] = Color.RED if dR >= dB else Color.BLUE
    shown = {(clusters[a], clusters[b]).__repr__(): col.value for (a, b), col in pair_color.items()}
    best: Dict[str, int] = {}
    rng = np.random.Generator(np.random.PCG64(seed))
    if Delta_bar <= 1 and k:
        return CliqueSelection(Color.RED, [clusters[0]], [sets[0]], math.inf, eps0, shown)
    for col in (Color.RED, Color.BLUE):
        adj = {v: set() for v in range(k)}
        for (a, b), cc in pair_color.items():
            if cc is col:
                adj[a].add(b)
                adj[b].add(a)
        best[col.value] = _max_clique(adj, list(range(k))) if k <= exhaustive_limit else -1
        if k <= exhaustive_limit:
            cands = _cliques_of_size(adj, list(range(k)), Delta_bar)
        else:
            cands = _greedy_cliques(adj, list(range(k)), Delta_bar, restarts, rng)
        for clique in cands:
            ok = True
            floor = math.inf
            for a, b in itertools.combinations(clique, 2):
                d = dens[(col, a, b)]
                floor = min(floor, d)
                if d < density_min:
                    ok = False
                    break
                cert = check_regular_pair(views[col], sets[a], sets[b], p, eps0, "sampled", audit,
                                          _pair_seed(seed, clusters[a], clusters[b], P.t))
                if not cert.holds:
                    ok = False
                    break
            if ok:
                return CliqueSelection(col, [clusters[v] for v in clique], [sets[v] for v in clique],
                                       floor, eps0, shown)
    return SelectionFailure(f"no monochromatic K_{Delta_bar} passed re-certification", best, shown)
