"""Class-by-class embedding of a bounded-degree target into one color of a
2-edge-colored multipartite host.

Class ``W_j`` of the prepared target goes into cluster ``A_j``. Before class
``l + 1`` is placed, every unembedded ``z`` carries a candidate set
``C_l(z)``: the vertices of ``A_g(z)`` adjacent (in the chosen color) to the
images of all already-embedded neighbours of ``z``. A level filters each
``C_l(y)`` down to vertices that leave enough room for the right-neighbours
of ``y``, finds a system of distinct representatives by bipartite matching,
and intersects the candidate sets of the right-neighbours with the new
images' neighbourhoods.

Failures are returned as :class:`Diagnostic` values, never raised.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import ConstantSchedule
from .graphcore import (
    Color,
    EdgeColoring,
    MultipartiteGraph,
    ParameterError,
    Vertex,
    VertexSet,
    monochrome_view,
)
from .hprep import PrepPlan, TargetGraph, prepare
from .properties import dense_auto
from .regularity import (
    CliqueSelection,
    SelectionFailure,
    iter_regular_cliques,
    reduced_graph,
    refine_partition,
    select_dense_mono_clique,
)

STAGES = ("size-floor", "denseness", "hall", "clique-selection")


class ConfigurationError(ValueError):
    """The plan needs more clusters than were supplied."""


class InternalConsistencyError(AssertionError):
    """A state invariant broke: a bug, not a run outcome."""


@dataclass
class Diagnostic:
    failed_stage: str
    level: Optional[int] = None
    offending: Dict[str, Any] = field(default_factory=dict)
    counters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"failed_stage": self.failed_stage, "level": self.level,
                "offending": self.offending, "counters": self.counters}


@dataclass
class EmbeddingState:
    level: int
    phi: Dict[int, Vertex]
    candidates: Dict[int, np.ndarray]
    view: MultipartiteGraph
    plan: PrepPlan
    H: TargetGraph
    clusters: Dict[int, VertexSet]
    eps_schedule: Tuple[float, ...]
    p: float
    floor_frac: float = 1.0
    color: Optional[Color] = None
    debug: bool = False
    debug_checks: int = 0
    debug_mismatches: int = 0

    @property
    def complete(self) -> bool:
        return len(self.phi) == self.H.n

    def cluster_of(self, w: int) -> VertexSet:
        return self.clusters[self.plan.g[w]]

    def floor(self, z: int, level: int) -> float:
        """floor_frac * (p/4)^ldeg^level(z) * |A_g(z)|."""
        return self.floor_frac * (self.p / 4) ** self.plan.ldeg[z][level] * len(self.cluster_of(z))


def init_state(view: MultipartiteGraph, clusters: Sequence[VertexSet], plan: PrepPlan, H: TargetGraph,
               eps_schedule: Sequence[float], p: float, floor_frac: float = 1.0,
               color: Optional[Color] = None, debug: bool = False) -> EmbeddingState:
    """Level 0: nothing embedded, every candidate set is its whole cluster.

    ``clusters[k]`` receives the k-th nonempty class of the plan.
    """
    used = plan.nonempty_classes()
    if len(used) > len(clusters):
        raise ConfigurationError(f"plan has {len(used)} nonempty classes but only {len(clusters)} clusters")
    cmap = {j: clusters[k] for k, j in enumerate(used)}
    cand = {z: cmap[plan.g[z]].index.copy() for z in range(H.n)}
    return EmbeddingState(0, {}, cand, view, plan, H, cmap, tuple(float(e) for e in eps_schedule), p,
                          float(floor_frac), color, debug)


def right_neighbours(state: EmbeddingState, y: int) -> List[int]:
    nxt = state.level + 1
    return [z for z in state.H.adj[y] if state.plan.g[z] > nxt]


def good_set(state: EmbeddingState, y: int, check_level: str = "degree", samples: int = 30,
             seed: int = 0) -> np.ndarray:
    """Vertices v of C_l(y) with |N(v) & C_l(z)| >= floor for every right-neighbour z.

    With ``check_level="denseness"`` each surviving v must also keep every
    H-edge {z, z'} beyond the next class with an endpoint among the
    right-neighbours (sampled-)dense in the updated candidate sets.
    """
    if check_level not in ("degree", "denseness"):
        raise ParameterError(f"unknown check level {check_level!r}")
    nxt = state.level + 1
    if state.plan.g[y] != nxt or y in state.phi:
        raise ParameterError(f"vertex {y} is not in the next class {nxt}")
    Cy = state.candidates[y]
    ypart = state.cluster_of(y).part
    keep = np.ones(len(Cy), dtype=bool)
    right = right_neighbours(state, y)
    for z in right:
        zpart = state.cluster_of(z).part
        counts = state.view.block(ypart, zpart)[np.ix_(Cy, state.candidates[z])].sum(1)
        keep &= counts >= state.floor(z, nxt) - 1e-12
    if check_level == "denseness" and right:
        eps = state.eps_schedule[min(nxt, len(state.eps_schedule) - 1)]
        rset = set(right)
        edges = {(min(z, z2), max(z, z2)) for z in right for z2 in state.H.adj[z]
                 if state.plan.g[z2] > nxt}
        for n, v in enumerate(Cy):
            if not keep[n]:
                continue
            for z, z2 in edges:
                sets = []
                for w in (z, z2):
                    wpart = state.cluster_of(w).part
                    C = state.candidates[w]
                    if w in rset:
                        C = C[state.view.neighbors_in((ypart, int(v)), wpart)[C]]
                    sets.append(VertexSet(wpart, C))
                if not dense_auto(state.view, sets[0], sets[1], state.p, eps, 1 / 3, samples, seed + n).holds:
                    keep[n] = False
                    break
    return Cy[keep]


class _Matcher:
    """Hopcroft-Karp on left vertices 0..L-1 with adjacency lists."""

    def __init__(self, adj: List[List[int]]):
        self.adj = adj
        self.match_l: List[Optional[int]] = [None] * len(adj)
        self.match_r: Dict[int, int] = {}

    def run(self) -> int:
        size = 0
        while True:
            dist = self._bfs()
            if dist is None:
                return size
            for u in range(len(self.adj)):
                if self.match_l[u] is None and self._dfs(u, dist):
                    size += 1

    def _bfs(self) -> Optional[List[float]]:
        dist = [math.inf] * len(self.adj)
        q = deque()
        for u, m in enumerate(self.match_l):
            if m is None:
                dist[u] = 0
                q.append(u)
        found = False
        while q:
            u = q.popleft()
            for v in self.adj[u]:
                w = self.match_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == math.inf:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist if found else None

    def _dfs(self, u: int, dist: List[float]) -> bool:
        for v in self.adj[u]:
            w = self.match_r.get(v)
            if w is None or (dist[w] == dist[u] + 1 and self._dfs(w, dist)):
                self.match_l[u] = v
                self.match_r[v] = u
                return True
        dist[u] = math.inf
        return False

    def deficient_set(self) -> List[int]:
        """Left vertices reachable from unmatched ones by alternating paths (Koenig)."""
        seen = {u for u, m in enumerate(self.match_l) if m is None}
        q = deque(seen)
        while q:
            u = q.popleft()
            for v in self.adj[u]:
                w = self.match_r.get(v)
                if w is not None and w not in seen:
                    seen.add(w)
                    q.append(w)
        return sorted(seen)


def hall_match(state: EmbeddingState, good_sets: Dict[int, np.ndarray]) -> "Dict[int, int] | Diagnostic":
    """Injective psi with psi(y) in C(y) for the whole next class, or a Hall violation.

    Most constrained vertices first, host vertices in ascending index.
    """
    ys = sorted(good_sets, key=lambda y: (len(good_sets[y]), y))
    adj = [sorted(int(v) for v in good_sets[y]) for y in ys]
    m = _Matcher(adj)
    size = m.run()
    if size == len(ys):
        psi = {y: m.match_l[n] for n, y in enumerate(ys)}
        assert all(psi[y] in set(good_sets[y].tolist()) for y in ys)
        assert len(set(psi.values())) == len(psi)
        return psi
    bad = m.deficient_set()
    Y = [ys[n] for n in bad]
    union = set().union(*(set(adj[n]) for n in bad)) if bad else set()
    return Diagnostic("hall", state.level + 1, {"Y": Y, "union": sorted(union)},
                      {"class_size": len(ys), "matched": size, "Y_size": len(Y), "union_size": len(union)})


def candidates_from_definition(state: EmbeddingState, z: int) -> np.ndarray:
    """C_l(z) recomputed from scratch: common neighbourhood of the images of
    z's embedded neighbours, inside A_g(z)."""
    A = state.cluster_of(z)
    mask = np.ones(len(A), dtype=bool)
    idx = A.index
    for x in state.H.adj[z]:
        if state.plan.g[x] <= state.level:
            mask &= state.view.neighbors_in(state.phi[x], A.part)[idx]
    return idx[mask]


def check_state(state: EmbeddingState) -> List[str]:
    bad = []
    images = list(state.phi.values())
    if len(set(images)) != len(images):
        bad.append("phi is not injective")
    for w, v in state.phi.items():
        A = state.cluster_of(w)
        if v.part != A.part or v.index not in set(A.members):
            bad.append(f"phi({w}) = {tuple(v)} outside its cluster")
    for u, w in state.H.edges():
        if u in state.phi and w in state.phi and not state.view.has_edge(state.phi[u], state.phi[w]):
            bad.append(f"edge {u}-{w} not mapped to a host edge of the chosen color")
    return bad


def advance(state: EmbeddingState, psi: Dict[int, int]) -> EmbeddingState:
    """Place the next class and update candidate sets of its right-neighbours."""
    nxt = state.level + 1
    cls = state.plan.classes[nxt - 1]
    if set(psi) != set(cls):
        raise InternalConsistencyError(f"psi covers {sorted(psi)} but class {nxt} is {cls}")
    phi = dict(state.phi)
    for y, v in psi.items():
        phi[y] = Vertex(state.cluster_of(y).part, int(v))
    cand = {}
    for z, C in state.candidates.items():
        if z in psi:
            continue
        if state.plan.g[z] <= nxt:
            raise InternalConsistencyError(f"vertex {z} of class {state.plan.g[z]} left unembedded")
        hits = [y for y in state.H.adj[z] if y in psi]
        if len(hits) > 1:
            raise InternalConsistencyError(f"vertex {z} has {len(hits)} neighbours in class {nxt}")
        if hits:
            C = C[state.view.neighbors_in(phi[hits[0]], state.cluster_of(z).part)[C]]
        cand[z] = C
    new = EmbeddingState(nxt, phi, cand, state.view, state.plan, state.H, state.clusters, state.eps_schedule,
                         state.p, state.floor_frac, state.color, state.debug, state.debug_checks,
                         state.debug_mismatches)
    bad = check_state(new)
    if bad:
        raise InternalConsistencyError("; ".join(bad))
    if new.debug:
        for z, C in new.candidates.items():
            new.debug_checks += 1
            if not np.array_equal(np.sort(C), np.sort(candidates_from_definition(new, z))):
                new.debug_mismatches += 1
        if new.debug_mismatches:
            raise InternalConsistencyError(f"{new.debug_mismatches} candidate sets differ from their definition")
    return new


# ---------------------------------------------------------------------------

@dataclass
class Verification:
    ok: bool
    violations: List[str]

    def __bool__(self) -> bool:
        return self.ok


def verify_embedding(G: MultipartiteGraph, coloring: EdgeColoring, H: TargetGraph, phi: Dict[int, Sequence[int]],
                     color: "Color | str", clusters: Optional[Dict[int, VertexSet]] = None,
                     g: Optional[Sequence[int]] = None) -> Verification:
    """Standalone check: phi total and injective, inside the assigned clusters,
    and every H-edge lands on a host edge of ``color``."""
    color = Color.parse(color)
    bad = []
    if sorted(phi) != list(range(H.n)):
        bad.append("phi is not defined on every target vertex")
    images = [tuple(v) for v in phi.values()]
    if len(set(images)) != len(images):
        bad.append("injectivity: two target vertices share an image")
    if clusters is not None and g is not None:
        for w, v in phi.items():
            A = clusters.get(g[w])
            if A is None or v[0] != A.part or v[1] not in A.members:
                bad.append(f"cluster: phi({w}) = {tuple(v)} not in A_{g[w]}")
    for u, w in H.edges():
        if u not in phi or w not in phi:
            continue
        a, b = tuple(phi[u]), tuple(phi[w])
        if a[0] == b[0] or not G.has_edge(a, b):
            bad.append(f"edge: {u}-{w} maps to non-edge {a}-{b}")
        elif coloring.color_of(a, b) is not color:
            bad.append(f"color: {u}-{w} maps to a {coloring.color_of(a, b).name} edge")
    return Verification(not bad, bad)


@dataclass
class EmbedResult:
    success: bool
    color: Optional[Color] = None
    phi: Dict[int, Vertex] = field(default_factory=dict)
    levels: int = 0
    per_level: List[Dict[str, Any]] = field(default_factory=list)
    diagnostic: Optional[Diagnostic] = None
    clusters: Dict[int, VertexSet] = field(default_factory=dict)
    plan: Optional[PrepPlan] = None
    stats: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "success": self.success,
            "color": self.color.value if self.color else None,
            "phi": [[w, v.part, v.index] for w, v in sorted(self.phi.items())],
            "levels": self.levels,
            "per_level": self.per_level,
            "stats": self.stats,
        }
        if self.diagnostic is not None:
            out["diagnostic"] = self.diagnostic.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def estimate_p(G: MultipartiteGraph) -> float:
    possible = math.comb(G.r, 2) * G.N**2
    return G.edge_count() / possible if possible else 0.0


def embed(G: MultipartiteGraph, coloring: EdgeColoring, H: TargetGraph, schedule: ConstantSchedule,
          p: Optional[float] = None, seed: int = 0, check_level: str = "degree", debug: bool = False,
          theoretical_floors: bool = False, audit: int = 40, clique_budget: int = 64) -> EmbedResult:
    """Full pipeline: regularity partition of the red view, reduced graph,
    transversal regular cliques, density coloring and monochromatic clique,
    target preparation, then the level loop.

    Up to ``clique_budget`` transversal cliques of the reduced graph are
    tried until one yields a dense monochromatic clique of the needed size.
    """
    t_start = time.perf_counter()
    if H.Delta > schedule.Delta:
        raise ParameterError(f"target has maximum degree {H.Delta} > schedule Delta {schedule.Delta}")
    if p is None:
        p = estimate_p(G)
    stats: Dict[str, Any] = {"p": p, "seed": seed}
    if p <= 0:
        return EmbedResult(False, diagnostic=Diagnostic("clique-selection", None, {"reason": "host has no edges"}),
                           stats=stats)
    plan = prepare(H, schedule.Delta)
    used = plan.nonempty_classes()
    stats.update(classes_used=len(used), colors_used=plan.colors_used, brooks_miss=plan.brooks_miss)
    if not used:
        return EmbedResult(True, None, {}, 0, [], None, {}, plan, stats)
    if len(used) > G.r:
        return EmbedResult(False, plan=plan, stats=stats, diagnostic=Diagnostic(
            "clique-selection", None, {"reason": f"{len(used)} classes need {len(used)} parts, host has {G.r}"}))

    red = monochrome_view(G, coloring, Color.RED)
    eps = float(schedule.eps)
    P = refine_partition(red, p, eps, schedule.t0, schedule.T0, audit, seed)
    F = reduced_graph(red, P, p, eps, audit, seed)
    stats.update(t=P.t, partition_certified=P.certified, irregular_fraction=P.irregular_fraction,
                 cluster_size=P.cluster_size, reduced_edges=F.edge_count())

    selection: "CliqueSelection | SelectionFailure | None" = None
    tried = 0
    for K in iter_regular_cliques(F, G.r):
        tried += 1
        selection = select_dense_mono_clique(G, coloring, P, p, float(schedule.eps0), len(used), K, audit,
                                             seed + tried)
        if isinstance(selection, CliqueSelection) or tried >= clique_budget:
            break
    stats["cliques_tried"] = tried
    if not isinstance(selection, CliqueSelection):
        off = {"reason": "reduced graph has no transversal K_r"} if selection is None else \
            {"reason": selection.reason, "best_size": selection.best_size}
        return EmbedResult(False, plan=plan, stats=stats, diagnostic=Diagnostic("clique-selection", None, off))
    color = selection.color
    stats["density_floor"] = selection.density_floor

    for k, j in enumerate(used):
        if len(plan.classes[j - 1]) > len(selection.sets[k]):
            return EmbedResult(False, color, plan=plan, stats=stats, diagnostic=Diagnostic(
                "size-floor", j - 1, {"class": j, "class_size": len(plan.classes[j - 1]),
                                      "cluster_size": len(selection.sets[k])}))

    view = monochrome_view(G, coloring, color)
    floor_frac = 1.0 if theoretical_floors else float(schedule.floor_frac)
    state = init_state(view, selection.sets, plan, H, [float(e) for e in schedule.eps_chain], p, floor_frac,
                       color, debug)
    per_level = []
    for j in range(1, plan.num_classes + 1):
        ys = plan.classes[j - 1]
        if not ys:
            state = advance(state, {})
            continue
        t0 = time.perf_counter()
        goods = {y: good_set(state, y, check_level, seed=seed + j) for y in ys}
        small = [y for y in ys if len(goods[y]) == 0]
        if small:
            return EmbedResult(False, color, dict(state.phi), state.level, per_level, Diagnostic(
                "size-floor", state.level, {"empty_good_sets": small},
                {"candidate_sizes": {y: len(state.candidates[y]) for y in small}}), state.clusters, plan, stats)
        psi = hall_match(state, goods)
        if isinstance(psi, Diagnostic):
            return EmbedResult(False, color, dict(state.phi), state.level, per_level, psi, state.clusters, plan,
                               stats)
        state = advance(state, psi)
        min_cand = min((len(C) for C in state.candidates.values()), default=None)
        per_level.append({"class": j, "class_size": len(ys), "min_candidate": min_cand,
                          "min_good": min(len(g) for g in goods.values()),
                          "matching_time": time.perf_counter() - t0})
        if theoretical_floors:
            short = [z for z, C in state.candidates.items() if len(C) < state.floor(z, state.level) - 1e-9]
            if short:
                return EmbedResult(False, color, dict(state.phi), state.level, per_level, Diagnostic(
                    "size-floor", state.level, {"below_floor": short[:20]}), state.clusters, plan, stats)

    stats["debug_checks"] = state.debug_checks
    stats["debug_mismatches"] = state.debug_mismatches
    stats["seconds"] = time.perf_counter() - t_start
    ver = verify_embedding(G, coloring, H, state.phi, color, state.clusters, plan.g)
    if not ver:
        raise InternalConsistencyError("embedding failed independent verification: " + "; ".join(ver.violations[:5]))
    return EmbedResult(True, color, dict(state.phi), state.level, per_level, None, state.clusters, plan, stats)
