"""Preparing the target graph H: third power, coloring, vertex classes and
left-degree table.

Classes are the equivalence classes: same color in the H^3
coloring and same left-degree (number of H-neighbours with a smaller
color). All ``ncolors * (Delta + 1)`` class slots are kept, ordered by
``(color, left-degree)``; unused slots stay empty. Class indices are
1-based so that ``ldeg[w][l]`` counts neighbours in classes ``1..l``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graphcore import DomainError, ParameterError


@dataclass(frozen=True)
class TargetGraph:
    n: int
    adj: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "TargetGraph":
        nbrs: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise DomainError(f"loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge {(u, v)} out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def Delta(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def degree(self, w: int) -> int:
        return len(self.adj[w])


def path(n: int) -> TargetGraph:
    return TargetGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> TargetGraph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 vertices")
    return TargetGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def matching(m: int) -> TargetGraph:
    """m disjoint edges (m copies of K_2)."""
    return TargetGraph.from_edges(2 * m, [(2 * i, 2 * i + 1) for i in range(m)])


def disjoint_cycles(count: int, length: int) -> TargetGraph:
    edges = []
    for c in range(count):
        base = c * length
        edges += [(base + i, base + (i + 1) % length) for i in range(length)]
    return TargetGraph.from_edges(count * length, edges)


def random_regular(n: int, d: int, seed: int, tries: int = 1000) -> TargetGraph:
    """Uniform-ish d-regular simple graph by the pairing model with rejection."""
    if n * d % 2:
        raise ParameterError("n * d must be even")
    if d >= n:
        raise ParameterError("need d < n")
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(tries):
        stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
        pairs = {(min(a, b), max(a, b)) for a, b in stubs.tolist()}
        if len(pairs) == len(stubs) and all(a != b for a, b in pairs):
            return TargetGraph.from_edges(n, sorted(pairs))
    raise RuntimeError(f"pairing model failed {tries} times for n={n}, d={d}")


def parse_family(spec: str, seed: int = 0) -> TargetGraph:
    """``path:10``, ``cycle:40``, ``matching:3``, ``cycles:4x10``, ``regular:40x3``, ``empty:5``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "path":
            return path(int(arg))
        if kind == "cycle":
            return cycle(int(arg))
        if kind == "matching":
            return matching(int(arg))
        if kind == "empty":
            return TargetGraph.from_edges(int(arg), [])
        if kind == "cycles":
            c, l = arg.split("x")
            return disjoint_cycles(int(c), int(l))
        if kind == "regular":
            n, d = arg.split("x")
            return random_regular(int(n), int(d), seed)
    except ValueError as exc:
        raise ParameterError(f"bad target spec {spec!r}: {exc}") from None
    raise ParameterError(f"unknown target family {kind!r}")


def dumps_target(H: TargetGraph) -> str:
    return "\n".join([f"tg {H.n}"] + [f"{u} {v}" for u, v in H.edges()]) + "\n"


def loads_target(text: str) -> TargetGraph:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or rows[0][0] != "tg" or len(rows[0]) != 2:
        raise DomainError("target file must start with 'tg <n>'")
    n = int(rows[0][1])
    edges = []
    for r in rows[1:]:
        if len(r) != 2:
            raise DomainError(f"bad target edge line {' '.join(r)!r}")
        edges.append((int(r[0]), int(r[1])))
    return TargetGraph.from_edges(n, edges)


def read_target(path: "str | Path") -> TargetGraph:
    return loads_target(Path(path).read_text())


def write_target(H: TargetGraph, path: "str | Path") -> None:
    Path(path).write_text(dumps_target(H))


# ---------------------------------------------------------------------------

def bfs_distances(H: TargetGraph, source: int, limit: Optional[int] = None) -> Dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for v in H.adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def cube_graph(H: TargetGraph) -> TargetGraph:
    """H^3: w ~ w' iff 1 <= dist_H(w, w') <= 3."""
    nbrs = []
    for w in range(H.n):
        near = set(H.adj[w])
        for x in H.adj[w]:
            near.update(H.adj[x])
            for y in H.adj[x]:
                near.update(H.adj[y])
        near.discard(w)
        nbrs.append(tuple(sorted(near)))
    H3 = TargetGraph(H.n, tuple(nbrs))
    D = H.Delta
    if H3.Delta > D**3 - D**2 + D:
        raise AssertionError(f"Delta(H^3) = {H3.Delta} exceeds Delta^3 - Delta^2 + Delta for Delta = {D}")
    return H3


@dataclass
class PowerColoring:
    colors: List[int]
    ncolors: int
    # True when more than Delta(H^3) colors were needed
    brooks_miss: bool


def _is_proper(G: TargetGraph, colors: Sequence[int]) -> bool:
    return all(colors[u] != colors[v] for u, v in G.edges())


def _dsatur(G: TargetGraph) -> List[int]:
    n = G.n
    colors = [-1] * n
    seen: List[set] = [set() for _ in range(n)]
    for _ in range(n):
        # highest saturation, then degree, then lowest index
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (len(seen[u]), len(G.adj[u]), -u))
        c = 0
        while c in seen[v]:
            c += 1
        colors[v] = c
        for u in G.adj[v]:
            seen[u].add(c)
    return colors


def _kempe_chain(G: TargetGraph, colors: List[int], start: int, a: int, b: int) -> set:
    chain, stack = {start}, [start]
    while stack:
        u = stack.pop()
        for v in G.adj[u]:
            if v not in chain and colors[v] in (a, b):
                chain.add(v)
                stack.append(v)
    return chain


def _kempe_repair(G: TargetGraph, colors: List[int]) -> List[int]:
    """Try to empty the top color class by Kempe swaps, one vertex at a time."""
    colors = list(colors)
    top = max(colors)
    for v in [u for u in range(G.n) if colors[u] == top]:
        done = False
        for a in range(top):
            if done:
                break
            for b in range(top):
                if a == b:
                    continue
                trial = list(colors)
                for u in G.adj[v]:
                    if trial[u] == a:
                        chain = _kempe_chain(G, trial, u, a, b)
                        if v in chain:
                            break
                        for w in chain:
                            trial[w] = b if trial[w] == a else a
                if all(trial[u] != a for u in G.adj[v]):
                    trial[v] = a
                    if _is_proper(G, trial):
                        colors = trial
                        done = True
                        break
        if not done:
            return colors
    return colors


def color_power(H3: TargetGraph) -> PowerColoring:
    """Proper coloring of H^3: DSatur, then one Kempe repair pass if DSatur
    used more than Delta(H^3) colors."""
    if H3.n == 0:
        return PowerColoring([], 0, False)
    colors = _dsatur(H3)
    k = max(colors) + 1
    if k > max(1, H3.Delta):
        repaired = _kempe_repair(H3, colors)
        if max(repaired) + 1 < k:
            colors, k = repaired, max(repaired) + 1
    assert _is_proper(H3, colors)
    return PowerColoring(colors, k, k > max(1, H3.Delta))


@dataclass
class PrepPlan:
    n: int
    Delta: int
    colors_used: int
    g: List[int]
    classes: List[List[int]]
    ldeg: List[List[int]]
    power_coloring: List[int]
    brooks_miss: bool = False

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def nonempty_classes(self) -> List[int]:
        """1-based indices of classes that hold at least one vertex."""
        return [j + 1 for j, c in enumerate(self.classes) if c]

    def to_dict(self) -> Dict:
        return {"n": self.n, "delta": self.Delta, "colors_used": self.colors_used,
                "classes": self.classes, "ldeg": self.ldeg, "brooks_miss": self.brooks_miss}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ldeg_table(H: TargetGraph, g: Sequence[int], L: int) -> List[List[int]]:
    """ldeg[w][l] = |{x in N_H(w) : g(x) <= l}| for l = 0..L."""
    table = []
    for w in range(H.n):
        counts = [0] * (L + 2)
        for x in H.adj[w]:
            counts[g[x]] += 1
        row, acc = [], 0
        for l in range(L + 1):
            acc += counts[l]
            row.append(acc)
        table.append(row)
    return table


def build_classes(H: TargetGraph, f: "PowerColoring | Sequence[int]", Delta: Optional[int] = None) -> PrepPlan:
    """Group vertices by (color, left-degree) and fill the left-degree table."""
    brooks = False
    if isinstance(f, PowerColoring):
        brooks = f.brooks_miss
        f = f.colors
    f = list(f)
    if len(f) != H.n:
        raise DomainError("coloring length differs from n")
    H3 = cube_graph(H)
    if not _is_proper(H3, f):
        raise DomainError("coloring is not proper on H^3")
    D = H.Delta if Delta is None else Delta
    if H.Delta > D:
        raise DomainError(f"H has maximum degree {H.Delta} > Delta = {D}")
    ncolors = max(f) + 1 if f else 0
    slots = ncolors * (D + 1) if H.n else 1
    g = [0] * H.n
    classes: List[List[int]] = [[] for _ in range(max(1, slots))]
    for w in range(H.n):
        left = sum(1 for x in H.adj[w] if f[x] < f[w])
        j = f[w] * (D + 1) + left
        g[w] = j + 1
        classes[j].append(w)
    return PrepPlan(H.n, D, ncolors, g, classes, ldeg_table(H, g, len(classes)), f, brooks)


def prepare(H: TargetGraph, Delta: Optional[int] = None) -> PrepPlan:
    return build_classes(H, color_power(cube_graph(H)), Delta)


@dataclass
class PlanCheck:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_plan(H: TargetGraph, plan: PrepPlan) -> PlanCheck:
    """Independent audit of a plan.

    (a) classes partition W and agree with g; (b) same-class vertices are at
    distance >= 4; (c) their neighbourhoods are disjoint and non-adjacent;
    (d) the ldeg table matches a recount; (e) same-class vertices share the
    left-degree ldeg^(j-1) and the H^3 color.
    """
    bad: List[str] = []
    members = sorted(w for c in plan.classes for w in c)
    if members != list(range(H.n)):
        bad.append("(a) classes do not partition W")
    for j, cls in enumerate(plan.classes, start=1):
        for w in cls:
            if w < len(plan.g) and plan.g[w] != j:
                bad.append(f"(a) g({w}) = {plan.g[w]} but w sits in class {j}")
    nbr = [set(a) for a in H.adj]
    for j, cls in enumerate(plan.classes, start=1):
        for i, w in enumerate(cls):
            dist = bfs_distances(H, w, limit=3)
            for w2 in cls[i + 1:]:
                if w2 in dist:
                    bad.append(f"(b) class {j}: dist({w},{w2}) = {dist[w2]} < 4")
                if nbr[w] & nbr[w2]:
                    bad.append(f"(c) class {j}: {w},{w2} share a neighbour")
                if any(nbr[x] & nbr[w2] for x in nbr[w]):
                    bad.append(f"(c) class {j}: neighbourhoods of {w},{w2} are adjacent")
            if plan.power_coloring and plan.power_coloring[w] != plan.power_coloring[cls[0]]:
                bad.append(f"(e) class {j} mixes H^3 colors")
    L = len(plan.classes)
    for w in range(H.n):
        row = plan.ldeg[w] if w < len(plan.ldeg) else []
        for l in range(L + 1):
            direct = sum(1 for x in H.adj[w] if plan.g[x] <= l)
            if l >= len(row) or row[l] != direct:
                bad.append(f"(d) ldeg[{w}][{l}] != {direct}")
                break
    for j, cls in enumerate(plan.classes, start=1):
        lefts = {plan.ldeg[w][j - 1] for w in cls if w < len(plan.ldeg) and j - 1 < len(plan.ldeg[w])}
        if len(lefts) > 1:
            bad.append(f"(e) class {j} has left-degrees {sorted(lefts)}")
    return PlanCheck(not bad, bad)
