"""Multipartite host graphs, edge colorings and p-density arithmetic.

A host has ``r`` parts of ``N`` vertices each. Edges only run between
different parts and are stored as one ``N x N`` boolean matrix per
unordered part pair ``(i, j)`` with ``i < j``; row ``a`` of block ``(i, j)``
is the neighbourhood of vertex ``(i, a)`` inside part ``j``.

Random hosts are drawn with numpy's ``PCG64`` bit generator seeded by the
user seed. The edge stream is part-pair-major (``(0,1), (0,2), ..., (r-2,r-1)``)
and row-major inside a block: one ``Generator.random((N, N))`` call per
block, thresholded at ``p``. Any implementation that reproduces that stream
reproduces the graph bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NamedTuple, Sequence, Tuple

import numpy as np


class ParameterError(ValueError):
    """A numeric parameter lies outside its admissible range."""


class DomainError(ValueError):
    """Structurally invalid input (same-part pair, malformed family, ...)."""


class DegenerateInputError(ValueError):
    """Empty vertex sets or p = 0 where a density is requested."""


class Vertex(NamedTuple):
    part: int
    index: int


class Color(str, Enum):
    RED = "R"
    BLUE = "B"

    @classmethod
    def parse(cls, value: "str | Color") -> "Color":
        if isinstance(value, Color):
            return value
        v = value.strip().lower()
        if v in ("r", "red"):
            return cls.RED
        if v in ("b", "blue"):
            return cls.BLUE
        raise ParameterError(f"unknown color {value!r}")


@dataclass(frozen=True)
class VertexSet:
    """Subset of one part, members kept sorted and unique."""

    part: int
    members: Tuple[int, ...]

    def __init__(self, part: int, members: Iterable[int]):
        object.__setattr__(self, "part", int(part))
        object.__setattr__(self, "members", tuple(sorted({int(m) for m in members})))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    @property
    def index(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class MultipartiteGraph:
    """Spanning subgraph of the complete r-partite graph K_r(N)."""

    def __init__(self, r: int, N: int, blocks: Dict[Tuple[int, int], np.ndarray] | None = None):
        if r < 2:
            raise ParameterError(f"need at least 2 parts, got r={r}")
        if N < 1:
            raise ParameterError(f"need N >= 1, got N={N}")
        self.r = int(r)
        self.N = int(N)
        self._blocks: Dict[Tuple[int, int], np.ndarray] = {}
        blocks = blocks or {}
        for i, j in self.part_pairs():
            b = blocks.get((i, j))
            if b is None:
                b = np.zeros((N, N), dtype=bool)
            else:
                b = np.array(b, dtype=bool, copy=True)
                if b.shape != (N, N):
                    raise DomainError(f"block {(i, j)} has shape {b.shape}, expected {(N, N)}")
            self._blocks[(i, j)] = _freeze(b)
        extra = set(blocks) - set(self._blocks)
        if extra:
            raise DomainError(f"blocks for invalid part pairs: {sorted(extra)}")

    def part_pairs(self) -> List[Tuple[int, int]]:
        return list(itertools.combinations(range(self.r), 2))

    def block(self, i: int, j: int) -> np.ndarray:
        """Bi-adjacency matrix with rows indexed by part ``i`` and columns by part ``j``."""
        if i == j:
            raise DomainError("no edges inside a part")
        if i < j:
            return self._blocks[(i, j)]
        return self._blocks[(j, i)].T

    def has_edge(self, u: Sequence[int], v: Sequence[int]) -> bool:
        (pi, a), (pj, b) = u, v
        if pi == pj:
            return False
        return bool(self.block(pi, pj)[a, b])

    def neighbors_in(self, v: Sequence[int], part: int) -> np.ndarray:
        """Boolean mask over ``part`` marking the neighbours of ``v``."""
        pv, a = v
        if pv == part:
            return np.zeros(self.N, dtype=bool)
        return self.block(pv, part)[a]

    def edge_count(self) -> int:
        return int(sum(int(b.sum()) for b in self._blocks.values()))

    def edges(self) -> Iterator[Tuple[int, int, int, int]]:
        """Edges as ``(i, a, j, b)`` with ``i < j`` in canonical order."""
        for (i, j), b in self._blocks.items():
            for a, bb in zip(*np.nonzero(b)):
                yield i, int(a), j, int(bb)

    def count_edges(self, X: VertexSet, Y: VertexSet) -> int:
        if X.part == Y.part:
            raise DomainError("X and Y lie in the same part")
        sub = self.block(X.part, Y.part)[np.ix_(X.index, Y.index)]
        return int(sub.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultipartiteGraph):
            return NotImplemented
        return (self.r, self.N) == (other.r, other.N) and all(
            np.array_equal(self._blocks[k], other._blocks[k]) for k in self._blocks
        )

    def __repr__(self) -> str:
        return f"MultipartiteGraph(r={self.r}, N={self.N}, edges={self.edge_count()})"


def complete_multipartite(r: int, N: int) -> MultipartiteGraph:
    ones = np.ones((N, N), dtype=bool)
    return MultipartiteGraph(r, N, {pair: ones for pair in itertools.combinations(range(r), 2)})


def generate_random(r: int, N: int, p: float, seed: int) -> MultipartiteGraph:
    """Draw G_r(N, p): every cross-part pair is an edge independently with probability p."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if r < 2 or N < 1:
        raise ParameterError(f"need r >= 2 and N >= 1, got r={r}, N={N}")
    rng = np.random.Generator(np.random.PCG64(seed))
    blocks = {}
    for pair in itertools.combinations(range(r), 2):
        blocks[pair] = rng.random((N, N)) < p
    return MultipartiteGraph(r, N, blocks)


def pair_density(G: MultipartiteGraph, X: VertexSet, Y: VertexSet, p: float) -> float:
    """p-density e(X, Y) / (p |X| |Y|)."""
    if X.part == Y.part:
        raise DomainError("p-density needs sets from two different parts")
    if len(X) == 0 or len(Y) == 0:
        raise DegenerateInputError("p-density of an empty set")
    if p <= 0:
        raise DegenerateInputError("p-density needs p > 0")
    return G.count_edges(X, Y) / (p * len(X) * len(Y))


class EdgeColoring:
    """Red/blue coloring of the edges of one host.

    Stored as a per-block boolean mask ``red``; an edge is Blue exactly when
    it is present and not Red. Non-edges carry no color.
    """

    def __init__(self, G: MultipartiteGraph, red: Dict[Tuple[int, int], np.ndarray]):
        self.graph = G
        self._red = {}
        for pair in G.part_pairs():
            mask = np.asarray(red.get(pair, np.zeros((G.N, G.N), dtype=bool)), dtype=bool)
            self._red[pair] = _freeze(mask & G.block(*pair))

    def red_block(self, i: int, j: int) -> np.ndarray:
        if i < j:
            return self._red[(i, j)]
        return self._red[(j, i)].T

    def color_of(self, u: Sequence[int], v: Sequence[int]) -> Color:
        if not self.graph.has_edge(u, v):
            raise DomainError(f"{tuple(u)}-{tuple(v)} is not an edge")
        return Color.RED if self.red_block(u[0], v[0])[u[1], v[1]] else Color.BLUE

    def count(self, color: "Color | str") -> int:
        color = Color.parse(color)
        red = sum(int(m.sum()) for m in self._red.values())
        return red if color is Color.RED else self.graph.edge_count() - red


COLOR_STRATEGIES = ("uniform-random", "all-red", "majority-split", "part-block")


def part_block_red_pairs(r: int) -> set:
    """The fixed half of part pairs colored Red by the ``part-block`` strategy.

    Pairs are taken in lexicographic order and the first ``ceil(C(r,2)/2)``
    are Red. For r = 3 that is {(0,1), (0,2)}; for r = 2 the single pair.
    """
    pairs = list(itertools.combinations(range(r), 2))
    return set(pairs[: (len(pairs) + 1) // 2])


def color_edges(G: MultipartiteGraph, strategy: str, seed: int = 0) -> EdgeColoring:
    if strategy not in COLOR_STRATEGIES:
        raise ParameterError(f"unknown coloring strategy {strategy!r}; expected one of {COLOR_STRATEGIES}")
    N = G.N
    red = {}
    if strategy == "uniform-random":
        rng = np.random.Generator(np.random.PCG64(seed))
        for pair in G.part_pairs():
            red[pair] = rng.random((N, N)) < 0.5
    elif strategy == "all-red":
        for pair in G.part_pairs():
            red[pair] = np.ones((N, N), dtype=bool)
    elif strategy == "majority-split":
        idx = np.arange(N)
        even = (idx[:, None] + idx[None, :]) % 2 == 0
        for pair in G.part_pairs():
            red[pair] = even
    else:
        chosen = part_block_red_pairs(G.r)
        for pair in G.part_pairs():
            red[pair] = np.full((N, N), pair in chosen)
    return EdgeColoring(G, red)


def coloring_from_pair_colors(G: MultipartiteGraph, pair_colors: Dict[Tuple[int, int], "Color | str"]) -> EdgeColoring:
    """Color every edge between parts i and j with ``pair_colors[(i, j)]``."""
    red = {}
    for pair in G.part_pairs():
        red[pair] = np.full((G.N, G.N), Color.parse(pair_colors[pair]) is Color.RED)
    return EdgeColoring(G, red)


def monochrome_view(G: MultipartiteGraph, c: EdgeColoring, color: "Color | str") -> MultipartiteGraph:
    color = Color.parse(color)
    if c.graph is not G and c.graph != G:
        raise DomainError("coloring belongs to a different graph")
    blocks = {}
    for pair in G.part_pairs():
        red = c.red_block(*pair)
        blocks[pair] = red if color is Color.RED else (G.block(*pair) & ~red)
    return MultipartiteGraph(G.r, G.N, blocks)


# ---------------------------------------------------------------------------
# text formats

def _data_lines(text: str) -> Iterator[List[str]]:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line.split()


def dumps_graph(G: MultipartiteGraph) -> str:
    out = [f"mpg {G.r} {G.N}"]
    out.extend(f"{i} {a} {j} {b}" for i, a, j, b in G.edges())
    return "\n".join(out) + "\n"


def loads_graph(text: str) -> MultipartiteGraph:
    lines = _data_lines(text)
    header = next(lines, None)
    if not header or header[0] != "mpg" or len(header) != 3:
        raise DomainError("graph file must start with 'mpg <r> <N>'")
    r, N = int(header[1]), int(header[2])
    blocks = {pair: np.zeros((N, N), dtype=bool) for pair in itertools.combinations(range(r), 2)}
    for tok in lines:
        if len(tok) != 4:
            raise DomainError(f"bad edge line {' '.join(tok)!r}")
        i, a, j, b = map(int, tok)
        if not (0 <= i < j < r and 0 <= a < N and 0 <= b < N):
            raise DomainError(f"edge out of range: {' '.join(tok)}")
        blocks[(i, j)][a, b] = True
    return MultipartiteGraph(r, N, blocks)


def dumps_coloring(c: EdgeColoring) -> str:
    G = c.graph
    out = [f"col {G.edge_count()}"]
    for i, a, j, b in G.edges():
        out.append(f"{i} {a} {j} {b} {'R' if c.red_block(i, j)[a, b] else 'B'}")
    return "\n".join(out) + "\n"


def loads_coloring(text: str, G: MultipartiteGraph) -> EdgeColoring:
    lines = _data_lines(text)
    header = next(lines, None)
    if not header or header[0] != "col" or len(header) != 2:
        raise DomainError("coloring file must start with 'col <edge-count>'")
    expected = int(header[1])
    red = {pair: np.zeros((G.N, G.N), dtype=bool) for pair in G.part_pairs()}
    seen = {pair: np.zeros((G.N, G.N), dtype=bool) for pair in G.part_pairs()}
    for tok in lines:
        if len(tok) != 5:
            raise DomainError(f"bad coloring line {' '.join(tok)!r}")
        i, a, j, b = map(int, tok[:4])
        if not G.has_edge((i, a), (j, b)) or i >= j:
            raise DomainError(f"colored pair is not an edge: {' '.join(tok)}")
        seen[(i, j)][a, b] = True
        red[(i, j)][a, b] = Color.parse(tok[4]) is Color.RED
    total = sum(int(s.sum()) for s in seen.values())
    if total != G.edge_count() or total != expected:
        raise DomainError(f"coloring covers {total} edges, graph has {G.edge_count()}, header says {expected}")
    return EdgeColoring(G, red)


def write_graph(G: MultipartiteGraph, path: "str | Path") -> None:
    Path(path).write_text(dumps_graph(G))


def read_graph(path: "str | Path") -> MultipartiteGraph:
    return loads_graph(Path(path).read_text())


def write_coloring(c: EdgeColoring, path: "str | Path") -> None:
    Path(path).write_text(dumps_coloring(c))


def read_coloring(path: "str | Path", G: MultipartiteGraph) -> EdgeColoring:
    return loads_coloring(Path(path).read_text(), G)
