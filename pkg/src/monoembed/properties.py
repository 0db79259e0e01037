"""Checkers for regular / dense pairs and the pseudorandomness properties
U (density concentration), C^k (congestion) and D^Delta (no bad triples).

Pair checkers run in two modes. ``exact`` enumerates every qualifying
subpair (every size at or above the threshold) and is limited to
``|X| + |Y| <= EXACT_LIMIT``. ``sampled`` looks only at subpairs of the
threshold sizes ``ceil(eps|X|)``, ``ceil(eps|Y|)``: the density of a larger
subpair is the average of the densities of its threshold-size subpairs, so
the extreme values are always attained at the threshold sizes. When the
sample budget covers every threshold-size subpair, sampled mode enumerates
them all and its verdict is exact; otherwise it draws random subpairs and
its verdict is one-sided evidence. ``extremal=True`` adds four adversarial
candidates (top/bottom-degree rows against their top/bottom columns), which
catch the deviations random subpairs miss at desk scale.

Density comparisons use an absolute slack of ``TOL`` against float noise.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import beta_log
from .graphcore import (
    DegenerateInputError,
    DomainError,
    MultipartiteGraph,
    ParameterError,
    VertexSet,
    pair_density,
)

EXACT_LIMIT = 18
TOL = 1e-9

HOLDS = "holds"
VIOLATED = "violated"
PRECONDITION = "precondition-not-met"


def threshold(eps: float, size: int) -> int:
    """Smallest subset size s with s >= eps * size (at least 1)."""
    return max(1, math.ceil(eps * size - TOL))


@dataclass
class Witness:
    X: VertexSet
    Y: VertexSet
    density: float

    def to_dict(self) -> Dict[str, Any]:
        return {"X": {"part": self.X.part, "members": list(self.X.members)},
                "Y": {"part": self.Y.part, "members": list(self.Y.members)},
                "density": self.density}


@dataclass
class PairCertificate:
    verdict: str
    witness: Optional[Witness]
    samples_used: int
    sampled: bool
    pair_density: float
    # max |d - d'| for regularity, min d' for denseness
    extreme: float

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS


@dataclass
class PropertyReport:
    property: str
    params: Dict[str, Any]
    verdict: str
    sampled: bool
    max_deviation: Optional[float] = None
    witness: Optional[Dict[str, Any]] = None
    samples_used: int = 0
    seed: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> Dict[str, Any]:
        out = {"property": self.property, "params": self.params, "verdict": self.verdict,
               "sampled": self.sampled, "max_deviation": self.max_deviation,
               "samples_used": self.samples_used, "seed": self.seed}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.details:
            out["details"] = self.details
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default)


def _json_default(o: Any) -> Any:
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    return str(o)


def _validate_pair(X: VertexSet, Y: VertexSet, p: float) -> None:
    if X.part == Y.part:
        raise DomainError("X and Y must lie in different parts")
    if len(X) == 0 or len(Y) == 0:
        raise DegenerateInputError("empty vertex set")
    if p <= 0:
        raise DegenerateInputError("p must be positive")


def _all_masks(n: int) -> np.ndarray:
    """(2^n, n) 0/1 matrix; row m is the bit pattern of m."""
    m = np.arange(2**n, dtype=np.int64)[:, None]
    return ((m >> np.arange(n)) & 1).astype(np.int64)


def _subpair_table(M: np.ndarray):
    a, b = M.shape
    XM, YM = _all_masks(a), _all_masks(b)
    counts = XM @ M.astype(np.int64) @ YM.T
    return XM, YM, counts, XM.sum(1), YM.sum(1)


def _pick(S: VertexSet, idx) -> VertexSet:
    return VertexSet(S.part, (S.members[i] for i in idx))


def _exact_scan(G, X, Y, p, eps, kind, alpha=0.0) -> PairCertificate:
    if len(X) + len(Y) > EXACT_LIMIT:
        raise ParameterError(f"exact mode limited to |X| + |Y| <= {EXACT_LIMIT}")
    M = G.block(X.part, Y.part)[np.ix_(X.index, Y.index)]
    XM, YM, counts, sx, sy = _subpair_table(M)
    tx, ty = threshold(eps, len(X)), threshold(eps, len(Y))
    qual = (sx[:, None] >= tx) & (sy[None, :] >= ty)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = counts / (p * np.outer(sx, sy))
    d = float(M.sum()) / (p * M.size)
    if kind == "regular":
        score = np.where(qual, np.abs(dens - d), -np.inf)
        i, j = np.unravel_index(int(np.argmax(score)), score.shape)
        extreme = float(score[i, j])
        bad = extreme > eps + TOL
    else:
        score = np.where(qual, dens, np.inf)
        i, j = np.unravel_index(int(np.argmin(score)), score.shape)
        extreme = float(score[i, j])
        bad = extreme < alpha - eps - TOL
    n_checked = int(qual.sum())
    witness = None
    if bad:
        witness = Witness(_pick(X, np.nonzero(XM[i])[0]), _pick(Y, np.nonzero(YM[j])[0]), float(dens[i, j]))
    return PairCertificate(VIOLATED if bad else HOLDS, witness, n_checked, False, d, extreme)


def _candidate_subpairs(M: np.ndarray, tx: int, ty: int, samples: int, rng: np.random.Generator,
                        extremal: bool = False):
    a, b = M.shape
    total = math.comb(a, tx) * math.comb(b, ty)
    if samples >= total:
        for xs in itertools.combinations(range(a), tx):
            for ys in itertools.combinations(range(b), ty):
                yield np.asarray(xs), np.asarray(ys)
        return
    if extremal:
        # top/bottom-degree rows against their top/bottom columns
        deg = M.sum(1)
        order = np.argsort(-deg, kind="stable")
        for xs in (order[:tx], order[::-1][:tx]):
            col = M[xs].sum(0)
            yield xs, np.argsort(-col, kind="stable")[:ty]
            yield xs, np.argsort(col, kind="stable")[:ty]
    for _ in range(samples):
        yield rng.choice(a, tx, replace=False), rng.choice(b, ty, replace=False)


def _sampled_scan(G, X, Y, p, eps, kind, samples, seed, alpha=0.0, extremal=False) -> PairCertificate:
    M = G.block(X.part, Y.part)[np.ix_(X.index, Y.index)]
    tx, ty = threshold(eps, len(X)), threshold(eps, len(Y))
    d = float(M.sum()) / (p * M.size)
    rng = np.random.Generator(np.random.PCG64(seed))
    exhaustive = samples >= math.comb(len(X), tx) * math.comb(len(Y), ty)
    best = -np.inf if kind == "regular" else np.inf
    best_pair = None
    used = 0
    norm = p * tx * ty
    for xs, ys in _candidate_subpairs(M, tx, ty, samples, rng, extremal):
        used += 1
        dens = float(M[np.ix_(xs, ys)].sum()) / norm
        score = abs(dens - d) if kind == "regular" else dens
        if (kind == "regular" and score > best) or (kind == "dense" and score < best):
            best, best_pair = score, (xs, ys, dens)
    if kind == "regular":
        bad = best > eps + TOL
    else:
        bad = best < alpha - eps - TOL
    witness = None
    if bad:
        xs, ys, dens = best_pair
        witness = Witness(_pick(X, xs), _pick(Y, ys), dens)
    return PairCertificate(VIOLATED if bad else HOLDS, witness, used, not exhaustive, d, float(best))


def check_regular_pair(G: MultipartiteGraph, X: VertexSet, Y: VertexSet, p: float, eps: float,
                       mode: str = "exact", samples: int = 200, seed: int = 0,
                       extremal: bool = False) -> PairCertificate:
    """Is (X, Y) (eps, p)-regular? See the module docstring for the two modes."""
    _validate_pair(X, Y, p)
    if mode == "exact":
        return _exact_scan(G, X, Y, p, eps, "regular")
    if mode == "sampled":
        return _sampled_scan(G, X, Y, p, eps, "regular", samples, seed, extremal=extremal)
    raise ParameterError(f"unknown mode {mode!r}")


def check_dense_pair(G: MultipartiteGraph, X: VertexSet, Y: VertexSet, p: float, eps: float, alpha: float,
                     mode: str = "exact", samples: int = 200, seed: int = 0,
                     extremal: bool = False) -> PairCertificate:
    """Is (X, Y) (eps, alpha, p)-dense, i.e. every qualifying subpair has p-density >= alpha - eps?"""
    _validate_pair(X, Y, p)
    if mode == "exact":
        return _exact_scan(G, X, Y, p, eps, "dense", alpha)
    if mode == "sampled":
        return _sampled_scan(G, X, Y, p, eps, "dense", samples, seed, alpha, extremal)
    raise ParameterError(f"unknown mode {mode!r}")


def dense_auto(G, X, Y, p, eps, alpha, samples=100, seed=0) -> PairCertificate:
    """Exact when small enough, sampled otherwise. Empty sets count as not dense."""
    if len(X) == 0 or len(Y) == 0:
        return PairCertificate(VIOLATED, None, 0, False, 0.0, 0.0)
    mode = "exact" if len(X) + len(Y) <= 12 else "sampled"
    return check_dense_pair(G, X, Y, p, eps, alpha, mode, samples, seed)


# ---------------------------------------------------------------------------
# U_{N,p}

def check_uniformity(G: MultipartiteGraph, p: float, samples: int, seed: int) -> PropertyReport:
    """Sample pairs of subsets of size ceil(N / ln N) from two random parts and
    check |d - 1| <= 1 / ln N for each."""
    N = G.N
    if N < 3:
        raise ParameterError("uniformity needs N >= 3")
    bound = 1.0 / math.log(N)
    size = min(N, math.ceil(N / math.log(N)))
    rng = np.random.Generator(np.random.PCG64(seed))
    worst, wit, used = 0.0, None, 0
    for _ in range(samples):
        used += 1
        i, j = rng.choice(G.r, 2, replace=False)
        U = VertexSet(int(i), rng.choice(N, size, replace=False))
        W = VertexSet(int(j), rng.choice(N, size, replace=False))
        d = pair_density(G, U, W, p) if p > 0 else 0.0
        dev = abs(d - 1.0)
        if dev > worst:
            worst = dev
            wit = Witness(U, W, d)
        if dev > bound + TOL:
            break
    verdict = VIOLATED if worst > bound + TOL else HOLDS
    return PropertyReport(
        "U", {"r": G.r, "N": N, "p": p, "subset_size": size, "bound": bound}, verdict, True,
        max_deviation=worst, witness=wit.to_dict() if verdict == VIOLATED and wit else None,
        samples_used=used, seed=seed)


# ---------------------------------------------------------------------------
# C^k_{N,p}(xi)

def _validate_family(G: MultipartiteGraph, F: Sequence[Sequence[Tuple[int, int]]], U: VertexSet) -> None:
    seen = set()
    for K in F:
        parts = [v[0] for v in K]
        if len(set(parts)) != len(parts):
            raise DomainError(f"k-set {K} has two vertices in one part")
        if U.part in parts:
            raise DomainError(f"k-set {K} meets the part of U")
        for v in K:
            v = (int(v[0]), int(v[1]))
            if not (0 <= v[0] < G.r and 0 <= v[1] < G.N):
                raise DomainError(f"vertex {v} out of range")
            if v in seen:
                raise DomainError(f"k-sets overlap in {v}")
            seen.add(v)


def congestion_count(G: MultipartiteGraph, F: Sequence[Sequence[Tuple[int, int]]], U: VertexSet) -> int:
    """e_Gamma(F, U): number of pairs (K, u) with K inside the neighbourhood of u."""
    _validate_family(G, F, U)
    if len(U) == 0 or not F:
        return 0
    idx = U.index
    total = 0
    for K in F:
        common = np.ones(len(idx), dtype=bool)
        for v in K:
            common &= G.neighbors_in(v, U.part)[idx]
        total += int(common.sum())
    return total


def _random_family(G, rng, source_parts, k, f):
    pools = {q: list(rng.permutation(G.N)) for q in source_parts}
    F = []
    for _ in range(f):
        avail = [q for q in source_parts if pools[q]]
        if len(avail) < k:
            break
        parts = rng.choice(avail, k, replace=False)
        F.append(tuple((int(q), int(pools[int(q)].pop())) for q in sorted(parts)))
    return F


def _greedy_family(G, rng, source_parts, k, f, upart, pool_size=16):
    """Grow F one k-set at a time, each time taking the candidate with the
    largest common neighbourhood in the U part."""
    used = set()
    F = []
    for _ in range(f):
        best, best_deg = None, -1
        for _ in range(pool_size):
            parts = rng.choice(source_parts, k, replace=False)
            K = []
            for q in sorted(parts):
                for _ in range(8):
                    v = (int(q), int(rng.integers(G.N)))
                    if v not in used:
                        K.append(v)
                        break
            if len(K) < k:
                continue
            common = np.ones(G.N, dtype=bool)
            for v in K:
                common &= G.neighbors_in(v, upart)
            deg = int(common.sum())
            if deg > best_deg:
                best, best_deg = tuple(K), deg
        if best is None:
            break
        used.update(best)
        F.append(best)
    return F


def check_congestion(G: MultipartiteGraph, p: float, k: int, xi: float, samples: int, seed: int,
                     strategy: str = "random", bound: str = "literal") -> PropertyReport:
    """Sample configurations (F_k, U) with |F_k| <= max(1, xi N), |U| <= |F_k| and
    test e_Gamma(F_k, U) < 6 p^k |U| |F_k|.

    ``bound="operative"`` replaces |U| by max(|U|, xi N), i.e. tests against
    6 p^k xi N |F_k| in the intended regime; this is the form the embedding
    argument consumes. The literal form fails for a single k-set and a single
    common neighbour whenever 6 p^k < 1.

    Each sample picks l in [k, r-1], a random set of l source parts and a
    distinct part for U. ``strategy="greedy"`` grows F from high common-degree
    k-sets and takes U as the vertices most covered by F.
    """
    if not 1 <= k <= G.r - 1:
        raise ParameterError(f"k must lie in [1, r-1] = [1, {G.r - 1}]")
    if strategy not in ("random", "greedy"):
        raise ParameterError(f"unknown strategy {strategy!r}")
    if bound not in ("literal", "operative"):
        raise ParameterError(f"unknown bound {bound!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    fmax = max(1, int(math.floor(xi * G.N)))
    worst_ratio, witness, used, violated = 0.0, None, 0, False
    for _ in range(samples):
        used += 1
        ell = int(rng.integers(k, G.r))
        perm = rng.permutation(G.r)
        source, upart = [int(q) for q in perm[:ell]], int(perm[ell])
        f = int(rng.integers(1, fmax + 1))
        if strategy == "greedy":
            F = _greedy_family(G, rng, source, k, f, upart)
        else:
            F = _random_family(G, rng, source, k, f)
        if not F:
            continue
        u = int(rng.integers(1, len(F) + 1))
        if strategy == "greedy":
            cover = np.zeros(G.N, dtype=np.int64)
            for K in F:
                common = np.ones(G.N, dtype=bool)
                for v in K:
                    common &= G.neighbors_in(v, upart)
                cover += common
            U = VertexSet(upart, np.argsort(-cover, kind="stable")[:u])
        else:
            U = VertexSet(upart, rng.choice(G.N, u, replace=False))
        e = congestion_count(G, F, U)
        limit = 6 * p**k * len(F) * (len(U) if bound == "literal" else max(len(U), xi * G.N))
        ratio = e / limit if limit > 0 else math.inf
        if ratio > worst_ratio:
            worst_ratio = ratio
        if e >= limit:
            violated = True
            witness = {"F": [list(map(list, K)) for K in F], "U": {"part": upart, "members": list(U.members)},
                       "e_gamma": e, "bound": limit}
            break
    return PropertyReport(
        f"C_{k}", {"k": k, "xi": xi, "p": p, "r": G.r, "N": G.N, "family_cap": fmax, "strategy": strategy,
                      "bound": bound},
        VIOLATED if violated else HOLDS, True, max_deviation=worst_ratio, witness=witness,
        samples_used=used, seed=seed, details={"max_ratio_to_bound": worst_ratio})


# ---------------------------------------------------------------------------
# D^Delta (bad triples)

def find_bad_triples(G_mono: MultipartiteGraph, p: float, alpha: float, eps: float, eps_prime: float, mu: float,
                     X: VertexSet, Y: VertexSet, Z: VertexSet, kind: str = "II",
                     size_floor: Tuple[int, int, int] = (1, 1, 1), samples: int = 60,
                     seed: int = 0) -> PropertyReport:
    """Count x in X whose neighbourhood pair fails (eps', alpha, p)-denseness.

    Type I looks at (N(x) & Y, Z) and needs (X,Y), (Y,Z) dense; type II looks
    at (N(x) & Y, N(x) & Z) and needs all three pairs dense. The verdict is
    violated iff the bad fraction is at least mu. An empty neighbourhood
    counts as not dense.
    """
    if len({X.part, Y.part, Z.part}) != 3:
        raise DomainError("X, Y, Z must lie in three distinct parts")
    if kind not in ("I", "II"):
        raise ParameterError("kind must be 'I' or 'II'")
    if any(len(S) < fl for S, fl in zip((X, Y, Z), size_floor)):
        raise DomainError(f"class sizes {(len(X), len(Y), len(Z))} below floor {size_floor}")
    params = {"kind": kind, "p": p, "alpha": alpha, "eps": eps, "eps_prime": eps_prime, "mu": mu,
              "sizes": [len(X), len(Y), len(Z)], "parts": [X.part, Y.part, Z.part]}
    pre_pairs = [(X, Y), (Y, Z)] if kind == "I" else [(X, Y), (X, Z), (Y, Z)]
    for n, (S, T) in enumerate(pre_pairs):
        cert = dense_auto(G_mono, S, T, p, eps, alpha, samples, seed + n)
        if not cert.holds:
            return PropertyReport("D_Delta", params, PRECONDITION, True, samples_used=cert.samples_used,
                                  seed=seed, details={"failed_pair": [S.part, T.part]})
    bad, used = [], 0
    for x in X:
        ny = VertexSet(Y.part, Y.index[G_mono.neighbors_in((X.part, x), Y.part)[Y.index]])
        if kind == "I":
            nz = Z
        else:
            nz = VertexSet(Z.part, Z.index[G_mono.neighbors_in((X.part, x), Z.part)[Z.index]])
        cert = dense_auto(G_mono, ny, nz, p, eps_prime, alpha, samples, seed + 7 + x)
        used += cert.samples_used
        if not cert.holds:
            bad.append(x)
    frac = len(bad) / len(X)
    verdict = VIOLATED if frac >= mu else HOLDS
    return PropertyReport("D_Delta", params, verdict, True, max_deviation=frac,
                          witness={"bad_vertices": bad} if verdict == VIOLATED else None,
                          samples_used=used, seed=seed,
                          details={"bad_count": len(bad), "bad_fraction": frac})


def sample_bad_triples(G_mono: MultipartiteGraph, p: float, alpha: float, eps: float, eps_prime: float,
                       mu: float, class_size: int, triples: int, seed: int, kind: str = "II",
                       samples: int = 40) -> PropertyReport:
    """Run :func:`find_bad_triples` on random class triples of one size.

    The aggregate is violated iff some triple is violated; triples whose
    dense-pair precondition fails are counted separately.
    """
    if G_mono.r < 3:
        raise DomainError("bad-triple audit needs at least three parts")
    rng = np.random.Generator(np.random.PCG64(seed))
    size = min(class_size, G_mono.N)
    counts = {HOLDS: 0, VIOLATED: 0, PRECONDITION: 0}
    worst, used, witness = 0.0, 0, None
    for t in range(triples):
        parts = rng.choice(G_mono.r, 3, replace=False)
        X, Y, Z = (VertexSet(int(q), rng.choice(G_mono.N, size, replace=False)) for q in parts)
        rep = find_bad_triples(G_mono, p, alpha, eps, eps_prime, mu, X, Y, Z, kind,
                               samples=samples, seed=seed * 1000 + t)
        counts[rep.verdict] += 1
        used += rep.samples_used
        if rep.max_deviation is not None and rep.max_deviation > worst:
            worst = rep.max_deviation
        if rep.verdict == VIOLATED and witness is None:
            witness = {"parts": [int(q) for q in parts], **(rep.witness or {})}
    verdict = VIOLATED if counts[VIOLATED] else HOLDS
    return PropertyReport(
        "D_Delta", {"kind": kind, "p": p, "alpha": alpha, "eps": eps, "eps_prime": eps_prime, "mu": mu,
                    "class_size": size, "triples": triples},
        verdict, True, max_deviation=worst, witness=witness, samples_used=used, seed=seed,
        details={"triple_verdicts": counts,
                 "fraction_below_mu": (counts[HOLDS]) / max(1, counts[HOLDS] + counts[VIOLATED])})


# ---------------------------------------------------------------------------
# inherited denseness on random subsets

def wilson_interval(successes: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1 + z**2 / n
    centre = (phat + z**2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def check_inherited_denseness(G: MultipartiteGraph, X: VertexSet, Y: VertexSet, p: float, alpha: float,
                              eps: float, eps_prime: float, w1: int, w2: int, samples: int, seed: int,
                              mu: float = 1 / 16, inner_samples: int = 60) -> PropertyReport:
    """Fraction of random (w1, w2)-subpairs of a dense pair that are (eps', alpha, p)-dense.

    Holds iff the upper end of the 95% Wilson interval of the observed
    fraction reaches 1 - beta^min(w1, w2), with beta = alpha^2/(4e^2) e^(-8/(alpha mu)).
    """
    _validate_pair(X, Y, p)
    if not (1 <= w1 <= len(X) and 1 <= w2 <= len(Y)):
        raise ParameterError(f"subset sizes ({w1}, {w2}) exceed |X| = {len(X)}, |Y| = {len(Y)}")
    lb = beta_log(alpha, mu) * min(w1, w2)
    target = 1.0 - math.exp(lb)
    params = {"p": p, "alpha": alpha, "eps": eps, "eps_prime": eps_prime, "w1": w1, "w2": w2,
              "mu": mu, "target": target, "slack": "wilson-95"}
    pre = dense_auto(G, X, Y, p, eps, alpha, inner_samples, seed)
    if not pre.holds:
        return PropertyReport("inherited-denseness", params, PRECONDITION, True, samples_used=pre.samples_used,
                              seed=seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    good = 0
    full = w1 == len(X) and w2 == len(Y)
    n = 1 if full else samples
    for s in range(n):
        Xs = X if full else VertexSet(X.part, rng.choice(X.index, w1, replace=False))
        Ys = Y if full else VertexSet(Y.part, rng.choice(Y.index, w2, replace=False))
        if dense_auto(G, Xs, Ys, p, eps_prime, alpha, inner_samples, seed + 1 + s).holds:
            good += 1
    frac = good / n
    lo, hi = wilson_interval(good, n)
    verdict = HOLDS if hi >= target - TOL else VIOLATED
    return PropertyReport("inherited-denseness", params, verdict, True, max_deviation=1 - frac,
                          samples_used=n, seed=seed,
                          details={"dense_fraction": frac, "wilson95": [lo, hi]})
