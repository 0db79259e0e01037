"""Seed-sweep experiments over a parameter grid.

Config grammar (one ``key = value`` per line, ``#`` starts a comment)::

    N = 400
    p = 0.35                # or: C = 1.0  (p derived from N and the schedule's Delta)
    r = 5
    coloring = uniform-random
    target = cycle:40
    schedule = practical:2,T0=8,t0=2,eps0=0.3,eps_star=0.3,floor_frac=0.5
    seeds = 0..49           # inclusive range, or a comma list 0,3,7

Repeating a key adds a value to that axis; the grid is the product of all
axes. ``p`` and ``C`` may not both appear. Scalar options ``check_level``,
``audit`` and ``clique_budget`` are passed to the embedder and must not repeat.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .constants import edge_probability, load_schedule
from .embedder import embed, verify_embedding
from .graphcore import COLOR_STRATEGIES, color_edges, generate_random
from .hprep import parse_family

AXES = ("N", "p", "C", "r", "coloring", "target", "schedule")
SCALARS = {"check_level": str, "audit": int, "clique_budget": int}
DEFAULTS = {"r": ["5"], "coloring": ["uniform-random"], "schedule": ["practical:2"]}
COLORING_SEED_OFFSET = 1000


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    axes: Dict[str, List[str]]
    seeds: List[int]
    options: Dict[str, Any] = field(default_factory=dict)

    def cells(self) -> List[Dict[str, str]]:
        keys = [k for k in AXES if k in self.axes]
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.axes[k] for k in keys))]


def _parse_seeds(text: str) -> List[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ConfigError(f"empty seed range {text!r}")
            return list(range(lo_i, hi_i + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    axes: Dict[str, List[str]] = {}
    seeds: List[int] = []
    options: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        if key in ("seeds", "seed"):
            seeds.extend(_parse_seeds(value))
        elif key in AXES:
            axes.setdefault(key, []).append(value)
        elif key in SCALARS:
            if key in options:
                raise ConfigError(f"line {lineno}: option {key!r} given twice")
            try:
                options[key] = SCALARS[key](value)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key!r}") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if "p" in axes and "C" in axes:
        raise ConfigError("give either p or C, not both")
    if "p" not in axes and "C" not in axes:
        raise ConfigError("one of p or C is required")
    for key in ("N", "target"):
        if key not in axes:
            raise ConfigError(f"missing required key {key!r}")
    if not seeds:
        raise ConfigError("no seeds given")
    for key, default in DEFAULTS.items():
        axes.setdefault(key, list(default))
    for value in axes["coloring"]:
        if value not in COLOR_STRATEGIES:
            raise ConfigError(f"unknown coloring {value!r}")
    for key in ("N", "r"):
        for value in axes[key]:
            if not value.isdigit():
                raise ConfigError(f"{key} must be a positive integer, got {value!r}")
    return ExperimentConfig(axes, sorted(dict.fromkeys(seeds)), options)


def read_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def cell_key(cell: Dict[str, str]) -> Tuple:
    return tuple((k, cell[k]) for k in AXES if k in cell)


def run_one(cell: Dict[str, str], seed: int, options: Dict[str, Any]) -> Dict[str, Any]:
    """One embedding run. Host seed = ``seed``, coloring seed = ``seed + 1000``."""
    schedule = load_schedule(cell["schedule"])
    N, r = int(cell["N"]), int(cell["r"])
    if "p" in cell:
        p, clamped = float(cell["p"]), False
    else:
        p, clamped = edge_probability(N, float(cell["C"]), schedule.Delta)
    H = parse_family(cell["target"], seed)
    G = generate_random(r, N, p, seed)
    coloring = color_edges(G, cell["coloring"], seed + COLORING_SEED_OFFSET)
    t0 = time.perf_counter()
    res = embed(G, coloring, H, schedule, p=p, seed=seed, check_level=options.get("check_level", "degree"),
                audit=options.get("audit", 40), clique_budget=options.get("clique_budget", 64))
    seconds = time.perf_counter() - t0
    verified = None
    if res.success:
        verified = bool(verify_embedding(G, coloring, H, res.phi, res.color))
    diag = res.diagnostic
    return {
        "kind": "run", "cell": cell, "seed": seed, "p": p, "p_clamped": clamped,
        "success": res.success, "verified": verified,
        "color": res.color.value if res.color else None,
        "failed_stage": diag.failed_stage if diag else None,
        "failed_level": diag.level if diag else None,
        "levels": res.levels, "seconds": seconds,
    }


def _run_task(args: Tuple[Dict[str, str], int, Dict[str, Any]]) -> Dict[str, Any]:
    return run_one(*args)


def summarize(cell: Dict[str, str], rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    times = np.array([r["seconds"] for r in rows])
    hist: Dict[str, int] = {}
    for r in rows:
        if r["failed_stage"]:
            hist[r["failed_stage"]] = hist.get(r["failed_stage"], 0) + 1
    succ = sum(r["success"] for r in rows)
    return {
        "kind": "cell", "cell": cell, "runs": len(rows), "successes": succ,
        "success_rate": succ / len(rows) if rows else 0.0,
        "verified_all": all(r["verified"] for r in rows if r["success"]),
        "stage_histogram": dict(sorted(hist.items())),
        "seconds_p50": float(np.percentile(times, 50)) if rows else 0.0,
        "seconds_p90": float(np.percentile(times, 90)) if rows else 0.0,
        "seconds_max": float(times.max()) if rows else 0.0,
    }


def worker_count(tasks: int) -> int:
    cap = os.environ.get("MONOEMBED_THREADS")
    n = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, tasks))


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> List[Dict[str, Any]]:
    """Run every (cell, seed); rows come back grouped by cell in canonical order,
    each group followed by its summary row."""
    cells = sorted(config.cells(), key=cell_key)
    tasks = [(c, s, config.options) for c in cells for s in config.seeds]
    workers = workers or worker_count(len(tasks))
    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    by_cell: Dict[Tuple, List[Dict[str, Any]]] = {}
    for row in results:
        by_cell.setdefault(cell_key(row["cell"]), []).append(row)
    out: List[Dict[str, Any]] = []
    for c in cells:
        rows = sorted(by_cell[cell_key(c)], key=lambda r: r["seed"])
        out.extend(rows)
        out.append(summarize(c, rows))
    return out


def write_jsonl(rows: Iterable[Dict[str, Any]], fh) -> None:
    for row in rows:
        fh.write(json.dumps(row, sort_keys=True) + "\n")


def strip_timing(row: Dict[str, Any]) -> Dict[str, Any]:
    """Row without wall-clock fields, for determinism comparisons."""
    return {k: v for k, v in row.items() if not k.startswith("seconds")}
