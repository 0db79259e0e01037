"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the report lines.
"""

import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from monoembed import cli
from monoembed.constants import load_schedule, theoretical_schedule
from monoembed.embedder import InternalConsistencyError, embed, verify_embedding
from monoembed.experiment import read_config, run_experiment
from monoembed.graphcore import VertexSet, color_edges, complete_multipartite, generate_random, write_graph
from monoembed.hprep import bfs_distances, cube_graph, parse_family, prepare, verify_plan
from monoembed.oracles import arrow_check, complete_graph, exact_regularity, path_graph, ramsey_bound, turan_number
from monoembed.properties import check_regular_pair, check_uniformity, congestion_count

from _util import naive_congestion, random_target

ROOT = Path(__file__).resolve().parent.parent
FROZEN = ROOT / "configs" / "calibrated_c40.cfg"
CALIBRATED = "practical:2,T0=8,t0=2,eps0=0.3,eps_star=0.3,floor_frac=0.5"


def report(number, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
    assert ok, f"criterion {number} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def battery():
    """Every embedding success produced by the suite, for the validity gate."""
    return []


def test_01_turan_exact():
    slow, wrong = [], []
    for r, k in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2)]:
        t = time.perf_counter()
        value = turan_number(r, k).value
        dt = time.perf_counter() - t
        if value != (math.comb(r, 2) - 1) * k * k:
            wrong.append((r, k, value))
        if dt >= 60:
            slow.append((r, k, round(dt, 1)))
    report(1, "Turan formula", not wrong and not slow, f"wrong={wrong} slow={slow}")


def test_02_arrow_exact():
    t = time.perf_counter()
    results = (arrow_check(complete_graph(6), complete_graph(3)),
               arrow_check(complete_graph(5), complete_graph(3)),
               arrow_check(complete_graph(3), path_graph(3)))
    dt = time.perf_counter() - t
    ok = results == (True, False, True) and dt < 60 and ramsey_bound(3).exact == 6
    report(2, "arrow oracle", ok, f"(K6,K3),(K5,K3),(K3,P3) -> {results}, R(3)={ramsey_bound(3).exact}, {dt:.1f}s")


def test_03_sampled_checker_matches_oracle():
    rng = np.random.default_rng(2024)
    disagreements = 0
    for trial in range(500):
        a, b = (int(x) for x in rng.integers(1, 9, size=2))
        p = float(rng.choice([0.3, 0.5, 0.8]))
        G = generate_random(2, 8, p, trial)
        X = VertexSet(0, rng.choice(8, a, replace=False))
        Y = VertexSet(1, rng.choice(8, b, replace=False))
        eps = float(rng.uniform(0.05, 1.0))
        full = math.comb(8, 4) ** 2
        cert = check_regular_pair(G, X, Y, p, eps, mode="sampled", samples=full, seed=trial)
        if cert.holds != exact_regularity(G, X, Y, p, eps).regular or cert.sampled:
            disagreements += 1
    report(3, "sampled regularity vs exact oracle", disagreements == 0, f"{disagreements} disagreements / 500")


def test_04_congestion_matches_naive():
    rng = np.random.default_rng(7)
    disagreements = 0
    for trial in range(1000):
        r = int(rng.integers(2, 5))
        N = int(rng.integers(1, 31))
        k = int(rng.integers(1, min(3, r - 1) + 1))
        G = generate_random(r, N, float(rng.uniform(0.1, 0.9)), trial)
        upart = int(rng.integers(r))
        others = [q for q in range(r) if q != upart]
        F, used = [], set()
        for _ in range(int(rng.integers(0, N + 1))):
            K = [(int(q), int(rng.integers(N))) for q in rng.choice(others, k, replace=False)]
            if any(v in used for v in K):
                continue
            used.update(K)
            F.append(K)
        U = VertexSet(upart, rng.choice(N, int(rng.integers(0, N + 1)), replace=False))
        if congestion_count(G, F, U) != naive_congestion(G, F, U):
            disagreements += 1
    report(4, "congestion count vs naive", disagreements == 0, f"{disagreements} disagreements / 1000")


def test_05_target_preparation():
    failures = []
    for seed in range(100):
        H, _ = random_target(seed)
        D = H.Delta
        H3 = cube_graph(H)
        oracle = {(u, v) for u in range(H.n) for v, d in bfs_distances(H, u).items() if 1 <= d <= 3 and u < v}
        if set(H3.edges()) != oracle:
            failures.append((seed, "cube"))
        plan = prepare(H)
        if not verify_plan(H, plan):
            failures.append((seed, "plan"))
        if not len(plan.nonempty_classes()) <= plan.colors_used * (D + 1) <= (D**3 - D**2 + D + 1) * (D + 1):
            failures.append((seed, "class count"))
        for cls in plan.classes:
            for i, w in enumerate(cls):
                dist = bfs_distances(H, w, limit=3)
                if any(x in dist for x in cls[i + 1:]):
                    failures.append((seed, "distance"))
    report(5, "target preparation invariants", not failures, f"{len(failures)} failures over 100 targets {failures[:5]}")


def test_06_uniformity_statistics():
    t = time.perf_counter()
    holds = 0
    for seed in range(1, 21):
        G = generate_random(3, 3000, 0.2, seed)
        holds += check_uniformity(G, 0.2, 200, seed).holds
    dt = time.perf_counter() - t
    report(6, "uniformity on G_3(3000, 0.2)", holds >= 19 and dt < 300, f"{holds}/20 hold, {dt:.0f}s")


def test_07_candidate_identity_debug(battery):
    sched = load_schedule(CALIBRATED)
    targets = ["cycle:40", "path:30", "matching:10", "cycle:12", "cycles:3x6", "regular:20x2"]
    checks = mismatches = 0
    for run in range(25):
        N = (200, 300, 400)[run % 3]
        G = generate_random(5, N, 0.35, run)
        c = color_edges(G, "uniform-random", run + 1000)
        H = parse_family(targets[run % len(targets)], run)
        try:
            res = embed(G, c, H, sched, p=0.35, seed=run, debug=True)
        except InternalConsistencyError:
            mismatches += 1
            continue
        checks += res.stats.get("debug_checks", 0)
        mismatches += res.stats.get("debug_mismatches", 0)
        if res.success:
            battery.append(bool(verify_embedding(G, c, H, res.phi, res.color, res.clusters, res.plan.g)))
    report(7, "incremental candidates equal recomputation", mismatches == 0 and checks > 0,
           f"{checks} level checks, {mismatches} mismatches over 25 runs")


def test_09_calibrated_end_to_end(battery):
    rows = run_experiment(read_config(FROZEN))
    runs = [r for r in rows if r["kind"] == "run"]
    battery.extend(bool(r["verified"]) for r in runs if r["success"])
    succ = sum(r["success"] for r in runs)
    summary = rows[-1]
    report(9, "calibrated C40 in G_5(400, 0.35)", len(runs) == 50 and succ >= 40,
           f"{succ}/{len(runs)} seeds succeed, failures {summary['stage_histogram']}")


def test_10_schedule_exactness():
    bad = []
    for D in (2, 3, 4):
        for T0 in (8, 64):
            s = theoretical_schedule(D, T0)
            if s.xi * s.B != 1 or s.gamma * 4 ** (D - 1) * T0 != 1 - s.eps:
                bad.append((D, T0))
            if not all(isinstance(v, Fraction) for v in (s.xi, s.B, s.gamma, s.eps)):
                bad.append((D, T0, "not rational"))
    s = theoretical_schedule(2, 64)
    worked = (s.mu, s.eps_star, s.Delta_bar, s.xi) == (Fraction(1, 16), Fraction(1, 12), 18, Fraction(1, 24576))
    report(10, "schedule exactness", not bad and worked, f"identity failures {bad}, worked example {worked}")


def test_11_trivial_host(tmp_path, battery, capsys):
    g = tmp_path / "k5_50.txt"
    write_graph(complete_multipartite(5, 50), g)
    outcomes = {}
    for target in ("path:10", "cycle:12", "matching:3"):
        out = tmp_path / f"{target.replace(':', '_')}.json"
        rc = cli.main(["embed", "--graph", str(g), "--color-strategy", "all-red", "--target", target,
                       "--schedule", CALIBRATED, "--out", str(out)])
        doc = json.loads(out.read_text())
        outcomes[target] = rc
        if doc["success"]:
            battery.append(bool(doc["verified"]))
    capsys.readouterr()
    with capsys.disabled():
        report(11, "all-red complete host", all(rc == 0 for rc in outcomes.values()), f"exit codes {outcomes}")


def test_08_validity_gate(battery):
    # runs last in this module so that it sees every success above
    report(8, "every success verifies", len(battery) > 0 and all(battery),
           f"{sum(battery)}/{len(battery)} successes verified")
