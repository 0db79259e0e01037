import json

import pytest

from monoembed import cli, experiment
from monoembed.experiment import ConfigError, parse_config, run_experiment, strip_timing
from monoembed.graphcore import MultipartiteGraph, complete_multipartite, read_graph, write_graph

FAST = "practical:2,T0=8,t0=1,eps0=0.3,eps_star=0.3,floor_frac=0.5"


def test_parse_config_grid_and_defaults():
    cfg = parse_config("N = 50\nN = 60  # second value\np = 0.5\ntarget = path:4\nseeds = 0..2\nclique_budget = 8\n")
    assert cfg.seeds == [0, 1, 2]
    assert cfg.axes["r"] == ["5"] and cfg.axes["coloring"] == ["uniform-random"]
    assert len(cfg.cells()) == 2
    assert cfg.options == {"clique_budget": 8}
    assert parse_config("N=5\nC=1\ntarget=path:2\nseeds=3,1,3").seeds == [1, 3]


@pytest.mark.parametrize("text", [
    "N = 50\np = 0.5\nC = 1\ntarget = path:4\nseeds = 0",
    "N = 50\ntarget = path:4\nseeds = 0",
    "p = 0.5\ntarget = path:4\nseeds = 0",
    "N = 50\np = 0.5\ntarget = path:4",
    "N = 50\np = 0.5\ntarget = path:4\nseeds = 5..1",
    "N = 50\np = 0.5\ntarget = path:4\nseeds = 0\nbogus = 1",
    "N = 50\np = 0.5\ntarget = path:4\nseeds = 0\ncoloring = plaid",
    "N = 50\np = 0.5\ntarget = path:4\nseeds = 0\naudit = 1\naudit = 2",
    "N = x\np = 0.5\ntarget = path:4\nseeds = 0",
    "N 50",
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_single_cell_rows():
    cfg = parse_config(f"N = 40\np = 1.0\ncoloring = all-red\ntarget = path:4\nschedule = {FAST}\nseeds = 0")
    rows = run_experiment(cfg, workers=1)
    assert [r["kind"] for r in rows] == ["run", "cell"]
    run, cell = rows
    assert run["success"] and run["verified"] and run["color"] == "R"
    assert cell["runs"] == 1 and cell["successes"] == 1 and cell["success_rate"] == 1.0
    assert cell["verified_all"] and cell["stage_histogram"] == {}


def test_empty_host_cell_all_diagnostic():
    cfg = parse_config(f"N = 30\np = 0\ntarget = path:4\nschedule = {FAST}\nseeds = 0..2")
    rows = run_experiment(cfg, workers=1)
    runs = [r for r in rows if r["kind"] == "run"]
    assert len(runs) == 3 and not any(r["success"] for r in runs)
    assert all(r["failed_stage"] is not None for r in runs)
    assert rows[-1]["success_rate"] == 0.0 and sum(rows[-1]["stage_histogram"].values()) == 3


def test_determinism_across_worker_counts():
    cfg = parse_config(f"N = 60\np = 0.6\np = 0.8\ntarget = cycle:8\nschedule = {FAST}\nseeds = 0..2")
    a = [strip_timing(r) for r in run_experiment(cfg, workers=1)]
    b = [strip_timing(r) for r in run_experiment(cfg, workers=2)]
    assert a == b
    assert [r["kind"] for r in a].count("cell") == 2


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MONOEMBED_THREADS", "3")
    assert experiment.worker_count(10) == 3
    assert experiment.worker_count(2) == 2


# ---------------------------------------------------------------------------
# command line

def test_cli_generate(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert cli.main(["generate", "--r", "3", "--n", "20", "--p", "0.5", "--seed", "1", "--out", str(out)]) == 0
    G = read_graph(out)
    assert (G.r, G.N) == (3, 20)
    assert "p=0.50000" in capsys.readouterr().err
    assert cli.main(["generate", "--r", "3", "--n", "20", "--c", "1", "--delta", "2", "--out", str(out)]) == 0


def test_cli_usage_errors(tmp_path):
    out = str(tmp_path / "g.txt")
    assert cli.main(["generate", "--r", "3", "--n", "20", "--p", "0.5", "--c", "1", "--delta", "2", "--out", out]) == 1
    assert cli.main(["generate", "--r", "3", "--n", "20", "--out", out]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["generate", "--n", "x"])
    assert exc.value.code == 1
    assert cli.main(["embed", "--graph", str(tmp_path / "missing"), "--color-strategy", "all-red",
                     "--target", "path:3"]) == 1


def test_cli_oracles(tmp_path, capsys):
    wit = tmp_path / "w.json"
    assert cli.main(["oracle", "turan", "--r", "3", "--k", "2", "--witness", str(wit)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "8" and f"witness: {wit}" in out
    assert len(json.loads(wit.read_text())) == 8
    assert cli.main(["oracle", "ramsey", "--m", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "6"
    assert cli.main(["oracle", "arrow", "--g", "K6", "--h", "K3"]) == 0
    assert capsys.readouterr().out.strip() == "true"
    assert cli.main(["oracle", "arrow", "--g", "K5", "--h", "K3"]) == 0
    assert capsys.readouterr().out.strip() == "false"
    assert cli.main(["oracle", "turan", "--r", "5", "--k", "5"]) == 3


def test_cli_embed_exit_codes(tmp_path, capsys):
    g = tmp_path / "k.txt"
    write_graph(complete_multipartite(5, 50), g)
    out = tmp_path / "e.json"
    rc = cli.main(["embed", "--graph", str(g), "--color-strategy", "all-red", "--target", "cycle:12",
                   "--schedule", FAST, "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["success"] and doc["verified"] and "schedule" in doc
    tiny = tmp_path / "t.txt"
    write_graph(complete_multipartite(5, 4), tiny)
    assert cli.main(["embed", "--graph", str(tiny), "--color-strategy", "all-red", "--target", "cycle:40"]) == 2


def test_cli_audit(tmp_path, capsys):
    g = tmp_path / "k.txt"
    write_graph(complete_multipartite(3, 20), g)
    assert cli.main(["audit", "--graph", str(g), "--samples", "20", "--triples", "1", "--inner-samples", "5"]) == 0
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert reports[0]["property"] and len(reports) >= 3
    empty = tmp_path / "e.txt"
    write_graph(MultipartiteGraph(3, 20), empty)
    assert cli.main(["audit", "--graph", str(empty), "--samples", "20"]) == 0
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(reports) == 1 and reports[0]["verdict"] == "violated"


def test_cli_experiment(tmp_path, capsys):
    cfg = tmp_path / "x.cfg"
    cfg.write_text(f"N = 40\np = 1.0\ncoloring = all-red\ntarget = path:4\nschedule = {FAST}\nseeds = 0..1\n")
    out = tmp_path / "x.jsonl"
    assert cli.main(["experiment", str(cfg), "--out", str(out), "--workers", "1"]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["kind"] for r in rows] == ["run", "run", "cell"]
    bad = tmp_path / "bad.cfg"
    bad.write_text("N = 40\n")
    assert cli.main(["experiment", str(bad)]) == 1
