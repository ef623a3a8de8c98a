import csv
import json
from pathlib import Path

import numpy as np
import pytest

from oracles import connected_gnp_edges
from privgraph import cli
from privgraph.graph import Graph, read_edge_list, write_edge_list

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def triangle(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text("a b\nb c\nc a\n")
    return p


@pytest.fixture
def community_graph(tmp_path):
    rng = np.random.default_rng(0)
    edges = [(u, w) for u, w in connected_gnp_edges(40, 0.05, rng)]
    edges += [(u, w) for u in range(10) for w in range(u + 1, 10)]
    p = tmp_path / "g.txt"
    p.write_text(write_edge_list(Graph(40, edges)))
    return p


def header(path):
    return Path(path).read_text().splitlines()[0] + "\n"


def test_synthesize_triangle(tmp_path, triangle):
    out = tmp_path / "syn.txt"
    assert run("synthesize", triangle, "-o", out, "--eps", "1e12", "--N", "1", "--seed", "1") == 0
    g, labels = read_edge_list(out, known_labels=["a", "b", "c"])
    assert g.node_count == 3
    doc = json.loads((tmp_path / "syn.txt.ledger.json").read_text())
    assert doc["verdict"]["passed"] is True
    assert doc["ledger"]["phase_costs"]["reconstruct"] == 0.0


def test_missing_input_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert run("synthesize", missing, "-o", tmp_path / "o.txt") == 2
    assert str(missing) in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n")
    assert run("synthesize", bad, "-o", tmp_path / "o.txt") == 2
    assert "line 1" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, triangle):
    assert run("synthesize", triangle, "-o", tmp_path / "o.txt", "--eps", "-1") == 2


def test_budget_violation_exit_code(tmp_path, triangle, monkeypatch):
    from privgraph.dp import BudgetViolationError

    def boom(*a, **k):
        raise BudgetViolationError("phase 'init' spent too much")

    monkeypatch.setattr(cli, "synthesize", boom)
    assert run("synthesize", triangle, "-o", tmp_path / "o.txt") == 1


def test_config_file_with_flag_override(tmp_path, community_graph):
    conf = tmp_path / "c.toml"
    conf.write_text("eps_total = 1e12\nN = 4\nseed = 3\n")
    out = tmp_path / "s.txt"
    assert run("synthesize", community_graph, "-o", out, "--config", conf, "--eps", "2.0") == 0
    doc = json.loads((tmp_path / "s.txt.ledger.json").read_text())
    assert doc["config"]["eps_total"] == 2.0 and doc["config"]["N"] == 4
    assert doc["verdict"]["spent"] == pytest.approx(2.0)


def test_tmf_method(tmp_path, community_graph):
    out = tmp_path / "t.txt"
    assert run("synthesize", community_graph, "-o", out, "--method", "tmf", "--eps", "1e12", "--seed", "0") == 0
    labels = read_edge_list(community_graph)[1]
    assert read_edge_list(out, known_labels=labels)[0] == read_edge_list(community_graph)[0]


def test_evaluate_identity_and_columns(tmp_path, community_graph):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    assert run("evaluate", community_graph, community_graph, "--json", js, "--csv", cs) == 0
    rep = json.loads(js.read_text())
    assert rep["nmi"] == 1.0 and rep["evc_mae"] == 0.0 and rep["modularity_re"] <= 1e-6
    assert header(cs) == (GOLDEN / "report_header.csv").read_text()


def test_evaluate_mismatched_nodes(tmp_path, community_graph):
    other = tmp_path / "o.txt"
    other.write_text("x y\n")
    assert run("evaluate", community_graph, other) == 2


def test_benchmark_single_row_and_schema(tmp_path, community_graph):
    agg, per, rec = tmp_path / "a.csv", tmp_path / "p.csv", tmp_path / "r.json"
    assert run("benchmark", community_graph, "-o", agg, "--per-rep", per, "--record", rec,
               "--reps", "1", "--eps-list", "2.0", "--N", "4", "--seed", "5") == 0
    rows = list(csv.DictReader(agg.open()))
    assert len(rows) == 1
    assert header(agg) == (GOLDEN / "benchmark_aggregate_header.csv").read_text()
    assert header(per) == (GOLDEN / "benchmark_per_rep_header.csv").read_text()
    record = json.loads(rec.read_text())
    assert record["reps"] == 1 and record["wall_seconds"] > 0 and record["timestamp"]


def test_benchmark_deterministic_and_aggregates(tmp_path, community_graph, monkeypatch):
    monkeypatch.setenv("PRIVGRAPH_THREADS", "1")
    outs = []
    for i in range(2):
        agg, per = tmp_path / f"a{i}.csv", tmp_path / f"p{i}.csv"
        assert run("benchmark", community_graph, "-o", agg, "--per-rep", per, "--reps", "3",
                   "--eps-list", "1.0", "3.0", "--methods", "privgraph", "tmf", "--N", "4", "--seed", "2") == 0
        outs.append((agg.read_text(), per.read_text()))
    assert outs[0] == outs[1]
    per_rows = list(csv.DictReader(open(tmp_path / "p0.csv")))
    agg_rows = list(csv.DictReader(open(tmp_path / "a0.csv")))
    assert len(per_rows) == 12 and len(agg_rows) == 4
    for agg in agg_rows:
        sel = [r for r in per_rows if r["method"] == agg["method"] and r["eps"] == agg["eps"]]
        assert [int(r["seed"]) for r in sel] == [2, 3, 4]
        for col in ("nmi", "degree_kl", "modularity_re"):
            vals = np.array([float(r[col]) for r in sel])
            assert float(agg[f"{col}_mean"]) == pytest.approx(vals.mean(), rel=1e-12, abs=1e-15)
            assert float(agg[f"{col}_std"]) == pytest.approx(vals.std(), rel=1e-12, abs=1e-15)


def test_benchmark_parallel_matches_serial(tmp_path, community_graph, monkeypatch):
    texts = []
    for threads in ("1", "2"):
        monkeypatch.setenv("PRIVGRAPH_THREADS", threads)
        out = tmp_path / f"a{threads}.csv"
        assert run("benchmark", community_graph, "-o", out, "--reps", "2", "--eps-list", "2.0", "--N", "4") == 0
        texts.append(out.read_text())
    assert texts[0] == texts[1]


def test_im_bounds(tmp_path, community_graph):
    out = tmp_path / "im.csv"
    assert run("im", community_graph, community_graph, "--k", "5", "--p", "0", "--trials", "20", "-o", out) == 0
    row = next(csv.DictReader(out.open()))
    assert float(row["mean"]) == 5.0
    assert header(out) == (GOLDEN / "im_header.csv").read_text()
    assert run("im", community_graph, community_graph, "--k", "5", "--p", "1", "--trials", "20", "-o", out) == 0
    assert float(next(csv.DictReader(out.open()))["mean"]) == 40.0
    assert run("im", community_graph, community_graph, "--k", "5", "--p", "0.2", "--trials", "200", "-o", out) == 0
    assert 5 <= float(next(csv.DictReader(out.open()))["mean"]) <= 40


def test_atomic_write_leaves_no_temp_on_failure(tmp_path, monkeypatch):
    import os

    target = tmp_path / "x.txt"

    def fail(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        cli.atomic_write(str(target), "data")
    assert list(tmp_path.iterdir()) == []
