import json

import numpy as np
import pytest

from expdecomp.cli import main
from expdecomp.decomposition import count_inter_cluster_edges
from expdecomp.graph import read_edge_list
from expdecomp.suites import SUITES

TWO_TRIANGLES = "6 7\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_gen_dumbbell(tmp_path):
    out = tmp_path / "db.txt"
    assert main(["gen", "dumbbell", "--k", "2", "--n", "16", "--b", "1", "--out", str(out)]) == 0
    G = read_edge_list(out)
    assert G.n == 32 and G.m == 241


def test_gen_regular_degree_sum(tmp_path):
    out = tmp_path / "r.txt"
    assert main(["gen", "regular", "--n", "20", "--degree", "4", "--seed", "3",
                 "--out", str(out)]) == 0
    G = read_edge_list(out)
    assert 2 * G.m == 80


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert main(["gen", "planted", "--n", "20", "--seed", "4", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_decompose_two_triangles(tmp_path, capsys):
    g = write(tmp_path, "g.txt", TWO_TRIANGLES)
    out = tmp_path / "p.json"
    assert main(["decompose", g, "--phi", "0.2", "--out", str(out)]) == 0
    js = json.loads(out.read_text())
    assert len(js["clusters"]) == 2 and js["inter_cluster_edges"] == 1
    assert "clusters=2 inter_edges=1 bound=" in capsys.readouterr().out


def test_decompose_single_vertex(tmp_path):
    g = write(tmp_path, "g.txt", "1 0\n")
    out = tmp_path / "p.json"
    assert main(["decompose", g, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["clusters"] == [[0]]


def test_malformed_file(tmp_path, capsys):
    g = write(tmp_path, "bad.txt", "3 2\n0 1\n1 x\n")
    assert main(["decompose", g]) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["decompose", str(tmp_path / "nope.txt")]) == 2


def test_unknown_flag():
    assert main(["decompose", "--bogus"]) == 2


def test_decompose_is_byte_identical_and_round_trips(tmp_path):
    g = tmp_path / "g.txt"
    assert main(["gen", "planted", "--n", "24", "--b", "2", "--seed", "2", "--out", str(g)]) == 0
    outs, traces = [], []
    for i in range(2):
        o, t = tmp_path / f"p{i}.json", tmp_path / f"t{i}.jsonl"
        assert main(["decompose", str(g), "--seed", "5", "--out", str(o), "--trace", str(t)]) == 0
        outs.append(o.read_bytes())
        traces.append(t.read_bytes())
    assert outs[0] == outs[1] and traces[0] == traces[1]
    js = json.loads(outs[0])
    G = read_edge_list(g)
    lab = np.full(G.n, -1)
    for i, c in enumerate(js["clusters"]):
        lab[c] = i
    assert count_inter_cluster_edges(G, lab) == js["inter_cluster_edges"]
    for line in traces[0].decode().splitlines():
        json.loads(line)


def test_cutmatch_complete_graph(tmp_path):
    g = tmp_path / "k.txt"
    edges = [(i, j) for i in range(16) for j in range(i + 1, 16)]
    g.write_text(f"16 {len(edges)}\n" + "".join(f"{a} {b}\n" for a, b in edges))
    out, trace = tmp_path / "r.json", tmp_path / "t.jsonl"
    assert main(["cutmatch", str(g), "--phi", "0.05", "--out", str(out),
                 "--trace", str(trace)]) == 0
    rep = json.loads(out.read_text())
    assert rep["case"] == "certified" and rep["congestion"]["ok"]


def test_cutmatch_dumbbell_with_oracle(tmp_path):
    g = tmp_path / "d.txt"
    assert main(["gen", "dumbbell", "--k", "2", "--n", "6", "--b", "1", "--out", str(g)]) == 0
    out, trace = tmp_path / "r.json", tmp_path / "t.jsonl"
    code = main(["cutmatch", str(g), "--phi", "0.05", "--oracle", "--seed", "1",
                 "--out", str(out), "--trace", str(trace)])
    rep = json.loads(out.read_text())
    assert code == 0
    if "cut_conductance" in rep:
        assert rep["cut_conductance"] <= rep["cut_bound"]
    recs = [json.loads(x) for x in trace.read_text().splitlines()]
    assert recs and all("psi" in r for r in recs)


def test_cutmatch_paper_mode_large_phi(tmp_path):
    g = write(tmp_path, "g.txt", TWO_TRIANGLES)
    assert main(["cutmatch", g, "--mode", "paper", "--phi", "0.5"]) == 2


def test_invalid_override(tmp_path):
    g = write(tmp_path, "g.txt", TWO_TRIANGLES)
    assert main(["cutmatch", g, "--d", "3"]) == 2


def test_verify_default(capsys):
    assert main(["verify", "--seed", "1"]) == 0
    assert "failures=0" in capsys.readouterr().out


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_verify_injected_fault(suite, capsys):
    assert main(["verify", "--suite", suite, "--inject-fault", suite]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "seed" in out


def test_verify_refuses_large_request(capsys):
    assert main(["verify", "--m", "100"]) == 2
    assert "refusing" in capsys.readouterr().err


def test_oracle_compare(tmp_path):
    g = tmp_path / "r.txt"
    assert main(["gen", "regular", "--n", "16", "--degree", "3", "--seed", "2",
                 "--connected", "--out", str(g)]) == 0
    out = tmp_path / "cmp.jsonl"
    assert main(["oracle-compare", str(g), "--out", str(out)]) == 0
    rows = [json.loads(x) for x in out.read_text().splitlines()]
    assert max(r["projection_error"] for r in rows) <= 1e-8
