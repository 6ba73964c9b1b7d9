import json

import pytest

from pebbleforge.cli import EXIT_CAP, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from pebbleforge.graph import load_graph
from pebbleforge.pebbling import pebbling_from_json


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)

    def _run(*argv):
        capsys.readouterr()
        code = main([str(a) for a in argv])
        out = capsys.readouterr().out
        return code, out

    return _run


def _json(out):
    return json.loads(out.strip().splitlines()[-1])


def basic(run, family, n, name):
    assert run("gen", "basic", "--family", family, "--n", n, "-o", name)[0] == EXIT_OK
    return name


class TestGen:
    def test_local_expander_deterministic(self, run, tmp_path):
        run("gen", "local-expander", "--n", 64, "--delta", 0.4, "--seed", 7, "-o", "a.json")
        run("gen", "local-expander", "--n", 64, "--delta", 0.4, "--seed", 7, "-o", "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert load_graph(tmp_path / "a.json").recipe["kind"] == "local-expander"

    def test_main(self, run, tmp_path):
        code, _ = run("gen", "main", "--n", 10, "--epsilon", 0.5, "--base", "certified-small",
                      "--seed", 1, "-o", "m.json")
        assert code == EXIT_OK
        g = load_graph(tmp_path / "m.json")
        g.validate()
        assert g.recipe["base"]["kind"] == "certified-small"

    def test_reduce_dr_path(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        assert run("gen", "reduce-dr", "p3.json", "-o", "d.json")[0] == EXIT_OK
        assert load_graph(tmp_path / "d.json").n == 6

    def test_reduce_ss_writes_map(self, run, tmp_path):
        basic(run, "complete", 4, "k4.json")
        assert run("gen", "reduce-ss", "k4.json", "-o", "s.json")[0] == EXIT_OK
        m = json.loads((tmp_path / "s.json.map.json").read_text())
        assert m["kind"] == "ss" and m["metanodes"]["4"]["terminal"] == load_graph(tmp_path / "s.json").n

    def test_superconcentrator(self, run, tmp_path):
        assert run("gen", "superconcentrator", "--m", 4, "-o", "sc.json")[0] == EXIT_OK
        rec = load_graph(tmp_path / "sc.json").recipe
        assert rec["certificate"]["ok"] and rec["inputs"] == [1, 2, 3, 4]

    def test_manifest(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        man = json.loads((tmp_path / "p3.json.manifest.json").read_text())
        assert man["command"][:2] == ["gen", "basic"] and man["seed"] == 0
        assert "p3.json" in man["outputs"] and man["caps_hit"] == []

    def test_stdout_without_out(self, run):
        code, out = run("gen", "basic", "--family", "path", "--n", 2)
        assert code == EXIT_OK and _json(out)["format"] == "pebbleforge-dag/1"

    def test_bad_parameters(self, run):
        assert run("gen", "local-expander", "--n", 10, "--delta", 0)[0] == EXIT_USAGE
        assert run("gen", "basic", "--family", "path")[0] == EXIT_USAGE
        assert run("gen", "reduce-dr", "missing.json")[0] == EXIT_USAGE


class TestPebble:
    def test_oracle_complete_four(self, run, tmp_path):
        basic(run, "complete", 4, "k4.json")
        code, out = run("pebble", "oracle", "--objective", "cc", "--mode", "par", "k4.json")
        doc = _json(out)
        assert code == EXIT_OK and doc["value"] == 7 and doc["exact"]
        assert doc["witness"]["steps"] == [[], [1], [1, 2], [1, 2, 3], [4]]

    def test_naive_path(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        code, out = run("pebble", "naive", "p3.json", "-o", "p.json")
        assert code == EXIT_OK and _json(out)["metrics"]["cc"] == 6
        assert (tmp_path / "p.json.metrics.csv").exists()

    def test_reducible_bw(self, run, tmp_path):
        basic(run, "path", 4, "p4.json")
        code, out = run("pebble", "reducible-bw", "--d", 2, "--set", 2, "p4.json", "-o", "bw.json")
        doc = _json(out)
        assert code == EXIT_OK and doc["metrics"]["bw_cc"] <= 9 and doc["bound"] == 9
        assert run("verify", "bw-pebbling", "p4.json", "bw.json")[0] == EXIT_OK

    def test_reducible_bw_precondition(self, run):
        basic(run, "path", 5, "p5.json")
        assert run("pebble", "reducible-bw", "--d", 1, "--set", 3, "p5.json")[0] == EXIT_USAGE

    def test_oracle_cap(self, run):
        basic(run, "complete", 30, "k30.json")
        assert run("oracle", "k30.json", "--objective", "cc")[0] == EXIT_CAP

    def test_top_level_oracle_witness_file(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        code, _ = run("oracle", "p3.json", "--objective", "space", "--mode", "seq", "-o", "o.json")
        assert code == EXIT_OK
        wit = pebbling_from_json((tmp_path / "o.json.witness.json").read_text())
        assert max(len(c) for c in wit.steps) == 1

    def test_ss_needs_threshold(self, run):
        basic(run, "path", 3, "p3.json")
        assert run("oracle", "p3.json", "--objective", "ss")[0] == EXIT_USAGE


class TestVerify:
    def test_tampered_pebbling(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        run("pebble", "naive", "p3.json", "-o", "p.json")
        assert run("verify", "pebbling", "p3.json", "p.json")[0] == EXIT_OK
        doc = json.loads((tmp_path / "p.json").read_text())
        doc["steps"][1] = [2]
        (tmp_path / "bad.json").write_text(json.dumps(doc))
        code, out = run("verify", "pebbling", "p3.json", "bad.json")
        assert code == EXIT_FAIL and _json(out)["violation"]["step"] == 1

    def test_garbage_pebbling_file(self, run, tmp_path):
        basic(run, "path", 3, "p3.json")
        (tmp_path / "junk.json").write_text("{")
        assert run("verify", "pebbling", "p3.json", "junk.json")[0] == EXIT_FAIL

    def test_depth_robust(self, run, tmp_path):
        basic(run, "complete", 8, "k8.json")
        assert run("verify", "depth-robust", "k8.json", "--e", 2, "--d", 6)[0] == EXIT_OK
        basic(run, "path", 4, "p4.json")
        code, _ = run("verify", "depth-robust", "p4.json", "--e", 1, "--d", 3, "-o", "v.json")
        verdict = json.loads((tmp_path / "v.json").read_text())
        assert code == EXIT_FAIL and verdict["witness"] == [2]
        code, out = run("verify", "depth-robust", "p4.json", "--e", 1, "--d", 3, "--witness", "v.json")
        assert code == EXIT_FAIL

    def test_depth_robust_cap(self, run):
        basic(run, "complete", 60, "k60.json")
        assert run("verify", "depth-robust", "k60.json", "--e", 20, "--d", 1)[0] == EXIT_CAP

    def test_local_expander(self, run):
        basic(run, "path", 8, "p8.json")
        code, out = run("verify", "local-expander", "p8.json", "--delta", 0.25, "--r-max", 4)
        assert code == EXIT_FAIL
        basic(run, "complete", 8, "k8.json")
        assert run("verify", "local-expander", "k8.json", "--delta", 0.3)[0] == EXIT_OK

    def test_superconcentrator_from_recipe(self, run):
        run("gen", "superconcentrator", "--m", 3, "-o", "sc.json")
        assert run("verify", "superconcentrator", "sc.json", "--k", 3)[0] == EXIT_OK

    def test_superconcentrator_cut_vertex(self, run, tmp_path):
        doc = {"format": "pebbleforge-dag/1", "n": 5, "edges": [[1, 3], [2, 3], [3, 4], [3, 5]]}
        (tmp_path / "cut.json").write_text(json.dumps(doc))
        code, out = run("verify", "superconcentrator", "cut.json", "--inputs", "1,2",
                        "--outputs", "4,5", "--k", 2)
        assert code == EXIT_FAIL

    def test_good_nodes(self, run):
        basic(run, "path", 10, "p10.json")
        code, out = run("verify", "good-nodes", "p10.json", "--set", "5,6", "--gamma", 0.5)
        doc = _json(out)
        assert code == EXIT_OK and doc["good"] == [1, 2, 8, 9, 10]


class TestMhf:
    def test_single_node_stub(self, run):
        basic(run, "path", 1, "one.json")
        code, out = run("mhf", "evaluate", "one.json", "--backend", "test-stub", "--input", "00")
        doc = _json(out)
        assert code == EXIT_OK and doc["total_calls"] == 1

    def test_chain_of_sixteen(self, run, tmp_path):
        basic(run, "path", 16, "p16.json")
        code, _ = run("mhf", "evaluate", "p16.json", "--input", "00", "--w", 64,
                      "--block-size", 256, "-o", "l.json", "--call-log")
        doc = json.loads((tmp_path / "l.json").read_text())
        assert code == EXIT_OK and doc["total_calls"] == 16
        assert doc["smc_threshold_count"] == 13 and doc["smc_block_sum"] == 28
        rows = (tmp_path / "l.json.trace.csv").read_text().splitlines()
        assert rows[0] == "step,state_bits,calls,blocks,at_threshold" and len(rows) == 17
        assert len(json.loads((tmp_path / "l.json.calls.json").read_text())) == 16

    def test_same_seed_same_labels(self, run):
        basic(run, "complete", 5, "k5.json")
        a = _json(run("mhf", "evaluate", "k5.json", "--backend", "test-stub", "--seed", 4, "--input", "ab")[1])
        b = _json(run("mhf", "evaluate", "k5.json", "--backend", "test-stub", "--seed", 4, "--input", "ab")[1])
        assert a["labels"] == b["labels"]

    def test_wrong_arity(self, run):
        basic(run, "empty", 2, "e2.json")
        assert run("mhf", "evaluate", "e2.json", "--input", "00")[0] == EXIT_USAGE


def test_unknown_command(run):
    assert run("frobnicate")[0] == EXIT_USAGE
