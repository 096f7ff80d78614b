import json

import pytest

from zaksampling.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, main

TWO_PIECE = {"dim": 1, "type": "raster", "grid": 2,
             "cells": [{"index": [0], "offsets": [[0], [2]]}, {"index": [1], "offsets": [[0]]}]}
PAIR = {"dim": 1, "type": "multitile", "offsets": [[0], [1]]}


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_analyze_and_complete(capsys, write, tmp_path):
    path = write("s.json", TWO_PIECE)
    code, out, _ = run(capsys, "spectrum", "analyze", path)
    assert code == EXIT_OK and json.loads(out) == {"N": 2, "k": 2, "L": [[0], [2]]}
    code, out, _ = run(capsys, "spectrum", "complete", path, "--level", "2")
    cells = {tuple(c["index"]): c["offsets"] for c in json.loads(out)["cells"]}
    assert code == EXIT_OK and cells == {(0,): [[0], [2]], (1,): [[0], [1]]}
    dest = tmp_path / "done.json"
    code, out, err = run(capsys, "spectrum", "complete", path, "--level", "3", "--out", str(dest))
    assert code == EXIT_OK and out == "" and "wrote" in err
    assert len(json.loads(dest.read_text())["cells"][0]["offsets"]) == 3
    assert run(capsys, "spectrum", "complete", path, "--level", "1")[0] == EXIT_INVALID


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "cor2", "--k", "4", "--alpha", "0.5", "--eps", "0.1")
    assert code == EXIT_OK and json.loads(out)["m"] == 702
    code, out, _ = run(capsys, "bounds", "ktile", "--k", "2", "--N", "2", "--alpha", "0.5", "--eps", "0.1")
    assert json.loads(out)["m"] == 351
    code, out, _ = run(capsys, "bounds", "thm1", "--k", "1", "--C", "1", "--K", "0", "--alpha", "0.5",
                       "--eps", "0.1")
    assert json.loads(out)["m"] == 120
    code, out, _ = run(capsys, "bounds", "general", "--volume", "3.141592653589793", "--surface",
                       "6.283185307179586", "--kappa", "2", "--d", "2", "--alpha", "0.5", "--eps", "0.1")
    res = json.loads(out)
    assert code == EXIT_OK and res["simulable"] is False and res["m"] > 10 ** 7
    assert run(capsys, "bounds", "ktile", "--k", "2", "--alpha", "0.5", "--eps", "0.1")[0] == EXIT_INVALID
    assert run(capsys, "bounds", "cor2", "--k", "2", "--alpha", "1.5", "--eps", "0.1")[0] == EXIT_INVALID


def test_verify_pass_and_fail(capsys, write):
    spec = write("s.json", PAIR)
    good = write("good.json", {"dim": 1, "points": [[-0.25], [0.25]]})
    bad = write("bad.json", {"dim": 1, "points": [[0.1], [0.1]]})
    code, out, err = run(capsys, "verify", "--spectrum", spec, "--pattern", good, "--alpha", "0.1")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["pass"] is True and rep["alpha_achieved"] <= 1e-12
    assert "PASS" in err
    code, out, _ = run(capsys, "verify", "--spectrum", spec, "--pattern", bad, "--alpha", "0.5")
    assert code == EXIT_FAIL and json.loads(out)["pass"] is False
    raster = write("r.json", TWO_PIECE)
    code, out, _ = run(capsys, "--threads", "2", "verify", "--spectrum", raster, "--pattern", good,
                       "--alpha", "0.99")
    assert code in (EXIT_OK, EXIT_FAIL) and json.loads(out)["k"] == 2


def test_verify_generators_file(capsys, write):
    gens = write("g.json", {"dim": 1, "members": [{"base_freq": [0], "profile": "indicator"},
                                                {"base_freq": [3], "profile": "indicator"}]})
    pat = write("p.json", {"dim": 1, "points": [[-0.25], [0.25]]})
    code, out, _ = run(capsys, "verify", "--generators", gens, "--pattern", pat, "--alpha", "0.5")
    rep = json.loads(out)
    # offsets 0 and 3 at -1/4, 1/4 give a tight frame
    assert code == EXIT_OK and rep["alpha_achieved"] <= 1e-12 and len(rep["per_fiber"]) == 1


def test_simulate_and_reconstruct(capsys, write):
    spec = write("s.json", PAIR)
    code, out, err = run(capsys, "simulate", "--spectrum", spec, "--m", "6", "--grid", "8", "--seed", "4")
    res = json.loads(out)
    assert code == EXIT_OK and res["m"] == 6 and res["seed"] == 4 and "seed: 4" in err
    code2, out2, _ = run(capsys, "simulate", "--spectrum", spec, "--m", "6", "--grid", "8", "--seed", "4")
    assert out2 == out
    code, out, _ = run(capsys, "reconstruct", "--spectrum", spec, "--m", "12", "--grid", "8", "--seed", "1")
    assert code == EXIT_OK and json.loads(out)["relative_error"] <= 1e-9
    bad = write("bad.json", {"dim": 1, "points": [[0.1], [0.1]]})
    code, _, err = run(capsys, "reconstruct", "--spectrum", spec, "--pattern", bad, "--grid", "4")
    assert code == EXIT_FAIL and "singular" in err.lower()
    # global seed applies when no local one is given
    code, _, err = run(capsys, "--seed", "13", "simulate", "--spectrum", spec, "--m", "2", "--grid", "4")
    assert "seed: 13" in err


def test_experiment_run_and_sweep(capsys, write, tmp_path):
    cfg = {"spectrum": PAIR, "alpha": 0.5, "eps": 0.1, "trials": 10, "base_seed": 3}
    path = write("cfg.json", cfg)
    code, out, err = run(capsys, "experiment", "run", "--config", path)
    lines = out.strip().splitlines()
    assert code == EXIT_OK and lines[0].startswith("m,trials,failures") and len(lines) == 2
    assert "base seed: 3" in err
    failing = write("fail.json", {**cfg, "m": 2})
    assert run(capsys, "experiment", "run", "--config", failing)[0] == EXIT_FAIL
    sweep = write("sweep.json", {**cfg, "m_values": [4, 16]})
    dest = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "--seed", "5", "experiment", "sweep", "--config", sweep, "--out", str(dest))
    assert code == EXIT_OK and dest.read_text() == out
    rows = out.strip().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["4", "16"] and all(r.endswith(",5") for r in rows)
    assert run(capsys, "experiment", "sweep", "--config", path)[0] == EXIT_INVALID


@pytest.mark.parametrize("argv", [
    ["spectrum", "analyze", "/no/such/file.json"],
    ["bounds", "cor2", "--k", "2", "--bogus", "1"],
    ["frobnicate"],
    [],
])
def test_invalid_invocations(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_INVALID and out == "" and err.startswith("error:")


def test_malformed_files(capsys, write):
    assert run(capsys, "spectrum", "analyze", write("x.json", "{not json"))[0] == EXIT_INVALID
    schema_bad = write("y.json", {"dim": 1, "type": "multitile"})
    code, _, err = run(capsys, "spectrum", "analyze", schema_bad)
    assert code == EXIT_INVALID and "invalid spectrum" in err
    spec = write("s.json", PAIR)
    outside = write("p.json", {"dim": 1, "points": [[0.9]]})
    assert run(capsys, "verify", "--spectrum", spec, "--pattern", outside, "--alpha", "0.5")[0] == EXIT_INVALID
