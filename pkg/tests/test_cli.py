import json

import pytest

from rslab.cli import main


SIG = {"independence_mode": True,
       "relations": [{"name": "R", "arity": 2, "alpha": "0.55", "gamma": 1.0}]}
PATTERN = {"structure": {"n": 2, "edges": {"R": [[0, 1]]}}, "base": [0]}


@pytest.fixture
def sig_file(tmp_path):
    path = tmp_path / "sig.json"
    path.write_text(json.dumps(SIG))
    return str(path)


def test_sample_deterministic(tmp_path, sig_file, capsys):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert main(["sample", "--sig", sig_file, "--n", "30", "--seed", "9",
                 "--out", str(out1)]) == 0
    assert main(["sample", "--sig", sig_file, "--n", "30", "--seed", "9",
                 "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_delta_command(tmp_path, sig_file, capsys):
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"n": 2, "edges": {"R": [[0, 1]]}}))
    assert main(["delta", "--sig", sig_file, "--structure", str(s), "--base", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["delta"] == {"c0": 2, "coeffs": [-1], "value": 2 - 0.55}
    assert out["delta_rel"]["c0"] == 1


def test_closure_command(tmp_path, sig_file, capsys):
    s = tmp_path / "tri.json"
    s.write_text(json.dumps({"n": 3, "edges": {"R": [[0, 1], [1, 2], [0, 2]]}}))
    sig7 = tmp_path / "sig7.json"
    sig7.write_text(json.dumps({"independence_mode": True,
                                "relations": [{"name": "R", "arity": 2, "alpha": "0.7"}]}))
    assert main(["closure", "--sig", str(sig7), "--structure", str(s),
                 "--set", "0,2", "--m", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["closure"] == [0, 1, 2]


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["delta", "--sig", str(tmp_path / "nope.json"),
                 "--structure", str(tmp_path / "nope2.json")]) == 2


def test_bad_signature_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"relations": [{"name": "R", "arity": 0, "alpha": "0.5"}]}))
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"n": 1, "edges": {}}))
    assert main(["delta", "--sig", str(bad), "--structure", str(s)]) == 2


def test_assert_slope_exit_codes(tmp_path, sig_file):
    pat = tmp_path / "pat.json"
    pat.write_text(json.dumps(PATTERN))
    rep = tmp_path / "rep.json"
    ok = main(["ext-stats", "--sig", sig_file, "--pattern", str(pat),
               "--n-grid", "32,64,128", "--trials", "3", "--seed", "2",
               "--out", str(rep), "--assert-slope", "0.2:0.7"])
    assert ok == 0
    bad = main(["ext-stats", "--sig", sig_file, "--pattern", str(pat),
                "--n-grid", "32,64", "--trials", "2", "--seed", "2",
                "--out", str(rep), "--assert-slope", "0.9:1.0"])
    assert bad == 3


def test_cli_refuses_large_patterns(tmp_path, sig_file):
    big = {"structure": {"n": 20, "edges": {"R": []}}, "base": [0]}
    pat = tmp_path / "big.json"
    pat.write_text(json.dumps(big))
    assert main(["ext-stats", "--sig", sig_file, "--pattern", str(pat),
                 "--n-grid", "32", "--trials", "1", "--seed", "1"]) == 2


def test_csv_output(tmp_path, sig_file):
    pat = tmp_path / "pat.json"
    pat.write_text(json.dumps(PATTERN))
    rep, csv = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["ext-stats", "--sig", sig_file, "--pattern", str(pat),
                 "--n-grid", "32,64", "--trials", "2", "--seed", "2",
                 "--out", str(rep), "--csv", str(csv)]) == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "n,trials,mean,min,max,stddev,freq,seconds"
    assert len(lines) == 3
    report = json.loads(rep.read_text())
    assert report["config"]["n_grid"] == [32, 64]


def test_rare_command(tmp_path, capsys):
    sig7 = tmp_path / "sig7.json"
    sig7.write_text(json.dumps({"independence_mode": True,
                                "relations": [{"name": "R", "arity": 2, "alpha": "0.7"}]}))
    k4 = tmp_path / "k4.json"
    k4.write_text(json.dumps(
        {"n": 4, "edges": {"R": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]}}))
    out = tmp_path / "rare.json"
    assert main(["rare", "--sig", str(sig7), "--structure", str(k4),
                 "--n-grid", "32,64", "--trials", "20,10", "--seed", "3",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert [r["trials"] for r in rep["rows"]] == [20, 10]


def test_empty_closure_command(tmp_path, sig_file, capsys):
    assert main(["empty-closure", "--sig", sig_file, "--m", "3",
                 "--n-grid", "32,64", "--trials", "4", "--seed", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert all(r["freq"] == 1.0 for r in rep["rows"])


def test_zero_one_command(tmp_path, sig_file, capsys):
    pat = tmp_path / "pat.json"
    pat.write_text(json.dumps(PATTERN))
    assert main(["zero-one", "--sig", sig_file, "--pattern", str(pat), "--m", "2",
                 "--n-grid", "24,48", "--trials", "3", "--seed", "8"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["rows"]) == 2


def test_qe_probe_command(tmp_path, sig_file, capsys):
    g1, g2 = tmp_path / "g1.json", tmp_path / "g2.json"
    assert main(["sample", "--sig", sig_file, "--n", "96", "--seed", "1",
                 "--out", str(g1)]) == 0
    assert main(["sample", "--sig", sig_file, "--n", "96", "--seed", "2",
                 "--out", str(g2)]) == 0
    assert main(["qe-probe", "--sig", sig_file, "--g1", str(g1), "--g2", str(g2),
                 "--ell", "2", "--depth", "1", "--pairs", "8"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["experiment"] == "qe-probe"


def test_generic_build_command(tmp_path, capsys):
    sig7 = tmp_path / "sig7.json"
    sig7.write_text(json.dumps({"independence_mode": True,
                                "relations": [{"name": "R", "arity": 2, "alpha": "0.7"}]}))
    out = tmp_path / "chain.json"
    assert main(["generic-build", "--sig", str(sig7), "--size", "12",
                 "--vmax", "1", "--seed", "4", "--out", str(out)]) == 0
    chain = json.loads(out.read_text())
    assert chain["stages"][-1]["n"] <= 12
    assert chain["log"]