import csv
import json

import numpy as np
import pytest

import faultmem as fm
from faultmem.cli import main


def run_cli(args):
    return main([str(a) for a in args])


def write_config(path, **overrides):
    doc = {
        "code": {"n": 36, "gamma": 3, "rho": 6, "seed": 7,
                 "reject_4cycles": True},
        "decoder": "algorithm_a",
        "fault_model": {"type": "adversarial", "alpha_m": 0.0,
                        "strategy": "random"},
        "cycles": 10,
        "trials": 5,
        "root_seed": 1,
        "profile": {"alpha": 1.9 / 36, "epsilon": 0.25},
        "output": {"json": "result.json"},
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc))
    return doc


# -- generate ---------------------------------------------------------------


def test_generate_roundtrip_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a.alist", tmp_path / "b.alist"
    args = ["generate", "--n", 12, "--gamma", 3, "--rho", 6, "--seed", 7]
    assert run_cli(args + ["--out", out1]) == 0
    assert run_cli(args + ["--out", out2]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    g = fm.read_alist(out1.read_text())
    assert g.n == 12 and g.m == 6


def test_generate_invalid_divisibility(tmp_path, capsys):
    rc = run_cli(["generate", "--n", 5, "--gamma", 3, "--rho", 6,
                  "--out", tmp_path / "x.alist"])
    assert rc == 2
    assert "divisible" in capsys.readouterr().err


def test_generate_json_sidecar(tmp_path):
    out = tmp_path / "g.alist"
    jout = tmp_path / "g.json"
    assert run_cli(["generate", "--n", 12, "--gamma", 3, "--rho", 6,
                    "--seed", 7, "--out", out, "--json-out", jout]) == 0
    obj = json.loads(jout.read_text())
    assert obj["n"] == 12 and len(obj["edges"]) == 36


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FAULTMEM_OUTPUT_DIR", str(tmp_path))
    assert run_cli(["generate", "--n", 12, "--gamma", 3, "--rho", 6,
                    "--seed", 1, "--out", "sub/g.alist"]) == 0
    assert (tmp_path / "sub" / "g.alist").exists()


# -- certify ----------------------------------------------------------------


def make_alist(tmp_path, n=36, gamma=3, rho=6, seed=7, girth6=True):
    path = tmp_path / "g.alist"
    args = ["generate", "--n", n, "--gamma", gamma, "--rho", rho,
            "--seed", seed, "--out", path]
    if girth6:
        args.append("--reject-4cycles")
    assert run_cli(args) == 0
    return path


def test_certify_exhaustive_matches_library(tmp_path, capsys):
    alist = make_alist(tmp_path)
    cert_path = tmp_path / "cert.json"
    rc = run_cli(["certify", "--alist", alist, "--alpha", 2.9 / 36,
                  "--epsilon", 1 / 12, "--mode", "exhaustive",
                  "--out", cert_path])
    assert rc == 0
    assert "certified" in capsys.readouterr().out
    obj = json.loads(cert_path.read_text())
    g = fm.read_alist(alist.read_text())
    lib = fm.check_expansion_exhaustive(
        g, fm.ExpansionProfile(2.9 / 36, 3, 1 / 12))
    assert obj["verdict"] == lib.verdict == "certified"
    assert obj["subsets_checked"] == lib.subsets_checked


def test_certify_epsilon_out_of_range(tmp_path, capsys):
    alist = make_alist(tmp_path)
    rc = run_cli(["certify", "--alist", alist, "--alpha", 0.05,
                  "--epsilon", 0.3])
    assert rc == 2
    assert "epsilon" in capsys.readouterr().err


def test_certify_randomized_inconclusive(tmp_path, capsys):
    alist = make_alist(tmp_path)
    rc = run_cli(["certify", "--alist", alist, "--alpha", 2.9 / 36,
                  "--epsilon", 1 / 12, "--mode", "randomized",
                  "--trials", 300, "--seed", 4])
    assert rc == 0
    assert "inconclusive" in capsys.readouterr().out


# -- simulate ---------------------------------------------------------------


def test_simulate_fault_free(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    write_config(cfg)
    assert run_cli(["simulate", "--config", cfg]) == 0
    assert "failure_rate=0" in capsys.readouterr().out
    res = json.loads((tmp_path / "result.json").read_text())
    assert res["failures"] == 0 and res["failure_rate"] == 0.0


def test_simulate_byte_identical_reruns(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_config(cfg, fault_model={"type": "independent", "p_m": 0.05})
    assert run_cli(["simulate", "--config", cfg]) == 0
    first = (tmp_path / "result.json").read_bytes()
    assert run_cli(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "result.json").read_bytes() == first


def test_simulate_traces_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_config(cfg,
                 fault_model={"type": "adversarial", "alpha_m": 1.5 / 36,
                              "strategy": "repeat"},
                 output={"json": "r.json", "traces_csv": "traces.csv"})
    assert run_cli(["simulate", "--config", cfg]) == 0
    with (tmp_path / "traces.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["trial", "cycle", "alpha_v_pre", "alpha_v_post", "failed"]
    assert len(rows) == 1 + 5 * 10
    assert float(rows[1][2]) > 0  # decay visible pre-correction


def test_simulate_validation_failures(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    write_config(cfg, decoder="nonsense")
    assert run_cli(["simulate", "--config", cfg]) == 2
    write_config(cfg, fault_model={"type": "weird"})
    assert run_cli(["simulate", "--config", cfg]) == 2
    write_config(cfg, code={"n": 5, "gamma": 3, "rho": 6})
    assert run_cli(["simulate", "--config", cfg]) == 2
    cfg.write_text("{not json")
    assert run_cli(["simulate", "--config", cfg]) == 2


def test_simulate_alist_config_and_relative_paths(tmp_path):
    sub = tmp_path / "sub"
    sub.mkdir()
    alist = make_alist(tmp_path)
    cfg = sub / "cfg.json"
    write_config(cfg, code={"alist": "../g.alist"})
    assert run_cli(["simulate", "--config", cfg]) == 0
    assert (sub / "result.json").exists()


def test_simulate_decoder_none_fails_eventually(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_config(cfg, decoder="none",
                 fault_model={"type": "adversarial", "alpha_m": 1.5 / 36,
                              "strategy": "greedy"},
                 cycles=60, trials=3,
                 output={"json": "none.json"})
    assert run_cli(["simulate", "--config", cfg]) == 0
    res = json.loads((tmp_path / "none.json").read_text())
    assert res["failures"] == 3


# -- bounds -----------------------------------------------------------------


def test_bounds_gamma9_minimum_at_18(tmp_path):
    out = tmp_path / "bounds.csv"
    assert run_cli(["bounds", "--gamma", "9", "--rho", "10:36",
                    "--out", out]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    reds = {int(r["rho"]): float(r["redundancy"]) for r in rows}
    assert min(reds, key=reds.get) == 18
    for r in rows:
        if r["alpha_total_lower"]:
            assert float(r["alpha_total_lower"]) <= float(r["alpha_total_upper"])


def test_bounds_gamma34_emits(tmp_path):
    out = tmp_path / "b34.csv"
    assert run_cli(["bounds", "--gamma", "34", "--rho", "40,68,100",
                    "--out", out]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert all(float(r["alpha_total_lower"]) > 0 for r in rows)


def test_bounds_empty_rho_rejected(tmp_path, capsys):
    rc = run_cli(["bounds", "--gamma", "9", "--rho", "", "--out",
                  tmp_path / "x.csv"])
    assert rc == 2


def test_bounds_chernoff_table(tmp_path):
    out = tmp_path / "b.csv"
    ch = tmp_path / "ch.csv"
    assert run_cli(["bounds", "--gamma", "3", "--rho", "6", "--out", out,
                    "--chernoff-p", "0.01,0.05", "--chernoff-delta", "0.01",
                    "--chernoff-n", "1000", "--chernoff-out", ch]) == 0
    with ch.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    for r in rows:
        assert float(r["exact_bound"]) <= float(r["loose_bound"])


def test_bounds_constant_cost_model(tmp_path):
    out = tmp_path / "c.csv"
    assert run_cli(["bounds", "--gamma", "3", "--rho", "4:10", "--out", out,
                    "--cost", "constant:1"]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    sweep = {int(r["rho"]): float(r["redundancy"]) for r in rows}
    expect = {rho: fm.redundancy(3, rho, fm.constant_cost(1))
              for rho in range(4, 11)}
    assert sweep == pytest.approx(expect)


# -- compare-tk -------------------------------------------------------------


def test_compare_tk_paired_traces(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_config(cfg,
                 code={"n": 40, "gamma": 4, "rho": 5, "seed": 13,
                       "reject_4cycles": True},
                 profile={"alpha": 2.9 / 40, "epsilon": 0.12},
                 fault_model={"type": "adversarial", "alpha_m": 1.2 / 40,
                              "strategy": "repeat"},
                 cycles=8, trials=3)
    out = tmp_path / "paired.csv"
    summary = tmp_path / "summary.json"
    assert run_cli(["compare-tk", "--config", cfg, "--out", out,
                    "--summary", summary]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 8
    # identical fault streams: identical pre-correction decay
    for r in rows:
        assert r["alpha_v_pre_algorithm_a"] == r["alpha_v_pre_tk"]
    s = json.loads(summary.read_text())
    assert set(s) == {"algorithm_a", "tk"}


def test_module_entry_point(tmp_path):
    import subprocess
    import sys
    out = tmp_path / "b.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "faultmem", "bounds", "--gamma", "3",
         "--rho", "6", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_compare_tk_rejects_greedy(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    write_config(cfg, fault_model={"type": "adversarial", "alpha_m": 0.05,
                                   "strategy": "greedy"})
    rc = run_cli(["compare-tk", "--config", cfg, "--out", tmp_path / "x.csv"])
    assert rc == 2
    assert "greedy" in capsys.readouterr().err
