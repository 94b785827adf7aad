"""CLI surface: subcommands, schemas, exit codes, reproducibility."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from randhull.cli import main

W4 = "0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n2 0.1 0.1 0.1\n"


def run_cli(args):
    return main(list(args))


def test_classify_witness(tmp_path, capsys):
    p = tmp_path / "w.txt"
    p.write_text(W4)
    assert run_cli(["classify", "--points", str(p),
                    "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "T_1^4"
    assert out[1].split()[1:] == ["6", "14", "16", "8"]
    assert out[2].split()[1:] == ["6", "14", "16", "8"]


def test_hull_five_points_d3(tmp_path, capsys):
    o = tmp_path / "s"
    assert run_cli(["sample", "--body", "ball", "--dim", "3", "--n", "5",
                    "--seed", "0x77", "--out", str(o)]) == 0
    capsys.readouterr()
    assert run_cli(["hull", "--points", str(o / "points.txt"),
                    "--out", str(tmp_path / "h")]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "5 9 6"
    dump = (tmp_path / "h" / "facets.txt").read_text().splitlines()
    assert len(dump) == 6
    assert all(line.startswith("facet ") for line in dump)
    assert (tmp_path / "h" / "manifest.json").exists()


def test_fvector_reports_checks(tmp_path, capsys):
    p = tmp_path / "w.txt"
    p.write_text(W4)
    assert run_cli(["fvector", "--points", str(p),
                    "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "6 14 16 8" in out
    assert "euler=True" in out and "dehn_sommerville=True" in out


def test_cap_command(tmp_path, capsys):
    assert run_cli(["cap", "--body", "ball", "--dim", "3",
                    "--direction", "0,0,1", "--height", "1",
                    "--out", str(tmp_path / "c")]) == 0
    area = float(capsys.readouterr().out.split()[0])
    assert area == pytest.approx(2 * np.pi, rel=1e-9)


def test_experiment_reproducible_and_threads_invariant(tmp_path):
    args = ["experiment", "--body", "ball", "--dim", "3", "--n", "12,18",
            "--reps", "20", "--k", "1,2", "--seed", "0xabc"]
    for name, threads in (("a", "1"), ("b", "2")):
        assert run_cli(args + ["--threads", threads,
                               "--out", str(tmp_path / name)]) == 0
    for fname in ("reps_n12.csv", "reps_n18.csv"):
        a = (tmp_path / "a" / fname).read_bytes()
        b = (tmp_path / "b" / fname).read_bytes()
        assert a == b
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == f"{0xabc:016x}"
    assert manifest["version"]


def test_experiment_from_config_file(tmp_path):
    cfg = {"body": {"kind": "ellipsoid", "semi_axes": [2, 1, 1]},
           "model": "binomial", "n": [10], "reps": 4, "k": [1],
           "seed": "0x123", "threads": 1}
    cfile = tmp_path / "cfg.json"
    cfile.write_text(json.dumps(cfg))
    assert run_cli(["experiment", "--config", str(cfile),
                    "--out", str(tmp_path / "e")]) == 0
    lines = (tmp_path / "e" / "reps_n10.csv").read_text().splitlines()
    assert lines[0] == "rep,seed,n,degenerate,f0,f1,f2"
    assert len(lines) == 5
    for line in lines[1:]:
        assert line.split(",")[4:] == ["10", "24", "16"]


def test_report_generates_summary_and_plots(tmp_path):
    assert run_cli(["experiment", "--body", "ball", "--dim", "4",
                    "--n", "15,25", "--reps", "40", "--k", "3",
                    "--seed", "0x9", "--threads", "2",
                    "--out", str(tmp_path / "e")]) == 0
    assert run_cli(["report", "--input", str(tmp_path / "e")]) == 0
    doc = json.loads((tmp_path / "e" / "summary.json").read_text())
    assert len(doc) == 2
    for entry in doc:
        assert list(entry) == ["body", "d", "k", "model", "cell", "mean",
                               "var", "var_ci_lo", "var_ci_hi", "ks",
                               "m_effective", "degenerate_count"]
        assert entry["m_effective"] == 40
    plot = (tmp_path / "e" / "plot_var_k3.csv").read_text().splitlines()
    assert plot[0] == "x,y,stderr"
    assert len(plot) == 3


def test_poisson_experiment_cli(tmp_path):
    assert run_cli(["experiment", "--body", "ball", "--dim", "3",
                    "--t", "30", "--reps", "25", "--k", "1",
                    "--seed", "0x5", "--out", str(tmp_path / "p")]) == 0
    lines = (tmp_path / "p" / "reps_t30.csv").read_text().splitlines()
    assert len(lines) == 26
    ns = [int(line.split(",")[2]) for line in lines[1:]]
    assert min(ns) != max(ns)  # realized Poisson counts vary


def test_stabilize_command(tmp_path, capsys):
    assert run_cli(["stabilize", "--body", "ball", "--dim", "3", "--n", "40",
                    "--reps", "120", "--seed", "0x44",
                    "--out", str(tmp_path / "s")]) == 0
    tail = (tmp_path / "s" / "tail.csv").read_text().splitlines()
    assert tail[0] == "r,n,survival,stderr"
    fit = json.loads((tmp_path / "s" / "fit.json").read_text())
    assert fit["slope"] < 0


def test_exit_codes(tmp_path, capsys):
    # 3: config error
    assert run_cli(["experiment", "--body", "ball", "--dim", "3",
                    "--reps", "5", "--out", str(tmp_path / "x")]) == 3
    # 4: unreadable input
    assert run_cli(["hull", "--points", str(tmp_path / "missing.txt"),
                    "--out", str(tmp_path / "x")]) == 4
    # 4: malformed input
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3 nope\n")
    assert run_cli(["hull", "--points", str(bad),
                    "--out", str(tmp_path / "x")]) == 4
    # 5: degenerate input
    degen = tmp_path / "degen.txt"
    degen.write_text("0 0\n1 0\n2 0\n0 1\n")
    assert run_cli(["hull", "--points", str(degen),
                    "--out", str(tmp_path / "x")]) == 5
    # 2: usage error from argparse
    with pytest.raises(SystemExit) as exc:
        run_cli(["not-a-command"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_console_entry_point(tmp_path):
    env = dict(os.environ)
    proc = subprocess.run(
        [sys.executable, "-m", "randhull.cli", "--version"],
        capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert proc.stdout.strip()


def test_sample_reproducibility(tmp_path):
    for name in ("s1", "s2"):
        assert run_cli(["sample", "--body", "ellipsoid", "--axes", "2,1,1",
                        "--n", "30", "--seed", "0xf00d",
                        "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "s1" / "points.txt").read_bytes()
    b = (tmp_path / "s2" / "points.txt").read_bytes()
    assert a == b
