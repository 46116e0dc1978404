import json
import re
import subprocess
import sys
from fractions import Fraction

import pytest


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "hardylab", *args],
                          cwd=cwd, capture_output=True, text=True, timeout=300)


def write_linear_csv(path, lo=0.25, hi=4.0, n=151, fn=lambda x: x):
    import numpy as np
    xs = np.linspace(lo, hi, n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,value\n")
        for x in xs:
            fh.write(f"{float(x)!r},{float(fn(x))!r}\n")


def test_verify_harmonic_identity(tmp_path):
    proc = run_cli(["verify", "harmonic", "--space", "half-line-dirichlet",
                    "--profile", "identity", "--out", "r.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert "pass" in proc.stdout
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["schema_version"] == 1
    assert report["command"] == "verify-harmonic"
    assert report["pass"] is True
    assert report["config"]["seed"] == 0
    assert report["config"]["space"] == "half-line-dirichlet"
    assert report["result"]["constants"]["max_rel_deviation"] < 1e-6
    csv_text = (tmp_path / "r.csv").read_text().splitlines()
    assert csv_text[0].startswith("t,") or "," in csv_text[0]
    assert len(csv_text) > 1


def test_verify_harmonic_constant_fails(tmp_path):
    proc = run_cli(["verify", "harmonic", "--space", "half-line-dirichlet",
                    "--profile", "constant", "--out", "r.json"], tmp_path)
    assert proc.returncode == 1
    assert "FAIL" in proc.stdout
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["pass"] is False


def test_verify_requires_space(tmp_path):
    proc = run_cli(["verify", "harmonic"], tmp_path)
    assert proc.returncode == 2


def test_unknown_space_is_usage_error(tmp_path):
    proc = run_cli(["verify", "harmonic", "--space", "torus"], tmp_path)
    assert proc.returncode == 2
    assert "configuration error" in proc.stderr


def test_unknown_profile_is_usage_error(tmp_path):
    proc = run_cli(["verify", "harmonic", "--space", "half-line-dirichlet",
                    "--profile", "mystery"], tmp_path)
    assert proc.returncode == 2


def test_verify_conservative_and_doubling(tmp_path):
    proc = run_cli(["verify", "conservative", "--space", "half-line-dirichlet",
                    "--profile", "identity", "--out", "c.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "c.json").read_text())
    assert report["result"]["constants"]["max_deviation_from_one"] < 1e-6

    proc = run_cli(["verify", "doubling", "--space", "half-line-dirichlet",
                    "--profile", "identity", "--grid-points", "4",
                    "--out", "d.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "d.json").read_text())
    assert 0 < report["result"]["constants"]["doubling_constant"] <= 8.0


def test_verify_sandwich_small_grid(tmp_path):
    proc = run_cli(["verify", "sandwich", "--space", "half-line-dirichlet",
                    "--profile", "identity", "--grid-points", "5",
                    "--out", "s.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "s.json").read_text())
    consts = report["result"]["constants"]
    assert consts["lower_constant"] > 0
    assert consts["ratio"] < 1e4


def test_verify_holder(tmp_path):
    proc = run_cli(["verify", "holder", "--space", "half-line-dirichlet",
                    "--profile", "identity", "--floor", "0.8",
                    "--out", "h.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "h.json").read_text())
    assert report["result"]["constants"]["delta_hat"] >= 0.8


def test_ap_identity_weight(tmp_path):
    proc = run_cli(["ap", "--profile", "identity", "--out", "ap.json"],
                   tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "ap.json").read_text())
    assert report["result"]["supremum"] == pytest.approx(9.0 / 8.0, rel=1e-6)
    assert report["result"]["refinement"]["stable_5pct"] is True


def test_atomize_local_exact_strings(tmp_path):
    proc = run_cli(["atomize", "--mode", "local", "--m", "0", "--K", "40",
                    "--out", "dec.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "dec.json").read_text())
    want = 2 - Fraction(1, 2 ** 40)
    assert report["result"]["sum_abs_exact"] == str(want)
    assert report["result"]["sum_abs_exact"] == "2199023255551/1099511627776"
    assert report["result"]["residual_exact"] == "1/1099511627776"
    rows = (tmp_path / "dec.csv").read_text().splitlines()
    assert rows[0] == "k,coefficient,flavor,support_lo,support_hi"
    assert len(rows) == 42


def test_atomize_classical_via_json(tmp_path):
    atom = {"flavor": "classical_alpha1",
            "ball": {"center": 1.125, "radius": 0.125},
            "pieces": [{"from": "1", "to": "9/8", "value": "4"},
                       {"from": "9/8", "to": "5/4", "value": "-4"}]}
    (tmp_path / "atom.json").write_text(json.dumps(atom))
    proc = run_cli(["atomize", "--mode", "classical", "--atom", "atom.json",
                    "--out", "dec.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "dec.json").read_text())
    assert report["result"]["sum_abs_exact"] == "91/24"
    assert len(report["result"]["coefficients"]) == 5


def test_atomize_oversized_atom_fails_cert(tmp_path):
    atom = {"flavor": "classical_alpha1",
            "ball": {"center": 1.5, "radius": 0.5},
            "pieces": [{"from": "1", "to": "3/2", "value": "7"},
                       {"from": "3/2", "to": "2", "value": "-7"}]}
    (tmp_path / "atom.json").write_text(json.dumps(atom))
    proc = run_cli(["atomize", "--mode", "classical", "--atom", "atom.json"],
                   tmp_path)
    assert proc.returncode == 1
    assert "certification failed" in proc.stderr


def test_norm_bmo_of_weight_is_zero(tmp_path):
    write_linear_csv(tmp_path / "g.csv")
    proc = run_cli(["norm", "bmo", "--f", "g.csv", "--profile", "identity",
                    "--ball", "2,1", "--out", "b.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "b.json").read_text())
    assert abs(report["result"]["value"]) < 1e-12
    assert report["result"]["c_star"] == pytest.approx(1.0, rel=1e-10)


def test_norm_maximal_small(tmp_path):
    write_linear_csv(tmp_path / "f.csv", lo=1.0, hi=2.0, n=41,
                     fn=lambda x: 1.0)
    proc = run_cli(["norm", "maximal", "--f", "f.csv",
                    "--space", "half-line-dirichlet", "--grid-points", "4",
                    "--time-grid", "0.5,1.0", "--out", "m.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "m.json").read_text())
    assert report["result"]["l1_norm"] > 0
    assert report["result"]["functional"] == "maximal"
    header = (tmp_path / "m.csv").read_text().splitlines()[0]
    assert header == "x,value"


def test_pair_atom_against_polynomial(tmp_path):
    atom = {"flavor": "local_alpha2", "m": 0,
            "ball": {"center": 1.5, "radius": 0.5},
            "pieces": [{"from": "1", "to": "2", "value": "1"}]}
    (tmp_path / "atom.json").write_text(json.dumps(atom))
    write_linear_csv(tmp_path / "g.csv", lo=0.25, hi=4.0, n=301,
                     fn=lambda x: x * x)
    proc = run_cli(["pair", "--atom", "atom.json", "--g", "g.csv",
                    "--profile", "identity", "--out", "p.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "p.json").read_text())
    assert report["result"]["pass"] is True
    assert abs(report["result"]["value"]) <= \
        report["result"]["bound"] * (1 + 1e-6)


def test_malformed_csv_reports_line(tmp_path):
    (tmp_path / "bad.csv").write_text("x,value\n1.0,2.0\noops,3.0\n")
    proc = run_cli(["norm", "bmo", "--f", "bad.csv", "--profile", "identity"],
                   tmp_path)
    assert proc.returncode == 2
    assert ":3:" in proc.stderr


def test_report_determinism_modulo_timestamp(tmp_path):
    out1, out2 = tmp_path / "a1.json", tmp_path / "a2.json"
    for out in (out1, out2):
        proc = run_cli(["atomize", "--mode", "local", "--m", "0", "--K", "12",
                        "--out", out.name], tmp_path)
        assert proc.returncode == 0
    strip = lambda s: re.sub(r'"timestamp": "[^"]+"', '"timestamp": null', s)
    assert strip(out1.read_text()) == strip(out2.read_text())
    assert (tmp_path / "a1.csv").read_bytes() == (tmp_path / "a2.csv").read_bytes()


def test_figures_renders_png(tmp_path):
    proc = run_cli(["atomize", "--mode", "local", "--m", "0", "--K", "8",
                    "--figures", "--out", "dec.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    png = tmp_path / "dec.png"
    assert png.exists() and png.stat().st_size > 1000


def test_version_flag(tmp_path):
    proc = run_cli(["--version"], tmp_path)
    assert proc.returncode == 0
    assert re.match(r"\d+\.\d+", proc.stdout.strip())
