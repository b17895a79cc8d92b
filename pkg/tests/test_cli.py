import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from hexwind.cli import main
from hexwind.manifest import ExperimentManifest


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "hexwind.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_manifest_hash_independent_of_threads():
    m1 = ExperimentManifest("x", {"a": 1}, 7, threads=1, outputs=("f.csv",))
    m2 = ExperimentManifest("x", {"a": 1}, 7, threads=8, outputs=("f.csv",))
    assert m1.content_hash == m2.content_hash
    m3 = ExperimentManifest("x", {"a": 2}, 7, threads=1, outputs=("f.csv",))
    assert m3.content_hash != m1.content_hash


def test_usage_error_exit_code():
    res = run_cli(["winding-scan", "--radii", "not-numbers"])
    assert res.returncode == 2


def test_arm_prob_and_determinism_across_threads(tmp_path):
    out1 = tmp_path / "t1"
    out2 = tmp_path / "t8"
    common = [
        "arm-prob", "--sigma", "BY", "--r-lat", "8", "--quad", "2,4,4,8",
        "--trials", "400", "--seed", "5",
    ]
    r1 = run_cli(common + ["--threads", "1", "--outdir", str(out1)])
    assert r1.returncode == 0, r1.stderr
    r2 = run_cli(common + ["--threads", "4", "--outdir", str(out2)])
    assert r2.returncode == 0, r2.stderr
    f1 = (out1 / "arm_prob.csv").read_bytes()
    f2 = (out2 / "arm_prob.csv").read_bytes()
    assert f1 == f2
    header = f1.decode().splitlines()[0]
    assert header.startswith("# manifest=")
    man = json.loads((out1 / "arm-prob_manifest.json").read_text())
    assert header.split("=", 1)[1] == man["content_hash"]


def test_winding_scan_small(tmp_path):
    res = run_cli(
        [
            "winding-scan", "--radii", "8,12,16", "--samples", "120",
            "--seed", "3", "--threads", "2", "--outdir", str(tmp_path),
        ]
    )
    assert res.returncode == 0, res.stderr
    fit = json.loads((tmp_path / "winding_fit.json").read_text())
    assert "slope" in fit and len(fit["points"]) == 3
    lines = (tmp_path / "winding_scan.csv").read_text().splitlines()
    assert lines[1].split(",")[0] == "R_lat"


def test_sle_scan_small(tmp_path):
    res = run_cli(
        [
            "sle-scan", "--kappa", "6.0", "--horizons", "2,4", "--paths", "200",
            "--dt-max", "2e-3", "--seed", "1", "--threads", "2",
            "--outdir", str(tmp_path),
        ]
    )
    assert res.returncode == 0, res.stderr
    rows = (tmp_path / "sle_scan.csv").read_text().splitlines()
    assert len(rows) == 4  # manifest comment + header + two horizons


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("radii=8,12\nsamples=60\n")
    runner = CliRunner()
    res = runner.invoke(
        main,
        [
            "winding-scan", "--config", str(cfg), "--seed", "2",
            "--threads", "1", "--outdir", str(tmp_path),
        ],
    )
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "winding_scan.csv").read_text().splitlines()
    assert len(lines) == 4  # two radii rows


def test_faces_rate_small(tmp_path):
    res = run_cli(
        [
            "faces-rate", "--radii", "16", "--trials", "1500", "--seed", "5",
            "--threads", "4", "--outdir", str(tmp_path),
        ]
    )
    assert res.returncode == 0, res.stderr
    body = (tmp_path / "faces_rate.csv").read_text().splitlines()
    assert body[1] == "R_lat,n_trials,n_hits,p_hat,ci_halfwidth,seed"
