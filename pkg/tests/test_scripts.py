"""The runnable experiment scripts stay healthy end to end."""

import pathlib
import subprocess
import sys

SCRIPTS = pathlib.Path(__file__).resolve().parent.parent / "scripts"


def run_script(name, *argv):
    return subprocess.run([sys.executable, str(SCRIPTS / name), *argv],
                          capture_output=True, text=True, timeout=300)


def test_sweep_script(tmp_path):
    out = tmp_path / "grid.csv"
    proc = run_script("sweep_pmax.py", "--points", "5", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "best success probability" in proc.stdout
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "theta_rad,alpha_rad,case,x,y,p_max,e_alpha,avg_cost"
    assert len(lines) == 26


def test_threshold_script(tmp_path):
    out = tmp_path / "curve.csv"
    proc = run_script("threshold_scan.py", "--steps", "6", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "break-even gate angle: 0.233" in proc.stdout
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "theta_pi,best_alpha_pi,min_cost"
    assert len(lines) == 7
