import subprocess
import sys

import numpy as np
import pytest

from fracpme.cli import main

SMALL = """\
s = 0.75
dim = 2
n = 16
length = 10
t_end = 0.5
dt_max = 0.05
u0_type = gaussian_bump
u0_width = 1.5
snapshot_every = 5
"""


def _csv(path, t, H):
    lines = ["t,H"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(t, H)]
    path.write_text("\n".join(lines) + "\n")


def test_check_exits_zero(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and "checks passed" in out


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert "missing.cfg" in capsys.readouterr().err


def test_bad_config_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("s = 0.4\n")
    assert main(["run", str(cfg)]) == 2
    assert "1/2" in capsys.readouterr().err


def test_usage_errors_exit_two():
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["decay-fit", "x.csv"]) == 2


def test_decay_fit_exact_power_law(tmp_path, capsys):
    t = np.geomspace(1, 30, 12)
    _csv(tmp_path / "h.csv", t, 7 * t**-0.3)
    assert main(["decay-fit", str(tmp_path / "h.csv"), "--s", "0.75"]) == 0
    out = capsys.readouterr().out
    rate = float(next(l for l in out.splitlines() if l.startswith("lambda_hat")).split(":")[1])
    assert rate == pytest.approx(0.3, abs=1e-12)


def test_decay_fit_verdict_failure_exits_one(tmp_path):
    _csv(tmp_path / "h.csv", np.linspace(1, 10, 10), np.full(10, 2.0))
    assert main(["decay-fit", str(tmp_path / "h.csv"), "--s", "0.75"]) == 1


def test_decay_fit_needs_columns(tmp_path):
    (tmp_path / "h.csv").write_text("time,energy\n1,2\n")
    assert main(["decay-fit", str(tmp_path / "h.csv"), "--s", "0.75"]) == 2
    (tmp_path / "h.csv").write_text("t,H\n1,abc\n")
    assert main(["decay-fit", str(tmp_path / "h.csv"), "--s", "0.75"]) == 2


def test_run_outputs_and_determinism(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(SMALL)
    outs = []
    for k in range(2):
        d = tmp_path / f"out{k}"
        assert main(["run", str(cfg), "--output", str(d)]) == 0
        files = sorted(p.relative_to(d) for p in d.rglob("*") if p.is_file())
        outs.append({f: (d / f).read_bytes() for f in files})
    assert outs[0] == outs[1]
    names = {str(f) for f in outs[0]}
    assert {"diagnostics.csv", "final_u.fpme", "final_p.fpme",
            "snapshots/snap_000000_u.fpme", "snapshots/snap_000010_p.fpme"} <= names
    header = outs[0][next(f for f in outs[0] if str(f) == "diagnostics.csv")].split(b"\n")[0]
    assert header.startswith(b"t,H,D,mass,")
    assert "steps: 10" in capsys.readouterr().out


def test_compare(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(SMALL)
    assert main(["compare", str(cfg), "--eps", "1e-3", "--T", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "K_hat" in out and "verdict: pass" in out


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "fracpme", "run", str(tmp_path / "missing.cfg")],
                         capture_output=True, text=True)
    assert res.returncode == 2
    assert "error" in res.stderr
