import json
import subprocess
import sys
from pathlib import Path

import pytest

from intderiv.cli import main

CONFIGS = Path(__file__).parents[1] / "configs"


def small_config(tmp_path, **over):
    doc = json.loads((CONFIGS / "experiment1_noisy.json").read_text())
    doc.update({"name": "small", "horizon": 3.0, "settle_time": 1.0}, **over)
    path = tmp_path / "small.json"
    path.write_text(json.dumps(doc))
    return path


def test_alpha(capsys):
    assert main(["alpha", "3", "0.8"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [float(ln.split(" = ")[1]) for ln in out] == pytest.approx([4 / 7, 2 / 3, 0.8], rel=1e-15)


def test_routh_verdicts(capsys):
    assert main(["routh", "1", "1", "2", "1"]) == 0
    assert "Hurwitz" in capsys.readouterr().out
    main(["routh", "1", "0", "-1"])
    assert "NotHurwitz" in capsys.readouterr().out


def test_routh_bad_leading(capsys):
    assert main(["routh", "--", "-1", "2"]) == 2
    assert "leading" in capsys.readouterr().err


def test_check_config(capsys):
    assert main(["check-config", str(CONFIGS / "experiment1.json")]) == 0
    assert main(["check-config", str(CONFIGS / "infeasible_n5.json")]) == 1
    assert "infeasible (n,p)" in capsys.readouterr().out


def test_check_config_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check-config", str(bad)]) == 1
    assert main(["check-config", str(tmp_path / "missing.json")]) == 2


def test_run_writes_outputs(tmp_path, capsys):
    cfg = small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--decimate", "10", "--plot"]) == 0
    csv = out / "small.csv"
    assert csv.exists() and (out / "small.metrics.txt").exists() and (out / "small.svg").exists()
    rows = [ln for ln in csv.read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == 1 + 301
    assert "sup.e2 = " in capsys.readouterr().out


def test_run_repeatable(tmp_path):
    cfg = small_config(tmp_path)
    main(["run", str(cfg), "--out", str(tmp_path / "a")])
    main(["run", str(cfg), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a/small.csv").read_bytes() == (tmp_path / "b/small.csv").read_bytes()


def test_run_invalid_config(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "infeasible_n5.json"), "--out", str(tmp_path)]) == 2
    assert "infeasible" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore")
def test_run_divergence(tmp_path, capsys):
    doc = json.loads((CONFIGS / "experiment1.json").read_text())
    # linear observer, eps^4 = 1.6e-3 against dt = 0.05: explicit Euler blows up
    doc["observer"].update(alpha_n=1.0, epsilon=0.2)
    cfg = small_config(tmp_path, observer=doc["observer"], scheme={"method": "euler", "dt": 0.05}, horizon=100.0)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert (tmp_path / "o/small.partial.csv").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "intderiv", "alpha", "2", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.split() == ["alpha_1", "=", "1", "alpha_2", "=", "1"]
