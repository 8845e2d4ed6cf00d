import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from spinboson_fba.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(tmp_path, *args):
    code = main([*args, "--out", str(tmp_path), "-q"])
    env = json.loads((tmp_path / "envelope.json").read_text()) if (tmp_path / "envelope.json").exists() else None
    return code, env


def test_passing_run_exits_zero(tmp_path):
    code, env = _run(tmp_path, "verify-ybe", "--config", str(CONFIGS / "twisted_fixed.toml"), "--format", "both")
    assert code == 0
    assert all(c["status"] != "fail" for c in env["checks"])
    assert (tmp_path / "report.txt").exists()


def test_qc_without_config(tmp_path):
    code, env = _run(tmp_path, "qc", "--nt", "16")
    assert code == 0 and env["config"]["numerics"]["nt"] == 16


def test_failed_check_exits_one(tmp_path):
    # criterion-level coverage failure of the random twisted setup at M <= 4
    code, env = _run(tmp_path, "bethe", "--config", str(CONFIGS / "twisted.toml"))
    assert code == 1
    assert any(c["status"] == "fail" for c in env["checks"])


def test_bad_input_exits_two(tmp_path, capsys):
    assert main(["spectrum", "--out", str(tmp_path)]) == 2
    assert main(["qc", "--seed", "-1", "--out", str(tmp_path)]) == 2
    assert main(["qc", "--config", str(tmp_path / "none.toml")]) == 2
    assert main(["qc", "--nt", "4", "--margin", "4", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_seed_changes_random_twist(tmp_path):
    a = _run(tmp_path / "a", "spectrum", "--config", str(CONFIGS / "twisted.toml"), "--seed", "1")[1]
    b = _run(tmp_path / "b", "spectrum", "--config", str(CONFIGS / "twisted.toml"), "--seed", "2")[1]
    assert a["config"]["twist"]["K"] != b["config"]["twist"]["K"]


@pytest.mark.slow
def test_numpy_fallback_matches(tmp_path):
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, SPINBOSON_FBA_NO_NUMBA=flag)
        d = tmp_path / flag
        r = subprocess.run(
            [sys.executable, "-m", "spinboson_fba", "spectrum", "--config", str(CONFIGS / "open.toml"), "--out", str(d), "-q"],
            env=env,
            capture_output=True,
            text=True,
        )
        assert r.returncode in (0, 1), r.stderr
        outs.append(json.loads((d / "envelope.json").read_text()))
    assert outs[0]["timing"]["backend"] != outs[1]["timing"]["backend"]
    assert [c["status"] for c in outs[0]["checks"]] == [c["status"] for c in outs[1]["checks"]]
