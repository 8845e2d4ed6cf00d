import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinboson_fba.config import load_config, parse_complex, parse_config, to_json
from spinboson_fba.errors import ConfigurationError
from spinboson_fba.report import ResultEnvelope, check, emit, load_envelope, text_report

OPEN = {"plus": {"xi": 0.9}, "minus": {"xi": 0.65, "kappa": 0.4}}


def test_defaults_fill_in():
    cfg = parse_config({"task": "qc"})
    assert cfg.numerics["nt"] == 24 and cfg.numerics["margin"] == 4
    assert cfg.boundary is None
    assert cfg.output == {"path": "out", "format": "json"}


def test_overrides_win():
    cfg = parse_config({"task": "qc", "numerics": {"nt": 30}}, {"nt": 20, "seed": 5, "format": "both"})
    assert cfg.numerics["nt"] == 20 and cfg.numerics["seed"] == 5
    assert cfg.output["format"] == "both"


@pytest.mark.parametrize(
    "data",
    [
        {"task": "bethe", "twist": {"K": [[1, 0], [0, 1]]}, "open": OPEN},
        {"task": "bethe"},
        {"task": "qc", "numerics": {"bogus": 1}},
        {"task": "qc", "extra": {}},
        {"task": "nope"},
        {"task": "qc", "numerics": {"nt": 10, "margin": 10}},
        {"task": "qc", "numerics": {"nt": 2.5}},
        {"task": "scan", "twist": {"K": [[1, 0], [0, 1]]}},
        {"task": "bethe", "twist": {"K": [[1, 0]]}},
        {"task": "bethe", "open": {"plus": {"xi": 1.0}}},
        {"task": "bethe", "twist": {"random": True, "K": [[1, 0], [0, 1]]}},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigurationError):
        parse_config(data)


def test_complex_pairs():
    cfg = parse_config({"task": "verify-ybe", "twist": {"K": [[1.2, 0.3], [[0.1, 0.2], 0.9]]}})
    assert cfg.twist.K[1, 0] == 0.1 + 0.2j
    assert parse_complex([1, -2], "x") == 1 - 2j
    with pytest.raises(ConfigurationError):
        parse_complex(True, "x")
    with pytest.raises(ConfigurationError):
        parse_complex([1, 2, 3], "x")
    assert to_json(np.array([1 + 2j])) == [[1.0, 2.0]]


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_roundtrip(z):
    assert parse_complex(to_json(z), "z") == z


def test_random_twist_is_seeded():
    a = parse_config({"task": "bethe", "twist": {"random": True}, "numerics": {"seed": 3}})
    b = parse_config({"task": "bethe", "twist": {"random": True}, "numerics": {"seed": 3}})
    c = parse_config({"task": "bethe", "twist": {"random": True}, "numerics": {"seed": 4}})
    assert np.array_equal(a.twist.K, b.twist.K) and a.model == b.model
    assert not np.array_equal(a.twist.K, c.twist.K)
    with pytest.raises(ConfigurationError):
        parse_config({"task": "bethe", "twist": {"random": True}, "model": {"eta": 1.0}})


def test_load_toml_and_json(tmp_path):
    t = tmp_path / "c.toml"
    t.write_text('task = "tq-check"\n[open.plus]\nxi = 0.9\n[open.minus]\nxi = 0.65\nkappa = 0.4\n')
    cfg = load_config(t)
    assert cfg.boundary == "open" and cfg.open.minus.kappa == 0.4
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"task": "qc"}))
    assert load_config(j).task == "qc"


def test_load_errors_carry_line(tmp_path):
    t = tmp_path / "bad.toml"
    t.write_text('task = "qc"\n[numerics\n')
    with pytest.raises(ConfigurationError, match="line 2"):
        load_config(t)
    j = tmp_path / "bad.json"
    j.write_text('{\n"task": "qc",\n}')
    with pytest.raises(ConfigurationError, match="line 3"):
        load_config(j)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.toml")
    y = tmp_path / "c.yaml"
    y.write_text("task: qc")
    with pytest.raises(ConfigurationError):
        load_config(y)


def _envelope():
    env = ResultEnvelope("spectrum", {"task": "spectrum", "numerics": {"seed": 1}})
    env.add(check("a", 1e-14, 1e-12))
    env.add(check("b", float("inf"), 1e-12, warn_only=True))
    t = env.table("spectrum", ["state", "value"])
    t.rows += [[0, 1 + 2j], [1, -0.5]]
    env.timing = {"seconds": 0.1}
    return env


def test_check_statuses():
    assert check("x", 1.0, 0.5).status == "fail"
    assert check("x", 1.0, 0.5, warn_only=True).status == "warn"
    assert check("x", float("nan"), 0.5).status == "fail"


def test_envelope_roundtrip(tmp_path):
    env = _envelope()
    assert env.all_passed and env.counts() == {"pass": 1, "fail": 0, "warn": 1}
    files = emit(env, tmp_path, "both")
    assert {p.name for p in files} == {"envelope.json", "spectrum.csv", "report.txt"}
    back = load_envelope(tmp_path / "envelope.json")
    assert back.determinism_hash() == env.determinism_hash()
    assert back.checks[1].residual == float("inf")
    d = json.loads((tmp_path / "envelope.json").read_text())
    assert d["tables"]["spectrum"]["rows"][0][1] == [1.0, 2.0]
    rows = (tmp_path / "spectrum.csv").read_text().strip().splitlines()
    assert len(rows) == 3 and rows[1] == '0,"[1.0, 2.0]"'


def test_json_format_skips_csv(tmp_path):
    names = {p.name for p in emit(_envelope(), tmp_path, "json")}
    assert names == {"envelope.json", "report.txt"}


def test_report_and_hash():
    env = _envelope()
    rep = text_report(env)
    assert env.config_hash in rep and "seed: 1" in rep and rep.rstrip().endswith("RESULT: PASS")
    h = env.determinism_hash()
    env.timing = {"seconds": 99.0}
    assert env.determinism_hash() == h
    env.add(check("c", 1.0, 0.0))
    assert not env.all_passed and "RESULT: FAIL" in text_report(env)
