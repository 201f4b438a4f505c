import json
import xml.etree.ElementTree as ET

import pytest

from starkres.cli import ConfigError, RunConfig, main


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path), "--threads", "1"])


def test_resonance_model1(tmp_path, capsys):
    assert run(tmp_path, "resonance", "--mu", "0.1", "--f", "0") == 0
    rec = json.loads((tmp_path / "resonance.json").read_text())
    assert abs(rec["re"] - 1.01905) < 5e-5 and abs(rec["im"] + 0.0111115) < 5e-5
    assert rec["count_certified"]


def test_resonance_decoupled_is_exactly_one(tmp_path):
    assert run(tmp_path, "resonance", "--mu", "0") == 0
    rec = json.loads((tmp_path / "resonance.json").read_text())
    assert rec["re"] == 1.0 and rec["im"] == 0.0


def test_resonance_model2_near_formula(tmp_path):
    assert run(tmp_path, "resonance", "--model", "model2", "--epsilon", "0.05") == 0
    rec = json.loads((tmp_path / "resonance.json").read_text())
    assert abs(complex(rec["re"], rec["im"]) - complex(rec["formula"]["re"], rec["formula"]["im"])) < 1e-5


def test_config_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"mu": 0.1,\n "tol": }')
    assert run(tmp_path, "resonance", "--config", str(bad)) == 1
    assert "line 2" in capsys.readouterr().err
    bad.write_text('{"colour": 1}')
    assert run(tmp_path, "resonance", "--config", str(bad)) == 1
    assert run(tmp_path, "resonance", "--tol", "-1") == 1
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--grid", "3y"])
    assert exc.value.code == 1


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu": 0.3, "f": 0.0}))
    assert run(tmp_path, "resonance", "--config", str(cfg), "--mu", "0.1") == 0
    saved = RunConfig.from_json((tmp_path / "resonance_config.json").read_text())
    assert saved.mu == 0.1


def test_config_roundtrip():
    cfg = RunConfig(mu=0.2, seeds=[[1.0, -0.01]], grid=[3, 2])
    assert RunConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"window": [1, 0, 0, 1]})


def test_sweep_mu_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "sweep-mu", "--svg") == 0
    assert run(b, "sweep-mu") == 0
    text = (a / "mu_sweep.csv").read_text()
    assert text == (b / "mu_sweep.csv").read_text()
    assert text.splitlines()[0] == "mu,re_r0,im_r0,residual"
    ET.parse(a / "mu_sweep_im.svg")


def test_scan_summary_matches_winding(tmp_path):
    assert run(tmp_path, "scan", "--f", "0", "--window", "0.9", "1.1", "-0.1", "0.1", "--grid", "2x2", "--svg") == 0
    s = json.loads((tmp_path / "scan_summary.json").read_text())
    assert s["count"] == s["winding_count"] == 1
    ET.parse(tmp_path / "scan.svg")


def test_trace_emits_decreasing_f(tmp_path):
    assert run(tmp_path, "trace", "--f-range", "0.02", "0.01", "--steps", "3") == 0
    rows = (tmp_path / "trace.csv").read_text().splitlines()
    assert rows[0] == "f,re_r,im_r,residual,im_over_f,branch"
    fs = [float(r.split(",")[0]) for r in rows[1:]]
    assert len(fs) == 3 and all(a > b for a, b in zip(fs, fs[1:]))


def test_validate_exit_code_reflects_order_laws(tmp_path):
    code = run(tmp_path, "validate")
    s = json.loads((tmp_path / "validate_summary.json").read_text())
    assert abs(s["slope_expansion24"] - 1) <= 0.25
    assert code == (0 if s["passed"] else 2)
