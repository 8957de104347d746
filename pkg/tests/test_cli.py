import json

import numpy as np
import pytest

from contactlab import cli, io
from contactlab.construction import CertificationError

SMALL_CERT = ["--resolution", "16", "--fibers", "16", "--s-grid", "64"]


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(io.ENV_OUTPUT_DIR, str(tmp_path / "env"))
    return tmp_path


def _config_of(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):])


def test_flow_exact_outputs(out):
    assert cli.main(["flow", "--exact", "-T", "1", "--starts", "0.1,0.2;0,-0.3", "--samples", "11"]) == 0
    d = out / "env"
    conf, cols, rows = io.read_csv(d / "flow.csv")
    assert conf["command"] == "flow" and conf["mode"] == "exact" and conf["T"] == 1.0
    assert cols == ["start", "t", "p", "q"] and len(rows) == 22
    svg = (d / "flow.svg").read_text()
    assert svg.startswith("<!-- config: ") and "<svg" in svg
    assert json.loads(svg.splitlines()[0][len("<!-- config: "):-len(" -->")])["mode"] == "exact"


def test_flow_is_deterministic(out):
    args = ["flow", "--cutoff", "-T", "1", "--starts", "random:3", "--samples", "5", "--seed", "7"]
    assert cli.main(args + ["--out", str(out / "a")]) == 0
    assert cli.main(args + ["--out", str(out / "b")]) == 0
    assert (out / "a" / "flow.csv").read_bytes() == (out / "b" / "flow.csv").read_bytes()


def test_sigma_outputs(out):
    assert cli.main(["sigma", "-T", "3", "--deltas", "0.05,0.02", "--resolution", "8", "--out", str(out)]) == 0
    doc = json.loads((out / "sigma.json").read_text())
    assert doc["schema"] == 1 and doc["config"]["deltas"] == [0.05, 0.02]
    assert doc["residuals_ok"] and len(doc["sweep"]) == 2
    assert _config_of(out / "sigma.csv")["command"] == "sigma"


def test_certify_pass_and_fail_exit_codes(out, capsys):
    assert cli.main(["certify", *SMALL_CERT, "--out", str(out / "ok")]) == 0
    doc = json.loads((out / "ok" / "certificate.json").read_text())
    assert doc["report"]["passed"] and doc["config"]["width"] == 0.25
    assert _config_of(out / "ok" / "certificate.txt")["command"] == "certify"
    assert "oscillation bound" in capsys.readouterr().out
    assert cli.main(["certify", "--kappa", "none", *SMALL_CERT, "--out", str(out / "none")]) == 1
    assert cli.main(["certify", "--eps", "0.1", *SMALL_CERT, "--out", str(out / "eps")]) == 1


def test_config_errors_exit_2(out, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"T": 10, "colour": "red"}))
    assert cli.main(["certify", "--config", str(bad)]) == 2
    assert cli.main(["certify", "--delta", "-0.1"]) == 2
    assert cli.main(["flow", "--starts", "3,3"]) == 2
    assert cli.main(["flow", "--mu", "bogus"]) == 2
    assert cli.main(["sigma", "--config", str(tmp_path / "missing.json")]) == 2
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    assert cli.main(["sweep", "--config", str(arr)]) == 2


def test_stage_failure_exit_3(out, monkeypatch):
    def broken(**kw):
        raise CertificationError("sigma", RuntimeError("no sign change"))

    monkeypatch.setattr(cli, "certify", broken)
    assert cli.main(["certify", "--out", str(out)]) == 3
    assert cli.main(["sweep", "--deltas", "0.02", "--widths", "0.25", "--out", str(out)]) == 3


def test_flags_override_config_file(out, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"T": 10.0, "delta": 0.02, "resolution": 16, "fibers": 16, "s_grid": 64}))
    assert cli.main(["certify", "--config", str(cfg), "--delta", "0.01", "--out", str(out)]) == 0
    conf = json.loads((out / "certificate.json").read_text())["config"]
    assert conf["delta"] == 0.01 and conf["resolution"] == 16


def test_env_output_dir(out):
    assert cli.main(["flow", "-T", "0.5", "--starts", "0,0.1", "--samples", "3"]) == 0
    assert (out / "env" / "flow.csv").exists()


def test_small_sweep_is_monotone(out):
    args = ["sweep", "--deltas", "0.04,0.02", "--widths", "0.5,0.25", *SMALL_CERT, "--out", str(out)]
    assert cli.main(args) == 0
    doc = json.loads((out / "sweep.json").read_text())
    assert doc["monotone"] and len(doc["rows"]) == 4
    _, cols, rows = io.read_csv(out / "sweep.csv")
    assert "oscillation_bound" in cols and len(rows) == 4


def test_sweep_monotone_detects_violation():
    grid = {(0.02, 0.5): 1.2, (0.02, 0.25): 1.1, (0.01, 0.5): 1.3, (0.01, 0.25): 1.0}
    assert not cli.sweep_monotone(grid, [0.02, 0.01], [0.5, 0.25])
    grid[(0.01, 0.5)] = 1.15
    assert cli.sweep_monotone(grid, [0.02, 0.01], [0.5, 0.25])


def test_parse_starts():
    radius = 1 / np.sqrt(np.pi)
    assert cli.parse_starts("grid:4").size == 16  # the corners sit at 0.48 < radius
    assert cli.parse_starts("grid:9").size < 81
    r = cli.parse_starts("random:5", seed=3)
    assert np.array_equal(r, cli.parse_starts("random:5", seed=3))
    assert np.all(np.abs(r) < radius)
    with pytest.raises(cli.ConfigError):
        cli.parse_starts("grid:x")
