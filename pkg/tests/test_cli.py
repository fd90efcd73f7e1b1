import json

import numpy as np
import pytest

from phidiv.cli import main


@pytest.fixture
def data_csv(tmp_path, rng):
    p = tmp_path / "data.csv"
    x = rng.uniform(-1.0, 1.1, size=150)
    p.write_text("\n".join(f"{v:.17g}" for v in x) + "\n")
    return p


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_estimate_happy_path(capsys, data_csv):
    code, payload = run(capsys, "estimate", "--data", str(data_csv),
                        "--model", "mean-variance", "--family", "chi2")
    assert code == 0
    assert "theta_hat" in payload["result"]
    assert payload["config"]["family"] == "chi2"
    assert payload["config"]["seed"] == 0


def test_missing_data_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["estimate"])
    assert exc.value.code == 1


def test_unreadable_file_is_io_error(capsys, tmp_path):
    code, payload = run(capsys, "estimate", "--data", str(tmp_path / "no.csv"))
    assert code == 2
    assert payload["kind"] == "io"


def test_bad_cell_is_io_error_naming_position(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1.0\noops\n")
    code, payload = run(capsys, "estimate", "--data", str(p))
    assert code == 2
    assert "row 2, column 1" in payload["error"]


def test_model_test_l_equals_d_is_numeric_error(capsys, data_csv):
    code, payload = run(capsys, "test", "model", "--data", str(data_csv),
                        "--model", "mean")
    assert code == 3
    assert payload["kind"] == "numeric"


def test_test_subcommands(capsys, data_csv):
    code, payload = run(capsys, "test", "model", "--data", str(data_csv))
    assert code == 0
    assert payload["report"]["df"] == 1
    code, payload = run(capsys, "test", "theta", "--data", str(data_csv),
                        "--theta", "1/3")
    assert code == 0
    assert payload["report"]["df"] == 2
    assert payload["config"]["theta"] == pytest.approx(1.0 / 3.0)
    code, payload = run(capsys, "test", "ratio", "--data", str(data_csv),
                        "--theta", "1/3")
    assert code == 0
    assert payload["report"]["df"] == 1


def test_theta_flag_required(capsys, data_csv):
    with pytest.raises(SystemExit) as exc:
        main(["test", "theta", "--data", str(data_csv)])
    assert exc.value.code == 1


def test_power_and_samplesize(capsys):
    code, payload = run(capsys, "samplesize", "--beta", "0.5", "--alpha",
                        "0.05", "--df", "1", "--div", "0.1", "--sigma", "1")
    assert code == 0
    assert payload["sample_size"] == 20
    code, payload = run(capsys, "power", "--n", "20", "--alpha", "0.05",
                        "--df", "1", "--div", "0.1", "--sigma", "1")
    assert code == 0
    assert 0.0 < payload["power"] < 1.0


def test_confidence_interval_json(capsys, data_csv):
    code, payload = run(capsys, "confidence", "--data", str(data_csv),
                        "--grid", "0.1:0.9:41", "--family", "KLm")
    assert code == 0
    assert not payload["empty"]
    lo, hi = payload["interval"]
    assert 0.1 <= lo < hi <= 0.9


def test_out_file_written(capsys, data_csv, tmp_path):
    out = tmp_path / "res.json"
    code, _ = run(capsys, "estimate", "--data", str(data_csv), "--out", str(out))
    assert code == 0
    saved = json.loads(out.read_text())
    assert "result" in saved


def test_simulate_figure1(capsys, tmp_path):
    out = tmp_path / "fig.csv"
    code, _ = run(capsys, "simulate", "--figure1", "--seed", "3", "--runs",
                  "10", "--n-list", "50", "--eps-grid", "0.5:0.9:2",
                  "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,epsilon,mc_power,mc_stderr,approx_power"
    assert len(lines) == 3


def test_config_file_defaults(capsys, data_csv, tmp_path):
    cfg = tmp_path / "phidiv.cfg"
    cfg.write_text("family = chi2\nalpha = 0.10  # comment\n")
    code, payload = run(capsys, "--config", str(cfg), "test", "model",
                        "--data", str(data_csv))
    assert code == 0
    assert payload["config"]["family"] == "chi2"
    assert payload["config"]["alpha"] == 0.10
    # explicit flag beats the file
    code, payload = run(capsys, "--config", str(cfg), "test", "model",
                        "--data", str(data_csv), "--family", "KL")
    assert code == 0
    assert payload["config"]["family"] == "KL"


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
