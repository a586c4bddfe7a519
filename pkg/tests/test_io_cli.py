from __future__ import annotations

import json

import numpy as np
import pytest

from fibqkd import io
from fibqkd.cli import RunConfig, main
from fibqkd.engine import mix
from fibqkd.hilbert import DomainError
from fibqkd.infometrics import sweep


def test_csv_roundtrip(tmp_path, pe):
    path = io.write_matrix_csv(tmp_path / "m.csv", pe)
    back = io.read_matrix_csv(path)
    assert back.shape == (26, 26)
    assert np.max(np.abs(back - pe.as_array())) <= 1e-15


def test_json_roundtrip_bit_exact(tmp_path, cfg, p0, pe):
    m = mix(p0, pe, 0.37)
    back = io.read_matrix_json(io.write_matrix_json(tmp_path / "m.json", m, cfg))
    assert (back.as_array() == m.as_array()).all()


def test_json_exact_roundtrip(tmp_path, cfg, pe_exact):
    back = io.read_matrix_json(io.write_matrix_json(tmp_path / "m.json", pe_exact, cfg))
    assert back.exact and (back.entries == pe_exact.entries).all()
    data = json.loads((tmp_path / "m.json").read_text())
    assert set(data["blocks"]) == {"L", "C", "F", "D"}
    assert data["labels"][0] == "Lout" and data["labels"][9] == "Dout"


def test_metrics_csv_roundtrip(tmp_path, cfg):
    rows = sweep(cfg, [0.0, 0.5])
    path = io.write_metrics(tmp_path / "s", rows, "csv")
    assert path.read_text().splitlines()[0] == "eta,disturbance,hA,hB,hAB,iAB,iAE,retained,keyRate"
    assert io.read_metrics_csv(path) == rows


def test_run_config_validation():
    with pytest.raises(DomainError):
        RunConfig(trials=0)
    with pytest.raises(DomainError):
        RunConfig(workers=0)
    with pytest.raises(DomainError):
        RunConfig(check_fraction=1.0)


def test_cli_analytic_eta_zero(tmp_path):
    assert main(["analytic", "--out", str(tmp_path)]) == 0
    dp = io.read_matrix_csv(tmp_path / "dp.csv")
    assert dp.shape == (26, 26) and not dp.any()
    assert io.read_matrix_csv(tmp_path / "p0.csv").shape == (26, 26)


def test_cli_sweep_linear(tmp_path):
    assert main(["sweep", "--eta-grid", "11", "--out", str(tmp_path)]) == 0
    rows = io.read_metrics_csv(tmp_path / "sweep.csv")
    etas = np.array([r.eta for r in rows])
    d = np.array([r.disturbance for r in rows])
    assert len(rows) == 11 and d[0] == 0.0
    assert np.max(np.abs(d - etas * d[-1])) < 1e-12


def test_cli_config_file_and_override(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"n": 4, "eta": 0.5, "format": "json"}))
    out = tmp_path / "o"
    assert main(["analytic", "--config", str(conf), "--n", "5", "--out", str(out)]) == 0
    data = json.loads((out / "p.json").read_text())
    assert data["n"] == 5
    assert json.loads((out / "metrics.json").read_text())[0]["eta"] == 0.5


def test_cli_bad_config_key(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        main(["analytic", "--config", str(conf)])


def test_cli_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        main(["analytic", "--out", str(blocker / "sub")])


def test_cli_simulate_report_and_log(tmp_path):
    out = tmp_path / "s"
    args = ["simulate", "--trials", "20000", "--seed", "4", "--workers", "2", "--trial-log", "--out", str(out)]
    assert main(args) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["key_agreement_rate"] == 1.0
    assert report["security_check"]["status"] in ("ok", "inconclusive")
    lines = (out / "trials.jsonl").read_text().splitlines()
    assert len(lines) == 20000
    assert set(json.loads(lines[0])) >= {"aliceBasis", "bobBasis", "eveAction", "retained"}
