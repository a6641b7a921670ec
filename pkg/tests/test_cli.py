import json

import numpy as np
import pytest

from steinmat.cli import main
from steinmat.config import validate_config
from steinmat.errors import ConfigError
from steinmat.serialize import read_samples


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


BASE = {
    "manifold": {"kind": "stiefel", "N": 3, "r": 2},
    "kernel": {"family": "gaussian", "tau": 1.0},
    "family": {"kind": "matrix_fisher", "F": [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]},
    "sampler": {"method": "rejection", "n": 60},
    "estimator": {"kind": "V"},
    "gof": {"beta": 0.05, "n_sim": 300},
    "seed": 7,
}


def test_validate_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="wavelength"):
        validate_config({"wavelength": 5})
    with pytest.raises(ConfigError, match="bandwidth"):
        validate_config({"kernel": {"bandwidth": 1.0}})
    validate_config(BASE)


def test_cli_invalid_config_exits_one(tmp_path, capsys):
    cfg = write_config(tmp_path, {"manifold": {"kind": "stiefel", "N": 3, "r": 2},
                                  "typo_block": {}})
    assert main(["sample", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "typo_block" in capsys.readouterr().err


def test_cli_missing_config_exits_one(tmp_path):
    assert main(["sample", "--config", str(tmp_path / "nope.json")]) == 1


def test_cli_numeric_failure_exits_two(tmp_path):
    doc = dict(BASE)
    doc["family"] = {"kind": "matrix_fisher",
                     "F": (400.0 * np.ones((3, 2))).tolist()}
    cfg = write_config(tmp_path, doc)
    assert main(["sample", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_cli_sample_ksd_mksde_gof_pipeline(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out = str(tmp_path)
    assert main(["sample", "--config", cfg, "--out", out]) == 0
    samples = f"{out}/samples.jsonl"
    header, pts = read_samples(samples)
    assert header["n"] == 60 and pts.shape == (60, 3, 2)

    assert main(["ksd", "--config", cfg, "--samples", samples, "--out", out]) == 0
    rep = json.loads((tmp_path / "ksd_report.json").read_text())
    assert {"u_stat", "v_stat", "u_se_bootstrap", "v_se_bootstrap"} <= set(rep)

    assert main(["mksde", "--config", cfg, "--samples", samples, "--out", out,
                 "--compare-mle"]) == 0
    rep = json.loads((tmp_path / "mksde_report.json").read_text())
    assert len(rep["theta_star"]) == 6
    assert rep["statistic_kind"] == "V"
    f_hat = np.asarray(rep["F_hat"])
    assert np.linalg.norm(f_hat - np.asarray(BASE["family"]["F"])) < 2.5
    assert np.asarray(rep["F_mle_numeric"]).shape == (3, 2)
    assert np.asarray(rep["F_mle_small_f"]).shape == (3, 2)

    # GoF against the matrix Bingham family (the composite-test study setup)
    doc = dict(BASE)
    doc["family"] = {"kind": "matrix_bingham", "A": np.zeros((3, 3)).tolist()}
    cfg2 = write_config(tmp_path, doc, name="gof.json")
    assert main(["gof", "--config", cfg2, "--samples", samples, "--out", out]) == 0
    rep = json.loads((tmp_path / "gof_report.json").read_text())
    assert rep["decision"] in ("reject", "accept")
    assert 0.0 < rep["p_value"] <= 1.0
    assert {"n", "family", "kernel", "kind", "beta", "statistic", "quantile",
            "p_value", "decision", "seed", "n_sim"} <= set(rep)
    assert (tmp_path / "gof_report.csv").exists()


def test_cli_sample_determinism(tmp_path):
    cfg = write_config(tmp_path, BASE)
    assert main(["sample", "--config", cfg, "--out", str(tmp_path),
                 "--output-name", "a.jsonl"]) == 0
    assert main(["sample", "--config", cfg, "--out", str(tmp_path),
                 "--output-name", "b.jsonl"]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_cli_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path, BASE)
    main(["sample", "--config", cfg, "--out", str(tmp_path), "--output-name", "a.jsonl"])
    main(["sample", "--config", cfg, "--seed", "99", "--out", str(tmp_path),
          "--output-name", "b.jsonl"])
    assert (tmp_path / "a.jsonl").read_bytes() != (tmp_path / "b.jsonl").read_bytes()


def test_cli_selftest():
    assert main(["selftest"]) == 0


def test_cli_experiment_mle_vs_mksde(tmp_path):
    doc = {"sweep": {"n_values": [30, 60], "replicates": 2}, "seed": 3}
    cfg = write_config(tmp_path, doc)
    out = str(tmp_path / "exp")
    assert main(["experiment-mle-vs-mksde", "--config", cfg, "--out", out]) == 0
    rows = (tmp_path / "exp" / "mle_vs_mksde.csv").read_text().strip().splitlines()
    # header + 6 F0 x 2 n x 2 reps x 4 estimators
    assert len(rows) == 1 + 6 * 2 * 2 * 4
    pngs = list((tmp_path / "exp").glob("errors_*.png"))
    assert len(pngs) == 6


def test_cli_experiment_gof(tmp_path):
    doc = {"sweep": {"n_values": [40, 60], "replicates": 2, "f_scales": [1.0]},
           "gof": {"beta": 0.05, "n_sim": 200}, "seed": 4}
    cfg = write_config(tmp_path, doc)
    out = str(tmp_path / "exp")
    assert main(["experiment-gof", "--config", cfg, "--out", out]) == 0
    rows = (tmp_path / "exp" / "gof_pvalues.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 1 * 2 * 2 * 2  # scales x n x reps x kinds
    med = (tmp_path / "exp" / "gof_pvalues_median.csv").read_text().strip().splitlines()
    assert len(med) == 1 + 1 * 2 * 2
    assert (tmp_path / "exp" / "gof_pvalues.png").exists()


def test_cli_experiment_threads_deterministic(tmp_path):
    doc = {"sweep": {"n_values": [25], "replicates": 2}, "seed": 5}
    cfg = write_config(tmp_path, doc)
    main(["experiment-mle-vs-mksde", "--config", cfg, "--out", str(tmp_path / "t1"),
          "--threads", "1"])
    main(["experiment-mle-vs-mksde", "--config", cfg, "--out", str(tmp_path / "t2"),
          "--threads", "4"])
    a = (tmp_path / "t1" / "mle_vs_mksde.csv").read_bytes()
    b = (tmp_path / "t2" / "mle_vs_mksde.csv").read_bytes()
    assert a == b
