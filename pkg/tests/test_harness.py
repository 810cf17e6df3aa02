import json

import numpy as np
import pytest

from hardchains.harness import (
    ConfigError,
    ExperimentConfig,
    complexity_sweep,
    fit_slope,
    main,
    run_lemma,
)
from hardchains.scaling import ScalingPlan

FAST = ["--eps-grid", "0.08,0.04,0.02,0.01", "--budget", "100000"]


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(epsilon_grid=(0.01, 0.02))
    with pytest.raises(ConfigError):
        ExperimentConfig(epsilon_grid=(0.1, -0.1))
    with pytest.raises(ConfigError):
        ExperimentConfig(family="bogus")
    with pytest.raises(ConfigError):
        ExperimentConfig(family="convex-distance")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"colour": "red"})


def test_slope_fit_exact_power_law():
    eps = np.array([0.1, 0.05, 0.025])
    fit = fit_slope(eps, 3.0 * eps**-1.5)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert len(fit.points) == 3
    with pytest.raises(ValueError):
        fit_slope(eps[:2], eps[:2])


def test_sweep_rows_ordered_and_dominant():
    config = ExperimentConfig(epsilon_grid=(0.08, 0.04, 0.02, 0.01), budget=100000)
    rows, fits = complexity_sweep(config)
    assert [r["eps"] for r in rows] == [0.08, 0.04, 0.02, 0.01]
    assert all(r["dominates"] and r["zero_respecting"] for r in rows)
    assert fits["predicted"]["slope"] == pytest.approx(1.0, abs=0.01)
    assert "measured" in fits


def test_sweep_parallel_matches_serial():
    serial = complexity_sweep(ExperimentConfig(epsilon_grid=(0.08, 0.04, 0.02, 0.01), budget=100000))
    parallel = complexity_sweep(ExperimentConfig(epsilon_grid=(0.08, 0.04, 0.02, 0.01), budget=100000,
                                                 workers=2))
    assert serial == parallel


def test_exhausted_rows_are_flagged_and_excluded():
    config = ExperimentConfig(epsilon_grid=(0.08, 0.04, 0.02, 0.01), budget=200)
    rows, fits = complexity_sweep(config)
    assert any(r["exhausted"] for r in rows)
    assert all(r["dominates"] for r in rows)
    assert "measured" not in fits


def test_cli_make_instance_round_trip(tmp_path):
    assert main(["make-instance", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "plan.json").read_text())
    assert ScalingPlan.from_dict(d).to_dict() == d


def test_cli_p2_descriptor(tmp_path):
    rc = main(["make-instance", "--out", str(tmp_path), "--family", "nonconvex-p2",
               "--lipschitz", "1e3,1e7", "--eps-grid", "0.001"])
    assert rc == 0
    d = json.loads((tmp_path / "plan.json").read_text())
    assert d["mu"] <= 1 and d["r"] == 1.0


def test_cli_general_descriptor(tmp_path):
    rc = main(["make-instance", "--out", str(tmp_path), "--family", "nonconvex-general",
               "--lipschitz", "1e3,1e6,1e9", "--eps-grid", "0.001"])
    assert rc == 0
    assert json.loads((tmp_path / "plan.json").read_text())["qstar"] in (2, 3)


def test_cli_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--out", str(a), *FAST]) == 0
    assert main(["sweep", "--out", str(b), "--workers", "2", *FAST]) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    header = (a / "sweep.csv").read_text().splitlines()[0]
    assert header.startswith("eps,T_predicted,T_measured")


def test_cli_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epsilon_grid": [0.5, 0.25], "budget": 1000}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path), "--eps-grid", "0.05"]) == 0
    assert (tmp_path / "trace.csv").exists()
    summary = json.loads((tmp_path / "run.json").read_text())
    assert summary["T_eps"] > summary["T_plan"]


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    assert main(["sweep", "--out", str(tmp_path), "--eps-grid", "0.01,0.02,0.03,0.04"]) == 2
    assert main(["sweep", "--out", str(tmp_path), "--eps-grid", "0.1,0.05"]) == 2
    assert main(["make-instance", "--out", str(tmp_path), "--eps-grid", "5"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_verify_suite_default_passes_with_one_designed_failure(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(r["passed"] for r in report["reports"])
    assert [c["passed"] for c in report["controls"]] == [False]
    claims = {r["claim"] for r in report["reports"]}
    assert {"zero-chain", "convex-floor", "gradient-floor", "explicit-point",
            "suboptimality-resistance", "value-gap"} <= claims
    assert all("measured" in r and "bound" in r for r in report["reports"])


def test_verify_unplannable_accuracy_is_config_error(tmp_path):
    assert main(["verify", "--out", str(tmp_path), "--eps-grid", "10"]) == 2


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    from hardchains import harness
    from hardchains.verifiers import VerificationReport

    failing = VerificationReport("forced", 0.0, 1.0, 0.0, False)
    monkeypatch.setattr(harness, "verification_suite", lambda config: ([failing], []))
    assert main(["verify", "--out", str(tmp_path)]) == 1


def test_lemma_subcommand(tmp_path):
    assert main(["lemma", "convex-floor", "--out", str(tmp_path), "--T", "20"]) == 0
    with pytest.raises(ConfigError):
        run_lemma("nope", ExperimentConfig())
