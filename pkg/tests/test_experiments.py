import json
import math

import numpy as np
import pytest

from lifted_mcmc import cli
from lifted_mcmc.balancing import METROPOLIS
from lifted_mcmc.barker1d import guided_walk_proposal
from lifted_mcmc.experiments import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    load_config,
    resolve_workers,
    run_chain,
    run_experiment,
    verify_suite,
)


def tiny_barker_config(**kw):
    base = dict(
        experiment="barker_table",
        sigma_grid=(2.5,),
        iterations=2000,
        burn_in=200,
        replicates=2,
        seed=7,
        workers=1,
    )
    base.update(kw)
    return ExperimentConfig(**base)


# configuration -----------------------------------------------------------------


def test_config_validation_lists_every_violation():
    cfg = ExperimentConfig(
        experiment="nope",
        samplers=("mh", "bogus"),
        iterations=100,
        burn_in=100,
        replicates=0,
        coupling=-1.0,
    )
    with pytest.raises(ConfigError) as err:
        cfg.validated()
    message = str(err.value)
    for fragment in ("unknown experiment", "unknown samplers", "burn_in", "replicates", "coupling"):
        assert fragment in message, message


def test_config_defaults():
    cfg = ExperimentConfig(experiment="barker_table")
    assert cfg.effective_burn_in() == 20_000
    assert cfg.effective_replicates() == 20
    assert ExperimentConfig(experiment="ising_mu_sweep").effective_replicates() == 10


def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "experiment": "barker_table",
        "sigma_grid": [2.0],
        "iterations": 5000,
        "seed": 3,
    }))
    cfg = load_config(str(path), seed=11, replicates=4, output_path=None)
    assert cfg.seed == 11 and cfg.replicates == 4
    assert cfg.sigma_grid == (2.0,)
    assert cfg.iterations == 5000

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "barker_table", "wat": 1}))
    with pytest.raises(ConfigError, match="unknown config fields"):
        load_config(str(bad))


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("LIFTED_MCMC_THREADS", raising=False)
    assert resolve_workers(3) == 3
    monkeypatch.setenv("LIFTED_MCMC_THREADS", "5")
    assert resolve_workers(None) == 5
    assert resolve_workers(2) == 2  # explicit flag wins
    monkeypatch.delenv("LIFTED_MCMC_THREADS")
    assert resolve_workers(None) >= 1


# chain driver -------------------------------------------------------------------


def test_run_chain_deterministic_per_seed():
    proposal = guided_walk_proposal(2.5)
    traces = []
    for _ in range(2):
        rng = np.random.default_rng(123)
        x0 = proposal.initial_state(rng)
        traces.append(run_chain("lifted", proposal, x0, 500, 100, float, rng))
    np.testing.assert_array_equal(traces[0].values, traces[1].values)
    assert traces[0].accepted_count == traces[1].accepted_count
    assert traces[0].total_steps == 400


def test_run_chain_samplers_cover_branches():
    proposal = guided_walk_proposal(2.0)
    rng = np.random.default_rng(5)
    for sampler in ("mh", "rev", "lifted"):
        trace = run_chain(sampler, proposal, 0.0, 300, 50, float, rng, phi=METROPOLIS)
        assert trace.values.shape == (250,)
        assert 0 < trace.accepted_count <= 250


# experiment runner ---------------------------------------------------------------


def test_run_experiment_csv_bytes_deterministic(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    run_experiment(tiny_barker_config(output_path=str(out1)))
    run_experiment(tiny_barker_config(output_path=str(out2), workers=2))
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2  # worker count must not affect output bytes
    header = b1.decode().splitlines()[0]
    assert header == CSV_HEADER


def test_run_experiment_rows_and_aggregates():
    result = run_experiment(tiny_barker_config())
    assert len(result.rows) == 3 * 2  # three samplers, two replicates
    mean_row = result.aggregate("sigma=2.5", "mh", "mean")
    median_row = result.aggregate("sigma=2.5", "mh", "median")
    assert 0.0 < mean_row["acc_rate"] < 1.0
    assert mean_row["bound"] == pytest.approx(2 * mean_row["asym_var"] + 1.0)
    assert median_row["bound"] == mean_row["bound"]
    for row in result.rows:
        assert row["bound"] is None


def test_run_experiment_ising_point_uses_exact_standardization():
    cfg = ExperimentConfig(
        experiment="ising_mu_sweep",
        mu_grid=(1.0,),
        eta=2,
        iterations=1500,
        burn_in=300,
        replicates=2,
        seed=1,
        workers=1,
        samplers=("mh", "lifted"),
    )
    result = run_experiment(cfg)
    assert {r["sampler"] for r in result.rows} == {"mh", "lifted"}
    agg = result.aggregate("mu=1", "lifted", "mean")
    assert agg["asym_var"] > 0.0


def test_run_experiment_counterexample_rows():
    cfg = ExperimentConfig(experiment="counterexample", counterexample_k_max=3, seed=0)
    result = run_experiment(cfg)
    rev_rows = [r for r in result.rows if r["sampler"] == "rev"]
    assert [r["point"] for r in rev_rows] == ["k=0", "k=1", "k=2", "k=3"]
    ratios = [r["bound"] for r in rev_rows]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.01


def test_run_experiment_rejects_verify():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="verify"))


# verification suite ----------------------------------------------------------------


def test_verify_suite_small_clean():
    report = verify_suite(seed=0, instance_count=10, include_ising=False)
    assert report.passed
    assert report.instances == 10
    assert report.worst_stationarity <= 1e-10
    assert report.worst_skewed_db <= 1e-10
    assert report.worst_peskun_margin >= -1e-12
    assert report.worst_lambda_gap <= 0.05


def test_verify_suite_fault_injection_names_certificate():
    report = verify_suite(seed=0, instance_count=3, include_ising=False, inject_fault=True)
    assert not report.passed
    assert any("stationarity" in v or "detailed-balance" in v for v in report.violations)


def test_verify_suite_json_deterministic():
    a = verify_suite(seed=5, instance_count=5, include_ising=False).to_json()
    b = verify_suite(seed=5, instance_count=5, include_ising=False).to_json()
    assert a == b
    payload = json.loads(a)
    for key in ("instances", "worst_stationarity", "worst_skewed_db",
                "worst_peskun_margin", "theorem1_violations"):
        assert key in payload


# command-line interface ---------------------------------------------------------------


def test_cli_run_with_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "experiment": "barker_table",
        "sigma_grid": [2.5],
        "iterations": 1500,
        "burn_in": 300,
        "replicates": 2,
        "workers": 1,
    }))
    out_path = tmp_path / "out.csv"
    code = cli.main(["run", "--config", str(cfg_path), "--seed", "9", "--output", str(out_path)])
    assert code == 0
    assert out_path.read_text().startswith(CSV_HEADER)
    assert "sigma=2.5" in capsys.readouterr().out


def test_cli_run_invalid_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"experiment": "nope"}))
    assert cli.main(["run", "--config", str(cfg_path)]) == 2
    assert "unknown experiment" in capsys.readouterr().err


def test_cli_verify_roundtrip(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["verify", "--instances", "5", "--seed", "1", "--skip-ising", "--output", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["instances"] == 5
    assert payload["violations"] == []

    code = cli.main(["verify", "--instances", "3", "--seed", "1", "--skip-ising", "--inject-fault"])
    assert code == 1
    assert "FAILED CERTIFICATE" in capsys.readouterr().err


def test_cli_verify_byte_identical_reports(tmp_path):
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for p in paths:
        cli.main(["verify", "--instances", "4", "--seed", "2", "--skip-ising", "--output", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_cli_counterexample(capsys):
    assert cli.main(["counterexample", "--sigma", "0.5", "--k-max", "4"]) == 0
    out = capsys.readouterr().out
    assert "P_rev" in out and "ratio" in out
    last = out.strip().splitlines()[-1]
    assert float(last.split()[-1]) < 0.01
