"""Config loading, scenario presets, the experiment driver, and the CLI."""

import csv
import json

import numpy as np
import pytest

from matching_bandits import (
    ValidationError,
    load_config,
    make_config,
    plan_exploration,
    run_experiment,
    static_diagnostics,
)
from matching_bandits.cli import main
from matching_bandits.harness import CSV_HEADER
from matching_bandits.scenarios import list_scenarios


class TestPresets:
    def test_s1_constants(self):
        config = make_config("s1")
        assert (config.n_agents, config.n_arms, config.dim) == (2, 3, 2)
        assert config.horizon == 1000
        assert config.sigma == 0.05
        assert config.lam == (0.1, 0.1)
        assert config.delta_min == (0.2, 0.2)
        assert config.arm_prefs == ((0, 1), (1, 0), (0, 1))
        assert np.array_equal(
            config.means, [[0.667, 0.745], [0.745, 0.667], [0.994, 0.110]]
        )
        assert np.array_equal(config.thetas, [[0.530, 0.848], [0.894, 0.447]])

    def test_s5_constants(self):
        config = make_config("s5")
        assert (config.n_agents, config.n_arms, config.dim) == (5, 5, 5)
        assert config.horizon == 15000
        assert config.delta_min == (0.1,) * 5
        assert config.arm_prefs == tuple((0, 1, 2, 3, 4) for _ in range(5))

    def test_listing_contains_documented_values(self):
        table = list_scenarios()
        assert table["s3"]["horizon"] == 5000
        assert table["s3"]["delta_min"] == 0.05
        assert table["s4"]["dim"] == 10
        assert table["s4"]["horizon"] == 10000
        assert table["s4"]["arm_prefs"] == "global"
        assert table["lower_bound"]["dim"] >= 3
        assert table["lower_bound"]["context_kind"] == "uniform_iid"

    def test_preset_vectors_are_stable_across_calls(self):
        a = make_config("s4")
        b = make_config("s4")
        assert np.array_equal(a.thetas, b.thetas)
        assert np.array_equal(a.means, b.means)

    def test_horizon_below_loop_length_rejected(self):
        with pytest.raises(ValidationError):
            make_config("s1", horizon=2)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="bogus"):
            make_config("s1", bogus=1)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValidationError):
            make_config("s9")


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": "s1", "zeta": 0.05, "replications": 3}))
        config = load_config(path)
        assert config.zeta == 0.05
        assert config.replications == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            load_config(path)


class TestPlan:
    def test_s2_reference_budget(self):
        plan = plan_exploration(make_config("s2"))
        assert abs(plan.rounds - 312) <= 6

    def test_override_budget(self):
        config = make_config("s1", exploration_rounds=312)
        assert plan_exploration(config).rounds == 312

    def test_override_must_be_loop_multiple(self):
        with pytest.raises(ValidationError):
            make_config("s1", exploration_rounds=310)


def small_config(**overrides):
    defaults = dict(horizon=60, replications=3, master_seed=11, exploration_rounds=30)
    defaults.update(overrides)
    return make_config("s1", **defaults)


class TestRunExperiment:
    def test_single_replication_bands_collapse(self):
        result = run_experiment(small_config(replications=1))
        assert np.array_equal(result.bands.minimum, result.bands.maximum)
        assert np.allclose(result.bands.mean, result.bands.minimum)

    def test_outputs_are_reproducible_bytes(self, tmp_path):
        config = small_config()
        run_experiment(config, out_dir=tmp_path / "a")
        run_experiment(config, out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "results.csv").read_bytes() == (
            tmp_path / "b" / "results.csv"
        ).read_bytes()
        assert (tmp_path / "a" / "diagnostics.json").read_bytes() == (
            tmp_path / "b" / "diagnostics.json"
        ).read_bytes()

    def test_worker_pool_matches_sequential(self, tmp_path):
        config = small_config()
        run_experiment(config, out_dir=tmp_path / "seq", workers=1)
        run_experiment(config, out_dir=tmp_path / "par", workers=2)
        assert (tmp_path / "seq" / "results.csv").read_bytes() == (
            tmp_path / "par" / "results.csv"
        ).read_bytes()

    def test_csv_schema_and_consistency(self, tmp_path):
        config = small_config(replications=2)
        run_experiment(config, out_dir=tmp_path)
        with (tmp_path / "results.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == CSV_HEADER
        body = rows[1:]
        assert len(body) == 2 * 60 * 2  # replications * rounds * agents
        # cumulative column recomputes from the instantaneous column
        running = {}
        for rep, t, agent, phase, assigned, oracle_arm, r_inst, r_cum, changed in body:
            key = (rep, agent)
            running[key] = running.get(key, 0.0) + float(r_inst)
            assert abs(running[key] - float(r_cum)) < 1e-9
            assert phase in ("explore", "exploit")
            assert phase == ("explore" if int(t) <= 30 else "exploit")
            assert changed in ("0", "1")
            assert 1 <= int(assigned) <= 3 and 1 <= int(oracle_arm) <= 3

    def test_diagnostics_block(self):
        result = run_experiment(small_config())
        diag = result.diagnostics
        assert diag["exploration_rounds"] == 30
        assert len(diag["per_agent"]) == 2
        empirical = diag["empirical"]
        assert empirical["replications"] == 3
        assert len(empirical["mean_final_regret"]) == 2
        assert 0.0 <= empirical["exploit_match_rate"] <= 1.0
        # the s1 margins sit far below the assumed 0.2, so the audit fires
        assert all(v > 0 for v in empirical["margin_violation_rounds"])


class TestCli:
    def test_run_and_diagnose(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(
                {
                    "scenario": "s1",
                    "horizon": 60,
                    "replications": 2,
                    "exploration_rounds": 30,
                }
            )
        )
        out_dir = tmp_path / "out"
        assert main(["run", str(config_path), "--out-dir", str(out_dir), "--seed", "5"]) == 0
        assert (out_dir / "results.csv").exists()
        assert (out_dir / "diagnostics.json").exists()
        capsys.readouterr()
        assert main(["diagnose", str(config_path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["exploration_rounds"] == 30

    def test_scenarios_listing(self, capsys):
        assert main(["scenarios"]) == 0
        out = capsys.readouterr().out
        for name in ("[s1]", "[s2]", "[s3]", "[s4]", "[s5]", "[lower_bound]"):
            assert name in out

    def test_validation_failure_exit_code(self, tmp_path, capsys):
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps({"scenario": "s1", "horizon": 1}))
        assert main(["run", str(config_path)]) == 2
        assert "error[validation]" in capsys.readouterr().err

    def test_reps_override(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(
                {
                    "scenario": "s1",
                    "horizon": 30,
                    "replications": 9,
                    "exploration_rounds": 30,
                }
            )
        )
        out_dir = tmp_path / "out"
        assert main(["run", str(config_path), "--out-dir", str(out_dir), "--reps", "1"]) == 0
        with (out_dir / "results.csv").open() as fh:
            body = list(csv.reader(fh))[1:]
        assert {row[0] for row in body} == {"1"}
