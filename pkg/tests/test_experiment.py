import json

import pytest

from causalfair.experiment import (
    ConfigError,
    ExperimentConfig,
    build_target,
    feature_columns,
    predicted_vanishing_metric,
    run_experiment,
    write_results,
    write_simulated_datasets,
)


def tiny_config(**overrides):
    doc = {
        "dataset": {"kind": "synthetic", "rows": 2500},
        "train": {"epochs": 150},
        "replicates": 2,
        "seed": 11,
    }
    doc.update(overrides)
    return ExperimentConfig.from_json(doc)


class TestConfig:
    def test_defaults_valid(self):
        cfg = ExperimentConfig()
        assert cfg.replicates == 10
        assert set(cfg.contexts) == {
            "measurement_error",
            "selection_on_label",
            "selection_on_predictors",
        }

    def test_unknown_fields_rejected(self):
        with pytest.raises(ConfigError, match="unknown config fields"):
            ExperimentConfig.from_json({"bogus": 1})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json({"replicates": 0})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json({"predictors": ["wizard"]})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json({"contexts": {"nonsense": {"p": 0.5}}})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json({"dataset": {"kind": "csv"}})

    def test_round_trip(self):
        cfg = tiny_config()
        again = ExperimentConfig.from_json(cfg.as_json())
        assert again.as_json() == cfg.as_json()


class TestBuildTarget:
    def test_target_has_protected_and_features(self):
        cfg = tiny_config()
        target = build_target(cfg, seed=5)
        assert target.n_rows == 2500
        assert "a" in target.schema and "y" in target.schema
        assert "a" not in feature_columns(target)
        assert "y" not in feature_columns(target)

    def test_predicted_vanishing_matches_contexts(self):
        assert predicted_vanishing_metric("measurement_error") == "demographic_parity"
        assert predicted_vanishing_metric("selection_on_label") == "equalized_odds"
        assert predicted_vanishing_metric("selection_on_predictors") == "binary_calibration"


class TestRunExperiment:
    def test_structure_and_determinism(self):
        cfg = tiny_config(replicates=1)
        r1 = run_experiment(cfg)
        r2 = run_experiment(cfg)
        assert r1.as_json() == r2.as_json()
        for context, block in r1.contexts.items():
            assert set(block["accuracy"]["target"]) == {
                "naive",
                "ftu",
                "counterfactual",
                "target_trained",
            }
            assert "target_trained" not in block["accuracy"]["source"]
            for metric in ("demographic_parity", "equalized_odds", "binary_calibration"):
                entry = block["fairness"][metric]
                assert len(entry["values"]) == 1
                assert entry["sd"] == 0.0

    def test_different_seeds_differ(self):
        r1 = run_experiment(tiny_config(replicates=1, seed=11))
        r2 = run_experiment(tiny_config(replicates=1, seed=12))
        assert r1.as_json() != r2.as_json()

    def test_predictor_subset(self):
        cfg = tiny_config(replicates=1, predictors=["naive", "counterfactual"])
        result = run_experiment(cfg)
        block = next(iter(result.contexts.values()))
        assert set(block["accuracy"]["target"]) == {"naive", "counterfactual"}
        # the fairness table is always about the counterfactual predictor
        assert block["fairness"]["demographic_parity"]["values"]

    def test_tables_render(self):
        result = run_experiment(tiny_config(replicates=2))
        acc = result.accuracy_table()
        fair = result.fairness_table()
        assert "measurement_error" in acc
        assert "±" in acc
        assert "*" in fair


class TestOutputs:
    def test_written_files_byte_identical_across_runs(self, tmp_path):
        cfg = tiny_config(replicates=1)
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        write_results(run_experiment(cfg), d1)
        write_results(run_experiment(cfg), d2)
        for name in ("accuracy.csv", "fairness.csv", "report.json"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_csv_headers(self, tmp_path):
        paths = write_results(run_experiment(tiny_config(replicates=1)), tmp_path)
        acc_lines = paths["accuracy"].read_text().splitlines()
        assert acc_lines[0] == "context,split,predictor,mean,sd"
        fair_lines = paths["fairness"].read_text().splitlines()
        assert fair_lines[0] == "context,metric,mean,sd,predicted_vanishing"
        flagged = [l for l in fair_lines[1:] if l.endswith(",1")]
        assert len(flagged) == 3  # one predicted-vanishing metric per context
        report = json.loads(paths["report"].read_text())
        assert set(report["contexts"]) == set(ExperimentConfig().contexts)

    def test_simulated_datasets_written(self, tmp_path):
        cfg = tiny_config()
        paths = write_simulated_datasets(cfg, tmp_path)
        assert set(paths) == {
            "target",
            "source_measurement_error",
            "source_selection_on_label",
            "source_selection_on_predictors",
        }
        for path in paths.values():
            assert path.exists()
            assert path.with_name(path.stem + ".schema.json").exists()
        schema = json.loads(
            (tmp_path / "source_measurement_error.schema.json").read_text()
        )
        assert schema["y_true"] == "binary"
