import numpy as np
import pytest

from causalfair.ci_oracle import OracleError
from causalfair.datagen import Cpt, Dataset, ScmSpec, generate_scm
from causalfair.graphs import CausalGraph, Edge, Node, NodeKind
from causalfair.predictors import (
    CounterfactualPredictor,
    FeatureEncoder,
    Model,
    PredictorError,
    TrainConfig,
    cf_predict,
    decide,
    load_model,
    oracle_predictor,
    save_model,
    train,
)
from causalfair.scms import plain_spurious_scm, selection_on_predictors_scm


def numeric_dataset(n, seed, informative=True, base_rate=0.3):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=n)
    x1 = rng.normal(size=n)
    if informative:
        y = (rng.random(n) < 1 / (1 + np.exp(-(2.0 * x0 - 1.5 * x1)))).astype(int)
    else:
        y = (rng.random(n) < base_rate).astype(int)
    a = rng.integers(0, 2, n).astype(int)
    return Dataset(
        {"x0": "numeric", "x1": "numeric", "a": "binary", "y": "binary"},
        {"x0": x0, "x1": x1, "a": a, "y": y},
    )


class TestTrain:
    def test_separable_data_reaches_perfect_training_accuracy(self):
        rng = np.random.default_rng(0)
        x0 = np.concatenate([rng.normal(-3, 0.5, 100), rng.normal(3, 0.5, 100)])
        x1 = rng.normal(size=200)
        y = np.array([0] * 100 + [1] * 100)
        data = Dataset(
            {"x0": "numeric", "x1": "numeric", "y": "binary"},
            {"x0": x0, "x1": x1, "y": y},
        )
        model = train(data, ["x0", "x1"], cfg=TrainConfig(epochs=300, seed=1))
        acc = (decide(model.predict_scores(data)) == y).mean()
        assert acc == 1.0

    def test_uninformative_features_recover_base_rate(self):
        # Oracle: the label frequency itself.
        data = numeric_dataset(10_000, seed=3, informative=False, base_rate=0.3)
        model = train(data, ["x0", "x1"], cfg=TrainConfig(epochs=300, seed=2))
        scores = model.predict_scores(data)
        assert abs(scores.mean() - data["y"].mean()) < 0.02

    def test_bit_identical_given_seed(self):
        data = numeric_dataset(500, seed=5)
        m1 = train(data, ["x0", "x1"], cfg=TrainConfig(epochs=50, seed=9))
        m2 = train(data, ["x0", "x1"], cfg=TrainConfig(epochs=50, seed=9))
        assert (m1.weights == m2.weights).all()
        assert m1.intercept == m2.intercept

    @pytest.mark.parametrize("loss", ["cross_entropy", "squared_error"])
    def test_loss_non_increasing(self, loss):
        data = numeric_dataset(2000, seed=7)
        model = train(
            data,
            ["x0", "x1"],
            include_protected=True,
            cfg=TrainConfig(epochs=200, seed=3, loss=loss, learning_rate=4.0),
        )
        diffs = np.diff(model.training_loss)
        assert (diffs <= 1e-9).all()

    def test_degenerate_labels_rejected(self):
        data = Dataset(
            {"x0": "numeric", "y": "binary"},
            {"x0": np.arange(4, dtype=float), "y": np.ones(4, dtype=int)},
        )
        with pytest.raises(PredictorError, match="one label"):
            train(data, ["x0"])

    def test_non_finite_features_rejected(self):
        data = Dataset(
            {"x0": "numeric", "y": "binary"},
            {"x0": np.array([1.0, np.nan, 2.0, 3.0]), "y": np.array([0, 1, 0, 1])},
        )
        with pytest.raises(PredictorError, match="non-finite"):
            train(data, ["x0"])

    def test_stronger_l2_never_increases_weight_norm(self):
        data = numeric_dataset(3000, seed=11)
        sd = np.column_stack([data["x0"], data["x1"]]).std(axis=0)
        norms = []
        for l2 in (0.0, 0.03, 0.3, 3.0):
            model = train(
                data, ["x0", "x1"], cfg=TrainConfig(epochs=400, seed=4, l2=l2)
            )
            norms.append(float(np.linalg.norm(model.weights * sd)))
        assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:])), norms

    def test_protected_listed_directly_rejected(self):
        data = numeric_dataset(100, seed=1)
        with pytest.raises(PredictorError, match="include_protected"):
            train(data, ["x0", "a"])


class TestPredictSchema:
    def test_missing_column_rejected(self):
        data = numeric_dataset(200, seed=2)
        model = train(data, ["x0", "x1"], cfg=TrainConfig(epochs=20))
        with pytest.raises(PredictorError, match="lacks column 'x1'"):
            model.predict_scores(data.drop_columns(["x1"]))

    def test_unseen_level_rejected(self):
        data = Dataset(
            {"c": "categorical", "y": "binary"},
            {"c": np.array(["u", "v", "u", "v"], dtype=object), "y": np.array([0, 1, 0, 1])},
        )
        model = train(data, ["c"], cfg=TrainConfig(epochs=20))
        probe = Dataset(
            {"c": "categorical", "y": "binary"},
            {"c": np.array(["w"], dtype=object), "y": np.array([0])},
        )
        with pytest.raises(PredictorError, match="unseen"):
            model.predict_scores(probe)

    def test_ftu_model_never_reads_protected(self):
        data = numeric_dataset(500, seed=6)
        ftu = train(data, ["x0", "x1"], include_protected=False, cfg=TrainConfig(epochs=50))
        assert "a" not in ftu.encoder.features
        flipped = data.with_column("a", "binary", 1 - data["a"])
        assert (ftu.predict_scores(data) == ftu.predict_scores(flipped)).all()


class TestDecide:
    def test_threshold_rule(self):
        assert decide(0.6) == 1
        assert decide(0.4) == 0
        assert decide(0.5) == 1  # tie classifies positive
        assert decide([0.6, 0.4, 0.5]).tolist() == [1, 0, 1]


class TestCfPredict:
    def test_matches_branch_mixture(self):
        data = numeric_dataset(300, seed=8)
        naive = train(data, ["x0", "x1"], include_protected=True, cfg=TrainConfig(epochs=80))
        s1 = naive.predict_scores(data.with_column("a", "binary", np.ones(300, dtype=int)))
        s0 = naive.predict_scores(data.with_column("a", "binary", np.zeros(300, dtype=int)))
        got = cf_predict(naive, data, 0.5)
        assert got == pytest.approx(0.5 * s1 + 0.5 * s0, abs=0)
        assert 0.5 * 0.8 + 0.5 * 0.4 == pytest.approx(0.6)

    def test_invariant_when_protected_coefficient_zero(self):
        encoder = FeatureEncoder(features=["x0", "a"], levels={})
        model = Model(
            encoder=encoder,
            weights=np.array([1.25, 0.0]),
            intercept=-0.5,
            uses_protected=True,
            config=TrainConfig(),
        )
        data = Dataset(
            {"x0": "numeric", "a": "binary"},
            {"x0": np.linspace(-2, 2, 9), "a": np.zeros(9, dtype=int)},
        )
        base = model.predict_scores(data)
        for weight in (0.0, 0.25, 0.5, 1.0):
            assert (cf_predict(model, data, weight) == base).all()

    def test_output_is_convex_combination(self):
        data = numeric_dataset(500, seed=10)
        naive = train(data, ["x0", "x1"], include_protected=True, cfg=TrainConfig(epochs=60))
        s1 = naive.predict_scores(data.with_column("a", "binary", np.ones(500, dtype=int)))
        s0 = naive.predict_scores(data.with_column("a", "binary", np.zeros(500, dtype=int)))
        for weight in (0.0, 0.3, 0.7, 1.0):
            mix = cf_predict(naive, data, weight)
            assert (mix >= np.minimum(s0, s1) - 1e-12).all()
            assert (mix <= np.maximum(s0, s1) + 1e-12).all()

    def test_never_reads_actual_protected_column(self):
        data = numeric_dataset(300, seed=12)
        naive = train(data, ["x0", "x1"], include_protected=True, cfg=TrainConfig(epochs=60))
        flipped = data.with_column("a", "binary", 1 - data["a"])
        without = data.drop_columns(["a"])
        ref = cf_predict(naive, data, 0.5)
        assert (cf_predict(naive, flipped, 0.5) == ref).all()
        assert (cf_predict(naive, without, 0.5) == ref).all()

    def test_requires_protected_aware_model(self):
        data = numeric_dataset(100, seed=13)
        ftu = train(data, ["x0"], cfg=TrainConfig(epochs=20))
        with pytest.raises(PredictorError, match="protected-aware"):
            cf_predict(ftu, data, 0.5)

    def test_wrapper_class(self):
        data = numeric_dataset(100, seed=14)
        naive = train(data, ["x0", "x1"], include_protected=True, cfg=TrainConfig(epochs=30))
        wrapper = CounterfactualPredictor(naive=naive, weight_pa1=0.5)
        assert (wrapper.predict_scores(data) == cf_predict(naive, data, 0.5)).all()


class TestPersistence:
    def test_round_trip_predictions_identical(self, tmp_path):
        data = numeric_dataset(200, seed=15)
        model = train(data, ["x0", "x1"], include_protected=True, cfg=TrainConfig(epochs=40))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert (loaded.predict_scores(data) == model.predict_scores(data)).all()
        assert loaded.uses_protected == model.uses_protected

    def test_missing_field_diagnosed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"weights": []}')
        with pytest.raises(PredictorError, match="missing field"):
            load_model(path)


class TestOraclePredictors:
    def test_naive_oracle_ignores_shielded_features(self):
        # purely spurious: P(y=1 | x_perp_a, x_perp_y, a) = P(y=1 | x_perp_a)
        spec = plain_spurious_scm()
        oracle = oracle_predictor(spec, "naive")
        for xpa, expected in ((0, 0.25), (1, 0.75)):
            values = {
                oracle.score({"x_perp_a": xpa, "x_perp_y": xy, "a": av})
                for xy in (0, 1)
                for av in (0, 1)
            }
            assert values == {expected}

    def test_uniform_label_scores_half(self):
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("x_perp_a", NodeKind.X_PERP_A),
                Node("y", NodeKind.LABEL),
            ],
            [Edge("x_perp_a", "y")],
        )
        spec = ScmSpec(
            graph=g,
            cpts={
                "a": Cpt.root(0.5),
                "x_perp_a": Cpt.root(0.4),
                "y": Cpt.from_p1(("x_perp_a",), {(0,): 0.5, (1,): 0.5}),
            },
            n=1,
        )
        oracle = oracle_predictor(spec, "naive")
        assert set(oracle.table.values()) == {0.5}

    def test_label_driven_by_protected_only(self):
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("x_perp_a", NodeKind.X_PERP_A),
                Node("y", NodeKind.LABEL),
            ],
            [Edge("a", "y")],
        )
        spec = ScmSpec(
            graph=g,
            cpts={
                "a": Cpt.root(0.5),
                "x_perp_a": Cpt.root(0.4),
                "y": Cpt.from_p1(("a",), {(0,): 0.2, (1,): 0.8}),
            },
            n=1,
        )
        oracle = oracle_predictor(spec, "naive")
        for a_val, expected in ((0, 0.2), (1, 0.8)):
            assert oracle.score({"x_perp_a": 0, "a": a_val}) == expected
            assert oracle.score({"x_perp_a": 1, "a": a_val}) == expected

    def test_counterfactual_oracle_exact_invariance(self):
        for spec_fn in (plain_spurious_scm, selection_on_predictors_scm):
            spec = spec_fn(n=4000, seed=21)
            data = generate_scm(spec)
            oracle = oracle_predictor(spec, "counterfactual")
            factual = Dataset(
                {name: "binary" for name in oracle.inputs},
                {name: data[name] for name in oracle.inputs},
            )
            twin = Dataset(
                {name: "binary" for name in oracle.inputs},
                {name: data[name + "_cf"] for name in oracle.inputs},
            )
            gap = np.abs(oracle.scores(factual) - oracle.scores(twin))
            assert (gap == 0.0).all()

    def test_ftu_and_cf_risk_min_input_sets(self):
        spec = selection_on_predictors_scm()
        assert "a" not in oracle_predictor(spec, "ftu").inputs
        assert oracle_predictor(spec, "cf_risk_min").inputs == ("x_perp_a",)

    def test_unknown_kind_rejected(self):
        with pytest.raises(OracleError, match="unknown oracle kind"):
            oracle_predictor(plain_spurious_scm(), "wizard")
