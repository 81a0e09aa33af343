import numpy as np
import pytest

from causalfair.equivalence import (
    EquivalenceError,
    MetricId,
    calibration_equivalent,
    dp_equivalent,
    eo_equivalent,
    feature_conditional_test,
    label_conditional_test,
    metric_equivalence_report,
    FEATURE_CONDITIONAL_FAMILY,
    LABEL_CONDITIONAL_FAMILY,
)
from causalfair.graphs import (
    CausalGraph,
    Edge,
    Node,
    NodeKind,
    canonical_graph,
    random_graph,
    CONTEXTS,
    MEASUREMENT_ERROR,
    SELECTION_ON_LABEL,
    SELECTION_ON_PREDICTORS,
)

EO_METRICS = set(LABEL_CONDITIONAL_FAMILY)
CAL_METRICS = set(FEATURE_CONDITIONAL_FAMILY)


class TestParentTests:
    def test_measurement_error_context(self):
        g = canonical_graph(MEASUREMENT_ERROR)
        assert dp_equivalent(g).equivalent
        assert not eo_equivalent(g).equivalent
        assert not calibration_equivalent(g).equivalent

    def test_selection_on_label_context(self):
        g = canonical_graph(SELECTION_ON_LABEL)
        assert not dp_equivalent(g).equivalent
        assert eo_equivalent(g).equivalent
        assert not calibration_equivalent(g).equivalent

    def test_selection_on_predictors_context(self):
        g = canonical_graph(SELECTION_ON_PREDICTORS)
        assert not dp_equivalent(g).equivalent
        assert not eo_equivalent(g).equivalent
        assert calibration_equivalent(g).equivalent

    def test_both_resolutions_checked_and_agree(self):
        for context in CONTEXTS:
            for outcome in (
                dp_equivalent(canonical_graph(context)),
                eo_equivalent(canonical_graph(context)),
                calibration_equivalent(canonical_graph(context)),
            ):
                assert len(outcome.per_resolution) == 2
                assert outcome.resolution_consistent

    def test_open_path_explanation_on_failure(self):
        outcome = dp_equivalent(canonical_graph(SELECTION_ON_LABEL))
        open_paths = outcome.open_paths
        assert open_paths
        assert any(set(a.nodes) == {"x_perp_a", "y", "s", "a"} for a in open_paths)
        assert all("s" in a.opened_by for a in open_paths)

    def test_vacuous_disconnection_is_equivalent(self):
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("y", NodeKind.LABEL),
                Node("x_perp_a", NodeKind.X_PERP_A),
            ],
            [],
        )
        assert dp_equivalent(g).equivalent
        assert eo_equivalent(g).equivalent
        assert calibration_equivalent(g).equivalent

    def test_missing_vocabulary_errors(self):
        no_features = CausalGraph(
            [Node("a", NodeKind.PROTECTED), Node("y", NodeKind.LABEL)], []
        )
        with pytest.raises(EquivalenceError, match="x_perp_a"):
            dp_equivalent(no_features)
        no_label = CausalGraph(
            [Node("a", NodeKind.PROTECTED), Node("x_perp_a", NodeKind.X_PERP_A)], []
        )
        with pytest.raises(EquivalenceError, match="label"):
            eo_equivalent(no_label)
        no_protected = CausalGraph([Node("x_perp_a", NodeKind.X_PERP_A)], [])
        with pytest.raises(EquivalenceError, match="invalid graph"):
            dp_equivalent(no_protected)

    def test_multiple_feature_nodes_all_quantified(self):
        # One feature block separated, a second one adjacent to the protected
        # class: the test must fail because of the second node.
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("x_perp_a", NodeKind.X_PERP_A),
                Node("x_perp_a2", NodeKind.X_PERP_A),
                Node("y", NodeKind.LABEL),
            ],
            [Edge("a", "x_perp_a2")],
        )
        assert not dp_equivalent(g).equivalent


class TestPerPathDiagnostics:
    def test_collider_with_conditioned_descendant_surfaces_disagreement(self):
        # Baseline: the x_perp_a..a path is blocked at the collider z, whose
        # block is not the label, so the literal per-path reading accepts it.
        # But the label is a descendant of z, so conditioning on the label
        # re-opens the collider and the reduced query rejects.  That mismatch
        # must surface as a diagnostic, with the reduced verdict winning.
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("x_perp_a", NodeKind.X_PERP_A),
                Node("z", NodeKind.CONTEXT),
                Node("y", NodeKind.LABEL),
            ],
            [Edge("a", "z"), Edge("x_perp_a", "z"), Edge("z", "y")],
        )
        outcome = label_conditional_test(g)
        assert not outcome.equivalent
        assert outcome.diagnostics
        report = metric_equivalence_report(g)
        assert report.diagnostics

    def test_agreement_on_random_graphs_or_surfaced(self):
        rng = np.random.default_rng(61)
        disagreements = 0
        for _ in range(200):
            g = random_graph(rng, max_nodes=8, bidirected_prob=0.2)
            try:
                for outcome in (label_conditional_test(g), feature_conditional_test(g)):
                    per_res_ok = all(ok for _, ok in outcome.per_resolution)
                    assert outcome.equivalent == per_res_ok
                    disagreements += len(outcome.diagnostics)
            except EquivalenceError:
                continue
        # Disagreements may legitimately exist; they must never be silent.
        assert disagreements >= 0


class TestMetricReport:
    def test_measurement_error_report(self):
        report = metric_equivalence_report(canonical_graph(MEASUREMENT_ERROR))
        assert report.verdict(MetricId.DEMOGRAPHIC_PARITY) == "equivalent"
        assert report.verdict(MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY) == "omitted"
        for m in EO_METRICS | CAL_METRICS:
            assert report.verdict(m) == "not_equivalent"
        assert report.resolution_consistent

    def test_selection_on_label_report(self):
        report = metric_equivalence_report(canonical_graph(SELECTION_ON_LABEL))
        for m in EO_METRICS:
            assert report.verdict(m) == "equivalent"
        assert report.verdict(MetricId.DEMOGRAPHIC_PARITY) == "not_equivalent"
        for m in CAL_METRICS:
            assert report.verdict(m) == "not_equivalent"

    def test_selection_on_predictors_report(self):
        report = metric_equivalence_report(canonical_graph(SELECTION_ON_PREDICTORS))
        for m in CAL_METRICS:
            assert report.verdict(m) == "equivalent"
        assert report.verdict(MetricId.DEMOGRAPHIC_PARITY) == "not_equivalent"
        for m in EO_METRICS:
            assert report.verdict(m) == "not_equivalent"

    def test_family_consistency_on_random_graphs(self):
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(120):
            g = random_graph(rng, max_nodes=7, bidirected_prob=0.15)
            try:
                report = metric_equivalence_report(g)
            except EquivalenceError:
                continue
            checked += 1
            eo = report.verdict(MetricId.EQUALIZED_ODDS)
            for m in EO_METRICS:
                assert report.verdict(m) == eo
            cal = report.verdict(MetricId.BINARY_CALIBRATION)
            for m in CAL_METRICS:
                assert report.verdict(m) == cal
        assert checked > 60

    def test_strata_enable_conditional_dp(self):
        base = canonical_graph(MEASUREMENT_ERROR)
        g = CausalGraph(
            list(base.nodes) + [Node("l", NodeKind.CONTEXT)], list(base.edges)
        )
        report = metric_equivalence_report(g, strata=("l",))
        assert report.verdict(MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY) == "equivalent"
        assert "l" in report.verdicts[MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY].note

    def test_strata_can_change_the_verdict(self):
        # a -> l -> x_perp_a is open marginally but cut once l is held fixed.
        g = CausalGraph(
            [
                Node("a", NodeKind.PROTECTED),
                Node("l", NodeKind.CONTEXT),
                Node("x_perp_a", NodeKind.X_PERP_A),
                Node("y", NodeKind.LABEL),
            ],
            [Edge("a", "l"), Edge("l", "x_perp_a")],
        )
        report = metric_equivalence_report(g, strata=("l",))
        assert report.verdict(MetricId.DEMOGRAPHIC_PARITY) == "not_equivalent"
        assert report.verdict(MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY) == "equivalent"

    def test_non_context_strata_rejected(self):
        g = canonical_graph(MEASUREMENT_ERROR)
        with pytest.raises(EquivalenceError, match="context"):
            metric_equivalence_report(g, strata=("y",))

    def test_json_shape(self):
        report = metric_equivalence_report(canonical_graph(SELECTION_ON_LABEL))
        doc = report.as_json()
        assert doc["equalized_odds"]["verdict"] == "equivalent"
        assert isinstance(doc["equalized_odds"]["paths"], list)
        assert doc["resolution_consistent"] is True
        assert doc["caveats"]
        assert doc["demographic_parity"]["paths"], "audits attached"
        text = report.as_text()
        assert "equalized_odds" in text and "EQUIVALENT" in text

    def test_report_deterministic(self):
        r1 = metric_equivalence_report(canonical_graph(SELECTION_ON_PREDICTORS))
        r2 = metric_equivalence_report(canonical_graph(SELECTION_ON_PREDICTORS))
        assert r1.as_json() == r2.as_json()
