"""Causal-context fairness toolkit.

Given a declared causal graph of a data-generating process, decide which
group-fairness metrics are equivalent to counterfactual fairness, measure
those metrics on tabular predictions, build counterfactually fair predictors,
and stress-test them with seeded bias-injection experiments.
"""

from .graphs import (
    CausalGraph,
    Edge,
    GraphFormatError,
    GraphStructureError,
    Node,
    NodeKind,
    ValidationReport,
    canonical_graph,
    random_graph,
    read_graph_json,
    resolutions,
    resolve_bidirected,
    validate,
    write_graph_json,
    CONTEXTS,
    MEASUREMENT_ERROR,
    SELECTION_ON_LABEL,
    SELECTION_ON_PREDICTORS,
)
from .dsep import Path, PathStatus, d_separated, enumerate_paths, path_status
from .equivalence import (
    EquivalenceError,
    MetricEquivalenceReport,
    MetricId,
    calibration_equivalent,
    dp_equivalent,
    eo_equivalent,
    metric_equivalence_report,
)
from .metrics import (
    LabeledPredictions,
    MetricReport,
    MetricsError,
    MetricValue,
    binary_metric_report,
    conditional_dp,
    full_metric_report,
    score_metric_report,
)
from .datagen import (
    BiasResult,
    BiasSpec,
    Cpt,
    DataError,
    Dataset,
    ScmSpec,
    adult_schema,
    generate_scm,
    inject_bias,
    is_purely_spurious,
    load_adult_csv,
    random_cpts,
    read_csv,
    simulate_protected,
    synthetic_adult,
    write_csv,
)
from .ci_oracle import (
    CrosscheckReport,
    JointTable,
    OracleError,
    conditional_independent,
    dependence_residual,
    faithfulness_crosscheck,
    joint_from_scm,
)
from .predictors import (
    CounterfactualPredictor,
    FeatureEncoder,
    Model,
    OraclePredictor,
    PredictorError,
    TrainConfig,
    cf_predict,
    decide,
    load_model,
    oracle_predictor,
    save_model,
    train,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    run_experiment,
    write_results,
)
from . import scms

__version__ = "0.1.0"
