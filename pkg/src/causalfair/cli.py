"""Command-line entry points.

Subcommands: ``graph-check`` (metric-equivalence audit of a graph file),
``simulate`` (materialize target and biased source datasets), ``train``,
``evaluate`` (accuracy plus the full metric table for saved predictions), and
``experiment`` (the replicated bias-injection study).

Exit codes: 0 success, 1 runtime failure, 2 input-validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ci_oracle import OracleError
from .datagen import DataError, load_adult_csv, read_csv
from .equivalence import (
    EquivalenceError,
    MetricId,
    metric_equivalence_report,
    report_to_json_text,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    write_results,
    write_simulated_datasets,
)
from .graphs import GraphFormatError, GraphStructureError, read_graph_json, validate
from .metrics import (
    LabeledPredictions,
    MetricsError,
    full_metric_report,
    read_predictions_csv,
)
from .predictors import (
    PredictorError,
    TrainConfig,
    cf_predict,
    decide,
    load_model,
    save_model,
    train,
)

INPUT_ERRORS = (
    GraphFormatError,
    GraphStructureError,
    DataError,
    ConfigError,
    PredictorError,
    MetricsError,
    EquivalenceError,
    OracleError,
    FileNotFoundError,
    IsADirectoryError,
)

PARENT_METRICS = (
    MetricId.DEMOGRAPHIC_PARITY,
    MetricId.EQUALIZED_ODDS,
    MetricId.BINARY_CALIBRATION,
)


def _load_dataset(path: str, schema_arg: str):
    if schema_arg == "adult":
        return load_adult_csv(path)
    with open(schema_arg, "r", encoding="utf-8") as fh:
        schema = json.load(fh)
    return read_csv(path, schema)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    # flag > file > default
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "replicates", None) is not None:
        overrides["replicates"] = args.replicates
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "predictor", None):
        overrides["predictors"] = tuple(args.predictor.split(","))
    if getattr(args, "rows", None) is not None:
        if cfg.dataset.get("kind") != "synthetic":
            raise ConfigError("--rows only applies to synthetic datasets")
        cfg.dataset["rows"] = args.rows
    if overrides:
        doc = cfg.as_json()
        doc.update(overrides)
        cfg = ExperimentConfig.from_json(doc)
    return cfg


def cmd_graph_check(args) -> int:
    g = read_graph_json(Path(args.graph).read_text(encoding="utf-8"))
    report = validate(g)
    if not report.ok:
        for problem in report.problems:
            print(f"validation failure: {problem}", file=sys.stderr)
        return 2
    strata = tuple(s for s in (args.strata or "").split(",") if s)
    eq = metric_equivalence_report(g, strata=strata)
    print(eq.as_text())
    print()
    for metric in PARENT_METRICS:
        verdict = eq.verdicts[metric]
        if not verdict.paths:
            continue
        print(f"paths for {metric.value}:")
        for audit in verdict.paths:
            status = "OPEN" if audit.open else "blocked"
            detail = []
            if audit.blocking_nodes:
                detail.append("blocked at " + ",".join(audit.blocking_nodes))
            if audit.opened_by:
                detail.append("opened by " + ",".join(audit.opened_by))
            if audit.cut_by:
                detail.append("cut by " + ",".join(audit.cut_by))
            extra = f" ({'; '.join(detail)})" if detail else ""
            print(f"  [{audit.resolution}] {' - '.join(audit.nodes)}: {status}{extra}")
    if args.out:
        Path(args.out).write_text(report_to_json_text(eq), encoding="utf-8")
        print(f"\nwrote {args.out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    paths = write_simulated_datasets(cfg, cfg.out_dir)
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def cmd_train(args) -> int:
    data = _load_dataset(args.data, args.schema)
    if args.features:
        features = args.features.split(",")
    else:
        features = [c for c in data.schema if c not in ("a", "y", "y_true", "selected")]
    cfg = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        l2=args.l2,
        seed=args.seed if args.seed is not None else 0,
        loss=args.loss,
    )
    model = train(data, features, include_protected=args.include_protected, cfg=cfg)
    save_model(model, args.out)
    acc = float((decide(model.predict_scores(data)) == data["y"]).mean())
    print(f"trained on {data.n_rows} rows; training accuracy {acc:.4f}; wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    if args.predictions:
        if args.model or args.data:
            raise ConfigError("--predictions replaces --data/--schema/--model")
        predictions = read_predictions_csv(args.predictions)
        predictor = "from file"
    else:
        if not (args.data and args.schema and args.model):
            raise ConfigError("evaluate needs --data, --schema and --model, or --predictions")
        data = _load_dataset(args.data, args.schema)
        model = load_model(args.model)
        predictor = args.predictor or "naive"
        if predictor == "counterfactual":
            scores = cf_predict(model, data, args.weight_pa1)
        elif predictor in ("naive", "ftu", "target_trained"):
            scores = model.predict_scores(data)
        else:
            raise ConfigError(f"unknown predictor {predictor!r}")
        decisions = decide(scores, threshold=args.threshold)
        predictions = LabeledPredictions(
            a=data["a"], y=data["y"], d=decisions, s=scores,
            l=data[args.strata] if args.strata else None,
        )
    report = full_metric_report(predictions, bins=args.bins)
    accuracy = float((predictions.d == predictions.y).mean())
    print(f"predictor: {predictor}   accuracy: {accuracy:.4f}   rows: {predictions.n}")
    print()
    print(report.as_text())
    if args.out:
        doc = {"predictor": predictor, "accuracy": accuracy, "metrics": report.as_json()}
        Path(args.out).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"\nwrote {args.out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    result = run_experiment(cfg)
    print("=== accuracy (mean ± sd over replicates) ===")
    print(result.accuracy_table())
    print()
    print("=== fairness differences of the counterfactually fair predictor ===")
    print(result.fairness_table())
    paths = write_results(result, cfg.out_dir)
    print()
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalfair",
        description="Causal-graph audits of group-fairness metrics, bias-injection "
        "simulation, and counterfactually fair prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-check", help="metric-equivalence audit of a graph JSON file")
    p.add_argument("graph", help="path to the graph JSON document")
    p.add_argument("--strata", help="comma-separated context nodes for conditional parity")
    p.add_argument("--out", help="also write the report as JSON here")
    p.set_defaults(func=cmd_graph_check)

    p = sub.add_parser("simulate", help="write target and biased source datasets")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--out", help="output directory (default from config)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit the logistic base learner on a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True, help="schema JSON path, or 'adult'")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--features", help="comma-separated feature columns (default: all non-reserved)")
    p.add_argument("--include-protected", action="store_true")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--loss", default="cross_entropy")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a CSV with a saved model and report all metrics")
    p.add_argument("--data")
    p.add_argument("--schema", help="schema JSON path, or 'adult'")
    p.add_argument("--model")
    p.add_argument("--predictions", help="pre-computed predictions CSV with columns a,y,d,s[,l]")
    p.add_argument("--predictor", help="naive (default), ftu, counterfactual, target_trained")
    p.add_argument("--weight-pa1", type=float, default=0.5,
                   help="group-1 weight for the counterfactual mixture")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--strata", help="column to use as the stratum variable")
    p.add_argument("--out", help="write a JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run the replicated bias-injection experiment")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--predictor", help="comma-separated predictor subset")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
