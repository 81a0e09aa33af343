"""Replicated bias-injection experiments: one target world, three biased
source worlds, four predictors, two result tables.

Every replicate derives its seeds from the master seed, so a config file and
seed reproduce the output files byte for byte.  The fairness table always
marks which metric the graph of each context predicts should vanish for a
counterfactually fair predictor, so the correspondence claim is checked
against the run itself.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .datagen import (
    BiasSpec,
    Dataset,
    RESERVED_BINARY,
    inject_bias,
    load_adult_csv,
    simulate_protected,
    synthetic_adult,
    write_csv,
)
from .equivalence import MetricId, metric_equivalence_report
from .graphs import CONTEXTS, canonical_graph
from .metrics import LabeledPredictions, binary_metric_report
from .predictors import Model, TrainConfig, cf_predict, decide, train

PREDICTOR_NAMES = ("naive", "ftu", "counterfactual", "target_trained")
FAIRNESS_METRICS = (
    MetricId.DEMOGRAPHIC_PARITY,
    MetricId.EQUALIZED_ODDS,
    MetricId.BINARY_CALIBRATION,
)


class ConfigError(ValueError):
    """Malformed experiment configuration."""


def default_context_params() -> dict:
    return {
        "measurement_error": {"p": 0.5, "flip_direction": "one_to_zero"},
        "selection_on_label": {"p": 0.5, "target_label": 0},
        "selection_on_predictors": {"p": 0.8, "column": "age", "op": "le", "value": 30},
    }


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "synthetic", "rows": 30_000})
    protected: dict = field(
        default_factory=lambda: {
            "feature": "race",
            "level": "other",
            "p_affected": 0.8,
            "p_protected": 0.5,
        }
    )
    contexts: dict = field(default_factory=default_context_params)
    train: dict = field(default_factory=dict)
    predictors: tuple[str, ...] = PREDICTOR_NAMES
    replicates: int = 10
    seed: int = 7
    out_dir: str = "results"

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ConfigError("replicate count must be >= 1")
        kind = self.dataset.get("kind")
        if kind not in ("synthetic", "csv"):
            raise ConfigError("dataset.kind must be 'synthetic' or 'csv'")
        if kind == "csv" and "path" not in self.dataset:
            raise ConfigError("dataset.kind=csv requires dataset.path")
        unknown = set(self.contexts) - set(CONTEXTS)
        if unknown:
            raise ConfigError(f"unknown contexts: {sorted(unknown)}")
        bad = [p for p in self.predictors if p not in PREDICTOR_NAMES]
        if bad:
            raise ConfigError(f"unknown predictors: {bad}; expected {PREDICTOR_NAMES}")
        for key in ("p_affected", "p_protected"):
            value = self.protected.get(key, 0.5)
            if not 0.0 <= float(value) <= 1.0:
                raise ConfigError(f"protected.{key} must lie in [0, 1]")
        for name, params in self.contexts.items():
            p = params.get("p", 0.5)
            if not 0.0 <= float(p) <= 1.0:
                raise ConfigError(f"contexts.{name}.p must lie in [0, 1]")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = {
            "dataset", "protected", "contexts", "train",
            "predictors", "replicates", "seed", "out_dir",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(doc)
        if "predictors" in kwargs:
            kwargs["predictors"] = tuple(kwargs["predictors"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top-level value must be an object")
        return cls.from_json(doc)

    def as_json(self) -> dict:
        doc = asdict(self)
        doc["predictors"] = list(self.predictors)
        return doc

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(seed=seed, **self.train)

    def bias_spec(self, context: str, seed: int) -> BiasSpec:
        return BiasSpec(kind=context, seed=seed, **self.contexts[context])


def build_target(cfg: ExperimentConfig, seed: int) -> Dataset:
    """One draw of the clean target world: base table plus simulated
    protected class."""
    if cfg.dataset["kind"] == "synthetic":
        base = synthetic_adult(int(cfg.dataset.get("rows", 30_000)), seed=seed)
    else:
        base = load_adult_csv(cfg.dataset["path"])
    return simulate_protected(
        base,
        feature=cfg.protected.get("feature", "race"),
        level=cfg.protected.get("level", "other"),
        p_affected=float(cfg.protected.get("p_affected", 0.8)),
        p_protected=float(cfg.protected.get("p_protected", 0.5)),
        seed=seed + 1,
    )


def feature_columns(data: Dataset) -> list[str]:
    return [c for c in data.schema if c not in RESERVED_BINARY]


def _accuracy(scores: np.ndarray, y: np.ndarray) -> float:
    return float((decide(scores) == y).mean())


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    contexts: dict  # context -> {"accuracy": ..., "fairness": ..., "predicted_vanishing": str}

    def as_json(self) -> dict:
        return {"config": self.config.as_json(), "contexts": self.contexts}

    # -- renderers ---------------------------------------------------------

    def accuracy_table(self) -> str:
        preds = list(self.config.predictors)
        src_preds = [p for p in preds if p != "target_trained"]
        header = (
            f"{'context':<26}"
            + "".join(f"  src {p[:9]:<9}" for p in src_preds)
            + "".join(f"  tgt {p[:9]:<9}" for p in preds)
        )
        lines = [header]
        for context, block in self.contexts.items():
            acc = block["accuracy"]
            cells = []
            for p in src_preds:
                cells.append(f"  {acc['source'][p]['mean']:.4f}±{acc['source'][p]['sd']:.4f}")
            for p in preds:
                cells.append(f"  {acc['target'][p]['mean']:.4f}±{acc['target'][p]['sd']:.4f}")
            lines.append(f"{context:<26}" + "".join(f"{c:<14}" for c in cells))
        return "\n".join(lines)

    def fairness_table(self) -> str:
        names = [m.value for m in FAIRNESS_METRICS]
        header = f"{'context':<26}" + "".join(f"  {n[:20]:<22}" for n in names)
        lines = [header]
        for context, block in self.contexts.items():
            cells = []
            for m in FAIRNESS_METRICS:
                entry = block["fairness"][m.value]
                mark = "*" if m.value == block["predicted_vanishing"] else " "
                cells.append(f"  {entry['mean']:+.4f}±{entry['sd']:.4f}{mark}")
            lines.append(f"{context:<26}" + "".join(f"{c:<24}" for c in cells))
        lines.append("")
        lines.append("* metric the causal context predicts a counterfactually fair")
        lines.append("  predictor drives to zero (computed from the context's graph)")
        return "\n".join(lines)


def _mean_sd(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return {"mean": float(arr.mean()), "sd": sd, "values": [float(v) for v in arr]}


def predicted_vanishing_metric(context: str) -> str:
    """Parent metric the canonical graph of this context certifies."""
    report = metric_equivalence_report(canonical_graph(context))
    for metric in FAIRNESS_METRICS:
        if report.verdict(metric) == "equivalent":
            return metric.value
    return "none"


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    contexts = [c for c in CONTEXTS if c in cfg.contexts]
    acc_values: dict = {
        c: {"source": {p: [] for p in cfg.predictors if p != "target_trained"},
            "target": {p: [] for p in cfg.predictors}}
        for c in contexts
    }
    fair_values: dict = {
        c: {m.value: [] for m in FAIRNESS_METRICS} | {"components": []}
        for c in contexts
    }

    for replicate in range(cfg.replicates):
        seed = cfg.seed + 1000 * replicate
        target = build_target(cfg, seed)
        features = feature_columns(target)
        tcfg = cfg.train_config(seed)
        target_model: Model | None = None
        if "target_trained" in cfg.predictors:
            target_model = train(target, features, include_protected=True, cfg=tcfg)

        for offset, context in enumerate(contexts):
            source = inject_bias(target, cfg.bias_spec(context, seed + 2 + offset)).source
            naive = train(source, features, include_protected=True, cfg=tcfg)
            ftu = None
            if "ftu" in cfg.predictors:
                ftu = train(source, features, include_protected=False, cfg=tcfg)
            weight_pa1 = float(cfg.protected.get("p_protected", 0.5))

            scores = {}
            for split, data in (("source", source), ("target", target)):
                scores[split] = {}
                if "naive" in cfg.predictors:
                    scores[split]["naive"] = naive.predict_scores(data)
                if ftu is not None:
                    scores[split]["ftu"] = ftu.predict_scores(data)
                if "counterfactual" in cfg.predictors:
                    scores[split]["counterfactual"] = cf_predict(naive, data, weight_pa1)
            if target_model is not None:
                scores["target"]["target_trained"] = target_model.predict_scores(target)

            for split, data in (("source", source), ("target", target)):
                for name, s in scores[split].items():
                    acc_values[context][split][name].append(_accuracy(s, data["y"]))

            cf_source = cf_predict(naive, source, weight_pa1)
            report = binary_metric_report(
                LabeledPredictions(
                    a=source["a"], y=source["y"], d=decide(cf_source), s=cf_source
                )
            )
            for metric in FAIRNESS_METRICS:
                fair_values[context][metric.value].append(report[metric].aggregate)
            fair_values[context]["components"].append(
                {m.value: report[m].as_dict() for m in FAIRNESS_METRICS}
            )

    blocks = {}
    for context in contexts:
        blocks[context] = {
            "accuracy": {
                split: {p: _mean_sd(vals) for p, vals in acc_values[context][split].items()}
                for split in ("source", "target")
            },
            "fairness": {
                m.value: _mean_sd(fair_values[context][m.value]) for m in FAIRNESS_METRICS
            },
            "fairness_components": fair_values[context]["components"],
            "predicted_vanishing": predicted_vanishing_metric(context),
        }
    return ExperimentResult(config=cfg, contexts=blocks)


# -- file outputs ------------------------------------------------------------------


def write_results(result: ExperimentResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "accuracy": out / "accuracy.csv",
        "fairness": out / "fairness.csv",
        "report": out / "report.json",
    }
    with open(paths["accuracy"], "w", encoding="utf-8") as fh:
        fh.write("context,split,predictor,mean,sd\n")
        for context, block in result.contexts.items():
            for split in ("source", "target"):
                for predictor, entry in block["accuracy"][split].items():
                    fh.write(
                        f"{context},{split},{predictor},{entry['mean']!r},{entry['sd']!r}\n"
                    )
    with open(paths["fairness"], "w", encoding="utf-8") as fh:
        fh.write("context,metric,mean,sd,predicted_vanishing\n")
        for context, block in result.contexts.items():
            for metric in FAIRNESS_METRICS:
                entry = block["fairness"][metric.value]
                flag = int(metric.value == block["predicted_vanishing"])
                fh.write(
                    f"{context},{metric.value},{entry['mean']!r},{entry['sd']!r},{flag}\n"
                )
    with open(paths["report"], "w", encoding="utf-8") as fh:
        json.dump(result.as_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def write_simulated_datasets(cfg: ExperimentConfig, out_dir) -> dict[str, Path]:
    """Materialize one replicate's target and per-context source tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = build_target(cfg, cfg.seed)
    paths: dict[str, Path] = {}

    def dump(name: str, data: Dataset) -> None:
        csv_path = out / f"{name}.csv"
        write_csv(data, csv_path)
        with open(out / f"{name}.schema.json", "w", encoding="utf-8") as fh:
            json.dump(data.schema, fh, indent=2)
            fh.write("\n")
        paths[name] = csv_path

    dump("target", target)
    for offset, context in enumerate(c for c in CONTEXTS if c in cfg.contexts):
        result = inject_bias(target, cfg.bias_spec(context, cfg.seed + 2 + offset))
        dump(f"source_{context}", result.source)
    return paths
