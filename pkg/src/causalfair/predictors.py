"""Base logistic learner and the predictor constructions built on it.

Four kinds of predictor appear throughout the experiments:

* naive — trained on the features plus the protected class;
* ftu (fairness through unawareness) — trained on the features only;
* counterfactual — a fixed-weight mixture of the naive predictor evaluated
  with the protected class forced to 1 and to 0, weighted by the target-world
  group proportions; it never reads a row's actual protected value;
* target-trained — the naive construction fit on the untouched target copy.

Training is full-batch gradient descent on a proper scoring rule
(cross-entropy or squared error) with internal feature standardization and a
halving step search, so the recorded loss sequence is non-increasing and every
run is bit-reproducible from its seed.  Exact oracle versions of each
predictor are available for enumerable structural models.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .ci_oracle import JointTable, OracleError, joint_from_scm
from .datagen import Dataset, ScmSpec
from .graphs import NodeKind

LOSSES = ("cross_entropy", "squared_error")


class PredictorError(ValueError):
    """Bad training input or a schema mismatch at prediction time."""


@dataclass
class TrainConfig:
    learning_rate: float = 1.0
    epochs: int = 500
    l2: float = 0.0
    seed: int = 0
    loss: str = "cross_entropy"

    def __post_init__(self) -> None:
        if self.loss not in LOSSES:
            raise PredictorError(f"loss must be one of {LOSSES}")
        if self.learning_rate <= 0 or self.epochs < 1 or self.l2 < 0:
            raise PredictorError("learning_rate > 0, epochs >= 1, l2 >= 0 required")


@dataclass
class FeatureEncoder:
    """Feature map frozen at fit time: one-hot for categoricals (first level
    dropped as reference), passthrough for numeric and binary columns."""

    features: list[str]
    levels: dict[str, list[str]]  # categorical columns only

    @classmethod
    def fit(cls, data: Dataset, features: list[str]) -> "FeatureEncoder":
        levels: dict[str, list[str]] = {}
        for name in features:
            if name not in data.schema:
                raise PredictorError(f"feature column {name!r} not in dataset")
            if data.schema[name] == "categorical":
                levels[name] = sorted(set(data[name].tolist()))
        return cls(features=list(features), levels=levels)

    def column_names(self) -> list[str]:
        out = []
        for name in self.features:
            if name in self.levels:
                out.extend(f"{name}={lvl}" for lvl in self.levels[name][1:])
            else:
                out.append(name)
        return out

    def encode(self, data: Dataset) -> np.ndarray:
        blocks = []
        for name in self.features:
            if name not in data.schema:
                raise PredictorError(f"prediction input lacks column {name!r}")
            col = data[name]
            if name in self.levels:
                known = self.levels[name]
                unseen = set(col.tolist()) - set(known)
                if unseen:
                    raise PredictorError(
                        f"column {name!r} has levels unseen at fit time: {sorted(unseen)}"
                    )
                for lvl in known[1:]:
                    blocks.append((col == lvl).astype(np.float64))
            else:
                values = np.asarray(col, dtype=np.float64)
                blocks.append(values)
        matrix = np.column_stack(blocks) if blocks else np.empty((data.n_rows, 0))
        if not np.isfinite(matrix).all():
            raise PredictorError("non-finite feature values")
        return matrix

    def as_dict(self) -> dict:
        return {"features": list(self.features), "levels": {k: list(v) for k, v in self.levels.items()}}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _loss_and_grad(loss, X, y, w, b, l2):
    z = X @ w + b
    p = _sigmoid(z)
    if loss == "cross_entropy":
        value = float(np.mean(np.logaddexp(0.0, z) - y * z))
        residual = p - y
    else:  # squared_error
        value = float(np.mean((p - y) ** 2))
        residual = 2.0 * (p - y) * p * (1.0 - p)
    value += 0.5 * l2 * float(w @ w)
    grad_w = X.T @ residual / len(y) + l2 * w
    grad_b = float(residual.mean())
    return value, grad_w, grad_b


@dataclass
class Model:
    """Fitted linear model over an encoded feature space."""

    encoder: FeatureEncoder
    weights: np.ndarray
    intercept: float
    uses_protected: bool
    config: TrainConfig
    training_loss: list[float] = field(default_factory=list, repr=False)

    def predict_scores(self, data: Dataset) -> np.ndarray:
        X = self.encoder.encode(data)
        return _sigmoid(X @ self.weights + self.intercept)

    @property
    def weight_norm(self) -> float:
        return float(np.sqrt(self.weights @ self.weights))


def train(
    data: Dataset,
    features: list[str],
    include_protected: bool = False,
    cfg: TrainConfig | None = None,
) -> Model:
    """Fit the logistic base learner on ``data['y']``.

    ``features`` must not include the protected column; set
    ``include_protected`` to append it.  Gradient descent runs on
    standardized features with a halving step search (loss never increases);
    the returned weights are folded back to the raw feature scale.
    """
    cfg = cfg or TrainConfig()
    if "y" not in data.schema:
        raise PredictorError("training data needs a 'y' column")
    if not features:
        raise PredictorError("empty feature list")
    if "a" in features:
        raise PredictorError("pass include_protected=True instead of listing 'a'")
    all_features = list(features) + (["a"] if include_protected else [])
    encoder = FeatureEncoder.fit(data, all_features)
    X = encoder.encode(data)
    y = np.asarray(data["y"], dtype=np.float64)
    if y.min() == y.max():
        raise PredictorError("degenerate training data: only one label present")

    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    Xs = (X - mu) / sd

    rng = np.random.default_rng(cfg.seed)
    w = rng.normal(0.0, 0.01, Xs.shape[1])
    b = 0.0
    lr = cfg.learning_rate
    losses = []
    value, grad_w, grad_b = _loss_and_grad(cfg.loss, Xs, y, w, b, cfg.l2)
    for _ in range(cfg.epochs):
        losses.append(value)
        for _ in range(40):
            w_new = w - lr * grad_w
            b_new = b - lr * grad_b
            value_new, grad_w_new, grad_b_new = _loss_and_grad(
                cfg.loss, Xs, y, w_new, b_new, cfg.l2
            )
            if value_new <= value + 1e-12:
                break
            lr *= 0.5
        else:
            break  # step size exhausted; already at numerical optimum
        w, b = w_new, b_new
        value, grad_w, grad_b = value_new, grad_w_new, grad_b_new
    losses.append(value)

    weights = w / sd
    intercept = float(b - (w * mu / sd).sum())
    return Model(
        encoder=encoder,
        weights=weights,
        intercept=intercept,
        uses_protected=include_protected,
        config=cfg,
        training_loss=losses,
    )


def decide(scores, threshold: float = 0.5) -> np.ndarray:
    """Binary decision; a score exactly at the threshold classifies positive."""
    return (np.asarray(scores) >= threshold).astype(np.int8)


def cf_predict(naive: Model, data: Dataset, weight_pa1: float) -> np.ndarray:
    """Mixture of the naive predictor under both protected values.

    Returns ``weight_pa1 * f(x, a=1) + (1 - weight_pa1) * f(x, a=0)``; the
    actual protected column of ``data``, if present, is never read.
    """
    if not naive.uses_protected:
        raise PredictorError("counterfactual mixture needs a protected-aware model")
    if not 0.0 <= weight_pa1 <= 1.0:
        raise PredictorError("weight_pa1 must lie in [0, 1]")
    ones = np.ones(data.n_rows, dtype=np.int8)
    s1 = naive.predict_scores(data.with_column("a", "binary", ones))
    s0 = naive.predict_scores(data.with_column("a", "binary", 1 - ones))
    return weight_pa1 * s1 + (1.0 - weight_pa1) * s0


@dataclass
class CounterfactualPredictor:
    """Thin wrapper so the mixture can stand wherever a model is expected."""

    naive: Model
    weight_pa1: float

    def predict_scores(self, data: Dataset) -> np.ndarray:
        return cf_predict(self.naive, data, self.weight_pa1)


# -- model persistence -------------------------------------------------------------


def save_model(model: Model, path) -> None:
    doc = {
        "encoder": model.encoder.as_dict(),
        "weights": [float(v) for v in model.weights],
        "intercept": model.intercept,
        "uses_protected": model.uses_protected,
        "config": asdict(model.config),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        encoder = FeatureEncoder(
            features=list(doc["encoder"]["features"]),
            levels={k: list(v) for k, v in doc["encoder"]["levels"].items()},
        )
        return Model(
            encoder=encoder,
            weights=np.array(doc["weights"], dtype=np.float64),
            intercept=float(doc["intercept"]),
            uses_protected=bool(doc["uses_protected"]),
            config=TrainConfig(**doc["config"]),
        )
    except KeyError as exc:
        raise PredictorError(f"model file missing field {exc.args[0]!r}") from None


# -- exact oracle predictors --------------------------------------------------------

ORACLE_KINDS = ("naive", "ftu", "counterfactual", "cf_risk_min", "target")


@dataclass
class OraclePredictor:
    """Score function computed exactly from an enumerable structural model.

    kinds: ``naive`` = P(y=1 | features, a) in the selected source world;
    ``ftu`` marginalizes the protected class out of the naive oracle;
    ``counterfactual`` is the mixture of the naive oracle over both protected
    values, weighted by the unselected-world protected marginal;
    ``cf_risk_min`` = P(y=1 | A-unaffected features) in the source world, the
    risk minimizer among predictors ignoring everything the protected class
    touches; ``target`` = P(y=1 | features, a) in the unselected world.
    """

    kind: str
    inputs: tuple[str, ...]
    table: dict[tuple[int, ...], float]

    def score(self, assignment: dict) -> float:
        key = tuple(int(assignment[name]) for name in self.inputs)
        try:
            return self.table[key]
        except KeyError:
            raise OracleError(
                f"assignment {dict(zip(self.inputs, key))} has zero probability "
                "in the oracle's world"
            ) from None

    def scores(self, data: Dataset) -> np.ndarray:
        cols = [np.asarray(data[name]) for name in self.inputs]
        out = np.empty(data.n_rows, dtype=np.float64)
        for i in range(data.n_rows):
            key = tuple(int(c[i]) for c in cols)
            if key not in self.table:
                raise OracleError(f"assignment {key} over {self.inputs} has zero probability")
            out[i] = self.table[key]
        return out


def _conditional_table(
    joint: JointTable, label: str, given: tuple[str, ...]
) -> dict[tuple[int, ...], Fraction]:
    num = joint.marginal((label,) + given)
    den = joint.marginal(given)
    out = {}
    for key, mass in den.items():
        if mass == 0:
            continue
        out[key] = num.get((1,) + key, Fraction(0)) / mass
    return out


def oracle_predictor(
    spec: ScmSpec, kind: str, weight_pa1: float | Fraction | None = None
) -> OraclePredictor:
    """Exact predictor of the requested kind for a discrete structural model.

    Scores are computed in rational arithmetic, so identities that hold for
    the model (for instance counterfactual invariance under a purely spurious
    association) hold exactly, not approximately.
    """
    if kind not in ORACLE_KINDS:
        raise OracleError(f"unknown oracle kind {kind!r}; expected one of {ORACLE_KINDS}")
    g = spec.graph
    labels = g.nodes_of_kind(NodeKind.LABEL)
    if not labels:
        raise OracleError("oracle predictors need a label node")
    label = labels[0]
    protected = spec.protected
    source = joint_from_scm(spec, selected=True)
    features = tuple(n for n in source.variables if n not in (label, protected))

    if kind == "target":
        joint = joint_from_scm(spec, selected=False)
        inputs = features + (protected,)
        table = _conditional_table(joint, label, inputs)
    elif kind == "naive":
        inputs = features + (protected,)
        table = _conditional_table(source, label, inputs)
    elif kind == "ftu":
        inputs = features
        table = _conditional_table(source, label, inputs)
    elif kind == "cf_risk_min":
        inputs = tuple(
            n for n in features if g.kind_of(n) is NodeKind.X_PERP_A
        )
        if not inputs:
            raise OracleError("cf_risk_min needs at least one x_perp_a node")
        table = _conditional_table(source, label, inputs)
    else:  # counterfactual
        naive = _conditional_table(source, label, features + (protected,))
        if weight_pa1 is None:
            target = joint_from_scm(spec, selected=False)
            weight = target.marginal((protected,)).get((1,), Fraction(0))
        else:
            weight = Fraction(weight_pa1)
        inputs = features
        table = {}
        for key in product((0, 1), repeat=len(features)):
            f1 = naive.get(key + (1,))
            f0 = naive.get(key + (0,))
            if f1 is None or f0 is None:
                continue
            table[key] = weight * f1 + (1 - weight) * f0

    return OraclePredictor(
        kind=kind, inputs=inputs, table={k: float(v) for k, v in table.items()}
    )
