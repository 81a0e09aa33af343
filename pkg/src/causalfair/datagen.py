"""Tabular datasets, bias injection, and discrete structural-model sampling.

Everything here is seed-deterministic: the same spec and seed reproduce the
same bytes.  Bias injection always returns the untouched pre-bias copy next to
the biased one, so downstream code can compare a "source" (training) world
against the clean "target" world.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .graphs import CausalGraph, NodeKind, validate

COLUMN_TYPES = ("categorical", "numeric", "binary")
# Columns with fixed meaning when present; all are binary.
RESERVED_BINARY = ("a", "y", "y_true", "selected")


class DataError(ValueError):
    """Malformed dataset, spec, or CSV input."""


def _as_column(values, ctype: str) -> np.ndarray:
    if ctype == "numeric":
        arr = np.asarray(values, dtype=np.float64)
    elif ctype == "binary":
        arr = np.asarray(values)
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise DataError("binary column contains values outside {0, 1}")
        arr = arr.astype(np.int8)
    elif ctype == "categorical":
        arr = np.asarray([str(v) for v in values], dtype=object)
    else:
        raise DataError(f"unknown column type {ctype!r}; expected one of {COLUMN_TYPES}")
    return arr


@dataclass
class Dataset:
    """Column-oriented table with a declared schema.

    ``schema`` maps column name to one of ``categorical | numeric | binary``.
    Reserved names (``a``, ``y``, ``y_true``, ``selected``) must be binary.
    """

    schema: dict[str, str]
    columns: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if set(self.schema) != set(self.columns):
            raise DataError(
                f"schema/columns mismatch: {sorted(set(self.schema) ^ set(self.columns))}"
            )
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise DataError(f"ragged columns: lengths {sorted(lengths)}")
        for name in RESERVED_BINARY:
            if name in self.schema and self.schema[name] != "binary":
                raise DataError(f"reserved column {name!r} must be binary")
        self.columns = {
            name: _as_column(self.columns[name], ctype)
            for name, ctype in self.schema.items()
        }

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def copy(self) -> "Dataset":
        return Dataset(dict(self.schema), {k: v.copy() for k, v in self.columns.items()})

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(dict(self.schema), {k: v[mask] for k, v in self.columns.items()})

    def with_column(self, name: str, ctype: str, values) -> "Dataset":
        schema = dict(self.schema)
        schema[name] = ctype
        cols = {k: v.copy() for k, v in self.columns.items()}
        cols[name] = _as_column(values, ctype)
        return Dataset(schema, cols)

    def drop_columns(self, names) -> "Dataset":
        names = set(names)
        return Dataset(
            {k: t for k, t in self.schema.items() if k not in names},
            {k: v for k, v in self.columns.items() if k not in names},
        )

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"dataset has no column {name!r}") from None

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.schema):
            h.update(name.encode())
            h.update(self.schema[name].encode())
            if self.schema[name] == "categorical":
                h.update("\x1f".join(self.columns[name]).encode())
            else:
                h.update(np.ascontiguousarray(self.columns[name]).tobytes())
        return h.hexdigest()


# -- protected-class simulation -------------------------------------------------


def simulate_protected(
    data: Dataset,
    feature: str,
    level: str,
    p_affected: float = 0.8,
    p_protected: float = 0.5,
    seed: int = 0,
) -> Dataset:
    """Attach a simulated binary protected class and its effect on one feature.

    Rows get ``a = 1`` i.i.d. with probability ``p_protected``; rows with
    ``a = 1`` have ``feature`` overwritten to ``level`` with probability
    ``p_affected``.
    """
    if feature not in data.schema:
        raise DataError(f"designated column {feature!r} not in dataset")
    if data.schema[feature] != "categorical":
        raise DataError(f"designated column {feature!r} must be categorical")
    if not 0.0 <= p_affected <= 1.0 or not 0.0 <= p_protected <= 1.0:
        raise DataError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    a = (rng.random(data.n_rows) < p_protected).astype(np.int8)
    overwrite = (rng.random(data.n_rows) < p_affected) & (a == 1)
    column = data[feature].copy()
    column[overwrite] = level
    out = data.with_column(feature, "categorical", column)
    return out.with_column("a", "binary", a)


# -- bias injection --------------------------------------------------------------

FLIP_DIRECTIONS = ("one_to_zero", "zero_to_one")
_PREDICATE_OPS = {
    "eq": lambda col, v: col == v,
    "ne": lambda col, v: col != v,
    "gt": lambda col, v: col > v,
    "ge": lambda col, v: col >= v,
    "lt": lambda col, v: col < v,
    "le": lambda col, v: col <= v,
}


@dataclass
class BiasSpec:
    """One bias mechanism applied to rows with ``a = 1``.

    ``measurement_error`` flips the observed label with probability ``p`` in
    ``flip_direction``; ``selection_on_label`` drops rows whose label equals
    ``target_label`` with probability ``p``; ``selection_on_predictors`` drops
    rows matching the ``column``/``op``/``value`` predicate with probability
    ``p``.
    """

    kind: str
    p: float
    flip_direction: str = "one_to_zero"
    target_label: int = 0
    column: str | None = None
    op: str | None = None
    value: object = None
    seed: int = 0

    def __post_init__(self) -> None:
        from .graphs import CONTEXTS

        if self.kind not in CONTEXTS:
            raise DataError(f"unknown bias kind {self.kind!r}; expected one of {CONTEXTS}")
        if not 0.0 <= self.p <= 1.0:
            raise DataError("bias probability must lie in [0, 1]")
        if self.kind == "measurement_error" and self.flip_direction not in FLIP_DIRECTIONS:
            raise DataError(f"flip_direction must be one of {FLIP_DIRECTIONS}")
        if self.kind == "selection_on_label" and self.target_label not in (0, 1):
            raise DataError("target_label must be 0 or 1")
        if self.kind == "selection_on_predictors":
            if not self.column or self.op not in _PREDICATE_OPS or self.value is None:
                raise DataError(
                    "selection_on_predictors needs column, op "
                    f"(one of {sorted(_PREDICATE_OPS)}), and value"
                )

    @classmethod
    def from_json(cls, doc: dict) -> "BiasSpec":
        known = {"kind", "p", "flip_direction", "target_label", "column", "op", "value", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise DataError(f"unknown BiasSpec fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class BiasResult:
    """``source`` is biased, ``target`` is the untouched copy.  For selection
    mechanisms ``annotated`` is the pre-drop table with a ``selected`` flag."""

    source: Dataset
    target: Dataset
    annotated: Dataset | None = None


def inject_bias(data: Dataset, spec: BiasSpec) -> BiasResult:
    for required in ("a", "y"):
        if required not in data.schema:
            raise DataError(f"inject_bias needs column {required!r}")
    rng = np.random.default_rng(spec.seed)
    target = data.copy()
    a, y = data["a"], data["y"]
    hit = rng.random(data.n_rows) < spec.p

    if spec.kind == "measurement_error":
        from_value = 1 if spec.flip_direction == "one_to_zero" else 0
        flip = (a == 1) & (y == from_value) & hit
        observed = y.copy()
        observed[flip] = 1 - from_value
        source = data.with_column("y_true", "binary", y.copy())
        source = source.with_column("y", "binary", observed)
        return BiasResult(source=source, target=target)

    if spec.kind == "selection_on_label":
        drop = (a == 1) & (y == spec.target_label) & hit
    else:
        column = data[spec.column]
        try:
            matches = _PREDICATE_OPS[spec.op](column, spec.value)
        except TypeError as exc:
            raise DataError(f"predicate {spec.op} failed on column {spec.column!r}: {exc}")
        drop = (a == 1) & matches & hit

    selected = (~drop).astype(np.int8)
    annotated = data.with_column("selected", "binary", selected)
    source = data.subset(~drop)
    for group in (0, 1):
        if not (source["a"] == group).any():
            raise DataError(f"selection removed every row with a={group}")
    for label in (0, 1):
        if not (source["y"] == label).any():
            raise DataError(f"selection removed every row with y={label}")
    return BiasResult(source=source, target=target, annotated=annotated)


# -- discrete structural causal models -------------------------------------------


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table of one binary node.

    ``table`` maps each assignment of ``parents`` (tuple of 0/1 in the order
    given) to ``(p0, p1)``.
    """

    parents: tuple[str, ...]
    table: dict[tuple[int, ...], tuple[float, float]]

    @classmethod
    def root(cls, p1: float) -> "Cpt":
        return cls(parents=(), table={(): (1.0 - p1, p1)})

    @classmethod
    def from_p1(cls, parents: tuple[str, ...], p1_by_assignment: dict[tuple[int, ...], float]) -> "Cpt":
        return cls(
            parents=parents,
            table={k: (1.0 - p, p) for k, p in p1_by_assignment.items()},
        )

    def p1(self, assignment: tuple[int, ...]) -> float:
        return self.table[assignment][1]


@dataclass
class ScmSpec:
    """Fully directed binary SCM: a valid graph plus one CPT per node."""

    graph: CausalGraph
    cpts: dict[str, Cpt]
    n: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.graph.is_fully_directed:
            raise DataError("SCM graph must be fully directed (resolve bidirected edges)")
        report = validate(self.graph)
        if not report.ok:
            raise DataError("invalid SCM graph: " + "; ".join(report.problems))
        names = set(self.graph.node_names)
        if set(self.cpts) != names:
            raise DataError(f"CPTs must cover every node; mismatch {sorted(names ^ set(self.cpts))}")
        for name, cpt in self.cpts.items():
            if set(cpt.parents) != set(self.graph.parents(name)):
                raise DataError(
                    f"CPT parents for {name!r} do not match graph parents "
                    f"{sorted(self.graph.parents(name))}"
                )
            expected = 2 ** len(cpt.parents)
            if len(cpt.table) != expected:
                raise DataError(f"CPT for {name!r} must list all {expected} parent rows")
            for key, row in cpt.table.items():
                if len(key) != len(cpt.parents):
                    raise DataError(f"CPT row key {key} arity mismatch for {name!r}")
                if min(row) < 0 or abs(sum(row) - 1.0) > 1e-12:
                    raise DataError(f"CPT row {key} for {name!r} must be a distribution")
        if self.n <= 0:
            raise DataError("sample size must be positive")

    def topological_order(self) -> list[str]:
        order: list[str] = []
        remaining = {n: set(self.graph.parents(n)) for n in self.graph.node_names}
        while remaining:
            ready = sorted(n for n, deps in remaining.items() if not deps)
            if not ready:
                raise DataError("cycle in SCM graph")
            for n in ready:
                order.append(n)
                del remaining[n]
            for deps in remaining.values():
                deps.difference_update(ready)
        return order

    @property
    def protected(self) -> str:
        return self.graph.nodes_of_kind(NodeKind.PROTECTED)[0]


def is_purely_spurious(spec: ScmSpec) -> bool:
    """True when the label is shielded from the protected class: no direct
    edge between them in either direction, and every label parent is an
    A-unaffected feature node."""
    labels = spec.graph.nodes_of_kind(NodeKind.LABEL)
    if not labels:
        return False
    label = labels[0]
    a = spec.protected
    if a in spec.graph.parents(label) or label in spec.graph.parents(a):
        return False
    return all(
        spec.graph.kind_of(p) is NodeKind.X_PERP_A for p in spec.graph.parents(label)
    )


def generate_scm(spec: ScmSpec) -> Dataset:
    """Ancestral sampling with counterfactual twins.

    Every node gets a column under its own name.  Every non-protected node
    also gets ``<name>_cf``: its value when the protected class is flipped and
    each node reuses the same exogenous uniform draw (shared-noise abduction).
    """
    order = spec.topological_order()
    rng = np.random.default_rng(spec.seed)
    u = {name: rng.random(spec.n) for name in order}
    a_name = spec.protected

    factual: dict[str, np.ndarray] = {}
    twin: dict[str, np.ndarray] = {}
    for name in order:
        cpt = spec.cpts[name]
        p1 = _cpt_lookup(cpt, factual, spec.n)
        factual[name] = (u[name] < p1).astype(np.int8)
        if name == a_name:
            twin[name] = 1 - factual[name]
        else:
            p1_cf = _cpt_lookup(cpt, twin, spec.n)
            twin[name] = (u[name] < p1_cf).astype(np.int8)

    schema: dict[str, str] = {}
    columns: dict[str, np.ndarray] = {}
    for name in order:
        schema[name] = "binary"
        columns[name] = factual[name]
    for name in order:
        if name != a_name:
            schema[name + "_cf"] = "binary"
            columns[name + "_cf"] = twin[name]
    return Dataset(schema, columns)


def _cpt_lookup(cpt: Cpt, values: dict[str, np.ndarray], n: int) -> np.ndarray:
    if not cpt.parents:
        return np.full(n, cpt.p1(()))
    out = np.empty(n, dtype=np.float64)
    parent_cols = [values[p] for p in cpt.parents]
    for key, (_, p1) in cpt.table.items():
        mask = np.ones(n, dtype=bool)
        for col, bit in zip(parent_cols, key):
            mask &= col == bit
        out[mask] = p1
    return out


def random_cpts(g: CausalGraph, rng, low: float = 0.05, high: float = 0.95) -> dict[str, Cpt]:
    """Uniform random CPTs, bounded away from 0 and 1 so near-degenerate rows
    and faithfulness violations stay rare."""
    cpts: dict[str, Cpt] = {}
    for name in g.node_names:
        parents = tuple(sorted(g.parents(name)))
        table = {}
        for i in range(2 ** len(parents)):
            key = tuple((i >> b) & 1 for b in range(len(parents)))
            table[key] = float(rng.uniform(low, high))
        cpts[name] = Cpt.from_p1(parents, table)
    return cpts


# -- CSV with declared schema -----------------------------------------------------


def write_csv(data: Dataset, path) -> None:
    names = list(data.schema)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        cols = [data.columns[n] for n in names]
        types = [data.schema[n] for n in names]
        for i in range(data.n_rows):
            writer.writerow(
                [
                    cols[j][i] if types[j] == "categorical" else
                    (int(cols[j][i]) if types[j] == "binary" else repr(float(cols[j][i])))
                    for j in range(len(names))
                ]
            )


def read_csv(path, schema: dict[str, str]) -> Dataset:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return _read_csv_stream(fh, schema, str(path))


def _read_csv_stream(fh, schema: dict[str, str], where: str) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{where}: empty file") from None
    missing = [c for c in schema if c not in header]
    extra = [c for c in header if c not in schema]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing columns {missing}")
        if extra:
            parts.append(f"unexpected columns {extra}")
        raise DataError(f"{where}: schema mismatch: " + "; ".join(parts))
    index = {c: header.index(c) for c in schema}
    raw: dict[str, list] = {c: [] for c in schema}
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise DataError(f"{where}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for c in schema:
            raw[c].append(row[index[c]])
    columns: dict[str, np.ndarray] = {}
    for c, ctype in schema.items():
        try:
            if ctype == "numeric":
                columns[c] = np.array([float(v) for v in raw[c]], dtype=np.float64)
            elif ctype == "binary":
                vals = [int(v) for v in raw[c]]
                if any(v not in (0, 1) for v in vals):
                    raise ValueError("values outside {0, 1}")
                columns[c] = np.array(vals, dtype=np.int8)
            else:
                columns[c] = np.array(raw[c], dtype=object)
        except ValueError as exc:
            raise DataError(f"{where}: column {c!r}: {exc}") from None
    return Dataset(dict(schema), columns)


def adult_schema() -> dict[str, str]:
    """Schema of the classic census-income table (14 attributes + income)."""
    text = resources.files("causalfair").joinpath("adult_schema.json").read_text()
    return json.loads(text)


def load_adult_csv(path) -> Dataset:
    """Read a census-income CSV and binarize the income column into ``y``
    (1 when income is '>50K', trailing period tolerated)."""
    data = read_csv(path, adult_schema())
    income = data["income"]
    y = np.array(
        [1 if str(v).strip().rstrip(".") == ">50K" else 0 for v in income],
        dtype=np.int8,
    )
    return data.drop_columns(["income"]).with_column("y", "binary", y)


# -- self-contained census-like generator -----------------------------------------

_OCCUPATIONS = ("clerical", "craft", "professional", "sales", "service")
_MARITAL = ("divorced", "married", "never_married")
_WORKCLASS = ("government", "private", "self_employed")
_RACES = ("amerindian", "asian", "black", "other", "white")


def synthetic_adult(n: int, seed: int = 0) -> Dataset:
    """Census-like table with a known generative model.

    The label depends on education, age, hours, marital status, occupation,
    and workclass through a logistic link; race and sex are sampled
    independently and carry no label signal, which makes them safe targets for
    simulated protected-class effects.
    """
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(38.0, 13.0, n)), 17, 90)
    education_num = rng.choice(
        np.arange(5, 17),
        size=n,
        p=np.array([2, 3, 4, 6, 16, 22, 6, 5, 16, 10, 6, 4], dtype=float) / 100.0,
    ).astype(np.float64)
    hours = np.clip(np.round(rng.normal(42.0, 11.0, n)), 5, 99)
    workclass = rng.choice(_WORKCLASS, size=n, p=[0.15, 0.70, 0.15])
    marital = rng.choice(_MARITAL, size=n, p=[0.21, 0.46, 0.33])
    occupation = rng.choice(_OCCUPATIONS, size=n, p=[0.20, 0.20, 0.22, 0.17, 0.21])
    race = rng.choice(_RACES, size=n, p=[0.02, 0.05, 0.10, 0.05, 0.78])
    sex = rng.choice(("female", "male"), size=n, p=[0.5, 0.5])

    logit = (
        -18.2
        + 0.675 * education_num
        + 0.115 * age
        + 0.0675 * hours
        + 2.7 * (marital == "married")
        + 1.75 * (occupation == "professional")
        + 0.54 * (occupation == "sales")
        - 0.4 * (occupation == "service")
        + 0.675 * (workclass == "self_employed")
    )
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(np.int8)

    schema = {
        "age": "numeric",
        "education_num": "numeric",
        "hours_per_week": "numeric",
        "workclass": "categorical",
        "marital_status": "categorical",
        "occupation": "categorical",
        "race": "categorical",
        "sex": "categorical",
        "y": "binary",
    }
    columns = {
        "age": age,
        "education_num": education_num,
        "hours_per_week": hours,
        "workclass": workclass,
        "marital_status": marital,
        "occupation": occupation,
        "race": race,
        "sex": sex,
        "y": y,
    }
    return Dataset(schema, columns)
