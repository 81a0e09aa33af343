"""Sample estimates of the ten group-fairness metrics.

All estimators are order-free: probabilities come from integer cell counts and
score means are summed in sorted order, so permuting rows can never change an
output bit.  Signed differences are always group 1 minus group 0.  Metrics
with several conditional components report each component plus one signed
aggregate: the component of largest magnitude (first such component in the
fixed enumeration order on ties).  A component whose conditioning cell is
empty in either group is flagged undefined and excluded from the aggregate
instead of being silently zeroed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .equivalence import MetricId


class MetricsError(ValueError):
    """Prediction table malformed or a requested cell is empty."""


@dataclass
class LabeledPredictions:
    """Per-row protected class ``a``, outcome ``y``, decision ``d``, score
    ``s`` in [0, 1], and optional stratum column ``l``."""

    a: np.ndarray
    y: np.ndarray
    d: np.ndarray
    s: np.ndarray
    l: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a)
        self.y = np.asarray(self.y)
        self.d = np.asarray(self.d)
        self.s = np.asarray(self.s, dtype=np.float64)
        n = len(self.a)
        if n == 0:
            raise MetricsError("empty prediction table")
        for name, col in (("y", self.y), ("d", self.d), ("s", self.s)):
            if len(col) != n:
                raise MetricsError(f"column {name!r} has length {len(col)}, expected {n}")
        for name, col in (("a", self.a), ("y", self.y), ("d", self.d)):
            if not np.isin(col, (0, 1)).all():
                raise MetricsError(f"column {name!r} must be binary")
        if np.isnan(self.s).any() or (self.s < 0).any() or (self.s > 1).any():
            raise MetricsError("scores must lie in [0, 1]")
        if self.l is not None:
            self.l = np.asarray(self.l)
            if len(self.l) != n:
                raise MetricsError("stratum column length mismatch")
        for group in (0, 1):
            if not (self.a == group).any():
                raise MetricsError(f"no rows with a={group}; both groups are required")

    @property
    def n(self) -> int:
        return len(self.a)

    def swap_groups(self) -> "LabeledPredictions":
        return LabeledPredictions(a=1 - self.a, y=self.y, d=self.d, s=self.s, l=self.l)


@dataclass
class MetricValue:
    aggregate: float | None
    components: dict[str, float | None]
    undefined: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "components": dict(self.components),
            "undefined": list(self.undefined),
        }


def _aggregate(components: dict[str, float | None]) -> MetricValue:
    undefined = [k for k, v in components.items() if v is None]
    defined = [(k, v) for k, v in components.items() if v is not None]
    if not defined:
        return MetricValue(aggregate=None, components=components, undefined=undefined)
    best = max(defined, key=lambda kv: abs(kv[1]))
    # ties resolve to the first component in enumeration order
    for k, v in defined:
        if abs(v) == abs(best[1]):
            best = (k, v)
            break
    return MetricValue(aggregate=best[1], components=components, undefined=undefined)


def _rate_diff(event: np.ndarray, cell: np.ndarray, groups: np.ndarray) -> float | None:
    """P(event | cell, group 1) - P(event | cell, group 0) from counts; None
    when the cell is empty in either group."""
    rates = []
    for g in (0, 1):
        mask = cell & (groups == g)
        total = int(mask.sum())
        if total == 0:
            return None
        rates.append(int((event & mask).sum()) / total)
    return rates[1] - rates[0]


def _mean_diff(values: np.ndarray, cell: np.ndarray, groups: np.ndarray) -> float | None:
    means = []
    for g in (0, 1):
        mask = cell & (groups == g)
        if not mask.any():
            return None
        # sorted summation keeps the estimate invariant to row order
        means.append(float(np.sort(values[mask]).sum()) / int(mask.sum()))
    return means[1] - means[0]


def binary_metric_report(p: LabeledPredictions) -> dict[MetricId, MetricValue]:
    """Decision-based metrics: demographic parity, equalized odds, the two
    error-rate balances, binary calibration, and predictive parity.

    The error-rate balances are reported on the positive-decision scale: the
    value at y=1 is the true-positive-rate gap (the negation of a raw
    false-negative-rate difference; both vanish together).
    """
    everything = np.ones(p.n, dtype=bool)
    d1 = p.d == 1
    y1 = p.y == 1

    dp = _rate_diff(d1, everything, p.a)
    eo = {
        "y=0": _rate_diff(d1, p.y == 0, p.a),
        "y=1": _rate_diff(d1, y1, p.a),
    }
    cal = {
        "d=0": _rate_diff(y1, p.d == 0, p.a),
        "d=1": _rate_diff(y1, d1, p.a),
    }
    return {
        MetricId.DEMOGRAPHIC_PARITY: _aggregate({"all": dp}),
        MetricId.EQUALIZED_ODDS: _aggregate(eo),
        MetricId.FPR_BALANCE: _aggregate({"y=0": eo["y=0"]}),
        MetricId.FNR_BALANCE: _aggregate({"y=1": eo["y=1"]}),
        MetricId.BINARY_CALIBRATION: _aggregate(cal),
        MetricId.PREDICTIVE_PARITY: _aggregate({"d=1": cal["d=1"]}),
    }


def score_metric_report(
    p: LabeledPredictions, bins: int = 10
) -> dict[MetricId, MetricValue]:
    """Score-based metrics: per-class balance of mean scores and binned score
    calibration over ``bins`` equal-width bins on [0, 1]."""
    if bins < 1:
        raise MetricsError("bins must be positive")
    y1 = p.y == 1
    balance_neg = _mean_diff(p.s, p.y == 0, p.a)
    balance_pos = _mean_diff(p.s, y1, p.a)

    bin_index = np.minimum((p.s * bins).astype(np.int64), bins - 1)
    cal_components: dict[str, float | None] = {}
    for b in range(bins):
        cal_components[f"bin={b}"] = _rate_diff(y1, bin_index == b, p.a)
    # bins empty in both groups are dropped outright, not flagged
    cal_components = {
        k: v
        for k, v in cal_components.items()
        if not (v is None and not ((bin_index == int(k.split("=")[1])).any()))
    }
    return {
        MetricId.BALANCE_NEGATIVE_CLASS: _aggregate({"y=0": balance_neg}),
        MetricId.BALANCE_POSITIVE_CLASS: _aggregate({"y=1": balance_pos}),
        MetricId.SCORE_CALIBRATION: _aggregate(cal_components),
    }


def conditional_dp(p: LabeledPredictions, level) -> float:
    """Demographic-parity difference restricted to rows with stratum
    ``level``."""
    if p.l is None:
        raise MetricsError("no stratum column in the prediction table")
    cell = p.l == level
    if not cell.any():
        raise MetricsError(f"empty stratum {level!r}")
    diff = _rate_diff(p.d == 1, cell, p.a)
    if diff is None:
        raise MetricsError(f"stratum {level!r} is empty in one protected group")
    return diff


@dataclass
class MetricReport:
    """All ten metrics on one prediction table."""

    values: dict[MetricId, MetricValue]
    bins: int

    def value(self, metric: MetricId) -> MetricValue:
        return self.values[metric]

    def aggregate(self, metric: MetricId) -> float | None:
        return self.values[metric].aggregate

    def as_json(self) -> dict:
        return {
            m.value: self.values[m].as_dict() for m in MetricId if m in self.values
        } | {"score_bins": self.bins}

    def as_text(self) -> str:
        width = max(len(m.value) for m in MetricId)
        lines = [f"{'metric':<{width}}  {'difference':>11}  components"]
        for m in MetricId:
            if m not in self.values:
                continue
            v = self.values[m]
            agg = "undefined" if v.aggregate is None else f"{v.aggregate:+.4f}"
            parts = ", ".join(
                f"{k}: " + ("undefined" if c is None else f"{c:+.4f}")
                for k, c in v.components.items()
            )
            lines.append(f"{m.value:<{width}}  {agg:>11}  {parts}")
        return "\n".join(lines)


def read_predictions_csv(path) -> LabeledPredictions:
    """Read a predictions table with columns ``a, y, d, s`` and optional
    stratum column ``l``."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MetricsError(f"{path}: empty file") from None
        required = ["a", "y", "d", "s"]
        missing = [c for c in required if c not in header]
        if missing:
            raise MetricsError(f"{path}: missing columns {missing}")
        extra = [c for c in header if c not in required + ["l"]]
        if extra:
            raise MetricsError(f"{path}: unexpected columns {extra}")
        idx = {c: header.index(c) for c in header}
        raw: dict[str, list] = {c: [] for c in header}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MetricsError(f"{path}:{lineno}: expected {len(header)} fields")
            for c in header:
                raw[c].append(row[idx[c]])
    try:
        return LabeledPredictions(
            a=np.array([int(v) for v in raw["a"]]),
            y=np.array([int(v) for v in raw["y"]]),
            d=np.array([int(v) for v in raw["d"]]),
            s=np.array([float(v) for v in raw["s"]]),
            l=np.array(raw["l"], dtype=object) if "l" in raw else None,
        )
    except ValueError as exc:
        raise MetricsError(f"{path}: {exc}") from None


def full_metric_report(p: LabeledPredictions, bins: int = 10) -> MetricReport:
    values = binary_metric_report(p)
    values.update(score_metric_report(p, bins=bins))
    if p.l is not None:
        levels = sorted(set(p.l.tolist()), key=str)
        components = {}
        for level in levels:
            components[f"l={level}"] = _rate_diff(p.d == 1, p.l == level, p.a)
        values[MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY] = _aggregate(components)
    else:
        values[MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY] = MetricValue(
            aggregate=None, components={}, undefined=["no stratum column"]
        )
    return MetricReport(values=values, bins=bins)
