"""Which group-fairness metrics certify counterfactual fairness on a graph.

Three parent graphical tests drive everything:

* independence test — the A-unaffected features are separated from the
  protected class (conditioning only on selection);
* label-conditional test — they are separated given the observed label;
* feature-conditional test — the label is separated from the protected class
  given the A-unaffected features.

Each of the ten metric verdicts inherits from one of these tests.  Conditional
tests are computed two ways: the reduced separation query, and a literal
per-path reading ("every path is blocked by something else, or open and runs
through the conditioning variable").  The reduced query decides the verdict;
a disagreement is never swallowed, it is attached to the report as an
error-level diagnostic.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .dsep import Path, d_separated, enumerate_paths, path_status
from .graphs import CausalGraph, NodeKind, resolve_bidirected, validate


class EquivalenceError(ValueError):
    """The graph lacks the vocabulary a test needs, or is invalid."""


class MetricId(enum.Enum):
    DEMOGRAPHIC_PARITY = "demographic_parity"
    CONDITIONAL_DEMOGRAPHIC_PARITY = "conditional_demographic_parity"
    EQUALIZED_ODDS = "equalized_odds"
    FPR_BALANCE = "fpr_balance"
    FNR_BALANCE = "fnr_balance"
    BALANCE_NEGATIVE_CLASS = "balance_negative_class"
    BALANCE_POSITIVE_CLASS = "balance_positive_class"
    BINARY_CALIBRATION = "binary_calibration"
    PREDICTIVE_PARITY = "predictive_parity"
    SCORE_CALIBRATION = "score_calibration"


INDEPENDENCE_FAMILY = (MetricId.DEMOGRAPHIC_PARITY,)
LABEL_CONDITIONAL_FAMILY = (
    MetricId.EQUALIZED_ODDS,
    MetricId.FPR_BALANCE,
    MetricId.FNR_BALANCE,
    MetricId.BALANCE_NEGATIVE_CLASS,
    MetricId.BALANCE_POSITIVE_CLASS,
)
FEATURE_CONDITIONAL_FAMILY = (
    MetricId.BINARY_CALIBRATION,
    MetricId.PREDICTIVE_PARITY,
    MetricId.SCORE_CALIBRATION,
)

CAVEATS = (
    "Verdicts assume faithfulness: the data exhibits no conditional "
    "independencies beyond those the graph structure forces.",
    "Selection indicators and prediction scores are distinct identifiers in "
    "this report, even though fairness notation conventionally writes both "
    "with the same letter.",
)


@dataclass
class PathAudit:
    resolution: str
    nodes: tuple[str, ...]
    open: bool
    blocking_nodes: tuple[str, ...]
    opened_by: tuple[str, ...]
    cut_by: tuple[str, ...]
    conditioned: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "nodes": list(self.nodes),
            "open": self.open,
            "blocking_nodes": list(self.blocking_nodes),
            "opened_by": list(self.opened_by),
            "cut_by": list(self.cut_by),
            "conditioned": list(self.conditioned),
        }


@dataclass
class TestOutcome:
    """One parent graphical test evaluated across every resolution."""

    equivalent: bool
    per_resolution: list[tuple[str, bool]]
    audits: list[PathAudit]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def resolution_consistent(self) -> bool:
        return len({ok for _, ok in self.per_resolution}) <= 1

    @property
    def open_paths(self) -> list[PathAudit]:
        return [a for a in self.audits if a.open]


def _checked(g: CausalGraph) -> None:
    report = validate(g)
    if not report.ok:
        raise EquivalenceError("invalid graph: " + "; ".join(report.problems))


def _protected(g: CausalGraph) -> str:
    names = g.nodes_of_kind(NodeKind.PROTECTED)
    if not names:
        raise EquivalenceError("graph has no protected node")
    return names[0]


def _feature_nodes(g: CausalGraph) -> tuple[str, ...]:
    names = g.nodes_of_kind(NodeKind.X_PERP_A)
    if not names:
        raise EquivalenceError("graph has no x_perp_a node")
    return names


def _label(g: CausalGraph) -> str:
    names = g.nodes_of_kind(NodeKind.LABEL)
    if not names:
        raise EquivalenceError("graph has no label node")
    return names[0]


def _resolution_name(g: CausalGraph, resolved: CausalGraph, index: int) -> str:
    flipped = [
        f"{e.tail}->{e.head}"
        for e in resolved.directed_edges
        if e not in g.directed_edges
    ]
    return f"resolution {index}: {', '.join(flipped)}" if flipped else "as given"


def _audit_paths(
    resolved: CausalGraph,
    res_name: str,
    u: str,
    v: str,
    conditioned: tuple[str, ...],
) -> list[PathAudit]:
    audits = []
    effective = tuple(sorted(set(conditioned) | resolved.selection_names))
    for path in enumerate_paths(resolved, u, v):
        st = path_status(resolved, path, conditioned)
        audits.append(
            PathAudit(
                resolution=res_name,
                nodes=path.nodes,
                open=st.open,
                blocking_nodes=tuple(sorted(st.blocking_nodes)),
                opened_by=tuple(sorted(st.opened_by)),
                cut_by=tuple(sorted(st.cut_by)),
                conditioned=effective,
            )
        )
    return audits


def independence_test(g: CausalGraph, extra_conditioning: tuple[str, ...] = ()) -> TestOutcome:
    """Separation of every A-unaffected feature node from the protected class,
    conditioning only on selection (plus ``extra_conditioning`` strata)."""
    _checked(g)
    a = _protected(g)
    features = _feature_nodes(g)
    per_res: list[tuple[str, bool]] = []
    audits: list[PathAudit] = []
    for i, resolved in enumerate(resolve_bidirected(g).graphs):
        name = _resolution_name(g, resolved, i)
        passed = True
        for x in features:
            if not d_separated(resolved, x, a, extra_conditioning):
                passed = False
            audits.extend(_audit_paths(resolved, name, x, a, extra_conditioning))
        per_res.append((name, passed))
    return TestOutcome(
        equivalent=all(ok for _, ok in per_res),
        per_resolution=per_res,
        audits=audits,
    )


def _conditional_test(
    g: CausalGraph,
    pair_of: "callable",
    conditioning_of: "callable",
    must_contain: "callable",
) -> TestOutcome:
    """Shared engine for the label- and feature-conditional tests.

    ``pair_of(resolved)`` yields (u, v) endpoint pairs; ``conditioning_of``
    gives the reduced query's conditioning set; ``must_contain`` gives the
    node set whose presence legitimizes an open path in the per-path reading.
    """
    _checked(g)
    per_res: list[tuple[str, bool]] = []
    audits: list[PathAudit] = []
    diagnostics: list[str] = []
    for i, resolved in enumerate(resolve_bidirected(g).graphs):
        name = _resolution_name(g, resolved, i)
        conditioning = tuple(sorted(conditioning_of(resolved)))
        allowed = set(must_contain(resolved))
        reduced_ok = True
        literal_ok = True
        for u, v in pair_of(resolved):
            if not d_separated(resolved, u, v, conditioning):
                reduced_ok = False
            audits.extend(_audit_paths(resolved, name, u, v, conditioning))
            # Literal per-path reading at baseline conditioning (selection only).
            for path in enumerate_paths(resolved, u, v):
                st = path_status(resolved, path, ())
                if st.open:
                    if not (allowed & set(path.interior)):
                        literal_ok = False
                else:
                    if not (set(st.blocking_nodes) - allowed):
                        literal_ok = False
        if literal_ok != reduced_ok:
            diagnostics.append(
                f"{name}: per-path reading says "
                f"{'equivalent' if literal_ok else 'not_equivalent'} but the "
                f"reduced separation query says "
                f"{'equivalent' if reduced_ok else 'not_equivalent'}; "
                "the reduced query decides the verdict"
            )
        per_res.append((name, reduced_ok))
    return TestOutcome(
        equivalent=all(ok for _, ok in per_res),
        per_resolution=per_res,
        audits=audits,
        diagnostics=diagnostics,
    )


def label_conditional_test(g: CausalGraph) -> TestOutcome:
    """Separation of the A-unaffected features from the protected class given
    the observed label (selection always conditioned)."""
    label = _label(g)
    a = _protected(g)
    features = _feature_nodes(g)
    return _conditional_test(
        g,
        pair_of=lambda resolved: [(x, a) for x in features],
        conditioning_of=lambda resolved: (label,),
        must_contain=lambda resolved: (label,),
    )


def feature_conditional_test(g: CausalGraph) -> TestOutcome:
    """Separation of the observed label from the protected class given all
    A-unaffected feature nodes (selection always conditioned)."""
    label = _label(g)
    a = _protected(g)
    features = _feature_nodes(g)
    return _conditional_test(
        g,
        pair_of=lambda resolved: [(label, a)],
        conditioning_of=lambda resolved: features,
        must_contain=lambda resolved: features,
    )


# Spec-facing aliases: the three parent tests under their metric names.
def dp_equivalent(g: CausalGraph) -> TestOutcome:
    return independence_test(g)


def eo_equivalent(g: CausalGraph) -> TestOutcome:
    return label_conditional_test(g)


def calibration_equivalent(g: CausalGraph) -> TestOutcome:
    return feature_conditional_test(g)


# -- the ten-metric report -------------------------------------------------------


@dataclass
class MetricVerdict:
    metric: MetricId
    verdict: str  # "equivalent" | "not_equivalent" | "omitted"
    paths: list[PathAudit]
    note: str | None = None

    def as_dict(self) -> dict:
        doc = {"verdict": self.verdict, "paths": [a.as_dict() for a in self.paths]}
        if self.note:
            doc["note"] = self.note
        return doc


@dataclass
class MetricEquivalenceReport:
    verdicts: dict[MetricId, MetricVerdict]
    resolution_consistent: bool
    caveats: list[str]
    diagnostics: list[str]

    def verdict(self, metric: MetricId) -> str:
        return self.verdicts[metric].verdict

    def equivalent_metrics(self) -> list[MetricId]:
        return [m for m, v in self.verdicts.items() if v.verdict == "equivalent"]

    def as_json(self) -> dict:
        doc: dict = {m.value: v.as_dict() for m, v in self.verdicts.items()}
        doc["resolution_consistent"] = self.resolution_consistent
        doc["caveats"] = list(self.caveats)
        if self.diagnostics:
            doc["diagnostics"] = list(self.diagnostics)
        return doc

    def as_text(self) -> str:
        width = max(len(m.value) for m in MetricId)
        lines = []
        for metric in MetricId:
            v = self.verdicts[metric]
            line = f"{metric.value:<{width}}  {v.verdict.upper()}"
            if v.note:
                line += f"  ({v.note})"
            lines.append(line)
        lines.append("")
        lines.append(f"resolution_consistent: {self.resolution_consistent}")
        for caveat in self.caveats:
            lines.append(f"caveat: {caveat}")
        for diag in self.diagnostics:
            lines.append(f"DIAGNOSTIC: {diag}")
        return "\n".join(lines)


def metric_equivalence_report(
    g: CausalGraph, strata: tuple[str, ...] = ()
) -> MetricEquivalenceReport:
    """Fill all ten metric verdicts from the three parent tests.

    ``strata`` names context-kind nodes held fixed for conditional demographic
    parity; with no strata that metric is omitted with a note rather than
    guessed.
    """
    _checked(g)
    for name in strata:
        if g.kind_of(name) is not NodeKind.CONTEXT:
            raise EquivalenceError(
                f"stratum node {name!r} must have kind context, got "
                f"{g.kind_of(name).value}"
            )

    independence = independence_test(g)
    label_cond = label_conditional_test(g)
    feature_cond = feature_conditional_test(g)

    verdicts: dict[MetricId, MetricVerdict] = {}

    def fill(metrics, outcome: TestOutcome, note_suffix: str | None = None) -> None:
        text = "equivalent" if outcome.equivalent else "not_equivalent"
        note = note_suffix
        if not outcome.resolution_consistent:
            detail = "; ".join(f"{name}: {ok}" for name, ok in outcome.per_resolution)
            note = (note + "; " if note else "") + f"resolutions disagree ({detail})"
        for m in metrics:
            verdicts[m] = MetricVerdict(metric=m, verdict=text, paths=outcome.audits, note=note)

    fill(INDEPENDENCE_FAMILY, independence)
    if strata:
        stratified = independence_test(g, extra_conditioning=tuple(strata))
        fill(
            (MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY,),
            stratified,
            note_suffix=f"strata held fixed: {sorted(strata)}",
        )
    else:
        verdicts[MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY] = MetricVerdict(
            metric=MetricId.CONDITIONAL_DEMOGRAPHIC_PARITY,
            verdict="omitted",
            paths=[],
            note="no strata provided; declare context nodes to evaluate this metric",
        )
    fill(
        LABEL_CONDITIONAL_FAMILY,
        label_cond,
        note_suffix=None,
    )
    fill(FEATURE_CONDITIONAL_FAMILY, feature_cond)

    # Derivative metrics restrict to a subpopulation or swap decisions for
    # scores; the graph is unchanged, so they carry their parent's verdict.
    for m in LABEL_CONDITIONAL_FAMILY[1:]:
        verdicts[m].note = "inherits the label-conditional test"
    for m in FEATURE_CONDITIONAL_FAMILY[1:]:
        verdicts[m].note = "inherits the feature-conditional test"

    consistent = all(
        outcome.resolution_consistent
        for outcome in (independence, label_cond, feature_cond)
    )
    diagnostics = list(label_cond.diagnostics) + list(feature_cond.diagnostics)
    return MetricEquivalenceReport(
        verdicts=verdicts,
        resolution_consistent=consistent,
        caveats=list(CAVEATS),
        diagnostics=diagnostics,
    )


def report_to_json_text(report: MetricEquivalenceReport) -> str:
    return json.dumps(report.as_json(), indent=2, sort_keys=True) + "\n"
