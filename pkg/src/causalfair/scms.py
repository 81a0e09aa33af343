"""Ready-made discrete structural models for the three bias contexts.

Each builder returns a fully directed, validated :class:`~causalfair.datagen.ScmSpec`
with documented conditional probability tables.  They are small enough for the
exact-joint oracle and are what the tests and demos sample from.
"""

from __future__ import annotations

from .datagen import Cpt, ScmSpec
from .graphs import CausalGraph, Edge, Node, NodeKind


def _node(name: str, kind: NodeKind) -> Node:
    return Node(name, kind)


def plain_spurious_scm(n: int = 1000, seed: int = 0) -> ScmSpec:
    """No selection, no label noise: the protected class only moves the
    label-irrelevant features.  The label/protected association is purely
    spurious (here: absent), which makes this the reference model for
    counterfactual-invariance checks."""
    graph = CausalGraph(
        [
            _node("a", NodeKind.PROTECTED),
            _node("x_perp_a", NodeKind.X_PERP_A),
            _node("y", NodeKind.LABEL),
            _node("x_perp_y", NodeKind.X_PERP_Y),
        ],
        [Edge("x_perp_a", "y"), Edge("a", "x_perp_y")],
    )
    cpts = {
        "a": Cpt.root(0.5),
        "x_perp_a": Cpt.root(0.55),
        "y": Cpt.from_p1(("x_perp_a",), {(0,): 0.25, (1,): 0.75}),
        "x_perp_y": Cpt.from_p1(("a",), {(0,): 0.3, (1,): 0.7}),
    }
    return ScmSpec(graph=graph, cpts=cpts, n=n, seed=seed)


def selection_on_label_scm(
    n: int = 1000, seed: int = 0, balanced_label_marginal: bool = True
) -> ScmSpec:
    """Selection sink fed by the label and the protected class.

    With ``balanced_label_marginal`` the selection rates satisfy
    sum_a P(s=1|y=0,a) == sum_a P(s=1|y=1,a); combined with a uniform
    protected class this keeps the label marginal identical before and after
    selection, the regime where a fairness-constrained risk minimizer carries
    over to the unselected population.
    """
    graph = CausalGraph(
        [
            _node("a", NodeKind.PROTECTED),
            _node("x_perp_a", NodeKind.X_PERP_A),
            _node("y", NodeKind.LABEL),
            _node("x_perp_y", NodeKind.X_PERP_Y),
            _node("s", NodeKind.SELECTION),
        ],
        [Edge("x_perp_a", "y"), Edge("y", "s"), Edge("a", "s"), Edge("a", "x_perp_y")],
    )
    if balanced_label_marginal:
        selection = {(0, 0): 0.5, (0, 1): 0.9, (1, 0): 0.9, (1, 1): 0.5}
    else:
        selection = {(0, 0): 0.3, (0, 1): 0.8, (1, 0): 0.9, (1, 1): 0.6}
    cpts = {
        "a": Cpt.root(0.5),
        "x_perp_a": Cpt.root(0.55),
        "y": Cpt.from_p1(("x_perp_a",), {(0,): 0.25, (1,): 0.75}),
        "x_perp_y": Cpt.from_p1(("a",), {(0,): 0.3, (1,): 0.7}),
        # key order (a, y)
        "s": Cpt.from_p1(("a", "y"), selection),
    }
    return ScmSpec(graph=graph, cpts=cpts, n=n, seed=seed)


def selection_on_predictors_scm(n: int = 1000, seed: int = 0) -> ScmSpec:
    """Selection sink fed by the label-relevant features and the protected
    class; the label itself never touches the selection event."""
    graph = CausalGraph(
        [
            _node("a", NodeKind.PROTECTED),
            _node("x_perp_a", NodeKind.X_PERP_A),
            _node("y", NodeKind.LABEL),
            _node("x_perp_y", NodeKind.X_PERP_Y),
            _node("s", NodeKind.SELECTION),
        ],
        [
            Edge("x_perp_a", "y"),
            Edge("x_perp_a", "s"),
            Edge("a", "s"),
            Edge("a", "x_perp_y"),
        ],
    )
    cpts = {
        "a": Cpt.root(0.5),
        "x_perp_a": Cpt.root(0.55),
        "y": Cpt.from_p1(("x_perp_a",), {(0,): 0.25, (1,): 0.75}),
        "x_perp_y": Cpt.from_p1(("a",), {(0,): 0.3, (1,): 0.7}),
        # key order (a, x_perp_a)
        "s": Cpt.from_p1(("a", "x_perp_a"), {(0, 0): 0.4, (0, 1): 0.8, (1, 0): 0.85, (1, 1): 0.3}),
    }
    return ScmSpec(graph=graph, cpts=cpts, n=n, seed=seed)


def measurement_error_scm(n: int = 1000, seed: int = 0) -> ScmSpec:
    """Latent ground-truth label observed through a noisy channel that the
    protected class distorts (under-recording when a = 1)."""
    graph = CausalGraph(
        [
            _node("a", NodeKind.PROTECTED),
            _node("x_perp_a", NodeKind.X_PERP_A),
            _node("y_true", NodeKind.TRUE_LABEL),
            _node("y", NodeKind.LABEL),
            _node("x_perp_y", NodeKind.X_PERP_Y),
        ],
        [
            Edge("x_perp_a", "y_true"),
            Edge("y_true", "y"),
            Edge("a", "y"),
            Edge("a", "x_perp_y"),
        ],
    )
    cpts = {
        "a": Cpt.root(0.5),
        "x_perp_a": Cpt.root(0.55),
        "y_true": Cpt.from_p1(("x_perp_a",), {(0,): 0.25, (1,): 0.75}),
        # key order (a, y_true): recording is near-perfect for a=0, lossy for a=1
        "y": Cpt.from_p1(("a", "y_true"), {(0, 0): 0.05, (0, 1): 0.9, (1, 0): 0.05, (1, 1): 0.4}),
        "x_perp_y": Cpt.from_p1(("a",), {(0,): 0.3, (1,): 0.7}),
    }
    return ScmSpec(graph=graph, cpts=cpts, n=n, seed=seed)
