"""Causal DAGs with the node vocabulary used throughout the fairness toolkit.

A graph carries typed nodes (protected attribute, observed label, latent true
label, feature blocks, selection indicators, auxiliary context) and edges that
are either directed or bidirected.  A bidirected edge records that the causal
direction between two variables is not committed; it must be resolved into one
of its two orientations before any separation query runs.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable


class GraphFormatError(ValueError):
    """A graph document could not be parsed."""


class GraphStructureError(ValueError):
    """A graph value violates a structural precondition of an operation."""


class NodeKind(enum.Enum):
    PROTECTED = "protected"
    LABEL = "label"
    TRUE_LABEL = "true_label"  # latent ground-truth label, never observed
    X_PERP_A = "x_perp_a"      # features not causally affected by the protected class
    X_PERP_Y = "x_perp_y"      # features causally unrelated to the label
    SELECTION = "selection"    # conditioned on in the data-generating process
    CONTEXT = "context"        # auxiliary observed variables (e.g. strata)

    @property
    def observed(self) -> bool:
        return self is not NodeKind.TRUE_LABEL


# Kinds that may appear at most once in a graph.
_SINGLETON_KINDS = (NodeKind.PROTECTED, NodeKind.LABEL, NodeKind.TRUE_LABEL)


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind

    def __post_init__(self) -> None:
        if not self.name:
            raise GraphStructureError("node name must be nonempty")


@dataclass(frozen=True)
class Edge:
    """Edge from ``tail`` to ``head``; ``bidirected`` means the direction is open."""

    tail: str
    head: str
    bidirected: bool = False

    def __post_init__(self) -> None:
        if self.tail == self.head:
            raise GraphStructureError(f"self-loop on node {self.tail!r}")

    def sort_key(self) -> tuple[str, str, bool]:
        return (self.tail, self.head, self.bidirected)


class CausalGraph:
    """Immutable typed graph.  Equality ignores node/edge ordering."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        nodes = tuple(nodes)
        names = [n.name for n in nodes]
        dupes = {x for x in names if names.count(x) > 1}
        if dupes:
            raise GraphStructureError(f"duplicate node names: {sorted(dupes)}")
        self._nodes = tuple(sorted(nodes, key=lambda n: n.name))
        edges = tuple(edges)
        if len(set(e.sort_key() for e in edges)) != len(edges):
            raise GraphStructureError("duplicate edges")
        self._edges = tuple(sorted(edges, key=Edge.sort_key))
        self._by_name = {n.name: n for n in self._nodes}
        self._parents: dict[str, set[str]] = {n.name: set() for n in self._nodes}
        self._children: dict[str, set[str]] = {n.name: set() for n in self._nodes}
        self._adjacent: dict[str, set[str]] = {n.name: set() for n in self._nodes}
        for e in self._edges:
            if e.tail in self._by_name and e.head in self._by_name:
                self._adjacent[e.tail].add(e.head)
                self._adjacent[e.head].add(e.tail)
                if not e.bidirected:
                    self._parents[e.head].add(e.tail)
                    self._children[e.tail].add(e.head)

    # -- accessors ---------------------------------------------------------

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes)

    def has_node(self, name: str) -> bool:
        return name in self._by_name

    def node(self, name: str) -> Node:
        try:
            return self._by_name[name]
        except KeyError:
            raise GraphStructureError(f"unknown node {name!r}") from None

    def kind_of(self, name: str) -> NodeKind:
        return self.node(name).kind

    def nodes_of_kind(self, kind: NodeKind) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes if n.kind is kind)

    @property
    def selection_names(self) -> frozenset[str]:
        return frozenset(self.nodes_of_kind(NodeKind.SELECTION))

    @property
    def latent_names(self) -> frozenset[str]:
        return frozenset(self.nodes_of_kind(NodeKind.TRUE_LABEL))

    @property
    def bidirected_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self._edges if e.bidirected)

    @property
    def directed_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self._edges if not e.bidirected)

    @property
    def is_fully_directed(self) -> bool:
        return not self.bidirected_edges

    def parents(self, name: str) -> frozenset[str]:
        self.node(name)
        return frozenset(self._parents[name])

    def children(self, name: str) -> frozenset[str]:
        self.node(name)
        return frozenset(self._children[name])

    def adjacent(self, name: str) -> frozenset[str]:
        self.node(name)
        return frozenset(self._adjacent[name])

    def descendants(self, name: str) -> frozenset[str]:
        """All nodes reachable from ``name`` through directed edges (exclusive)."""
        self.node(name)
        seen: set[str] = set()
        stack = [name]
        while stack:
            for child in self._children[stack.pop()]:
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return frozenset(seen)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return frozenset(self._nodes) == frozenset(other._nodes) and frozenset(
            self._edges
        ) == frozenset(other._edges)

    def __hash__(self) -> int:
        return hash((frozenset(self._nodes), frozenset(self._edges)))

    def __repr__(self) -> str:
        arrows = ", ".join(
            f"{e.tail}<->{e.head}" if e.bidirected else f"{e.tail}->{e.head}"
            for e in self._edges
        )
        return f"CausalGraph({len(self._nodes)} nodes: {arrows})"


# -- validation --------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _directed_subgraph_has_cycle(g: CausalGraph) -> bool:
    return _edges_have_cycle(g.node_names, [(e.tail, e.head) for e in g.directed_edges])


def _edges_have_cycle(names: Iterable[str], arcs: list[tuple[str, str]]) -> bool:
    # Kahn's algorithm; leftover nodes mean a cycle.
    names = list(names)
    indeg = {n: 0 for n in names}
    out: dict[str, list[str]] = {n: [] for n in names}
    for tail, head in arcs:
        if tail in indeg and head in indeg:
            indeg[head] += 1
            out[tail].append(head)
    queue = [n for n in names if indeg[n] == 0]
    removed = 0
    while queue:
        n = queue.pop()
        removed += 1
        for child in out[n]:
            indeg[child] -= 1
            if indeg[child] == 0:
                queue.append(child)
    return removed != len(names)


def validate(g: CausalGraph) -> ValidationReport:
    """Check the structural invariants of a fairness-context graph.

    Always returns a report; never raises.  The report lists every violation
    found: dangling edges, cycles, a missing or non-exogenous protected node,
    duplicated singleton kinds, and selection nodes with outgoing arrows.
    """
    problems: list[str] = []

    for e in g.edges:
        for endpoint in (e.tail, e.head):
            if not g.has_node(endpoint):
                problems.append(f"dangling edge: {e.tail}->{e.head} references absent node {endpoint!r}")

    protected = g.nodes_of_kind(NodeKind.PROTECTED)
    if not protected:
        problems.append("no protected node")
    for kind in _SINGLETON_KINDS:
        found = g.nodes_of_kind(kind)
        if len(found) > 1:
            problems.append(f"duplicate kind {kind.value}: {list(found)}")

    for name in protected:
        for e in g.edges:
            if not e.bidirected and e.head == name:
                problems.append(f"protected node has parent: {e.tail}->{name}")
            if e.bidirected and name in (e.tail, e.head):
                problems.append(
                    f"protected node has parent: bidirected edge {e.tail}<->{e.head} "
                    "admits an orientation into it"
                )

    for name in g.nodes_of_kind(NodeKind.SELECTION):
        for e in g.edges:
            if not e.bidirected and e.tail == name:
                problems.append(f"selection node has child: {name}->{e.head}")
            if e.bidirected and name in (e.tail, e.head):
                problems.append(
                    f"selection node has child: bidirected edge {e.tail}<->{e.head} "
                    "admits an orientation out of it"
                )

    if _directed_subgraph_has_cycle(g):
        problems.append("cycle found among directed edges")
    elif g.bidirected_edges and len(g.bidirected_edges) <= 12:
        if not _any_acyclic_resolution(g):
            problems.append("cycle found: every orientation of the bidirected edges is cyclic")

    return ValidationReport(ok=not problems, problems=problems)


def _any_acyclic_resolution(g: CausalGraph) -> bool:
    base = [(e.tail, e.head) for e in g.directed_edges]
    bidir = g.bidirected_edges
    for flips in product((False, True), repeat=len(bidir)):
        arcs = base + [
            (e.head, e.tail) if flip else (e.tail, e.head)
            for e, flip in zip(bidir, flips)
        ]
        if not _edges_have_cycle(g.node_names, arcs):
            return True
    return False


# -- canonical fairness-context graphs ----------------------------------------

MEASUREMENT_ERROR = "measurement_error"
SELECTION_ON_LABEL = "selection_on_label"
SELECTION_ON_PREDICTORS = "selection_on_predictors"
CONTEXTS = (MEASUREMENT_ERROR, SELECTION_ON_LABEL, SELECTION_ON_PREDICTORS)


def canonical_graph(context: str) -> CausalGraph:
    """Build the stock graph for one of the three named bias contexts.

    ``measurement_error``: the latent true label drives the observed label and
    the protected class distorts it.  ``selection_on_label``: a selection sink
    with the label and the protected class as parents.
    ``selection_on_predictors``: a selection sink fed by the label-relevant
    features and the protected class.  All three carry the protected-class
    effect on the label-irrelevant features, and one bidirected edge.
    """
    a = Node("a", NodeKind.PROTECTED)
    y = Node("y", NodeKind.LABEL)
    xpa = Node("x_perp_a", NodeKind.X_PERP_A)
    xpy = Node("x_perp_y", NodeKind.X_PERP_Y)
    if context == MEASUREMENT_ERROR:
        y_true = Node("y_true", NodeKind.TRUE_LABEL)
        return CausalGraph(
            [a, y, y_true, xpa, xpy],
            [
                Edge("x_perp_a", "y_true", bidirected=True),
                Edge("y_true", "y"),
                Edge("a", "y"),
                Edge("a", "x_perp_y"),
            ],
        )
    s = Node("s", NodeKind.SELECTION)
    if context == SELECTION_ON_LABEL:
        return CausalGraph(
            [a, y, s, xpa, xpy],
            [
                Edge("y", "x_perp_a", bidirected=True),
                Edge("y", "s"),
                Edge("a", "s"),
                Edge("a", "x_perp_y"),
            ],
        )
    if context == SELECTION_ON_PREDICTORS:
        return CausalGraph(
            [a, y, s, xpa, xpy],
            [
                Edge("x_perp_a", "y", bidirected=True),
                Edge("x_perp_a", "s"),
                Edge("a", "s"),
                Edge("a", "x_perp_y"),
            ],
        )
    raise GraphStructureError(f"unknown context {context!r}; expected one of {CONTEXTS}")


# -- resolving bidirected edges ------------------------------------------------


@dataclass
class ResolutionReport:
    """Outcome of orienting every bidirected edge in each possible way."""

    graphs: list[CausalGraph]
    cyclic_skipped: list[str]


def resolve_bidirected(g: CausalGraph) -> ResolutionReport:
    """Enumerate all acyclic orientations of the bidirected edges.

    Orientations that would close a directed cycle are omitted and reported in
    ``cyclic_skipped``.  Raises :class:`GraphStructureError` when no acyclic
    orientation exists at all.
    """
    bidir = g.bidirected_edges
    if not bidir:
        if _directed_subgraph_has_cycle(g):
            raise GraphStructureError("graph has a directed cycle")
        return ResolutionReport(graphs=[g], cyclic_skipped=[])

    base = list(g.directed_edges)
    graphs: list[CausalGraph] = []
    skipped: list[str] = []
    for flips in product((False, True), repeat=len(bidir)):
        oriented = [
            Edge(e.head, e.tail) if flip else Edge(e.tail, e.head)
            for e, flip in zip(bidir, flips)
        ]
        arcs = [(e.tail, e.head) for e in base + oriented]
        desc = ", ".join(f"{e.tail}->{e.head}" for e in oriented)
        if _edges_have_cycle(g.node_names, arcs):
            skipped.append(f"orientation ({desc}) closes a cycle")
        else:
            graphs.append(CausalGraph(g.nodes, base + oriented))
    if not graphs:
        raise GraphStructureError("every orientation of the bidirected edges is cyclic")
    return ResolutionReport(graphs=graphs, cyclic_skipped=skipped)


def resolutions(g: CausalGraph) -> list[CausalGraph]:
    """All fully directed acyclic variants of ``g`` (see :func:`resolve_bidirected`)."""
    return resolve_bidirected(g).graphs


# -- JSON codec ----------------------------------------------------------------

_KIND_BY_VALUE = {k.value: k for k in NodeKind}


def write_graph_json(g: CausalGraph) -> str:
    doc = {
        "nodes": [{"name": n.name, "kind": n.kind.value} for n in g.nodes],
        "edges": [
            {"from": e.tail, "to": e.head, "bidirected": e.bidirected} for e in g.edges
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def read_graph_json(text: str) -> CausalGraph:
    """Parse the JSON graph format.  Structural problems beyond syntax are left
    to :func:`validate`; this raises :class:`GraphFormatError` only for
    malformed documents (bad JSON, missing/unknown fields, unknown kinds,
    duplicate names)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise GraphFormatError("top-level value must be an object")
    for key in ("nodes", "edges"):
        if key not in doc:
            raise GraphFormatError(f"missing field {key!r}")
        if not isinstance(doc[key], list):
            raise GraphFormatError(f"field {key!r} must be a list")

    nodes: list[Node] = []
    seen: set[str] = set()
    for i, item in enumerate(doc["nodes"]):
        if not isinstance(item, dict):
            raise GraphFormatError(f"nodes[{i}] must be an object")
        try:
            name, kind = item["name"], item["kind"]
        except KeyError as exc:
            raise GraphFormatError(f"nodes[{i}] missing field {exc.args[0]!r}") from None
        if not isinstance(name, str) or not name:
            raise GraphFormatError(f"nodes[{i}].name must be a nonempty string")
        if kind not in _KIND_BY_VALUE:
            raise GraphFormatError(
                f"nodes[{i}].kind: unknown kind {kind!r}; "
                f"expected one of {sorted(_KIND_BY_VALUE)}"
            )
        if name in seen:
            raise GraphFormatError(f"nodes[{i}].name: duplicate node name {name!r}")
        seen.add(name)
        nodes.append(Node(name, _KIND_BY_VALUE[kind]))

    edges: list[Edge] = []
    for i, item in enumerate(doc["edges"]):
        if not isinstance(item, dict):
            raise GraphFormatError(f"edges[{i}] must be an object")
        for fld in ("from", "to"):
            if fld not in item:
                raise GraphFormatError(f"edges[{i}] missing field {fld!r}")
            if not isinstance(item[fld], str):
                raise GraphFormatError(f"edges[{i}].{fld} must be a string")
        bidirected = item.get("bidirected", False)
        if not isinstance(bidirected, bool):
            raise GraphFormatError(f"edges[{i}].bidirected must be a boolean")
        if item["from"] == item["to"]:
            raise GraphFormatError(f"edges[{i}]: self-loop on {item['from']!r}")
        edges.append(Edge(item["from"], item["to"], bidirected))

    try:
        return CausalGraph(nodes, edges)
    except GraphStructureError as exc:
        raise GraphFormatError(str(exc)) from None


# -- random graphs (property tests and oracle cross-checks) --------------------


def random_graph(
    rng,
    max_nodes: int = 8,
    edge_prob: float = 0.45,
    bidirected_prob: float = 0.0,
    allow_selection: bool = True,
    allow_latent: bool = True,
    require_label: bool = True,
    require_x_perp_a: bool = True,
) -> CausalGraph:
    """Draw a random graph satisfying every validity invariant by construction.

    Nodes are created in a topological order with the protected node first and
    selection nodes last, so exogeneity and selection-sink constraints hold for
    any sampled edge set.  ``rng`` is a :class:`numpy.random.Generator`.
    """
    n_extra = int(rng.integers(1, max(2, max_nodes - 1)))
    kinds: list[NodeKind] = [NodeKind.PROTECTED]
    pool = [NodeKind.X_PERP_A, NodeKind.X_PERP_Y, NodeKind.CONTEXT]
    if require_label:
        kinds.append(NodeKind.LABEL)
        n_extra = max(0, n_extra - 1)
    if require_x_perp_a:
        kinds.append(NodeKind.X_PERP_A)
        n_extra = max(0, n_extra - 1)
    if allow_latent and rng.random() < 0.3 and len(kinds) + n_extra + 1 <= max_nodes:
        kinds.append(NodeKind.TRUE_LABEL)
    for _ in range(n_extra):
        if len(kinds) >= max_nodes:
            break
        kinds.append(pool[int(rng.integers(0, len(pool)))])
    n_selection = 0
    if allow_selection and rng.random() < 0.5 and len(kinds) < max_nodes:
        n_selection = 1

    # Interior nodes in random topological positions; protected stays first.
    interior = kinds[1:]
    rng.shuffle(interior)
    ordered = [kinds[0]] + interior
    counts: dict[str, int] = {}
    names: list[str] = []
    nodes: list[Node] = []
    for kind in ordered:
        counts[kind.value] = counts.get(kind.value, 0) + 1
        name = kind.value if counts[kind.value] == 1 else f"{kind.value}{counts[kind.value]}"
        names.append(name)
        nodes.append(Node(name, kind))
    for j in range(n_selection):
        name = "sel" if j == 0 else f"sel{j + 1}"
        names.append(name)
        nodes.append(Node(name, NodeKind.SELECTION))

    edges: list[Edge] = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if nodes[i].kind is NodeKind.SELECTION:
                continue  # selection nodes are sinks
            if rng.random() < edge_prob:
                if (
                    bidirected_prob
                    and nodes[i].kind is not NodeKind.PROTECTED
                    and nodes[j].kind is not NodeKind.SELECTION
                    and rng.random() < bidirected_prob
                ):
                    edges.append(Edge(names[i], names[j], bidirected=True))
                else:
                    edges.append(Edge(names[i], names[j]))
    return CausalGraph(nodes, edges)
