"""Exact path enumeration and d-separation queries on resolved causal graphs.

Selection nodes are conditioned in every query, because the data available to
any observer already passed the selection event; callers cannot lift that.
Colliders follow the classical rule: a collider is treated as conditioned when
it or any of its descendants is in the conditioning set.

Path enumeration is exhaustive, so graphs are capped at 16 nodes; the fairness
contexts this toolkit targets have at most six.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graphs import CausalGraph, GraphStructureError, validate

MAX_NODES = 16


@dataclass(frozen=True)
class Path:
    """Simple path between two nodes, read in the undirected sense.

    ``colliders`` holds the interior nodes whose two incident path edges both
    point into them; every other interior node is a non-collider.
    """

    nodes: tuple[str, ...]
    colliders: frozenset[str]

    @property
    def interior(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    def is_collider(self, name: str) -> bool:
        return name in self.colliders

    def contains(self, name: str) -> bool:
        return name in self.nodes


@dataclass(frozen=True)
class PathStatus:
    """Blocking audit of one path under a conditioning set.

    ``blocking_nodes``: unconditioned colliders (these block).
    ``opened_by``: colliders kept open by conditioning (selection included,
    directly or through a conditioned descendant).
    ``cut_by``: conditioned non-colliders (these cut).
    A path is open exactly when nothing blocks and nothing cuts it.
    """

    open: bool
    blocking_nodes: frozenset[str]
    opened_by: frozenset[str]
    cut_by: frozenset[str]

    def as_dict(self) -> dict:
        return {
            "open": self.open,
            "blocking_nodes": sorted(self.blocking_nodes),
            "opened_by": sorted(self.opened_by),
            "cut_by": sorted(self.cut_by),
        }


def _require_resolved(g: CausalGraph) -> None:
    if len(g.nodes) > MAX_NODES:
        raise GraphStructureError(
            f"graph has {len(g.nodes)} nodes; exhaustive path analysis is capped "
            f"at {MAX_NODES}"
        )
    if not g.is_fully_directed:
        raise GraphStructureError(
            "graph has unresolved bidirected edges; resolve them first "
            "(see causalfair.graphs.resolutions)"
        )
    report = validate(g)
    if not report.ok:
        raise GraphStructureError("invalid graph: " + "; ".join(report.problems))


def enumerate_paths(g: CausalGraph, u: str, v: str) -> list[Path]:
    """All simple paths between ``u`` and ``v``, ordered lexicographically
    by node sequence."""
    _require_resolved(g)
    g.node(u), g.node(v)
    if u == v:
        raise GraphStructureError("path endpoints must differ")

    found: list[Path] = []
    trail: list[str] = [u]
    on_trail = {u}

    def walk(current: str) -> None:
        for nxt in sorted(g.adjacent(current)):
            if nxt == v:
                found.append(_classify(g, tuple(trail) + (v,)))
            elif nxt not in on_trail:
                trail.append(nxt)
                on_trail.add(nxt)
                walk(nxt)
                on_trail.discard(nxt)
                trail.pop()

    walk(u)
    return found


def _classify(g: CausalGraph, nodes: tuple[str, ...]) -> Path:
    colliders = set()
    for i in range(1, len(nodes) - 1):
        into_left = nodes[i - 1] in g.parents(nodes[i])
        into_right = nodes[i + 1] in g.parents(nodes[i])
        if into_left and into_right:
            colliders.add(nodes[i])
    return Path(nodes=nodes, colliders=frozenset(colliders))


def _effective_conditioned(g: CausalGraph, conditioned: Iterable[str]) -> frozenset[str]:
    conditioned = frozenset(conditioned)
    for name in conditioned:
        g.node(name)
        if not g.kind_of(name).observed:
            raise GraphStructureError(
                f"cannot condition on latent node {name!r}: it is unobservable"
            )
    return conditioned | g.selection_names


def path_status(g: CausalGraph, path: Path, conditioned: Iterable[str] = ()) -> PathStatus:
    """Classify one path as open, blocked, or cut under ``conditioned``.

    Selection nodes of the graph are added to the conditioning set
    automatically.
    """
    _require_resolved(g)
    cond = _effective_conditioned(g, conditioned)
    blocking, opened, cut = set(), set(), set()
    for name in path.interior:
        if path.is_collider(name):
            if name in cond or (g.descendants(name) & cond):
                opened.add(name)
            else:
                blocking.add(name)
        elif name in cond:
            cut.add(name)
    return PathStatus(
        open=not blocking and not cut,
        blocking_nodes=frozenset(blocking),
        opened_by=frozenset(opened),
        cut_by=frozenset(cut),
    )


def d_separated(g: CausalGraph, u: str, v: str, conditioned: Iterable[str] = ()) -> bool:
    """True when every path between ``u`` and ``v`` fails to be open given
    ``conditioned`` plus the graph's selection nodes."""
    cond = _effective_conditioned(g, conditioned)
    if u in cond or v in cond:
        raise GraphStructureError(
            "query endpoints may not be conditioned (selection nodes are "
            "conditioned implicitly)"
        )
    return all(
        not path_status(g, path, conditioned).open for path in enumerate_paths(g, u, v)
    )
