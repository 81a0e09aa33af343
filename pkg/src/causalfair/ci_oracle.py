"""Brute-force exact independence checking over small discrete joints.

The joint distribution of a binary structural model is enumerated in rational
arithmetic (CPT entries become exact fractions, with complements taken in
fraction space), so conditional-independence verdicts are algebraic facts, not
tolerance judgements.  This is the ground truth that the graph-level
separation engine is validated against.

Exhaustive enumeration is deliberately capped at 5 observed binary variables;
beyond that the oracle refuses rather than degrade into sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable

import numpy as np

from .datagen import ScmSpec, random_cpts
from .dsep import d_separated
from .graphs import CausalGraph, NodeKind, resolutions

MAX_OBSERVED = 5


class OracleError(ValueError):
    """The oracle cannot answer exactly for this input."""


@dataclass
class JointTable:
    """Exact joint distribution over named binary variables."""

    variables: tuple[str, ...]
    probs: dict[tuple[int, ...], Fraction]
    _marginals: dict[tuple[str, ...], dict] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        total = sum(self.probs.values(), Fraction(0))
        if any(p < 0 for p in self.probs.values()):
            raise OracleError("negative probability cell")
        if abs(total - 1) > Fraction(1, 10**12):
            raise OracleError(f"joint does not sum to 1 (off by {float(total - 1):g})")

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise OracleError(f"unknown variable {name!r}") from None

    def marginal(self, names: tuple[str, ...]) -> dict[tuple[int, ...], Fraction]:
        """Marginal table over ``names`` (cached; order follows ``names``)."""
        if names in self._marginals:
            return self._marginals[names]
        idx = [self.index(n) for n in names]
        out: dict[tuple[int, ...], Fraction] = {}
        for cell, p in self.probs.items():
            key = tuple(cell[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + p
        self._marginals[names] = out
        return out


def _fraction_row(p1: float) -> tuple[Fraction, Fraction]:
    f1 = Fraction(p1)
    return (1 - f1, f1)


def joint_from_scm(spec: ScmSpec, selected: bool = True, max_observed: int = MAX_OBSERVED) -> JointTable:
    """Exact joint over the observed non-selection variables of an SCM.

    Latent variables are marginalized out.  With ``selected`` (default) the
    joint is conditioned on every selection node being 1 and renormalized,
    mirroring what an observer of the selected data sees; otherwise selection
    nodes are marginalized like any other hidden variable.
    """
    g = spec.graph
    order = spec.topological_order()
    selection = set(g.selection_names)
    latent = set(g.latent_names)
    observed = [n for n in order if n not in selection and n not in latent]
    if len(observed) > max_observed:
        raise OracleError(
            f"{len(observed)} observed variables exceed the exhaustive-mode cap "
            f"of {max_observed}"
        )
    if len(order) > 14:
        raise OracleError("too many total variables for exhaustive enumeration")

    rows = {
        name: {key: _fraction_row(row[1]) for key, row in spec.cpts[name].table.items()}
        for name in order
    }
    parent_idx = {
        name: [order.index(p) for p in spec.cpts[name].parents] for name in order
    }

    out_names = tuple(sorted(observed))
    out_idx = [order.index(n) for n in out_names]
    sel_idx = [order.index(n) for n in selection]

    accum: dict[tuple[int, ...], Fraction] = {}
    for cell in product((0, 1), repeat=len(order)):
        if selected and any(cell[i] != 1 for i in sel_idx):
            continue
        p = Fraction(1)
        for j, name in enumerate(order):
            key = tuple(cell[i] for i in parent_idx[name])
            p *= rows[name][key][cell[j]]
        if p:
            key = tuple(cell[i] for i in out_idx)
            accum[key] = accum.get(key, Fraction(0)) + p

    total = sum(accum.values(), Fraction(0))
    if selected and total == 0:
        raise OracleError("selection event has probability 0")
    if selected:
        accum = {k: v / total for k, v in accum.items()}
    return JointTable(variables=out_names, probs=accum)


def dependence_residual(
    j: JointTable, u: str, v: str, given: Iterable[str] = ()
) -> Fraction:
    """max over assignments of |P(u,v|w) - P(u|w) P(v|w)|, exact."""
    if u == v:
        raise OracleError("u and v must be distinct variables")
    given = tuple(sorted(given))
    for name in (u, v):
        if name in given:
            raise OracleError(f"{name!r} cannot appear in the conditioning set")
    m_w = j.marginal(given)
    m_uw = j.marginal((u,) + given)
    m_vw = j.marginal((v,) + given)
    m_uvw = j.marginal((u, v) + given)
    worst = Fraction(0)
    for w_key, p_w in m_w.items():
        if p_w == 0:
            continue
        for u_val, v_val in product((0, 1), repeat=2):
            p_uvw = m_uvw.get((u_val, v_val) + w_key, Fraction(0))
            p_uw = m_uw.get((u_val,) + w_key, Fraction(0))
            p_vw = m_vw.get((v_val,) + w_key, Fraction(0))
            residual = abs(p_uvw / p_w - (p_uw / p_w) * (p_vw / p_w))
            worst = max(worst, residual)
    return worst


def conditional_independent(
    j: JointTable, u: str, v: str, given: Iterable[str] = (), tol: float = 1e-12
) -> bool:
    """True iff u and v are conditionally independent given ``given``.

    Computed in exact arithmetic; true independence yields a residual of
    exactly zero, so ``tol`` only matters for joints built from inexact cells.
    """
    return dependence_residual(j, u, v, given) <= Fraction(tol) if tol else (
        dependence_residual(j, u, v, given) == 0
    )


# -- faithfulness cross-check -----------------------------------------------------


@dataclass
class CrosscheckReport:
    """Outcome of validating graph separation against exact joints."""

    resolutions_checked: int = 0
    separation_queries: int = 0
    separation_confirmed: int = 0
    connection_draws: int = 0
    connection_dependent: int = 0
    soundness_violations: list[str] = field(default_factory=list)
    failed_connections: list[str] = field(default_factory=list)

    @property
    def dependence_rate(self) -> float:
        if self.connection_draws == 0:
            return 1.0
        return self.connection_dependent / self.connection_draws

    @property
    def ok(self) -> bool:
        return not self.soundness_violations and not self.failed_connections

    def summary(self) -> str:
        return (
            f"{self.resolutions_checked} resolution(s): "
            f"{self.separation_confirmed}/{self.separation_queries} separations exact, "
            f"{self.connection_dependent}/{self.connection_draws} connection draws dependent "
            f"({self.dependence_rate:.4f}), "
            f"{len(self.soundness_violations)} soundness violations, "
            f"{len(self.failed_connections)} failed connections"
        )


def _observed_nonselection(g: CausalGraph) -> list[str]:
    return [
        n.name
        for n in g.nodes
        if n.kind.observed and n.kind is not NodeKind.SELECTION
    ]


def enumerate_queries(g: CausalGraph, max_conditioning: int = 3):
    """All (u, v, W) triples over observed non-selection variables."""
    names = _observed_nonselection(g)
    for u, v in combinations(sorted(names), 2):
        rest = [n for n in names if n not in (u, v)]
        for size in range(0, min(max_conditioning, len(rest)) + 1):
            for w in combinations(sorted(rest), size):
                yield u, v, w


def faithfulness_crosscheck(
    g: CausalGraph,
    trials: int = 20,
    seed: int = 0,
    redraw_limit: int = 3,
    cpt_low: float = 0.05,
    cpt_high: float = 0.95,
) -> CrosscheckReport:
    """Validate every separation statement of ``g`` against exact joints built
    from random CPTs.

    Separation implying independence is asserted on every draw (a violation is
    a bug, not bad luck).  Connection implying dependence is a measure-one
    property: an independent-looking draw triggers a redraw, and only
    ``redraw_limit`` consecutive independent draws count as a failure.
    """
    rng = np.random.default_rng(seed)
    report = CrosscheckReport()
    for resolved in resolutions(g):
        report.resolutions_checked += 1
        queries = list(enumerate_queries(resolved))
        for trial in range(trials):
            cpts = random_cpts(resolved, rng, low=cpt_low, high=cpt_high)
            spec = ScmSpec(graph=resolved, cpts=cpts, n=1, seed=0)
            joint = joint_from_scm(spec, selected=True)
            for u, v, w in queries:
                separated = d_separated(resolved, u, v, w)
                independent = conditional_independent(joint, u, v, w, tol=0)
                if separated:
                    report.separation_queries += 1
                    if independent:
                        report.separation_confirmed += 1
                    else:
                        residual = float(dependence_residual(joint, u, v, w))
                        report.soundness_violations.append(
                            f"d-separated({u},{v}|{w}) but residual {residual:g} != 0"
                        )
                else:
                    consecutive_independent = 0
                    while True:
                        report.connection_draws += 1
                        if not independent:
                            report.connection_dependent += 1
                            break
                        consecutive_independent += 1
                        if consecutive_independent >= redraw_limit:
                            report.failed_connections.append(
                                f"d-connected({u},{v}|{w}) independent on "
                                f"{redraw_limit} consecutive draws"
                            )
                            break
                        redraw = random_cpts(resolved, rng, low=cpt_low, high=cpt_high)
                        respec = ScmSpec(graph=resolved, cpts=redraw, n=1, seed=0)
                        independent = conditional_independent(
                            joint_from_scm(respec, selected=True), u, v, w, tol=0
                        )
    return report
