"""Identification of interventional effects within a selected sub-population.

Given an augmented graph and disjoint treatment/outcome sets, :func:`s_id`
decides whether the post-intervention outcome distribution *of the
sub-population* is expressible from the sub-population's observational
distribution alone, and builds the expression when it is.  :func:`s_recover`
answers the population-level version by first checking that selection is
ignorable for the query.  :func:`is_id` is the classical identification
criterion on a plain mixed graph, used for cross-checking.

Failures carry machine-checkable witnesses: either an m-separation test that
the query fails after edge surgery, or an s-hedge.  A separation failure is
definitive; a hedge failure means "not identified by this algorithm".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .components import c_components, find_hedge, find_s_hedge, s_components
from .estimand import (
    Estimand,
    QsFactor,
    ONE,
    prob,
    product,
    qs_base,
    qs_decompose,
    qs_marginalize,
    simplify,
    sum_over,
)
from .graph import AugmentedAdmg, GraphError
from .separation import m_separated

__all__ = [
    "IdentifyResult",
    "SeparationWitness",
    "HedgeWitness",
    "sid_separation",
    "s_id",
    "s_id_single",
    "s_recover",
    "is_id",
]


@dataclass(frozen=True)
class SeparationWitness:
    """An m-separation requirement that the query violates.

    Re-check: ``m_separated(g.edge_surgery(bar_in, bar_out), left, right,
    given)`` must be False.
    """

    left: tuple[str, ...]
    right: tuple[str, ...]
    given: tuple[str, ...]
    bar_in: tuple[str, ...]
    bar_out: tuple[str, ...]


@dataclass(frozen=True)
class HedgeWitness:
    """An s-hedge ``hedge`` for the s-component ``component``."""

    component: tuple[str, ...]
    hedge: tuple[str, ...]


Witness = Union[SeparationWitness, HedgeWitness]


@dataclass(frozen=True)
class IdentifyResult:
    status: str  # "identifiable" or "fail"
    estimand: Estimand | None = None
    witness: Witness | None = None

    @property
    def identifiable(self) -> bool:
        return self.status == "identifiable"


def _selection(g: AugmentedAdmg) -> str:
    if g.selection is None:
        raise GraphError("graph has no selection vertex")
    return g.selection


def _query_sets(
    g: AugmentedAdmg, treatment: Iterable[str], outcome: Iterable[str]
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    x = g.vertex_set(treatment)
    y = g.vertex_set(outcome)
    if not y:
        raise GraphError("outcome set must be nonempty")
    overlap = sorted(set(x) & set(y))
    if overlap:
        raise GraphError(f"treatment and outcome overlap on {', '.join(overlap)}")
    sel = g.selection
    if sel is not None and sel in set(x) | set(y):
        raise GraphError(f"the selection vertex {sel!r} cannot appear in a query")
    return x, y


def sid_separation(
    g: AugmentedAdmg, treatment: Iterable[str], outcome: Iterable[str]
) -> bool:
    """Separation precondition for sub-population identification.

    Split the treatment by selection ancestry into Xa (ancestors of the
    selection vertex) and Xn (the rest).  The condition holds when Xa is
    m-separated from the outcome by Xn plus the selection vertex, in the graph
    with incoming edges of Xn and outgoing edges of Xa removed.  Failing it
    means the effect is not identifiable from sub-population data at all.
    """
    x, y = _query_sets(g, treatment, outcome)
    sel = _selection(g)
    anc, _ = g.split_by_selection()
    xa = tuple(v for v in x if v in set(anc))
    xn = tuple(v for v in x if v not in set(anc))
    if not xa:
        return True
    cut = g.edge_surgery(bar_in=xn, bar_out=xa)
    return m_separated(cut, xa, y, xn + (sel,))


def s_id_single(
    g: AugmentedAdmg, component: Iterable[str], factor: QsFactor
) -> QsFactor | None:
    """Express the factor of one s-component from an enclosing factor.

    ``component`` must be a single s-component contained in ``factor.scope``,
    itself a single s-component.  Returns the component's factor, or None when
    the shrinking recursion gets stuck (the stuck scope is then an s-hedge for
    the component).
    """
    c = g.vertex_set(component)
    t = factor.scope
    if not set(c) <= set(t):
        raise GraphError(
            f"component {{{', '.join(c)}}} is not contained in the factor "
            f"scope {{{', '.join(t)}}}"
        )
    if s_components(g, c) != [c]:
        raise GraphError(f"{{{', '.join(c)}}} is not a single s-component")
    if s_components(g, t) != [t]:
        raise GraphError(f"{{{', '.join(t)}}} is not a single s-component")

    anc = g.induced_subgraph(t).ancestors(c)
    if anc == c:
        if c == t:
            return factor
        return qs_marginalize(g, factor, c)
    if anc == t:
        return None
    narrowed = qs_marginalize(g, factor, anc)
    nxt = next(p for p in qs_decompose(g, narrowed) if c[0] in p.scope)
    if not set(c) <= set(nxt.scope):
        raise RuntimeError(
            "internal error: component split across s-components of its ancestry"
        )
    if len(nxt.scope) >= len(t):
        raise RuntimeError("internal error: non-shrinking identification step")
    return s_id_single(g, c, nxt)


def s_id(
    g: AugmentedAdmg, treatment: Iterable[str], outcome: Iterable[str]
) -> IdentifyResult:
    """Decide sub-population identifiability and build the estimand.

    The returned estimand, evaluated on the exact observational table
    P(V | S=1) of any positive model compatible with ``g``, equals the
    post-intervention sub-population distribution of the outcome at every
    assignment.  Free variables of the estimand beyond treatment and outcome
    (intervention coordinates with no influence on the value) may be pinned
    to any value.
    """
    x, y = _query_sets(g, treatment, outcome)
    sel = _selection(g)
    anc, non_anc = g.split_by_selection()
    anc_set, non_anc_set = set(anc), set(non_anc)
    xa = tuple(v for v in x if v in anc_set)
    xn = tuple(v for v in x if v in non_anc_set)
    ya = tuple(v for v in y if v in anc_set)
    yn = tuple(v for v in y if v in non_anc_set)

    if not sid_separation(g, x, y):
        return IdentifyResult(
            "fail",
            witness=SeparationWitness(
                left=xa, right=y, given=tuple(sorted(xn + (sel,))),
                bar_in=xn, bar_out=xa,
            ),
        )

    scope = sorted(non_anc_set - set(xn))
    d = g.induced_subgraph(scope).ancestors(yn)
    enclosing = qs_decompose(g, qs_base(g))
    parts: list[QsFactor] = []
    for comp in s_components(g, d):
        outer = next(t for t in enclosing if comp[0] in t.scope)
        if not set(comp) <= set(outer.scope):
            raise RuntimeError(
                "internal error: component split across s-components of the "
                "non-ancestral part"
            )
        got = s_id_single(g, comp, outer)
        if got is None:
            hedge = find_s_hedge(g, comp)
            if hedge is None:  # pragma: no cover - same shrink chain cannot differ
                raise RuntimeError("internal error: stuck recursion without an s-hedge")
            return IdentifyResult("fail", witness=HedgeWitness(comp, hedge))
        parts.append(got)

    marginal = tuple(sorted(anc_set - set(xa) - set(ya)))
    outer_prob = prob(ya + marginal, xa)
    inner = sum_over(set(d) - set(yn), product(p.expr for p in parts))
    est = simplify(sum_over(marginal, product([outer_prob, inner])))
    return IdentifyResult("identifiable", estimand=est)


def s_recover(
    g: AugmentedAdmg, treatment: Iterable[str], outcome: Iterable[str]
) -> IdentifyResult:
    """Decide whether the population-level effect is recoverable.

    Requires the outcome to be m-separated from the selection vertex by the
    treatment once incoming treatment edges are removed (selection is then
    ignorable for the query, and the population effect coincides with the
    sub-population one); the remaining work is delegated to :func:`s_id`.
    A separation failure here is definitive: the population effect is not
    recoverable from sub-population data.
    """
    x, y = _query_sets(g, treatment, outcome)
    sel = _selection(g)
    cut = g.edge_surgery(bar_in=x)
    if not m_separated(cut, y, (sel,), x):
        return IdentifyResult(
            "fail",
            witness=SeparationWitness(
                left=y, right=(sel,), given=x, bar_in=x, bar_out=(),
            ),
        )
    return s_id(g, x, y)


def is_id(
    g: AugmentedAdmg, treatment: Iterable[str], outcome: Iterable[str]
) -> bool:
    """Classical identifiability of the population effect on a mixed graph.

    The effect is identifiable exactly when no c-component of the ancestry of
    the outcome (taken in the graph without the treatment) admits a hedge.
    Selection plays no role here; a selection vertex, if present, participates
    as an ordinary vertex.
    """
    x = g.vertex_set(treatment)
    y = g.vertex_set(outcome)
    if not y:
        raise GraphError("outcome set must be nonempty")
    overlap = sorted(set(x) & set(y))
    if overlap:
        raise GraphError(f"treatment and outcome overlap on {', '.join(overlap)}")
    scope = sorted(set(g.vertices) - set(x))
    d = g.induced_subgraph(scope).ancestors(y)
    for comp in c_components(g, d):
        if find_hedge(g, comp) is not None:
            return False
    return True
