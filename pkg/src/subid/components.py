"""Confounded components and hedge detection.

A c-component of a vertex set is a maximal class connected by bidirected
edges within the induced subgraph.  An s-component of a set H (H disjoint
from the selection vertex's ancestry) is the nonempty intersection with H of
a c-component of the induced subgraph on H plus the full ancestry of the
selection vertex: confounding that is only mediated through the selected
sub-population still ties vertices of H together.

A hedge for a bidirected-connected set Y is a strictly larger set H that is
itself a single c-component and equals the ancestry of Y inside it; an
s-hedge is the same shape with s-components.  Hedges are the obstruction to
identification, s-hedges the obstruction in the sub-population setting.
"""

from __future__ import annotations

from typing import Iterable

from .graph import AugmentedAdmg, GraphError

__all__ = [
    "c_components",
    "s_components",
    "is_ancestral",
    "find_hedge",
    "find_s_hedge",
    "is_hedge",
    "is_s_hedge",
]


def c_components(
    g: AugmentedAdmg, scope: Iterable[str] | None = None
) -> list[tuple[str, ...]]:
    """Bidirected-connected components of the induced subgraph on ``scope``.

    Components are sorted internally and listed by their least member.
    """
    pool = set(g.vertices if scope is None else g.vertex_set(scope))
    out: list[tuple[str, ...]] = []
    unvisited = set(pool)
    while unvisited:
        seed = min(unvisited)
        comp = {seed}
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            for sib in g.siblings(v):
                if sib in pool and sib not in comp:
                    comp.add(sib)
                    frontier.append(sib)
        unvisited -= comp
        out.append(tuple(sorted(comp)))
    out.sort(key=lambda c: c[0])
    return out


def s_components(g: AugmentedAdmg, members: Iterable[str]) -> list[tuple[str, ...]]:
    """s-components of ``members``, which must avoid the selection's ancestry.

    Computed as the nonempty traces on ``members`` of the c-components of the
    induced subgraph on ``members`` plus every ancestor of the selection
    vertex (selection vertex included).
    """
    sel = g.selection
    if sel is None:
        raise GraphError("graph has no selection vertex")
    h = g.vertex_set(members)
    anc = set(g.ancestors([sel]))
    bad = sorted(set(h) & anc)
    if bad:
        raise GraphError(
            "s-components are only defined for sets outside the selection "
            f"vertex's ancestry; offending vertices: {', '.join(bad)}"
        )
    h_set = set(h)
    out = []
    for comp in c_components(g, h_set | anc):
        trace = tuple(v for v in comp if v in h_set)
        if trace:
            out.append(trace)
    out.sort(key=lambda c: c[0])
    return out


def is_ancestral(g: AugmentedAdmg, subset: Iterable[str], scope: Iterable[str]) -> bool:
    """True when ``subset`` is closed under taking parents inside ``scope``."""
    sub = g.vertex_set(subset)
    sco = g.vertex_set(scope)
    if not set(sub) <= set(sco):
        raise GraphError("subset must lie inside the scope")
    return g.induced_subgraph(sco).ancestors(sub) == sub


def _shrink_fixpoint(g, outcome, start, component_fn):
    """Iterate T <- component(ancestry of outcome within T) to a fixpoint."""
    anchor = outcome[0]
    t = start
    while True:
        anc = g.induced_subgraph(t).ancestors(outcome)
        nxt = next(c for c in component_fn(anc) if anchor in c)
        if nxt == t:
            return None if t == outcome else t
        t = nxt


def find_hedge(g: AugmentedAdmg, outcome: Iterable[str]) -> tuple[str, ...] | None:
    """A hedge for ``outcome`` if one exists, else None.

    ``outcome`` must be a single c-component.  The search shrinks the
    c-component of the full graph containing the outcome until it stabilizes;
    the fixpoint is the outcome itself exactly when no hedge exists.  The
    returned witness is deterministic but makes no minimality claim.
    """
    y = g.vertex_set(outcome)
    if not y:
        raise GraphError("outcome must be nonempty")
    if c_components(g, y) != [y]:
        raise GraphError(f"outcome {{{', '.join(y)}}} is not a single c-component")
    start = next(c for c in c_components(g) if y[0] in c)
    return _shrink_fixpoint(g, y, start, lambda anc: c_components(g, anc))


def find_s_hedge(g: AugmentedAdmg, outcome: Iterable[str]) -> tuple[str, ...] | None:
    """An s-hedge for ``outcome`` if one exists, else None.

    ``outcome`` must avoid the selection ancestry and form a single
    s-component.  Same shrink-map search as :func:`find_hedge`, run with
    s-components over the non-ancestral part of the graph.
    """
    y = g.vertex_set(outcome)
    if not y:
        raise GraphError("outcome must be nonempty")
    if s_components(g, y) != [y]:
        raise GraphError(f"outcome {{{', '.join(y)}}} is not a single s-component")
    _, non_anc = g.split_by_selection()
    start = next(c for c in s_components(g, non_anc) if y[0] in c)
    return _shrink_fixpoint(g, y, start, lambda anc: s_components(g, anc))


def is_hedge(g: AugmentedAdmg, outcome: Iterable[str], candidate: Iterable[str]) -> bool:
    """Definitional re-check: ``candidate`` is a hedge for ``outcome``."""
    y = g.vertex_set(outcome)
    h = g.vertex_set(candidate)
    return (
        c_components(g, y) == [y]
        and set(y) < set(h)
        and c_components(g, h) == [h]
        and g.induced_subgraph(h).ancestors(y) == h
    )


def is_s_hedge(g: AugmentedAdmg, outcome: Iterable[str], candidate: Iterable[str]) -> bool:
    """Definitional re-check: ``candidate`` is an s-hedge for ``outcome``."""
    y = g.vertex_set(outcome)
    h = g.vertex_set(candidate)
    return (
        s_components(g, y) == [y]
        and set(y) < set(h)
        and s_components(g, h) == [h]
        and g.induced_subgraph(h).ancestors(y) == h
    )
