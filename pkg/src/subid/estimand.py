"""Symbolic estimands over the sub-population observational distribution.

An estimand is a finite tree built from five node kinds:

* ``Prob(of, given)``   -- the conditional P(of | given, S=1).  Conditioning
  on the selected sub-population is implicit in every probability node.
* ``SumOver(over, body)`` -- sum of ``body`` over all joint values of ``over``.
* ``Product(factors)``  -- product of factors.
* ``Quotient(num, den)`` -- ratio.
* ``One()``             -- multiplicative unit.

Variables name graph vertices and range over finite integer domains supplied
by the probability table at evaluation time.  Binding follows standard
innermost-wins scoping: an inner ``SumOver`` may reuse a name bound further
out, and the inner binding shadows the outer one.  The identification
algorithms produce such shadowing naturally (a component factor marginalizes
internally over variables that the surrounding assembly sums again).

Construction goes through the lowercase helpers (:func:`prob`,
:func:`sum_over`, :func:`product`, :func:`quotient`), which canonicalize:
variable lists are sorted, products are flattened with unit factors dropped
and factors ordered by rendered form, empty sums disappear, and trivial
quotients collapse.  ``simplify`` additionally cancels telescoping quotient
chains; on strictly positive tables it preserves evaluation exactly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Union

from .components import is_ancestral, s_components
from .graph import AugmentedAdmg, GraphError

__all__ = [
    "Prob",
    "SumOver",
    "Product",
    "Quotient",
    "One",
    "ONE",
    "Estimand",
    "PositivityError",
    "prob",
    "sum_over",
    "product",
    "quotient",
    "free_vars",
    "rebound_variables",
    "evaluate",
    "render",
    "to_json",
    "from_json",
    "estimand_to_dict",
    "estimand_from_dict",
    "simplify",
    "QsFactor",
    "qs_base",
    "qs_marginalize",
    "qs_decompose",
]


class PositivityError(ValueError):
    """A conditional or quotient was evaluated against a zero denominator."""


@dataclass(frozen=True)
class Prob:
    of: tuple[str, ...]
    given: tuple[str, ...] = ()


@dataclass(frozen=True)
class SumOver:
    over: tuple[str, ...]
    body: "Estimand"


@dataclass(frozen=True)
class Product:
    factors: tuple["Estimand", ...]


@dataclass(frozen=True)
class Quotient:
    num: "Estimand"
    den: "Estimand"


@dataclass(frozen=True)
class One:
    pass


Estimand = Union[Prob, SumOver, Product, Quotient, One]

ONE = One()


def _names(values: Iterable[str], what: str) -> tuple[str, ...]:
    out = tuple(sorted(set(values)))
    for v in out:
        if not isinstance(v, str) or not v:
            raise ValueError(f"{what} must be non-empty strings, got {v!r}")
    return out


# -- constructors ------------------------------------------------------------


def prob(of: Iterable[str], given: Iterable[str] = ()) -> Estimand:
    """P(of | given, S=1).  An empty outcome set is the constant 1."""
    of_t = _names(of, "outcome variables")
    given_t = _names(given, "conditioning variables")
    overlap = set(of_t) & set(given_t)
    if overlap:
        raise ValueError(
            f"variables cannot be both outcome and conditioning: {sorted(overlap)}"
        )
    if not of_t:
        return ONE
    return Prob(of_t, given_t)


def sum_over(bound: Iterable[str], body: Estimand) -> Estimand:
    """Sum ``body`` over ``bound``; empty sums vanish, nested sums merge."""
    bound_t = _names(bound, "bound variables")
    if not bound_t:
        return body
    if isinstance(body, SumOver) and not set(bound_t) & set(body.over):
        return SumOver(tuple(sorted(set(bound_t) | set(body.over))), body.body)
    return SumOver(bound_t, body)


def product(factors: Iterable[Estimand]) -> Estimand:
    """Product of factors, flattened, unit-free, ordered by rendered form."""
    flat: list[Estimand] = []
    for f in factors:
        if isinstance(f, Product):
            flat.extend(f.factors)
        elif isinstance(f, One):
            continue
        else:
            flat.append(f)
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=lambda f: render(f, "text"))
    return Product(tuple(flat))


def quotient(num: Estimand, den: Estimand) -> Estimand:
    """num / den; unit denominators vanish, identical sides cancel."""
    if isinstance(den, One):
        return num
    if num == den:
        return ONE
    return Quotient(num, den)


# -- structural queries ------------------------------------------------------


def _free_map(root: Estimand) -> dict[int, tuple[str, ...]]:
    fmap: dict[int, tuple[str, ...]] = {}

    def walk(node: Estimand) -> tuple[str, ...]:
        key = id(node)
        cached = fmap.get(key)
        if cached is not None:
            return cached
        if isinstance(node, Prob):
            fv = set(node.of) | set(node.given)
        elif isinstance(node, SumOver):
            fv = set(walk(node.body)) - set(node.over)
        elif isinstance(node, Product):
            fv = set()
            for f in node.factors:
                fv |= set(walk(f))
        elif isinstance(node, Quotient):
            fv = set(walk(node.num)) | set(walk(node.den))
        else:
            fv = set()
        out = tuple(sorted(fv))
        fmap[key] = out
        return out

    walk(root)
    return fmap


def free_vars(e: Estimand) -> tuple[str, ...]:
    """Sorted names that must be assigned before ``e`` can be evaluated."""
    return _free_map(e)[id(e)]


def rebound_variables(e: Estimand) -> tuple[str, ...]:
    """Names bound by nested sums on a single root-to-leaf path (shadowing)."""
    hits: set[str] = set()

    def walk(node: Estimand, bound: frozenset[str]) -> None:
        if isinstance(node, SumOver):
            hits.update(set(node.over) & bound)
            walk(node.body, bound | set(node.over))
        elif isinstance(node, Product):
            for f in node.factors:
                walk(f, bound)
        elif isinstance(node, Quotient):
            walk(node.num, bound)
            walk(node.den, bound)

    walk(e, frozenset())
    return tuple(sorted(hits))


# -- evaluation ---------------------------------------------------------------


class SupportsLookup(Protocol):
    def domain_size(self, name: str) -> int: ...

    def prob(self, assignment: Mapping[str, int]) -> float: ...


def evaluate(
    e: Estimand, table: SupportsLookup, fixed: Mapping[str, int] | None = None
) -> float:
    """Evaluate ``e`` against a probability table.

    ``table`` supplies finite domains and marginal probabilities of partial
    assignments (it represents P(V | S=1), so Prob nodes need no special
    selection handling).  ``fixed`` assigns an integer value to every free
    variable of ``e``.  Values of subtrees are memoized per assignment of the
    subtree's free variables, so nested sums cost far less than the naive
    exponential walk.

    Raises :class:`PositivityError` when a conditioning event or an explicit
    denominator has probability zero under the table.
    """
    env0 = dict(fixed or {})
    fmap = _free_map(e)
    missing = [v for v in fmap[id(e)] if v not in env0]
    if missing:
        raise ValueError(f"no value given for free variables: {', '.join(missing)}")

    memo: dict[tuple[int, tuple[int, ...]], float] = {}

    def ev(node: Estimand, env: dict[str, int]) -> float:
        fv = fmap[id(node)]
        key = (id(node), tuple(env[v] for v in fv))
        cached = memo.get(key)
        if cached is not None:
            return cached
        if isinstance(node, One):
            val = 1.0
        elif isinstance(node, Prob):
            joint = {v: env[v] for v in node.of}
            joint.update((v, env[v]) for v in node.given)
            num = table.prob(joint)
            if node.given:
                cond = {v: env[v] for v in node.given}
                den = table.prob(cond)
                if den == 0.0:
                    raise PositivityError(
                        f"conditioning event has probability zero: {cond}"
                    )
                val = num / den
            else:
                val = num
        elif isinstance(node, SumOver):
            total = 0.0
            domains = [range(table.domain_size(v)) for v in node.over]
            for combo in itertools.product(*domains):
                inner = dict(env)
                inner.update(zip(node.over, combo))
                total += ev(node.body, inner)
            val = total
        elif isinstance(node, Product):
            val = 1.0
            for f in node.factors:
                val *= ev(f, env)
        elif isinstance(node, Quotient):
            den = ev(node.den, env)
            if den == 0.0:
                at = {v: env[v] for v in fmap[id(node.den)]}
                raise PositivityError(f"denominator evaluates to zero at {at}")
            val = ev(node.num, env) / den
        else:  # pragma: no cover - exhaustive over node kinds
            raise TypeError(f"not an estimand node: {node!r}")
        memo[key] = val
        return val

    return ev(e, env0)


# -- rendering ----------------------------------------------------------------


def _text(e: Estimand, sum_symbol: str) -> str:
    if isinstance(e, One):
        return "1"
    if isinstance(e, Prob):
        given = ",".join(e.given + ("S=1",))
        return f"P({','.join(e.of)}|{given})"
    if isinstance(e, SumOver):
        return f"{sum_symbol}_{{{','.join(e.over)}}} {_text(e.body, sum_symbol)}"
    if isinstance(e, Product):
        parts = []
        for f in e.factors:
            s = _text(f, sum_symbol)
            parts.append(f"({s})" if isinstance(f, Quotient) else s)
        return " ".join(parts)
    if isinstance(e, Quotient):
        def side(x: Estimand) -> str:
            s = _text(x, sum_symbol)
            return s if isinstance(x, (Prob, One)) else f"({s})"
        return f"{side(e.num)} / {side(e.den)}"
    raise TypeError(f"not an estimand node: {e!r}")


def _latex(e: Estimand) -> str:
    if isinstance(e, One):
        return "1"
    if isinstance(e, Prob):
        given = ", ".join(e.given + ("S=1",))
        return f"P({', '.join(e.of)} \\mid {given})"
    if isinstance(e, SumOver):
        return f"\\sum_{{{', '.join(e.over)}}} {_latex(e.body)}"
    if isinstance(e, Product):
        parts = []
        for f in e.factors:
            s = _latex(f)
            parts.append(f"\\left({s}\\right)" if isinstance(f, SumOver) else s)
        return " ".join(parts)
    if isinstance(e, Quotient):
        return f"\\frac{{{_latex(e.num)}}}{{{_latex(e.den)}}}"
    raise TypeError(f"not an estimand node: {e!r}")


def estimand_to_dict(e: Estimand) -> dict:
    if isinstance(e, One):
        return {"kind": "one"}
    if isinstance(e, Prob):
        return {"kind": "prob", "of": list(e.of), "given": list(e.given)}
    if isinstance(e, SumOver):
        return {"kind": "sum", "over": list(e.over), "body": estimand_to_dict(e.body)}
    if isinstance(e, Product):
        return {"kind": "product", "factors": [estimand_to_dict(f) for f in e.factors]}
    if isinstance(e, Quotient):
        return {
            "kind": "quotient",
            "num": estimand_to_dict(e.num),
            "den": estimand_to_dict(e.den),
        }
    raise TypeError(f"not an estimand node: {e!r}")


def estimand_from_dict(d: Mapping) -> Estimand:
    kind = d.get("kind")
    if kind == "one":
        return ONE
    if kind == "prob":
        return prob(d["of"], d.get("given", ()))
    if kind == "sum":
        return sum_over(d["over"], estimand_from_dict(d["body"]))
    if kind == "product":
        return product(estimand_from_dict(f) for f in d["factors"])
    if kind == "quotient":
        return quotient(estimand_from_dict(d["num"]), estimand_from_dict(d["den"]))
    raise ValueError(f"unknown estimand node kind: {kind!r}")


def to_json(e: Estimand) -> str:
    return json.dumps(estimand_to_dict(e), sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> Estimand:
    return estimand_from_dict(json.loads(text))


def render(e: Estimand, fmt: str = "text", *, unicode_sum: bool = True) -> str:
    """Render as ``text`` (``Σ``/``Sum`` prefix form), ``latex``, or ``json``."""
    if fmt == "text":
        return _text(e, "Σ" if unicode_sum else "Sum")
    if fmt == "latex":
        return _latex(e)
    if fmt == "json":
        return to_json(e)
    raise ValueError(f"unknown render format {fmt!r} (expected text, latex, or json)")


# -- simplification ------------------------------------------------------------


def simplify(e: Estimand) -> Estimand:
    """Cancel telescoping quotient chains and unit factors.

    Rules applied to products, to a fixpoint: (x/y)(y/z) -> x/z and
    f(g/f) -> g, plus the constructor identities (unit factors drop,
    quotients with equal sides collapse).  Evaluation is preserved on every
    strictly positive table.
    """
    if isinstance(e, SumOver):
        return sum_over(e.over, simplify(e.body))
    if isinstance(e, Quotient):
        return quotient(simplify(e.num), simplify(e.den))
    if not isinstance(e, Product):
        return e

    flat: list[Estimand] = []
    for f in e.factors:
        s = simplify(f)
        if isinstance(s, Product):
            flat.extend(s.factors)
        elif not isinstance(s, One):
            flat.append(s)

    changed = True
    while changed:
        changed = False
        for i, fi in enumerate(flat):
            for j, fj in enumerate(flat):
                if i == j:
                    continue
                merged = None
                if isinstance(fi, Quotient) and isinstance(fj, Quotient):
                    if fi.den == fj.num:
                        merged = quotient(fi.num, fj.den)
                elif isinstance(fj, Quotient) and fj.den == fi:
                    merged = fj.num
                if merged is not None:
                    flat[i] = merged
                    del flat[j]
                    changed = True
                    break
            if changed:
                break
    return product(flat)


# -- post-intervention factors over the sub-population -------------------------


@dataclass(frozen=True)
class QsFactor:
    """A symbolic post-intervention factor of the selected sub-population.

    ``scope`` is a subset of the observed vertices outside the selection
    vertex's ancestry; ``expr`` evaluates, on the observational table of any
    positive model compatible with the graph, to the probability of ``scope``
    under intervention on the rest of that non-ancestral part, conditioned on
    the selection ancestry and on being selected.
    """

    scope: tuple[str, ...]
    expr: Estimand


def qs_base(g: AugmentedAdmg) -> QsFactor:
    """The factor of the full non-ancestral part: plain observation.

    Its expression is P(non-ancestral part | selection ancestry, S=1); with an
    empty non-ancestral part the expression is the constant 1.
    """
    anc, non_anc = g.split_by_selection()
    return QsFactor(non_anc, prob(non_anc, anc))


def qs_marginalize(g: AugmentedAdmg, factor: QsFactor, to: Iterable[str]) -> QsFactor:
    """Shrink a factor to an ancestral strict subset of its scope by summing.

    Marginalizing a post-intervention factor is only valid when the target is
    closed under taking parents within the factor's scope; a non-ancestral
    target raises :class:`GraphError`.
    """
    target = g.vertex_set(to)
    if not set(target) < set(factor.scope):
        raise GraphError(
            f"target {{{', '.join(target)}}} must be a strict subset of the "
            f"factor scope {{{', '.join(factor.scope)}}}"
        )
    if not is_ancestral(g, target, factor.scope):
        raise GraphError(
            f"target {{{', '.join(target)}}} is not ancestral within "
            f"{{{', '.join(factor.scope)}}}; summing a post-intervention "
            "factor requires an ancestral target"
        )
    dropped = sorted(set(factor.scope) - set(target))
    return QsFactor(target, sum_over(dropped, factor.expr))


def qs_decompose(g: AugmentedAdmg, factor: QsFactor) -> list[QsFactor]:
    """Split a factor into one factor per s-component of its scope.

    Uses the telescoping-product construction over the topological order of
    the scope: the factor of a component is the product, over its members, of
    ratios of order-prefix marginals.  Telescoping ratios are cancelled, so a
    single-component scope returns the input expression unchanged.
    """
    comps = s_components(g, factor.scope)
    order = g.topological_order(factor.scope)
    prefix: list[Estimand] = [ONE]
    for i in range(1, len(order) + 1):
        prefix.append(sum_over(order[i:], factor.expr))
    pos = {v: i for i, v in enumerate(order, start=1)}
    out = []
    for comp in comps:
        ratios = [quotient(prefix[pos[v]], prefix[pos[v] - 1]) for v in comp]
        out.append(QsFactor(comp, simplify(product(ratios))))
    return out
