"""Exact finite-domain structural causal models for verifying estimands.

A :class:`DiscreteScm` realizes an augmented graph: every bidirected edge
becomes one explicit latent variable with two children, every vertex gets a
conditional probability table over its directed parents plus incident
latents, and the selection vertex is a binary variable whose value 1 means
"sampled".  All distributions are computed exactly by summing the full joint
(numpy broadcasting), never by simulation, so oracle answers are correct to
floating-point rounding.

:func:`verify` closes the loop: it runs the identification algorithm on a
graph, then compares the estimand, evaluated symbol by symbol against the
exact observational table of random models, with the directly mutilated
ground truth.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping

import numpy as np

from .estimand import PositivityError, estimand_to_dict, evaluate, free_vars, render
from .graph import AugmentedAdmg, GraphError
from .identify import HedgeWitness, SeparationWitness, s_id
from .parser import parse_graph

__all__ = [
    "ProbabilityTable",
    "DiscreteScm",
    "latent_name",
    "random_scm",
    "demo_model",
    "demo_graph_text",
    "iter_assignments",
    "verify",
]

# exact joints only: refuse state spaces past this many cells
MAX_STATES = 2**24


class ProbabilityTable:
    """An exact joint distribution over named finite variables.

    Values are a dense numpy array with one axis per variable, variables in
    sorted order.  ``prob`` returns the marginal probability of a partial
    assignment (variable name -> integer value); marginal arrays are cached.
    """

    __slots__ = ("_variables", "_domains", "_values", "_cache")

    def __init__(self, variables, domains, values, *, normalized: bool = True):
        self._variables = tuple(variables)
        if list(self._variables) != sorted(self._variables):
            raise ValueError("variables must be sorted")
        if len(set(self._variables)) != len(self._variables):
            raise ValueError("duplicate variable names")
        self._domains = dict(zip(self._variables, domains))
        arr = np.asarray(values, dtype=float)
        if arr.shape != tuple(self._domains[v] for v in self._variables):
            raise ValueError("value array shape does not match the domains")
        if (arr < 0).any():
            raise ValueError("probabilities must be nonnegative")
        if normalized and abs(float(arr.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {float(arr.sum())!r}, not 1")
        self._values = arr
        self._cache: dict[tuple[str, ...], np.ndarray] = {self._variables: arr}

    @property
    def variables(self) -> tuple[str, ...]:
        return self._variables

    def domain_size(self, name: str) -> int:
        try:
            return self._domains[name]
        except KeyError:
            raise KeyError(f"table has no variable {name!r}") from None

    @property
    def values(self) -> np.ndarray:
        return self._values.copy()

    def _marginal_array(self, keep: tuple[str, ...]) -> np.ndarray:
        cached = self._cache.get(keep)
        if cached is None:
            drop = tuple(
                i for i, v in enumerate(self._variables) if v not in set(keep)
            )
            cached = self._values.sum(axis=drop) if drop else self._values
            self._cache[keep] = cached
        return cached

    def prob(self, assignment: Mapping[str, int]) -> float:
        """Marginal probability that the named variables take these values."""
        keep = tuple(sorted(assignment))
        for v in keep:
            self.domain_size(v)
        arr = self._marginal_array(keep)
        return float(arr[tuple(assignment[v] for v in keep)])

    def marginal(self, keep: Iterable[str]) -> "ProbabilityTable":
        names = tuple(sorted(set(keep)))
        arr = self._marginal_array(names)
        return ProbabilityTable(
            names, tuple(self._domains[v] for v in names), arr, normalized=False
        )


def latent_name(u: str, v: str) -> str:
    """Canonical latent variable name for the bidirected edge between u and v."""
    a, b = sorted((u, v))
    return f"{a}~{b}"


def iter_assignments(
    names: Iterable[str], size_of
) -> Iterator[dict[str, int]]:
    """All assignments of the named variables; ``size_of(name)`` gives domains."""
    names = tuple(names)
    for combo in itertools.product(*(range(size_of(n)) for n in names)):
        yield dict(zip(names, combo))


class DiscreteScm:
    """A structural causal model over an augmented graph with finite domains.

    Parameters
    ----------
    graph:
        Augmented graph with a selection vertex.
    domains:
        Domain size per vertex.  The selection vertex is always binary;
        latents default to binary unless listed here under their
        :func:`latent_name`.
    cpts:
        One table per vertex and per latent.  A variable's table has one axis
        per parent, parents sorted by name (directed parents plus the latents
        of incident bidirected edges; latents have no parents), and a final
        axis for the variable itself.  Rows must sum to 1.
    """

    def __init__(
        self,
        graph: AugmentedAdmg,
        domains: Mapping[str, int],
        cpts: Mapping[str, np.ndarray],
    ):
        if graph.selection is None:
            raise GraphError("an SCM requires a graph with a selection vertex")
        self.graph = graph
        self._latents = tuple(sorted(latent_name(u, v) for u, v in graph.bidirected_edges))
        clash = sorted(set(self._latents) & set(graph.vertices))
        if clash:
            raise GraphError(
                f"vertex names collide with latent names: {', '.join(clash)}"
            )

        sizes: dict[str, int] = {}
        for v in graph.vertices:
            sizes[v] = 2 if v == graph.selection else int(domains[v])
        for l in self._latents:
            sizes[l] = int(domains.get(l, 2))
        for name, k in sizes.items():
            if k < 2:
                raise ValueError(f"domain of {name!r} must have at least 2 values")
        self._sizes = sizes
        self._names = tuple(sorted(sizes))
        if int(np.prod([sizes[n] for n in self._names])) > MAX_STATES:
            raise ValueError(
                f"state space exceeds {MAX_STATES} cells; exact computation refused"
            )

        incident: dict[str, list[str]] = {v: [] for v in graph.vertices}
        for u, v in graph.bidirected_edges:
            incident[u].append(latent_name(u, v))
            incident[v].append(latent_name(u, v))
        self._parents: dict[str, tuple[str, ...]] = {}
        for v in graph.vertices:
            self._parents[v] = tuple(sorted(set(graph.parents(v)) | set(incident[v])))
        for l in self._latents:
            self._parents[l] = ()

        self._cpts: dict[str, np.ndarray] = {}
        for name in self._names:
            try:
                raw = cpts[name]
            except KeyError:
                raise ValueError(f"missing conditional table for {name!r}") from None
            want = tuple(sizes[p] for p in self._parents[name]) + (sizes[name],)
            arr = np.asarray(raw, dtype=float)
            if arr.shape != want:
                raise ValueError(
                    f"table for {name!r} has shape {arr.shape}, expected {want} "
                    f"(parents {self._parents[name]})"
                )
            if (arr < 0).any():
                raise ValueError(f"table for {name!r} has negative entries")
            if not np.allclose(arr.sum(axis=-1), 1.0, rtol=0.0, atol=1e-12):
                raise ValueError(f"rows of the table for {name!r} do not sum to 1")
            self._cpts[name] = arr

    # -- structure accessors -------------------------------------------------

    @property
    def latents(self) -> tuple[str, ...]:
        return self._latents

    def parent_list(self, name: str) -> tuple[str, ...]:
        return self._parents[name]

    def domain_size(self, name: str) -> int:
        return self._sizes[name]

    # -- exact distributions ---------------------------------------------------

    def _expanded(self, name: str) -> np.ndarray:
        """The CPT of ``name`` broadcast over the full variable order."""
        axes = self._parents[name] + (name,)
        positions = [self._names.index(a) for a in axes]
        arr = np.transpose(self._cpts[name], np.argsort(positions))
        shape = [1] * len(self._names)
        for p in positions:
            shape[p] = self._sizes[self._names[p]]
        return arr.reshape(shape)

    def _full_joint(self, do: Mapping[str, int] | None = None) -> np.ndarray:
        do = dict(do or {})
        for v, val in do.items():
            if v not in set(self.graph.observed):
                raise GraphError(f"cannot intervene on {v!r}")
            if not 0 <= val < self._sizes[v]:
                raise ValueError(f"value {val} out of range for {v!r}")
        arr = np.ones([self._sizes[n] for n in self._names])
        for name in self._names:
            if name in do:
                point = np.zeros(self._sizes[name])
                point[do[name]] = 1.0
                shape = [1] * len(self._names)
                shape[self._names.index(name)] = self._sizes[name]
                arr = arr * point.reshape(shape)
            else:
                arr = arr * self._expanded(name)
        return arr

    def _table(self, arr: np.ndarray, keep: set[str]) -> ProbabilityTable:
        drop = tuple(i for i, n in enumerate(self._names) if n not in keep)
        kept = tuple(n for n in self._names if n in keep)
        values = arr.sum(axis=drop) if drop else arr
        return ProbabilityTable(kept, tuple(self._sizes[n] for n in kept), values)

    def latent_joint(self) -> ProbabilityTable:
        """Exact joint over every variable, latents and selection included."""
        return self._table(self._full_joint(), set(self._names))

    def joint(self) -> ProbabilityTable:
        """Exact joint over the observed vertices and the selection vertex."""
        return self._table(self._full_joint(), set(self.graph.vertices))

    def observational_s(self) -> ProbabilityTable:
        """P(V | S=1): the observational distribution of the sub-population."""
        return self._condition_selected(self._full_joint(), set(self.graph.observed))

    def interventional_joint(self, do: Mapping[str, int]) -> ProbabilityTable:
        """Post-intervention joint over the untouched vertices plus selection."""
        keep = (set(self.graph.vertices)) - set(do)
        return self._table(self._full_joint(do), keep)

    def interventional_s(self, do: Mapping[str, int]) -> ProbabilityTable:
        """Post-intervention distribution inside the selected sub-population."""
        keep = set(self.graph.observed) - set(do)
        return self._condition_selected(self._full_joint(do), keep)

    def interventional_population(self, do: Mapping[str, int]) -> ProbabilityTable:
        """Post-intervention distribution of the whole population."""
        keep = set(self.graph.observed) - set(do)
        return self._table(self._full_joint(do), keep)

    def _condition_selected(self, arr: np.ndarray, keep: set[str]) -> ProbabilityTable:
        sel = self.graph.selection
        axis = self._names.index(sel)
        sliced = np.take(arr, 1, axis=axis)
        total = float(sliced.sum())
        if total <= 0.0:
            raise PositivityError("the selected sub-population has probability zero")
        rest = tuple(n for n in self._names if n != sel)
        drop = tuple(i for i, n in enumerate(rest) if n not in keep)
        kept = tuple(n for n in rest if n in keep)
        values = (sliced / total).sum(axis=drop) if drop else sliced / total
        return ProbabilityTable(kept, tuple(self._sizes[n] for n in kept), values)


def random_scm(
    g: AugmentedAdmg,
    domain_size: int = 2,
    min_prob: float = 0.05,
    seed: int = 0,
) -> DiscreteScm:
    """A random positive SCM over ``g``, deterministic in ``seed``.

    Every row of every table is drawn uniformly from the probability simplex
    and then shrunk affinely toward the uniform distribution so that each
    entry is at least ``min_prob``; selection rows therefore stay inside
    [min_prob, 1 - min_prob] and the sub-population distribution is strictly
    positive.  ``min_prob = 1/domain_size`` degenerates to exactly uniform
    tables.
    """
    if domain_size < 2:
        raise ValueError("domain_size must be at least 2")
    if not 0.0 < min_prob <= 1.0 / domain_size:
        raise ValueError(
            f"min_prob must lie in (0, 1/domain_size]; got {min_prob} "
            f"with domain_size {domain_size}"
        )
    if g.selection is None:
        raise GraphError("random_scm requires a graph with a selection vertex")
    rng = np.random.default_rng(seed)
    sizes: dict[str, int] = {v: domain_size for v in g.observed}
    sizes[g.selection] = 2
    for u, v in g.bidirected_edges:
        sizes[latent_name(u, v)] = domain_size

    incident: dict[str, list[str]] = {v: [] for v in g.vertices}
    for u, v in g.bidirected_edges:
        incident[u].append(latent_name(u, v))
        incident[v].append(latent_name(u, v))

    def draw(parent_sizes: tuple[int, ...], k: int) -> np.ndarray:
        rows = int(np.prod(parent_sizes)) if parent_sizes else 1
        flat = rng.dirichlet(np.ones(k), size=rows)
        flat = min_prob + (1.0 - k * min_prob) * flat
        return flat.reshape(parent_sizes + (k,))

    vertex_set = set(g.vertices)
    cpts: dict[str, np.ndarray] = {}
    for name in sorted(sizes):
        if name in vertex_set:
            parents = tuple(sorted(set(g.parents(name)) | set(incident[name])))
        else:
            parents = ()
        cpts[name] = draw(tuple(sizes[p] for p in parents), sizes[name])
    return DiscreteScm(g, sizes, cpts)


demo_graph_text = "X -> Y\nZ -> S\nX <-> Z\nY <-> S\n"


def demo_model() -> DiscreteScm:
    """A small binary model with a known closed-form sub-population effect.

    Structure: X -> Y, Z -> S, X <-> Z, Y <-> S.  X and Z share a fair latent
    coin flipped with noise 0.2; Y is X xor the latent shared with S; S mixes
    Z and that latent through noisy xors.  Exact values:
    P(S=1 | U=0) = 0.34, P(S=1 | U=1) = 0.628 for the Y-side latent U, and
    the sub-population effect of do(X=0) on Y=1 is 0.628/0.968.
    """
    g = parse_graph(demo_graph_text).graph
    u_xz = latent_name("X", "Z")
    u_ys = latent_name("Y", "S")

    def noisy(flip: float) -> np.ndarray:
        # P(child = parent xor noise), noise ~ Bernoulli(flip)
        return np.array([[1 - flip, flip], [flip, 1 - flip]])

    def xor_mix(pz: float, pu: float, pn: float) -> np.ndarray:
        # P(S=1 | u, z) with S = (z and e1) xor (u and e2) xor e3
        out = np.empty((2, 2, 2))
        for u, z in itertools.product((0, 1), repeat=2):
            p1 = 0.0
            for e1, e2, e3 in itertools.product((0, 1), repeat=3):
                w = (pz if e1 else 1 - pz) * (pu if e2 else 1 - pu) * (
                    pn if e3 else 1 - pn
                )
                if (z & e1) ^ (u & e2) ^ e3:
                    p1 += w
            out[u, z] = (1 - p1, p1)
        return out

    xor_cpt = np.array([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]])
    cpts = {
        u_xz: np.array([0.5, 0.5]),
        u_ys: np.array([0.5, 0.5]),
        "X": noisy(0.2),          # parent: the X~Z latent
        "Z": noisy(0.2),          # parent: the X~Z latent
        "Y": xor_cpt,             # parents sorted: (S~Y latent, X)
        "S": xor_mix(0.6, 0.9, 0.1),  # parents sorted: (S~Y latent, Z)
    }
    domains = {v: 2 for v in g.vertices}
    return DiscreteScm(g, domains, cpts)


def verify(
    g: AugmentedAdmg,
    treatment: Iterable[str],
    outcome: Iterable[str],
    trials: int = 20,
    domain_size: int = 2,
    min_prob: float = 0.05,
    seed: int = 0,
) -> dict:
    """Identify, then check the estimand against exact random models.

    For each trial a fresh random positive SCM over ``g`` is drawn and the
    estimand is evaluated on its exact observational sub-population table at
    every treatment/outcome assignment, against the directly computed
    post-intervention sub-population distribution.  Returns a JSON-ready
    report; identical arguments give bit-identical reports.
    """
    x = g.vertex_set(treatment)
    y = g.vertex_set(outcome)
    result = s_id(g, x, y)
    report: dict = {
        "query": {"treatment": list(x), "outcome": list(y)},
        "status": result.status,
        "estimand": None,
        "witness": None,
        "trials": 0,
        "max_abs_error": None,
        "per_trial": [],
    }
    if not result.identifiable:
        w = result.witness
        if isinstance(w, HedgeWitness):
            report["witness"] = {
                "kind": "s-hedge",
                "component": list(w.component),
                "hedge": list(w.hedge),
            }
        elif isinstance(w, SeparationWitness):
            report["witness"] = {
                "kind": "separation",
                "left": list(w.left),
                "right": list(w.right),
                "given": list(w.given),
                "bar_in": list(w.bar_in),
                "bar_out": list(w.bar_out),
            }
        return report

    est = result.estimand
    report["estimand"] = estimand_to_dict(est)
    report["estimand_text"] = render(est, "text", unicode_sum=False)
    # intervention coordinates the value provably does not depend on
    extras = sorted(set(free_vars(est)) - set(x) - set(y))
    per_trial = []
    worst = 0.0
    for t in range(trials):
        trial_seed = seed + t
        scm = random_scm(g, domain_size, min_prob, trial_seed)
        obs = scm.observational_s()
        err = 0.0
        for do in iter_assignments(x, scm.domain_size):
            truth = scm.interventional_s(do)
            for out in iter_assignments(y, scm.domain_size):
                fixed = {**do, **out, **{v: 0 for v in extras}}
                got = evaluate(est, obs, fixed)
                err = max(err, abs(got - truth.prob(out)))
        per_trial.append({"seed": trial_seed, "error": err})
        worst = max(worst, err)
    report["trials"] = trials
    report["max_abs_error"] = worst
    report["per_trial"] = per_trial
    return report
