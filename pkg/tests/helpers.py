"""Shared generators and independent oracles for the test suite.

Everything here is deliberately naive: subset enumeration for hedges,
per-assignment mutilated joints for ground-truth factors.  The point is that
none of it shares code paths with the implementations under test.
"""

import itertools

import numpy as np

from subid import (
    AugmentedAdmg,
    ProbabilityTable,
    is_hedge,
    is_s_hedge,
    iter_assignments,
    prob,
    product,
    quotient,
    sum_over,
)

LETTERS = "ABCDEFG"


# -- random structures --------------------------------------------------------


def random_admg(rng, n_obs=None, p_dir=0.3, p_bi=0.2, p_sel_dir=0.35, p_sel_bi=0.25):
    """A random augmented graph over single-letter vertices plus selection S."""
    if n_obs is None:
        n_obs = int(rng.integers(2, 7))
    names = list(LETTERS[:n_obs])
    order = [names[i] for i in rng.permutation(n_obs)]
    directed = [
        (order[i], order[j])
        for i in range(n_obs)
        for j in range(i + 1, n_obs)
        if rng.random() < p_dir
    ]
    bidirected = [
        pair for pair in itertools.combinations(names, 2) if rng.random() < p_bi
    ]
    directed += [(v, "S") for v in names if rng.random() < p_sel_dir]
    bidirected += [(v, "S") for v in names if rng.random() < p_sel_bi]
    return AugmentedAdmg(names + ["S"], directed, bidirected, selection="S")


def random_dag_admg(rng, n_obs=None, p_dir=0.4, p_sel_dir=0.4):
    """Like random_admg but without any bidirected edges."""
    return random_admg(rng, n_obs, p_dir=p_dir, p_bi=0.0, p_sel_dir=p_sel_dir, p_sel_bi=0.0)


def random_query(rng, g, max_side=2):
    """Disjoint nonempty treatment/outcome sets over the observed vertices."""
    pool = list(g.observed)
    nx = int(rng.integers(1, max_side + 1))
    ny = int(rng.integers(1, max_side + 1))
    if nx + ny > len(pool):
        nx, ny = 1, 1
    picked = [pool[i] for i in rng.choice(len(pool), size=nx + ny, replace=False)]
    return tuple(sorted(picked[:nx])), tuple(sorted(picked[nx:]))


def random_table(rng, names, size=2, floor=0.02):
    """A strictly positive joint distribution over the given variables."""
    names = tuple(sorted(names))
    shape = tuple(size for _ in names)
    values = rng.random(shape) + floor
    values /= values.sum()
    return ProbabilityTable(names, shape, values)


def random_estimand(rng, names, depth=3):
    """A random estimand tree over the given variable names."""
    names = list(names)

    def pick(k):
        k = min(k, len(names))
        idx = rng.choice(len(names), size=k, replace=False)
        return [names[i] for i in idx]

    def build(d):
        kinds = ["prob"] if d == 0 else ["prob", "sum", "product", "quotient"]
        kind = kinds[int(rng.integers(0, len(kinds)))]
        if kind == "prob":
            chosen = pick(int(rng.integers(1, 4)))
            cut = int(rng.integers(1, len(chosen) + 1))
            return prob(chosen[:cut], chosen[cut:])
        if kind == "sum":
            return sum_over(pick(int(rng.integers(1, 3))), build(d - 1))
        if kind == "product":
            return product(build(d - 1) for _ in range(int(rng.integers(2, 4))))
        return quotient(build(d - 1), build(d - 1))

    return build(depth)


# -- brute-force hedge existence ----------------------------------------------


def brute_force_hedge(g, outcome):
    """Smallest-first subset enumeration of hedge candidates."""
    y = set(outcome)
    rest = [v for v in g.vertices if v not in y]
    for r in range(1, len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            h = tuple(sorted(y | set(extra)))
            if is_hedge(g, outcome, h):
                return h
    return None


def brute_force_s_hedge(g, outcome):
    """Subset enumeration over the non-ancestral part only."""
    _, non_anc = g.split_by_selection()
    y = set(outcome)
    rest = [v for v in non_anc if v not in y]
    for r in range(1, len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            h = tuple(sorted(y | set(extra)))
            if is_s_hedge(g, outcome, h):
                return h
    return None


# -- exact ground-truth factors -------------------------------------------------


def q_ground_truth(scm, targets, s_value=1):
    """Post-intervention probability of ``targets`` for every assignment.

    Intervenes on every observed vertex outside ``targets``; the selection
    vertex, when listed in ``targets``, is evaluated at ``s_value``.  Returns
    an array with one axis per observed vertex (sorted); the value at a full
    observed assignment is the target probability with interventions read off
    that same assignment.
    """
    g = scm.graph
    sel = g.selection
    obs = sorted(g.observed)
    t_obs = sorted(set(targets) - {sel})
    with_s = sel in set(targets)
    do_vars = sorted(set(obs) - set(t_obs))
    out = np.empty([scm.domain_size(v) for v in obs])
    for do in iter_assignments(do_vars, scm.domain_size):
        tbl = scm.interventional_joint(do)
        for rest in iter_assignments(t_obs, scm.domain_size):
            query = dict(rest)
            if with_s:
                query[sel] = s_value
            p = tbl.prob(query)
            full = {**do, **rest}
            out[tuple(full[v] for v in obs)] = p
    return out


def qs_ground_truth(scm, members):
    """Sub-population post-intervention factor of ``members``, exactly.

    For every full observed assignment: intervene on the non-ancestral part
    outside ``members`` (values from the assignment), then read the
    probability of the ``members`` values conditioned on the selection
    ancestry values and on selection.
    """
    g = scm.graph
    sel = g.selection
    anc, non_anc = g.split_by_selection()
    h = sorted(members)
    do_vars = sorted(set(non_anc) - set(h))
    obs = sorted(g.observed)
    free = sorted(set(obs) - set(do_vars))
    out = np.empty([scm.domain_size(v) for v in obs])
    for do in iter_assignments(do_vars, scm.domain_size):
        tbl = scm.interventional_joint(do)
        for rest in iter_assignments(free, scm.domain_size):
            cond = {v: rest[v] for v in anc}
            cond[sel] = 1
            num = tbl.prob({**{v: rest[v] for v in h}, **cond})
            den = tbl.prob(cond)
            full = {**do, **rest}
            out[tuple(full[v] for v in obs)] = num / den
    return out


def evaluate_on_grid(expr, table, fixed_names, scm=None):
    """Evaluate ``expr`` at every assignment of ``fixed_names``; returns dict."""
    from subid import evaluate

    size = table.domain_size
    out = {}
    for fixed in iter_assignments(fixed_names, size):
        out[tuple(sorted(fixed.items()))] = evaluate(expr, table, fixed)
    return out
