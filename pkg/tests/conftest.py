"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's optimized code paths:
conditional tables are computed by direct Fraction sums over the raw pmf, and
the interventional joint for strategy tests is materialized by stagewise
multiplication, so checker results can be compared against independently
computed values.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest

from separoid.models import DiscreteDistribution, RegimeFamily
from separoid.universe import CIStatement, VarSet


def dist(variables, rows):
    """Build a distribution from {assignment-dict: mass} rows."""
    return DiscreteDistribution(variables, {tuple(str(r[n]) for n in sorted(variables)): Fraction(p) for r, p in rows})


def vs(stoch=(), dec=()):
    return VarSet(frozenset(stoch), frozenset(dec))


def ci(left, right, cond=(), *, rdec=(), cdec=(), ldec=()):
    return CIStatement(vs(left, ldec), vs(right, rdec), vs(cond, cdec))


# -- independent probability oracles -----------------------------------------


def raw_marginal(pmf, names_all, names):
    idx = [names_all.index(n) for n in names]
    out = {}
    for key, p in pmf.items():
        sub = tuple(key[i] for i in idx)
        out[sub] = out.get(sub, Fraction(0)) + p
    return out


def brute_conditional(distr: DiscreteDistribution, targets, given):
    """P(targets | given) by direct Fraction sums over the raw pmf."""
    names = distr.names
    weight = Fraction(0)
    table = {}
    for key, p in distr.pmf.items():
        row = dict(zip(names, key))
        if all(row[n] == str(v) for n, v in given.items()):
            weight += p
            sub = tuple(row[n] for n in targets)
            table[sub] = table.get(sub, Fraction(0)) + p
    if weight == 0:
        return None
    return {k: v / weight for k, v in table.items()}


def brute_sci(distr: DiscreteDistribution, xs, ys, zs) -> bool:
    """Independence oracle via explicit conditional tables and products."""
    xs, ys, zs = tuple(sorted(xs)), tuple(sorted(ys)), tuple(sorted(zs))
    if not xs or not ys:
        return True
    for zvals in product(*(distr.values[n] for n in zs)) if zs else [()]:
        given = dict(zip(zs, zvals))
        pxy = brute_conditional(distr, xs + ys, given)
        if pxy is None:
            continue
        px = brute_conditional(distr, xs, given)
        py = brute_conditional(distr, ys, given)
        for xv in product(*(distr.values[n] for n in xs)):
            for yv in product(*(distr.values[n] for n in ys)):
                joint = pxy.get(xv + yv, Fraction(0))
                if joint != px.get(xv, Fraction(0)) * py.get(yv, Fraction(0)):
                    return False
    return True


# -- canonical small models ----------------------------------------------------


@pytest.fixture
def xor_model():
    """X, Y fair independent coins, W = X xor Y."""
    vars_ = {"X": ["0", "1"], "Y": ["0", "1"], "W": ["0", "1"]}
    rows = []
    for x in "01":
        for y in "01":
            rows.append(({"X": x, "Y": y, "W": str(int(x) ^ int(y))}, Fraction(1, 4)))
    return dist(vars_, rows)


@pytest.fixture
def two_fair_coins():
    vars_ = {"X": ["0", "1"], "Y": ["0", "1"]}
    rows = [({"X": x, "Y": y}, Fraction(1, 4)) for x in "01" for y in "01"]
    return dist(vars_, rows)


def interventional_pair(p0, p1):
    """Two-regime family: regime sj sets T=j surely, X has law pj on {0,1}."""
    vars_ = {"X": ["0", "1"], "T": ["0", "1"]}
    dists = {}
    for j, p in (("0", p0), ("1", p1)):
        rows = [({"X": "1", "T": j}, p), ({"X": "0", "T": j}, 1 - p),
                ({"X": "1", "T": str(1 - int(j))}, Fraction(0)),
                ({"X": "0", "T": str(1 - int(j))}, Fraction(0))]
        dists[f"s{j}"] = dist(vars_, rows)
    return RegimeFamily(["s0", "s1"], dists, {"Sigma": {"s0": "s0", "s1": "s1"}})


# -- exhaustive grid of two-regime families ------------------------------------


def grid_pmfs(n_atoms, grid):
    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in comps(total - head, parts - 1):
                yield (head,) + rest

    yield from comps(grid, n_atoms)


def grid_families(grid=4):
    """Every 2-regime family over two binary variables with atom masses on a
    1/grid lattice, identity decision variable included."""
    vars_ = {"X": ["0", "1"], "Y": ["0", "1"]}
    atoms = [(x, y) for x in "01" for y in "01"]  # sorted names: X, Y
    pmfs = [
        {a: Fraction(m, grid) for a, m in zip(atoms, masses)}
        for masses in grid_pmfs(4, grid)
    ]
    sigma = {"Sigma": {"r0": "r0", "r1": "r1"}}
    for i, p0 in enumerate(pmfs):
        d0 = DiscreteDistribution(vars_, p0, validate=False)
        for p1 in pmfs:
            d1 = DiscreteDistribution(vars_, p1, validate=False)
            yield RegimeFamily(["r0", "r1"], {"r0": d0, "r1": d1}, sigma)


def sigma_statements():
    """Well-formed statements over {X, Y} with the identity decision variable
    placed on either side of the bar."""
    stoch = [(), ("X",), ("Y",), ("X", "Y")]
    out = []
    for left in [("X",), ("Y",), ("X", "Y")]:
        for rs in stoch:
            for cs in stoch:
                out.append(ci(left, rs, cs, rdec=("Sigma",)))
                if rs:
                    out.append(ci(left, rs, cs, cdec=("Sigma",)))
    return out


# -- independent interventional materializer for strategy tests -----------------


def materialize_strategy_joint(obs: DiscreteDistribution, ib, strategy):
    """Build the full interventional joint by stagewise multiplication of
    observational observable-kernels and strategy action-kernels, using only
    raw pmf sums."""
    order: list[str] = []
    for i in range(ib.stages):
        order.extend(sorted(ib.observed[i]))
        order.append(ib.actions[i])
    order.extend(sorted(ib.outcome))
    names_all = obs.names
    pmf_out: dict[tuple, Fraction] = {}

    def extend(pos, history, weight):
        if pos == len(order):
            key = tuple(str(history[n]) for n in sorted(history))
            pmf_out[key] = pmf_out.get(key, Fraction(0)) + weight
            return
        name = order[pos]
        stage = None
        for i, a in enumerate(ib.actions):
            if a == name:
                stage = i
        if stage is not None:
            kernel = strategy.kernel(stage, history)
            for v, p in kernel.items():
                if p:
                    extend(pos + 1, {**history, name: v}, weight * p)
            return
        # observable: conditional from the raw observational pmf
        num = {}
        den = Fraction(0)
        for key, p in obs.pmf.items():
            row = dict(zip(names_all, key))
            if all(row[n] == history[n] for n in history):
                den += p
                num[row[name]] = num.get(row[name], Fraction(0)) + p
        if den == 0:
            raise AssertionError(f"oracle hit a zero-mass context {history!r}")
        for v, p in num.items():
            if p:
                extend(pos + 1, {**history, name: v}, weight * p / den)

    extend(0, {}, Fraction(1))
    variables = {n: obs.values[n] for n in order}
    full = {}
    for key_vals in product(*(variables[n] for n in sorted(order))):
        full[key_vals] = pmf_out.get(key_vals, Fraction(0))
    return DiscreteDistribution(variables, full)
