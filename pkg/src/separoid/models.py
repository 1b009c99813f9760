"""Exact semantics on finite discrete models.

Probabilities are exact rationals throughout; "almost surely" becomes "for
every positive-probability context", which makes all checks decidable with
zero tolerance.  A regime family holds one joint table per regime over a
shared variable signature, plus decision variables as functions on the regime
labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    EmptyContext,
    InvalidModel,
    InvalidPrior,
    MalformedStatement,
    NotComplementary,
    ZeroConditioningEvent,
)
from .universe import CIStatement, VarSet

Assignment = Mapping[str, str]


def _names(vs) -> tuple[str, ...]:
    """Accept a VarSet (stochastic part only), a name, or a name iterable."""
    if isinstance(vs, VarSet):
        if vs.dec:
            raise MalformedStatement(f"expected stochastic names only, got {sorted(vs.dec)}")
        return tuple(sorted(vs.stoch))
    if isinstance(vs, str):
        return (vs,)
    return tuple(sorted(vs))


class DiscreteDistribution:
    """Exact joint probability table over finitely many discrete variables."""

    def __init__(self, variables: Mapping[str, Sequence[str]], pmf: Mapping, *, validate: bool = True):
        self.names: tuple[str, ...] = tuple(sorted(variables))
        self.values: dict[str, tuple[str, ...]] = {
            n: tuple(str(v) for v in variables[n]) for n in self.names
        }
        self._index = {n: i for i, n in enumerate(self.names)}
        table: dict[tuple, Fraction] = {}
        for key, p in pmf.items():
            if isinstance(key, Mapping):
                key = tuple(str(key[n]) for n in self.names)
            else:
                key = tuple(str(v) for v in key)
            table[key] = table.get(key, Fraction(0)) + Fraction(p)
        self.pmf: dict[tuple, Fraction] = table
        self._marginal_cache: dict[tuple, dict] = {}
        self._int_cache: tuple[int, dict] | None = None
        self._ctx_cache: dict[tuple, tuple[dict, dict]] = {}
        if validate:
            self._validate()

    def _validate(self) -> None:
        for n, vals in self.values.items():
            if not vals:
                raise InvalidModel(f"variable {n!r} has no values")
            if len(set(vals)) != len(vals):
                raise InvalidModel(f"variable {n!r} has duplicate values")
        total = Fraction(0)
        for key, p in self.pmf.items():
            if len(key) != len(self.names):
                raise InvalidModel(f"assignment {key!r} does not cover {self.names}")
            for n, v in zip(self.names, key):
                if v not in self.values[n]:
                    raise InvalidModel(f"value {v!r} not declared for variable {n!r}")
            if p < 0:
                raise InvalidModel(f"negative mass on {key!r}")
            total += p
        if total != 1:
            raise InvalidModel(f"masses sum to {total}, not 1")

    # -- access ------------------------------------------------------------

    def atoms(self):
        return self.pmf.items()

    def signature(self) -> tuple:
        return tuple((n, self.values[n]) for n in self.names)

    def indices(self, names: Iterable[str]) -> tuple[int, ...]:
        try:
            return tuple(self._index[n] for n in names)
        except KeyError as e:
            raise InvalidModel(f"unknown variable {e.args[0]!r}") from None

    def int_atoms(self) -> tuple[int, dict]:
        """(denominator, atom -> integer numerator) over a common denominator."""
        if self._int_cache is None:
            den = 1
            for p in self.pmf.values():
                den = den * p.denominator // math.gcd(den, p.denominator)
            self._int_cache = (den, {k: int(p * den) for k, p in self.pmf.items()})
        return self._int_cache

    def grid(self, names: Sequence[str]):
        """All value tuples for the given variables, in declared value order."""
        return product(*(self.values[n] for n in names))

    def context_tables(self, xs: tuple, ys: tuple, zs: tuple) -> tuple[dict, dict]:
        """Integer-numerator tables n(y, z) and n(x, y, z) over positive
        atoms, cached per slot triple (denominators cancel in ratios)."""
        key = (xs, ys, zs)
        cached = self._ctx_cache.get(key)
        if cached is not None:
            return cached
        _, atoms = self.int_atoms()
        xi, yi, zi = self.indices(xs), self.indices(ys), self.indices(zs)
        nyz: dict[tuple, int] = {}
        nxyz: dict[tuple, int] = {}
        for akey, n in atoms.items():
            if not n:
                continue
            ya = tuple(akey[i] for i in yi)
            za = tuple(akey[i] for i in zi)
            nyz[(ya, za)] = nyz.get((ya, za), 0) + n
            xa = tuple(akey[i] for i in xi)
            nxyz[(xa, ya, za)] = nxyz.get((xa, ya, za), 0) + n
        self._ctx_cache[key] = (nyz, nxyz)
        return nyz, nxyz

    def marginal(self, names) -> dict[tuple, Fraction]:
        names = _names(names)
        cached = self._marginal_cache.get(names)
        if cached is not None:
            return cached
        idx = self.indices(names)
        out: dict[tuple, Fraction] = {}
        for key, p in self.pmf.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, Fraction(0)) + p
        self._marginal_cache[names] = out
        return out

    def probability(self, assignment: Assignment) -> Fraction:
        names = _names(assignment.keys())
        vals = tuple(str(assignment[n]) for n in names)
        return self.marginal(names).get(vals, Fraction(0))

    def expectation(self, name: str, value_map: Callable[[str], Fraction] = Fraction) -> Fraction:
        out = Fraction(0)
        for key, p in self.marginal((name,)).items():
            out += p * value_map(key[0])
        return out


def conditional(dist: DiscreteDistribution, targets, given: Assignment) -> dict[tuple, Fraction]:
    """Exact conditional pmf of the target variables given a partial
    assignment with positive probability."""
    targets = _names(targets)
    g_names = tuple(sorted(given))
    g_vals = tuple(str(given[n]) for n in g_names)
    denom = dist.marginal(g_names).get(g_vals, Fraction(0)) if g_names else Fraction(1)
    if denom == 0:
        raise ZeroConditioningEvent(f"P({dict(given)!r}) = 0")
    joint = dist.marginal(tuple(sorted(set(targets) | set(g_names))))
    names = tuple(sorted(set(targets) | set(g_names)))
    pos = {n: i for i, n in enumerate(names)}
    out: dict[tuple, Fraction] = {}
    for key, p in joint.items():
        if all(key[pos[n]] == v for n, v in zip(g_names, g_vals)):
            sub = tuple(key[pos[n]] for n in targets)
            out[sub] = out.get(sub, Fraction(0)) + p / denom
    return out


def conditional_expectation(dist, name: str, given: Assignment,
                            value_map: Callable[[str], Fraction] = Fraction) -> Fraction:
    table = conditional(dist, (name,), given)
    return sum((p * value_map(key[0]) for key, p in table.items()), Fraction(0))


def check_sci(dist: DiscreteDistribution, X, Y, Z) -> bool:
    """Exact factorization check: for every conditioning value with positive
    mass, the joint table of (X, Y) is the product of its margins."""
    xs, ys, zs = _names(X), _names(Y), _names(Z)
    if not xs or not ys:
        return True
    _, atoms = dist.int_atoms()
    xi, yi, zi = dist.indices(xs), dist.indices(ys), dist.indices(zs)
    nz: dict[tuple, int] = {}
    nxz: dict[tuple, dict] = {}
    nyz: dict[tuple, dict] = {}
    nxyz: dict[tuple, dict] = {}
    for key, n in atoms.items():
        if not n:
            continue
        za = tuple(key[i] for i in zi)
        xa = tuple(key[i] for i in xi)
        ya = tuple(key[i] for i in yi)
        nz[za] = nz.get(za, 0) + n
        dx = nxz.setdefault(za, {})
        dx[xa] = dx.get(xa, 0) + n
        dy = nyz.setdefault(za, {})
        dy[ya] = dy.get(ya, 0) + n
        dxy = nxyz.setdefault(za, {})
        dxy[(xa, ya)] = dxy.get((xa, ya), 0) + n
    for za, total in nz.items():
        px, py, pxy = nxz[za], nyz[za], nxyz[za]
        if len(pxy) != len(px) * len(py):
            return False
        for (xa, ya), n in pxy.items():
            if n * total != px[xa] * py[ya]:
                return False
    return True


# -- variation independence -------------------------------------------------

DecMap = Mapping[str, Mapping[str, str]]


def _dec_fun(decmap: DecMap, names: Sequence[str], regimes: Sequence[str]):
    """Materialize the joint map sigma -> value tuple for decision names."""
    for n in names:
        if n not in decmap:
            raise InvalidModel(f"unknown decision variable {n!r}")
    return {s: tuple(str(decmap[n][s]) for n in names) for s in regimes}


def _dec_names(vs) -> tuple[str, ...]:
    if isinstance(vs, VarSet):
        if vs.stoch:
            raise MalformedStatement(f"expected decision names only, got {sorted(vs.stoch)}")
        return tuple(sorted(vs.dec))
    if isinstance(vs, str):
        return (vs,)
    return tuple(sorted(vs))


def check_vci(decmap: DecMap, X, Y, Z, regimes: Sequence[str] | None = None) -> bool:
    """Range check: R(X | y, z) = R(X | z) for every attainable (y, z)."""
    if regimes is None:
        regimes = sorted({s for m in decmap.values() for s in m})
    xs, ys, zs = _dec_names(X), _dec_names(Y), _dec_names(Z)
    fx = _dec_fun(decmap, xs, regimes)
    fy = _dec_fun(decmap, ys, regimes)
    fz = _dec_fun(decmap, zs, regimes)
    r_yz: dict[tuple, set] = {}
    r_z: dict[tuple, set] = {}
    for s in regimes:
        r_yz.setdefault((fy[s], fz[s]), set()).add(fx[s])
        r_z.setdefault(fz[s], set()).add(fx[s])
    return all(r_yz[(y, z)] == r_z[z] for (y, z) in r_yz)


def conditional_image(decmap: DecMap, X, given: Assignment, regimes: Sequence[str] | None = None):
    """{X(sigma) : sigma matches the given partial decision assignment}."""
    if regimes is None:
        regimes = sorted({s for m in decmap.values() for s in m})
    single = isinstance(X, str)
    xs = _dec_names(X)
    fx = _dec_fun(decmap, xs, regimes)
    g_names = tuple(sorted(given))
    fg = _dec_fun(decmap, g_names, regimes)
    g_vals = tuple(str(given[n]) for n in g_names)
    matched = [s for s in regimes if fg[s] == g_vals]
    if not matched:
        raise EmptyContext(f"no regime matches {dict(given)!r}")
    out = {fx[s] for s in matched}
    return {v[0] for v in out} if single else out


def partition_meet(a: Mapping[str, str], b: Mapping[str, str]) -> dict[str, str]:
    """Finest common coarsening of the partitions induced by two functions on
    the regime space: connected components of the overlap graph.  Each block
    is labelled by its lowest regime label."""
    regimes = sorted(a)
    if sorted(b) != regimes:
        raise InvalidModel("partition_meet arguments live on different regime spaces")
    parent = {s: s for s in regimes}

    def find(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    def union(s, t):
        rs, rt = find(s), find(t)
        if rs != rt:
            rs, rt = sorted((rs, rt))
            parent[rt] = rs

    for f in (a, b):
        by_val: dict[str, str] = {}
        for s in regimes:
            v = str(f[s])
            if v in by_val:
                union(by_val[v], s)
            else:
                by_val[v] = s
    return {s: find(s) for s in regimes}


# -- regime families ----------------------------------------------------------


class RegimeFamily:
    """A finite regime space with one distribution per regime (shared
    signature) and decision variables as functions on the regimes."""

    def __init__(
        self,
        regimes: Sequence[str],
        dists: Mapping[str, DiscreteDistribution],
        decvars: DecMap | None = None,
        info_base: dict | None = None,
    ):
        self.regimes: tuple[str, ...] = tuple(str(r) for r in regimes)
        if len(set(self.regimes)) != len(self.regimes) or not self.regimes:
            raise InvalidModel("regime labels must be nonempty and unique")
        self.dists: dict[str, DiscreteDistribution] = {str(r): dists[r] for r in regimes}
        sig = self.dists[self.regimes[0]].signature()
        for r in self.regimes:
            if self.dists[r].signature() != sig:
                raise InvalidModel(f"regime {r!r} has a different variable signature")
        self.decvars: dict[str, dict[str, str]] = {}
        for name, mapping in (decvars or {}).items():
            if set(mapping) != set(self.regimes):
                raise InvalidModel(f"decision variable {name!r} is not total on the regimes")
            if name in self.dists[self.regimes[0]].values:
                raise InvalidModel(f"name {name!r} is both stochastic and decision")
            self.decvars[name] = {str(s): str(v) for s, v in mapping.items()}
        self.info_base = info_base

    @property
    def variables(self) -> dict[str, tuple[str, ...]]:
        return self.dists[self.regimes[0]].values

    def with_decision(self, name: str, mapping: Mapping[str, str]) -> "RegimeFamily":
        dv = dict(self.decvars)
        dv[name] = dict(mapping)
        return RegimeFamily(self.regimes, self.dists, dv, self.info_base)

    def identity_name(self) -> str:
        """Name of an identity-like decision variable, adding one if needed is
        the caller's job (see ensure_identity)."""
        for name, m in self.decvars.items():
            if all(m[s] == s for s in self.regimes):
                return name
        return ""

    def ensure_identity(self) -> tuple["RegimeFamily", str]:
        name = self.identity_name()
        if name:
            return self, name
        name = "_sigma"
        while name in self.decvars or name in self.variables:
            name += "_"
        return self.with_decision(name, {s: s for s in self.regimes}), name


def check_complementary(fam: RegimeFamily, names: Iterable[str]) -> bool:
    """True iff the joint map sigma -> values distinguishes every regime."""
    names = _dec_names(names)
    fn = _dec_fun(fam.decvars, names, fam.regimes)
    return len({fn[s] for s in fam.regimes}) == len(fam.regimes)


def _split_statement(fam: RegimeFamily, stmt: CIStatement):
    for n in stmt.left.stoch | stmt.right.stoch | stmt.cond.stoch:
        if n not in fam.variables:
            raise InvalidModel(f"unknown stochastic variable {n!r}")
    for n in stmt.decision_names:
        if n not in fam.decvars:
            raise InvalidModel(f"unknown decision variable {n!r}")
    return (
        tuple(sorted(stmt.left.stoch)),
        tuple(sorted(stmt.right.stoch)),
        tuple(sorted(stmt.cond.stoch)),
        tuple(sorted(stmt.right.dec)),
        tuple(sorted(stmt.cond.dec)),
    )


@dataclass(frozen=True)
class WitnessTable:
    """Witness values w(phi; x, z) realizing an extended-independence check:
    the common conditional probability of each left-slot assignment given each
    conditioning assignment, per group of regimes sharing a phi value.
    Entries exist only for contexts with positive probability in at least one
    regime of the group."""

    phi_vars: tuple[str, ...]
    x_vars: tuple[str, ...]
    z_vars: tuple[str, ...]
    entries: dict

    def value(self, phi: tuple, x: tuple, z: tuple) -> Fraction | None:
        return self.entries.get((phi, x, z))


def _phi_groups(fam: RegimeFamily, phi_names: Sequence[str]) -> dict[tuple, list]:
    fn = _dec_fun(fam.decvars, phi_names, fam.regimes)
    groups: dict[tuple, list] = {}
    for s in fam.regimes:
        groups.setdefault(fn[s], []).append(s)
    return dict(sorted(groups.items()))


def _validate_eci_statement(fam: RegimeFamily, stmt: CIStatement):
    if stmt.left.dec:
        raise MalformedStatement(
            "decision variable in the left slot; use check_eci_general"
        )
    xs, ys, zs, theta, phi = _split_statement(fam, stmt)
    decs = tuple(sorted(set(theta) | set(phi)))
    if decs and not check_complementary(fam, decs):
        raise NotComplementary(f"decision family {decs} does not identify the regime")
    return xs, ys, zs, theta, phi


def check_eci(fam: RegimeFamily, stmt: CIStatement) -> tuple[bool, WitnessTable | None]:
    """Extended independence on a finite family: within every group of regimes
    sharing a value of the conditioning decision variables there must be a
    single witness w(x, z) equal to P(X=x | Y=y, Z=z) across all regimes of
    the group and all positive-probability (y, z).  Statements with no
    decision names are checked with a single group containing every regime."""
    xs, ys, zs, _theta, phi = _validate_eci_statement(fam, stmt)
    entries: dict = {}
    x_grid = list(fam.dists[fam.regimes[0]].grid(xs)) if xs else [()]
    for phival, sigmas in _phi_groups(fam, phi).items():
        for s in sigmas:
            nyz, nxyz = fam.dists[s].context_tables(xs, ys, zs)
            for (ya, za), n2 in nyz.items():
                for xa in x_grid:
                    n1 = nxyz.get((xa, ya, za), 0)
                    entry = (phival, xa, za)
                    have = entries.get(entry)
                    if have is None:
                        entries[entry] = Fraction(n1, n2)
                    elif have.numerator * n2 != n1 * have.denominator:
                        return False, None
    table = WitnessTable(tuple(phi), xs, zs, entries)
    return True, table


def check_pairwise_eci(fam: RegimeFamily, stmt: CIStatement) -> bool:
    """Weakening of check_eci: a common witness is required only for each pair
    of regimes within a group (including the degenerate single-regime pair)."""
    xs, ys, zs, _theta, phi = _validate_eci_statement(fam, stmt)
    x_grid = list(fam.dists[fam.regimes[0]].grid(xs)) if xs else [()]
    for _phival, sigmas in _phi_groups(fam, phi).items():
        tables = []
        for s in sigmas:
            nyz, nxyz = fam.dists[s].context_tables(xs, ys, zs)
            table: dict = {}
            for (ya, za), n2 in nyz.items():
                for xa in x_grid:
                    v = Fraction(nxyz.get((xa, ya, za), 0), n2)
                    have = table.get((xa, za))
                    if have is None:
                        table[(xa, za)] = v
                    elif have != v:
                        return False  # fails already within one regime
            tables.append(table)
        for i in range(len(tables)):
            for j in range(i + 1, len(tables)):
                ti, tj = tables[i], tables[j]
                for ctx, v in ti.items():
                    w = tj.get(ctx)
                    if w is not None and w != v:
                        return False
    return True


def compute_S_z(fam: RegimeFamily, Z, z: Assignment) -> tuple[str, ...]:
    """Regimes for which the outcome z of Z has positive probability."""
    zs = _names(Z)
    for n in zs:
        if str(z[n]) not in fam.variables[n]:
            raise InvalidModel(f"value {z[n]!r} not declared for {n!r}")
    out = []
    for s in fam.regimes:
        if fam.dists[s].probability({n: z[n] for n in zs}) > 0:
            out.append(s)
    return tuple(out)


def check_eci_general(fam: RegimeFamily, stmt: CIStatement) -> bool:
    """General-form check for statements whose left slot carries decision
    variables K: the purely-stochastic-left part conditioned additionally on
    K, the reverse part with K on the right, and variation independence of the
    right/left decision parts on every restriction to the regimes compatible
    with each conditioning outcome."""
    xs = tuple(sorted(stmt.left.stoch))
    K = tuple(sorted(stmt.left.dec))
    ys = tuple(sorted(stmt.right.stoch))
    theta = tuple(sorted(stmt.right.dec))
    zs = tuple(sorted(stmt.cond.stoch))
    phi = tuple(sorted(stmt.cond.dec))
    _split_statement(fam, stmt)
    decs = tuple(sorted(set(K) | set(theta) | set(phi)))
    if decs and not check_complementary(fam, decs):
        raise NotComplementary(f"decision family {decs} does not identify the regime")
    if not K:
        return check_eci(fam, stmt)[0]

    sub1 = CIStatement(
        VarSet(frozenset(xs)),
        VarSet(frozenset(ys), frozenset(theta)),
        VarSet(frozenset(zs), frozenset(phi) | frozenset(K)),
    )
    if not check_eci(fam, sub1)[0]:
        return False
    sub2 = CIStatement(
        VarSet(frozenset(ys)),
        VarSet(frozenset(), frozenset(K)),
        VarSet(frozenset(zs), frozenset(phi) | frozenset(theta)),
    )
    if ys and not check_eci(fam, sub2)[0]:
        return False
    if theta:
        dist0 = fam.dists[fam.regimes[0]]
        for zvals in (dist0.grid(zs) if zs else [()]):
            sz = compute_S_z(fam, zs, dict(zip(zs, zvals))) if zs else fam.regimes
            if not sz:
                continue
            if not check_vci(fam.decvars, theta, K, phi, regimes=sz):
                return False
    return True


def product_space(
    fam: RegimeFamily, prior: Mapping[str, Fraction], regime_var: str = "_regime"
) -> DiscreteDistribution:
    """Joint distribution on (outcome, regime) with mass P_sigma(omega) *
    prior(sigma); the regime label becomes an ordinary variable and every
    decision variable becomes a variable determined by it."""
    if set(prior) != set(fam.regimes):
        raise InvalidPrior("prior must assign mass to exactly the regime labels")
    masses = {s: Fraction(prior[s]) for s in fam.regimes}
    if any(m <= 0 for m in masses.values()):
        raise InvalidPrior("prior must be strictly positive on every regime")
    if sum(masses.values()) != 1:
        raise InvalidPrior(f"prior sums to {sum(masses.values())}, not 1")
    if regime_var in fam.variables or regime_var in fam.decvars:
        raise InvalidModel(f"regime variable name {regime_var!r} collides")
    variables: dict[str, Sequence[str]] = dict(fam.variables)
    variables[regime_var] = tuple(fam.regimes)
    for d, m in fam.decvars.items():
        variables[d] = tuple(sorted(set(m.values())))
    names = tuple(sorted(variables))
    base = fam.dists[fam.regimes[0]].names
    pmf: dict[tuple, Fraction] = {}
    for s in fam.regimes:
        dist = fam.dists[s]
        for key, p in dist.atoms():
            row = dict(zip(base, key))
            row[regime_var] = s
            for d, m in fam.decvars.items():
                row[d] = m[s]
            full = tuple(row[n] for n in names)
            pmf[full] = pmf.get(full, Fraction(0)) + p * masses[s]
    return DiscreteDistribution(variables, pmf)


def find_dominating(fam: RegimeFamily, subset: Iterable[str] | None = None) -> str | None:
    """Some regime in the subset whose support contains every other member's
    support; ties broken by regime declaration order."""
    labels = [s for s in fam.regimes if subset is None or s in set(subset)]
    if not labels:
        raise InvalidModel("empty regime subset")
    supports = {
        s: frozenset(k for k, p in fam.dists[s].atoms() if p > 0) for s in labels
    }
    for s in labels:
        if all(supports[t] <= supports[s] for t in labels):
            return s
    return None


def dominating_per_group(fam: RegimeFamily, phi_names: Sequence[str]) -> bool:
    """True iff every group of regimes sharing a phi value has a dominating
    regime."""
    return all(
        find_dominating(fam, sigmas) is not None
        for sigmas in _phi_groups(fam, tuple(_dec_names(phi_names))).values()
    )
