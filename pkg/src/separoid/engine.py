"""Forward-chaining closure and minimal proof search over separoid rules.

Statements are encoded internally as 6-tuples of bitmasks
``(ls, ld, rs, rd, cs, cd)`` (stochastic/decision component per slot).  Rule
instantiation of "w is a function of y" ranges over nonempty subsets of the
slot plus registry-reduced variables.

Rule families
  SEPAROID_FULL   P1..P5 on pure statements (all-stochastic or all-decision).
  VCI_STRONG      P1..P5 on pure-decision statements; P6 exists only as a
                  model-level property (meets are not representable here).
  ECI_RESTRICTED  P1'..P5', mirrors P3''/P4''/P5'', and DCMP (right-slot
                  decision part may move below the bar).  Left slots are
                  stochastic-only.  P4'' fires only under an enabling flag.
  GENERAL         P1g..P5g for statements whose left slot may carry decision
                  variables; reductions of stochastic variables only; P4g is
                  flag-gated like P4''.

Instantiation policy (search-space pruning, recorded in the project notes):
statements whose right slot is contained in the conditioning slot, or whose
left slot is, are universally true fillers; P1/P4 and the first premise of the
P5 family skip them.  P3 still fires on them, which is how the tautologies the
P5 family consumes as second premises are produced.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import GuardViolation, IllFormed
from .universe import (
    DECISION,
    STOCHASTIC,
    CIStatement,
    ComplementarityDecl,
    ReductionRegistry,
    Universe,
    VarSet,
)

FLAGS = frozenset(
    {"discrete_regime_space", "discrete_variables", "dominating_regime", "pairwise_semantics"}
)


@dataclass(frozen=True)
class Limits:
    """Search bounds: total statements kept, and rounds (closure) or
    rule-applications per derivation tree (prove)."""

    max_statements: int = 50_000
    max_depth: int = 64

    def __post_init__(self):
        if self.max_statements < 1 or self.max_depth < 1:
            raise ValueError("limits must be >= 1")


@dataclass(frozen=True)
class Rule:
    name: str
    arity: int  # 0 spontaneous, 1 unary, 2 binary
    flag_gated: bool = False
    model_only: bool = False


RULES: dict[str, Rule] = {
    r.name: r
    for r in [
        Rule("P1", 1),
        Rule("P2", 0),
        Rule("P3", 1),
        Rule("P4", 1),
        Rule("P5", 2),
        Rule("P6", 1, model_only=True),
        Rule("P1'", 1),
        Rule("P2'", 0),
        Rule("P3'", 1),
        Rule("P4'", 1),
        Rule("P5'", 2),
        Rule("P3''", 1),
        Rule("P4''", 1, flag_gated=True),
        Rule("P5''", 2),
        Rule("DCMP", 1),
        Rule("P1g", 1),
        Rule("P2g", 0),
        Rule("P3g", 1),
        Rule("P4g", 1, flag_gated=True),
        Rule("P5g", 2),
    ]
}

_RULE_SETS = {
    "SEPAROID_FULL": ("P1", "P2", "P3", "P4", "P5"),
    "VCI_STRONG": ("P1", "P2", "P3", "P4", "P5", "P6"),
    "ECI_RESTRICTED": ("P1'", "P2'", "P3'", "P4'", "P5'", "P3''", "P4''", "P5''", "DCMP"),
    "GENERAL": ("P1g", "P2g", "P3g", "P4g", "P5g"),
}


@dataclass(frozen=True)
class RuleSet:
    name: str
    rules: tuple[str, ...]
    flags: frozenset = frozenset()


def rule_set(name: str, flags: Iterable[str] = ()) -> RuleSet:
    if name not in _RULE_SETS:
        raise ValueError(f"unknown rule set {name!r}; choose from {sorted(_RULE_SETS)}")
    flagset = frozenset(flags)
    bad = flagset - FLAGS
    if bad:
        raise ValueError(f"unknown flags {sorted(bad)}; choose from {sorted(FLAGS)}")
    return RuleSet(name, _RULE_SETS[name], flagset)


@dataclass(frozen=True)
class Derivation:
    """A proof tree; leaves carry rule == "premise"."""

    goal: CIStatement
    rule: str
    children: tuple = ()
    note: str = ""

    def rule_sequence(self) -> list[str]:
        """Rules in replay (post-)order, shared steps listed once."""
        seen: set = set()
        out: list[str] = []

        def visit(node: "Derivation") -> None:
            key = node.goal.sort_key()
            if key in seen:
                return
            seen.add(key)
            for c in node.children:
                visit(c)
            if node.rule != "premise":
                out.append(node.rule)

        visit(self)
        return out

    @property
    def steps(self) -> int:
        return len(self.rule_sequence())


@dataclass(frozen=True)
class NotDerivable:
    """Goal absent from the closure; `truncated` reports whether limits cut
    the search short (absence is conclusive only when False)."""

    truncated: bool = False


@dataclass(frozen=True)
class ClosureResult:
    statements: frozenset
    truncated: bool = False
    rounds: int = 0

    def __contains__(self, stmt: CIStatement) -> bool:
        return stmt in self.statements


def _submasks(m: int):
    """Nonempty submasks of m, descending."""
    s = m
    while s:
        yield s
        s = (s - 1) & m


class _Space:
    """Name <-> bit translation plus reduction-closure masks."""

    def __init__(self, universe: Universe, registry: ReductionRegistry | None):
        self.universe = universe
        self.s_names = universe.names(STOCHASTIC)
        self.d_names = universe.names(DECISION)
        self.s_bit = {n: 1 << i for i, n in enumerate(self.s_names)}
        self.d_bit = {n: 1 << i for i, n in enumerate(self.d_names)}
        self.s_all = (1 << len(self.s_names)) - 1
        self.d_all = (1 << len(self.d_names)) - 1
        reg = registry or ReductionRegistry()
        self._var_red_s = [
            self._mask_s(reg.reducible_to([n])) for n in self.s_names
        ]
        self._var_red_d = [
            self._mask_d(reg.reducible_to([n])) for n in self.d_names
        ]
        self._red_cache_s: dict[int, int] = {}
        self._red_cache_d: dict[int, int] = {}

    def _mask_s(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            b = self.s_bit.get(n)
            if b:
                m |= b
        return m

    def _mask_d(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            b = self.d_bit.get(n)
            if b:
                m |= b
        return m

    def varset_masks(self, vs: VarSet) -> tuple[int, int]:
        ms = md = 0
        for n in vs.stoch:
            ms |= self.s_bit[n]
        for n in vs.dec:
            md |= self.d_bit[n]
        return ms, md

    def key_of(self, stmt: CIStatement) -> tuple:
        ls, ld = self.varset_masks(stmt.left)
        rs, rd = self.varset_masks(stmt.right)
        cs, cd = self.varset_masks(stmt.cond)
        return (ls, ld, rs, rd, cs, cd)

    def _names_of(self, mask: int, names: Sequence[str]) -> frozenset:
        return frozenset(n for i, n in enumerate(names) if mask >> i & 1)

    def stmt_of(self, key: tuple) -> CIStatement:
        ls, ld, rs, rd, cs, cd = key
        return CIStatement(
            VarSet(self._names_of(ls, self.s_names), self._names_of(ld, self.d_names)),
            VarSet(self._names_of(rs, self.s_names), self._names_of(rd, self.d_names)),
            VarSet(self._names_of(cs, self.s_names), self._names_of(cd, self.d_names)),
        )

    def red_s(self, mask: int) -> int:
        out = self._red_cache_s.get(mask)
        if out is None:
            out = mask
            m = mask
            while m:
                b = m & -m
                out |= self._var_red_s[b.bit_length() - 1]
                m ^= b
            self._red_cache_s[mask] = out
        return out

    def red_d(self, mask: int) -> int:
        out = self._red_cache_d.get(mask)
        if out is None:
            out = mask
            m = mask
            while m:
                b = m & -m
                out |= self._var_red_d[b.bit_length() - 1]
                m ^= b
            self._red_cache_d[mask] = out
        return out


def _r_triv(k: tuple) -> bool:
    return (k[2] & ~k[4]) == 0 and (k[3] & ~k[5]) == 0


def _l_triv(k: tuple) -> bool:
    return (k[0] & ~k[4]) == 0 and (k[1] & ~k[5]) == 0


class _Engine:
    """Shared expansion machinery for closure, prove and apply_rule."""

    def __init__(
        self,
        rs: RuleSet,
        space: _Space,
        comp: ComplementarityDecl,
        mode: str | None,
    ):
        self.rs = rs
        self.space = space
        self.mode = mode  # 's' | 'd' for the pure rule sets, else None
        self.comp_masks = tuple(
            sorted(space._mask_d(f) for f in comp.families if f <= set(space.d_names))
        )
        # binary-rule pairing indexes over inserted statements
        self.by_left_cond: dict[tuple, list] = {}
        self.by_left_rjoinc: dict[tuple, list] = {}
        self.by_right_cond: dict[tuple, list] = {}
        self.by_right_ljoinc: dict[tuple, list] = {}
        self.rule_idx = {name: i for i, name in enumerate(rs.rules)}

    # -- legality of premises under this rule set ---------------------------

    def legal(self, k: tuple) -> bool:
        name = self.rs.name
        if name in ("SEPAROID_FULL", "VCI_STRONG"):
            if self.mode == "s":
                return not (k[1] | k[3] | k[5])
            return not (k[0] | k[2] | k[4])
        if name == "ECI_RESTRICTED" and k[1]:
            return False
        dec_union = k[1] | k[3] | k[5]
        return dec_union == 0 or dec_union in self.comp_masks

    def check_legal(self, stmt: CIStatement, k: tuple) -> None:
        if not self.legal(k):
            raise IllFormed(
                f"statement {stmt!r} is not admissible under rule set {self.rs.name}"
            )

    # -- index maintenance ---------------------------------------------------

    def insert(self, k: tuple) -> None:
        left, right, cond = (k[0], k[1]), (k[2], k[3]), (k[4], k[5])
        rjoinc = (k[2] | k[4], k[3] | k[5])
        ljoinc = (k[0] | k[4], k[5])
        self.by_left_cond.setdefault((left, cond), []).append(k)
        self.by_left_rjoinc.setdefault((left, rjoinc), []).append(k)
        self.by_right_cond.setdefault((right, cond), []).append(k)
        self.by_right_ljoinc.setdefault((right, ljoinc), []).append(k)

    # -- spontaneous rules ---------------------------------------------------

    def spontaneous(self):
        """Yield (rule_name, conclusion_key) for premise-free rules."""
        for name in self.rs.rules:
            if name == "P2":
                o = 0 if self.mode == "s" else 1
                alls = self.space.s_all if self.mode == "s" else self.space.d_all
                for x in _submasks(alls):
                    for y in _submasks(alls):
                        k = [0, 0, 0, 0, 0, 0]
                        k[o], k[2 + o], k[4 + o] = x, y, y
                        yield name, tuple(k)
            elif name == "P2'":
                for x in _submasks(self.space.s_all):
                    for d in self.comp_masks:
                        ys = self.space.s_all
                        yield name, (x, 0, 0, d, 0, d)
                        for y in _submasks(ys):
                            yield name, (x, 0, y, d, y, d)
            elif name == "P2g":
                for fam in self.comp_masks:
                    splits = [(0, fam)] + [
                        (xd, fam ^ xd) for xd in _submasks(fam)
                    ]
                    for xd, yd in splits:
                        xs_opts = [0] + list(_submasks(self.space.s_all))
                        for xs in xs_opts:
                            if not (xs or xd):
                                continue
                            for ys in xs_opts:
                                if not (ys or yd):
                                    continue
                                yield name, (xs, xd, ys, yd, ys, yd)

    # -- unary rules -----------------------------------------------------------

    def unary(self, name: str, k: tuple):
        """Yield (conclusion_key, note) for a unary rule applied to k."""
        sp = self.space
        ls, ld, rs_, rd, cs, cd = k
        if name in ("P1", "P3", "P4"):
            o = 0 if self.mode == "s" else 1
            red = sp.red_s if self.mode == "s" else sp.red_d
            l, r, c = k[o], k[2 + o], k[4 + o]

            def mk(l2, r2, c2):
                out = [0, 0, 0, 0, 0, 0]
                out[o], out[2 + o], out[4 + o] = l2, r2, c2
                return tuple(out)

            if name == "P1":
                if not _r_triv(k) and not _l_triv(k):
                    yield mk(r, l, c), ""
            elif name == "P3":
                for w in _submasks(red(r)):
                    if w != r:
                        yield mk(l, w, c), ""
            elif name == "P4":
                if not _r_triv(k) and not _l_triv(k):
                    for w in _submasks(red(r)):
                        if c | w != c:
                            yield mk(l, r, c | w), ""
        elif name == "P1'":
            if rd == 0 and not _r_triv(k) and not _l_triv(k):
                yield (rs_, 0, ls, 0, cs, cd), ""
        elif name == "P3'":
            for w in _submasks(sp.red_s(rs_)):
                if w != rs_:
                    yield (ls, 0, w, rd, cs, cd), ""
            if rd and rs_:
                yield (ls, 0, 0, rd, cs, cd), ""
        elif name == "P4'":
            if not _r_triv(k) and not _l_triv(k):
                for w in _submasks(sp.red_s(rs_)):
                    if cs | w != cs:
                        yield (ls, 0, rs_, rd, cs | w, cd), ""
        elif name == "P3''":
            if not _r_triv(k) and not _l_triv(k):
                for w in _submasks(sp.red_s(ls)):
                    if w != ls:
                        yield (w, 0, rs_, rd, cs, cd), ""
        elif name == "P4''":
            licensed = sorted(self.rs.flags)
            if licensed and not _r_triv(k) and not _l_triv(k):
                note = "via " + ",".join(licensed)
                for w in _submasks(sp.red_s(ls)):
                    if cs | w != cs:
                        yield (ls, 0, rs_, rd, cs | w, cd), note
        elif name == "DCMP":
            if rd and rs_:
                yield (ls, 0, rs_, 0, cs, cd | rd), ""
        elif name == "P1g":
            if not _r_triv(k) and not _l_triv(k):
                yield (rs_, rd, ls, ld, cs, cd), ""
        elif name == "P3g":
            for w in _submasks(sp.red_s(rs_)):
                if w != rs_:
                    yield (ls, ld, w, rd, cs, cd), ""
            if rd and rs_:
                yield (ls, ld, 0, rd, cs, cd), ""
        elif name == "P4g":
            licensed = sorted(self.rs.flags)
            if licensed and not _r_triv(k) and not _l_triv(k):
                note = "via " + ",".join(licensed)
                for w in _submasks(sp.red_s(rs_)):
                    yield (ls, ld, rs_, 0, cs | w, cd | rd), note

    # -- binary rules ----------------------------------------------------------

    def _p5_combine(self, s1: tuple, s2: tuple, pure_w: bool):
        """Contraction conclusion from first premise s1 and second premise s2
        (s2.left == s1.left and s2.cond == join(s1.right, s1.cond)).  Instances
        are kept in normal form: the second premise's right slot must be
        nonempty and disjoint from the first premise's right slot (overlapping
        instances are subsumed by the reduced one, via P3 on the second
        premise)."""
        if pure_w and s2[3]:
            return None
        ws, wd = s2[2], s2[3]
        if not (ws or wd) or ws & s1[2] or wd & s1[3]:
            return None
        return (s1[0], s1[1], s1[2] | ws, s1[3] | wd, s1[4], s1[5])

    def binary(self, name: str, k: tuple):
        """Yield (premises, conclusion_key) pairs where k participates."""
        left, right, cond = (k[0], k[1]), (k[2], k[3]), (k[4], k[5])
        nontrivial = not _r_triv(k) and not _l_triv(k)
        if name in ("P5", "P5'", "P5g"):
            pure_w = name in ("P5'", "P5g")
            if nontrivial:  # role: first premise x _||_ y | z
                join = (k[2] | k[4], k[3] | k[5])
                for t in self.by_left_cond.get((left, join), ()):
                    ck = self._p5_combine(k, t, pure_w)
                    if ck is not None:
                        yield (k, t), ck
            # role: second premise x _||_ w | (y v z)
            for s1 in self.by_left_rjoinc.get((left, cond), ()):
                if _r_triv(s1) or _l_triv(s1):
                    continue
                ck = self._p5_combine(s1, k, pure_w)
                if ck is not None:
                    yield (s1, k), ck
        elif name == "P5''":
            if nontrivial:  # role: first premise X _||_ (Y,Th) | (Z,Ph)
                tgt = (k[0] | k[4], k[5])
                for t in self.by_right_cond.get((right, tgt), ()):
                    if t[1]:
                        continue
                    ws = t[0]
                    if ws and not ws & k[0]:
                        yield (k, t), (k[0] | ws, 0, k[2], k[3], k[4], k[5])
            # role: second premise W _||_ (Y,Th) | (X,Z,Ph)
            if not k[1]:
                for s1 in self.by_right_ljoinc.get((right, cond), ()):
                    if _r_triv(s1) or _l_triv(s1):
                        continue
                    ws = k[0]
                    if ws and not ws & s1[0]:
                        yield (s1, k), (s1[0] | ws, 0, s1[2], s1[3], s1[4], s1[5])

    def expand(self, k: tuple):
        """All one-step consequences in which k participates, paired against
        previously inserted statements.  Yields (rule_name, premises, ck, note)."""
        for name in self.rs.rules:
            rule = RULES[name]
            if rule.model_only or rule.arity == 0:
                continue
            if rule.arity == 1:
                for ck, note in self.unary(name, k):
                    yield name, (k,), ck, note
            else:
                for prem, ck in self.binary(name, k):
                    yield name, prem, ck, ""


def _infer_mode(rs: RuleSet, space: _Space, keys: Iterable[tuple]) -> str | None:
    if rs.name == "VCI_STRONG":
        return "d"
    if rs.name != "SEPAROID_FULL":
        return None
    any_dec = any(k[1] | k[3] | k[5] for k in keys)
    any_stoch = any(k[0] | k[2] | k[4] for k in keys)
    if any_dec and not any_stoch:
        return "d"
    if any_stoch or space.s_names:
        return "s"
    return "d"


def _setup(
    premises: Iterable[CIStatement],
    rs: RuleSet,
    universe: Universe,
    registry: ReductionRegistry | None,
    complementarity: ComplementarityDecl | None,
    extra: Iterable[CIStatement] = (),
):
    space = _Space(universe, registry)
    comp = complementarity or ComplementarityDecl()
    keyed = [(stmt, space.key_of(stmt)) for stmt in premises]
    prem_keys = []
    seen = set()
    for _stmt, k in keyed:
        if k not in seen:
            seen.add(k)
            prem_keys.append(k)
    mode = _infer_mode(rs, space, prem_keys + [space.key_of(s) for s in extra])
    eng = _Engine(rs, space, comp, mode)
    for stmt, k in keyed:
        eng.check_legal(stmt, k)
    return eng, prem_keys


def closure(
    premises: Iterable[CIStatement],
    rs: RuleSet,
    *,
    universe: Universe,
    registry: ReductionRegistry | None = None,
    complementarity: ComplementarityDecl | None = None,
    limits: Limits | None = None,
) -> ClosureResult:
    """Least fixed point of guarded rule application, by deterministic rounds.

    Truncates (with a marker) when the statement or round budget is hit; the
    partial closure is still returned and is always a superset of the
    premises."""
    premises = list(premises)
    lim = limits or Limits()
    eng, prem_keys = _setup(premises, rs, universe, registry, complementarity)
    known: set[tuple] = set(prem_keys)
    for k in sorted(known):
        eng.insert(k)
    agenda = sorted(known)
    truncated = False
    rounds = 0
    while agenda or rounds == 0:
        if rounds >= lim.max_depth:
            truncated = True
            break
        rounds += 1
        new: set[tuple] = set()
        if rounds == 1:
            for _name, ck in eng.spontaneous():
                if ck not in known:
                    new.add(ck)
        for k in agenda:
            for _name, _prem, ck, _note in eng.expand(k):
                if ck not in known:
                    new.add(ck)
        if not new:
            break
        room = lim.max_statements - len(known)
        batch = sorted(new)
        if len(batch) > room:
            batch = batch[:room]
            truncated = True
        known.update(batch)
        for k in batch:
            eng.insert(k)
        agenda = batch
        if truncated:
            break
    stmts = frozenset(eng.space.stmt_of(k) for k in known)
    return ClosureResult(stmts, truncated, rounds)


def prove(
    goal: CIStatement,
    premises: Iterable[CIStatement],
    rs: RuleSet,
    *,
    universe: Universe,
    registry: ReductionRegistry | None = None,
    complementarity: ComplementarityDecl | None = None,
    limits: Limits | None = None,
) -> Derivation | NotDerivable:
    """Minimal proof search: cost-ordered expansion of the closure frontier
    where a derivation's cost is its rule-application count; ties broken by
    rule order, then by canonical premise keys."""
    premises = list(premises)
    lim = limits or Limits()
    eng, prem_keys = _setup(premises, rs, universe, registry, complementarity, extra=[goal])
    goal_key = eng.space.key_of(goal)
    eng.check_legal(goal, goal_key)

    cost: dict[tuple, int] = {}
    just: dict[tuple, tuple] = {}
    heap: list = []

    def push(c: int, ridx: int, prem: tuple, ck: tuple, note: str) -> None:
        if ck not in cost and c <= lim.max_depth:
            heapq.heappush(heap, (c, ridx, prem, ck, note))

    for k in sorted(prem_keys):
        cost[k] = 0
        just[k] = ("premise", (), "")
        eng.insert(k)
    for name, ck in eng.spontaneous():
        push(1, eng.rule_idx[name], (), ck, "")
    for k in sorted(prem_keys):
        for name, prem, ck, note in eng.expand(k):
            push(1 + sum(cost[p] for p in prem), eng.rule_idx[name], prem, ck, note)

    truncated = False
    if goal_key not in cost:
        while heap:
            c, ridx, prem, ck, note = heapq.heappop(heap)
            if ck in cost:
                continue
            if len(cost) >= lim.max_statements:
                truncated = True
                break
            cost[ck] = c
            just[ck] = (eng.rs.rules[ridx], prem, note)
            eng.insert(ck)
            if ck == goal_key:
                break
            for name, prem2, ck2, note2 in eng.expand(ck):
                push(1 + sum(cost[p] for p in prem2), eng.rule_idx[name], prem2, ck2, note2)
        else:
            if goal_key not in cost:
                return NotDerivable(truncated=False)

    if goal_key not in cost:
        return NotDerivable(truncated=True)

    memo: dict[tuple, Derivation] = {}

    def build(k: tuple) -> Derivation:
        node = memo.get(k)
        if node is None:
            rule, prem, note = just[k]
            node = Derivation(
                eng.space.stmt_of(k), rule, tuple(build(p) for p in prem), note
            )
            memo[k] = node
        return node

    return build(goal_key)


def apply_rule(
    rule: Rule | str,
    known: Iterable[CIStatement],
    *,
    universe: Universe,
    registry: ReductionRegistry | None = None,
    complementarity: ComplementarityDecl | None = None,
    rules: RuleSet | str = "SEPAROID_FULL",
    flags: Iterable[str] = (),
) -> frozenset:
    """All one-step conclusions of a single rule from `known` (strict form:
    raises GuardViolation when a supplied statement matches the rule's shape
    but violates its guard, e.g. P1' on a statement with a decision variable
    in the right slot, or a flag-gated rule without an enabling flag)."""
    name = rule.name if isinstance(rule, Rule) else rule
    if name not in RULES:
        raise ValueError(f"unknown rule {name!r}")
    if isinstance(rules, str):
        holder = next((rsn for rsn, rr in _RULE_SETS.items() if name in rr), None)
        rs = rule_set(holder or rules, flags)
    else:
        rs = RuleSet(rules.name, rules.rules, frozenset(rules.flags) | frozenset(flags))
    if name not in rs.rules:
        raise ValueError(f"rule {name!r} is not part of rule set {rs.name}")
    r = RULES[name]
    if r.model_only:
        raise GuardViolation(f"{name} is a model-level property, not a symbolic rule")
    if r.flag_gated and not rs.flags:
        raise GuardViolation(f"{name} fires only under an enabling flag")

    known = list(known)
    space = _Space(universe, registry)
    keys = [space.key_of(s) for s in known]
    mode = _infer_mode(rs, space, keys)
    eng = _Engine(rs, space, complementarity or ComplementarityDecl(), mode)
    for stmt, k in zip(known, keys):
        if rs.name in ("SEPAROID_FULL", "VCI_STRONG"):
            if not eng.legal(k):
                raise GuardViolation(
                    f"{name} applies to pure statements only; got {stmt!r}"
                )
        elif name == "P1'" and k[1] == 0 and k[3] != 0:
            raise GuardViolation(
                f"P1' symmetry is confined to statements with no decision "
                f"variable in the outer slots; got {stmt!r}"
            )
        elif not eng.legal(k):
            raise GuardViolation(f"{stmt!r} is not admissible under {rs.name}")

    out: set[tuple] = set()
    if r.arity == 0:
        for rn, ck in eng.spontaneous():
            if rn == name:
                out.add(ck)
    else:
        for k in sorted(set(keys)):
            eng.insert(k)
        for k in sorted(set(keys)):
            if r.arity == 1:
                for ck, _note in eng.unary(name, k):
                    out.add(ck)
            else:
                for _prem, ck in eng.binary(name, k):
                    out.add(ck)
    return frozenset(space.stmt_of(k) for k in out)


def replay(
    d: Derivation,
    *,
    universe: Universe,
    registry: ReductionRegistry | None = None,
    complementarity: ComplementarityDecl | None = None,
    rules: RuleSet | str = "SEPAROID_FULL",
    premises: Iterable[CIStatement] = (),
) -> bool:
    """Re-run every step of a derivation through apply_rule; True iff each
    conclusion is reproduced exactly from its cited premises."""
    rs = rule_set(rules) if isinstance(rules, str) else rules
    premise_set = {p.sort_key() for p in premises}

    def check(node: Derivation) -> bool:
        if node.rule == "premise":
            return not premise_set or node.goal.sort_key() in premise_set
        r = RULES.get(node.rule)
        if r is None or len(node.children) != r.arity:
            return False
        try:
            conclusions = apply_rule(
                node.rule,
                [c.goal for c in node.children],
                universe=universe,
                registry=registry,
                complementarity=complementarity,
                rules=rs,
                flags=rs.flags,
            )
        except GuardViolation:
            return False
        if node.goal not in conclusions:
            return False
        return all(check(c) for c in node.children)

    return check(d)


def format_proof(d: Derivation) -> str:
    """Numbered step list in replay order; each line cites the rule and the
    step numbers of its premises."""
    from .dsl import render_statement

    steps: list[tuple[CIStatement, str, list[int], str]] = []
    index: dict[tuple, int] = {}

    def visit(node: Derivation) -> int:
        key = node.goal.sort_key()
        if key in index:
            return index[key]
        nums = [visit(c) for c in node.children]
        steps.append((node.goal, node.rule, nums, node.note))
        index[key] = len(steps)
        return index[key]

    visit(d)
    lines = []
    for i, (stmt, rule, nums, note) in enumerate(steps, 1):
        if rule == "premise":
            tag = "premise"
        else:
            tag = rule
            if note:
                tag += f" {note}"
            if nums:
                tag += " from " + ", ".join(str(n) for n in nums)
        lines.append(f"{i}. {render_statement(stmt)}  [{tag}]")
    return "\n".join(lines)


def derivation_to_dict(d: Derivation) -> dict:
    from .dsl import render_statement

    return {
        "statement": render_statement(d.goal),
        "rule": d.rule,
        "note": d.note,
        "children": [derivation_to_dict(c) for c in d.children],
    }
