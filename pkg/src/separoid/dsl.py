"""Statement DSL: parsing and rendering.

Statement grammar (UTF-8 text)::

    stmt    := varlist "_||_" varlist ("|" (varlist | "0"))?
    varlist := name ("," name)*

An omitted conditioning part, or a literal ``0`` after the bar, denotes the
empty conditioning set.  Session text is a sequence of ``;``-terminated
declarations::

    stochastic X, Y, Z;
    decision Theta, Phi;
    complementary {Theta, Phi};
    reduce W <= Y;
    premise X _||_ Y | Z;

``#`` starts a comment running to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import IllFormed, ParseError
from .universe import (
    CIStatement,
    ComplementarityDecl,
    ReductionRegistry,
    Universe,
    VarSet,
    well_formed,
)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_WS = re.compile(r"\s*")


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while True:
            self.pos = _WS.match(self.text, self.pos).end()
            if self.text.startswith("#", self.pos):
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            else:
                return

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def literal(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.literal(token):
            raise ParseError(f"expected {token!r}", self.byte_offset())

    def name(self) -> str:
        self.skip_ws()
        m = _NAME.match(self.text, self.pos)
        if not m:
            raise ParseError("expected a variable name", self.byte_offset())
        self.pos = m.end()
        return m.group(0)

    def byte_offset(self) -> int:
        return len(self.text[: self.pos].encode("utf-8"))


def _varlist(cur: _Cursor) -> list[str]:
    names = [cur.name()]
    while cur.literal(","):
        names.append(cur.name())
    return names


def _statement(cur: _Cursor, universe: Universe) -> CIStatement:
    left = _varlist(cur)
    cur.expect("_||_")
    right = _varlist(cur)
    cond: list[str] = []
    if cur.literal("|"):
        cur.skip_ws()
        if cur.literal("0"):
            pass
        elif cur.eof() or cur.text.startswith(";", cur.pos):
            raise ParseError("conditioning bar with nothing after it", cur.byte_offset())
        else:
            cond = _varlist(cur)
    return CIStatement(
        universe.varset(left), universe.varset(right), universe.varset(cond)
    )


def parse_statement(text: str, universe: Universe) -> CIStatement:
    """Parse one statement against a declared universe."""
    cur = _Cursor(text)
    stmt = _statement(cur, universe)
    if not cur.eof():
        raise ParseError("trailing input after statement", cur.byte_offset())
    return stmt


def render_statement(stmt: CIStatement) -> str:
    def slot(v: VarSet) -> str:
        return ",".join(v.names)

    out = f"{slot(stmt.left)} _||_ {slot(stmt.right)}"
    if stmt.cond:
        out += f" | {slot(stmt.cond)}"
    return out


@dataclass
class Session:
    """A parsed declaration block: universe, premises and options."""

    universe: Universe = field(default_factory=Universe)
    complementarity: ComplementarityDecl = field(default_factory=ComplementarityDecl)
    registry: ReductionRegistry = field(default_factory=ReductionRegistry)
    premises: list[CIStatement] = field(default_factory=list)


def parse_session(text: str) -> Session:
    """Parse a sequence of ``;``-terminated declarations."""
    ses = Session()
    ses.registry = ReductionRegistry(ses.universe)
    families: list[frozenset] = []
    cur = _Cursor(text)
    while not cur.eof():
        start = cur.byte_offset()
        word = cur.name()
        if word in ("stochastic", "decision"):
            for n in _varlist(cur):
                ses.universe.declare(n, word)
        elif word == "complementary":
            cur.expect("{")
            names = _varlist(cur)
            cur.expect("}")
            for n in names:
                if ses.universe.kind(n) != "decision":
                    raise IllFormed(f"complementary family member {n!r} is not a decision variable")
            families.append(frozenset(names))
            ses.complementarity = ComplementarityDecl(frozenset(families))
        elif word == "reduce":
            child = cur.name()
            cur.expect("<=")
            parent = cur.name()
            ses.registry.register(child, parent)
        elif word == "premise":
            stmt = _statement(cur, ses.universe)
            if not well_formed(stmt, ses.complementarity, general=bool(stmt.left.dec)):
                raise IllFormed(
                    f"premise {render_statement(stmt)!r}: decision names must form a "
                    "declared complementary family"
                )
            ses.premises.append(stmt)
        else:
            raise ParseError(f"unknown declaration {word!r}", start)
        cur.expect(";")
    return ses
