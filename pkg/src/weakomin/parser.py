"""Text syntax for formulas.

::

    formula := 'E' var '.' formula | 'A' var '.' formula
             | formula '|' formula | formula '&' formula | '!' formula
             | '(' formula ')' | atom | 'true' | 'false'
    atom    := term ('<' | '=') term | 'U(' term ',' term ')'
             | 'lt(' term ',' term ',' int ')' | 'eq(' term ',' term ',' int ')'
    term    := 'x' int | rational | extpoint          (extpoint: Mbar only)

``!`` binds tighter than ``&``, which binds tighter than ``|``; a quantifier's
scope extends as far right as possible.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .exact import ExtPoint
from .formula import (
    EQ,
    FALSE,
    LT,
    TRUE,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Not,
    Or,
    Universe,
    Var,
    _split_term,
    free_vars,
)


class ParseError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<var>x\d+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<xi>xi\b)
  | (?P<kw>lt|eq|U|E|A|true|false)\b
  | (?P<op>[()<=,.&|!*+\-])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op" or kind == "kw":
                kind = value
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, universe: Universe):
        self.tokens = _tokenize(text)
        self.i = 0
        self.universe = universe

    @property
    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise ParseError(f"expected {kind!r}, found {found!r}", tok[2])
        return tok

    def formula(self):
        if self.peek[0] in ("E", "A"):
            return self.quantified()
        return self.disjunction()

    def quantified(self):
        q = self.next()[0]
        var = int(self.expect("var")[1][1:])
        if var < 1:
            raise ParseError("variable indices start at 1", self.tokens[self.i - 1][2])
        self.expect(".")
        body = self.formula()
        return Exists(var, body) if q == "E" else Forall(var, body)

    def disjunction(self):
        items = [self.conjunction()]
        while self.peek[0] == "|":
            self.next()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self):
        items = [self.unary()]
        while self.peek[0] == "&":
            self.next()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self):
        kind = self.peek[0]
        if kind == "!":
            self.next()
            return Not(self.unary())
        if kind == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if kind in ("E", "A"):
            return self.quantified()
        if kind == "true":
            self.next()
            return TRUE
        if kind == "false":
            self.next()
            return FALSE
        return self.atom()

    def atom(self):
        kind, _, pos = self.peek
        if kind == "U":
            self.next()
            self.expect("(")
            t1 = self.term()
            self.expect(",")
            t2 = self.term()
            self.expect(")")
            return self._atom(LT, t2, t1, 1)
        if kind in ("lt", "eq"):
            self.next()
            self.expect("(")
            t1 = self.term()
            self.expect(",")
            t2 = self.term()
            self.expect(",")
            k = self.integer()
            self.expect(")")
            return self._atom(kind, t1, t2, k)
        t1 = self.term()
        op = self.next()
        if op[0] not in ("<", "="):
            raise ParseError(f"expected '<' or '=', found {op[1] or 'end of input'!r}", op[2])
        t2 = self.term()
        return self._atom(LT if op[0] == "<" else EQ, t1, t2, 0)

    def _atom(self, kind, t1, t2, k):
        l, lk = _split_term(t1)
        r, rk = _split_term(t2)
        return Atom(kind, l, r, k + rk - lk)

    def integer(self) -> int:
        sign = 1
        if self.peek[0] in ("+", "-"):
            sign = -1 if self.next()[0] == "-" else 1
        tok = self.expect("num")
        if "/" in tok[1]:
            raise ParseError("expected an integer shift", tok[2])
        return sign * int(tok[1])

    def term(self):
        kind, value, pos = self.peek
        if kind == "var":
            self.next()
            index = int(value[1:])
            if index < 1:
                raise ParseError("variable indices start at 1", pos)
            return Var(index)
        sign = 1
        if kind in ("+", "-"):
            sign = -1 if self.next()[0] == "-" else 1
            kind, value, pos = self.peek
        q = Fraction(0)
        k = 0
        if kind == "num":
            self.next()
            if self.peek[0] == "*":
                # k*xi
                self.next()
                self.expect("xi")
                if "/" in value:
                    raise ParseError("xi coefficient must be an integer", pos)
                k = sign * int(value)
            else:
                q = sign * Fraction(value)
                if self.peek[0] in ("+", "-") and self._xi_follows():
                    op = self.next()[0]
                    k = self._xi_coefficient()
                    if op == "-":
                        k = -k
        elif kind == "xi":
            self.next()
            k = sign
        else:
            raise ParseError(f"expected a term, found {value or 'end of input'!r}", pos)
        if k and self.universe is Universe.M:
            raise ParseError("constants with a xi-part are not in Q", pos)
        return Const(ExtPoint(q, k)) if k else Const(q)

    def _xi_follows(self) -> bool:
        t1 = self.tokens[self.i + 1]
        t2 = self.tokens[self.i + 2] if self.i + 2 < len(self.tokens) else ("eof", "", 0)
        return t1[0] == "xi" or (t1[0] == "num" and t2[0] == "*")

    def _xi_coefficient(self) -> int:
        if self.peek[0] == "xi":
            self.next()
            return 1
        tok = self.expect("num")
        if "/" in tok[1]:
            raise ParseError("xi coefficient must be an integer", tok[2])
        self.expect("*")
        self.expect("xi")
        return int(tok[1])


def parse_node(text: str, universe: Universe = Universe.M):
    p = _Parser(text, Universe.parse(universe))
    node = p.formula()
    tok = p.peek
    if tok[0] != "eof":
        raise ParseError(f"unexpected {tok[1]!r}", tok[2])
    return node


def parse(text: str, universe: "Universe | str" = Universe.M, arity: int | None = None) -> Formula:
    """Parse ``text``; with ``arity=None`` the arity is the largest free index."""
    universe = Universe.parse(universe)
    node = parse_node(text, universe)
    fv = free_vars(node)
    if arity is None:
        arity = max(fv, default=0)
    elif fv and max(fv) > arity:
        raise FormulaError(f"free variable x{max(fv)} exceeds arity {arity}")
    return Formula(node, arity, universe)
