"""Quantifier elimination by bound-pair separation.

For one conjunctive system and a variable ``v`` every atom mentioning ``v``
is a lower bound ``t + k*xi < v``, an upper bound ``v < t + k*xi`` or an
equation ``v = t + k*xi``.  An equation is substituted away.  Otherwise, since
both universes are densely ordered, ``v`` can be chosen iff every lower bound
lies below every upper bound, which is the atom ``Lt(t1, t2, k2 - k1)``.
Shift magnitudes therefore grow additively, which is why atoms carry
arbitrary integer shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from . import dbm
from .exact import NEG_INF, POS_INF, Bound, ExtPoint, cmp_ext, rational_between
from .formula import (
    EQ,
    LT,
    And,
    Atom,
    Const,
    canonical,
    DNF,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Not,
    Or,
    Universe,
    Var,
    all_vars,
    make_atom,
    simplify_system,
    substitute_atom,
    to_dnf,
)


class Bounds(NamedTuple):
    lowers: list  # (term, shift): term + shift*xi < v
    uppers: list  # (term, shift): v < term + shift*xi
    equals: list  # (term, shift): v = term + shift*xi
    rest: list    # atoms not mentioning v


def bounds_of(atoms: Iterable[Atom], v: int) -> Bounds:
    lowers, uppers, equals, rest = [], [], [], []
    x = Var(v)
    for a in atoms:
        if a.left == x:
            (uppers if a.kind == LT else equals).append((a.right, a.shift))
        elif a.right == x:
            if a.kind == LT:
                lowers.append((a.left, -a.shift))
            else:
                equals.append((a.left, -a.shift))
        else:
            rest.append(a)
    return Bounds(lowers, uppers, equals, rest)


@dataclass(frozen=True)
class ConstraintSystem:
    """A conjunction of atoms over x1..x_arity."""

    atoms: frozenset
    arity: int
    universe: Universe = Universe.M

    def bounds(self, v: int | None = None) -> Bounds:
        return bounds_of(self.atoms, self.arity if v is None else v)


def project_system(atoms: Iterable[Atom], v: int, universe: Universe):
    """Eliminate ``v`` from one system; ``None`` if the result is unsatisfiable."""
    b = bounds_of(atoms, v)
    if b.equals:
        t, k = b.equals[0]
        out = [substitute_atom(a, {v: (t, k)}, universe) for a in atoms
               if not (a.kind == EQ and v in a.vars and _eq_is(a, v, t, k))]
        return simplify_system(out)
    out = list(b.rest)
    for lt, lk in b.lowers:
        for ut, uk in b.uppers:
            out.append(make_atom(LT, lt, ut, uk - lk, universe))
    return simplify_system(out)


def _eq_is(a: Atom, v: int, t, k) -> bool:
    x = Var(v)
    return (a.left == x and (a.right, a.shift) == (t, k)) or (
        a.right == x and (a.left, -a.shift) == (t, k)
    )


def project(X: DNF, v: int, arity: int | None = None) -> DNF:
    systems = []
    for s in X.systems:
        p = project_system(s, v, X.universe)
        if p is not None:
            systems.append(p)
    return DNF.build(systems, X.arity if arity is None else arity, X.universe)


def project_last(X: DNF) -> DNF:
    """Image under the projection forgetting the last coordinate."""
    if X.arity < 1:
        raise FormulaError("cannot project a set of arity 0")
    return project(X, X.arity, X.arity - 1)


def _term_value(t, values) -> ExtPoint:
    return values[t.index] if isinstance(t, Var) else ExtPoint(t.value)


def choose_value(lowers, uppers, equals, values) -> ExtPoint | Fraction | None:
    """Pick a universe value for a variable given its bounds at known values."""
    if equals:
        t, k = equals[0]
        return _term_value(t, values).shift(k)
    lo: Bound = NEG_INF
    hi: Bound = POS_INF
    for t, k in lowers:
        val = _term_value(t, values).shift(k)
        if cmp_ext(val, lo) > 0:
            lo = val
    for t, k in uppers:
        val = _term_value(t, values).shift(k)
        if cmp_ext(val, hi) < 0:
            hi = val
    if cmp_ext(lo, hi) >= 0:
        return None
    return rational_between(lo, hi)


def conj_satisfiable(S: "ConstraintSystem | Iterable[Atom]", arity: int | None = None,
                     universe: Universe = Universe.M) -> tuple[bool, tuple | None]:
    """Decide a conjunction and, when satisfiable, return a witness point.

    Variables are eliminated from the last down; the witness is then rebuilt
    from the first coordinate up by resolving each variable's bounds.
    """
    if isinstance(S, ConstraintSystem):
        atoms, arity, universe = S.atoms, S.arity, S.universe
    else:
        atoms = simplify_system((canonical(a, universe) for a in S), consistency=False)
        if atoms is None:
            return False, None
        if arity is None:
            arity = max((i for a in atoms for i in a.vars), default=0)
    levels = [frozenset(atoms)]
    current = levels[0]
    for v in range(arity, 0, -1):
        current = project_system(current, v, universe)
        if current is None:
            return False, None
        levels.append(current)
    if current:
        # Only variable-free atoms can remain, and those fold to booleans.
        raise AssertionError("elimination left atoms behind")
    values: dict[int, ExtPoint] = {}
    for v in range(1, arity + 1):
        system = levels[arity - v]
        b = bounds_of(system, v)
        val = choose_value(b.lowers, b.uppers, b.equals, values)
        if val is None:
            raise AssertionError("bound resolution failed on a satisfiable system")
        values[v] = val if isinstance(val, ExtPoint) else ExtPoint(val)
    witness = tuple(values[v].q if values[v].is_rational else values[v] for v in range(1, arity + 1))
    return True, witness


def is_empty(X: DNF) -> bool:
    return not any(dbm.consistent(s) for s in X.systems)


def equivalent(X: DNF, Y: DNF) -> bool:
    """Pointwise equality, via emptiness of the symmetric difference."""
    return is_empty(X & ~Y) and is_empty(Y & ~X)


def subset(X: DNF, Y: DNF) -> bool:
    return is_empty(X & ~Y)


def _elim(node, universe: Universe, width: int) -> DNF:
    if isinstance(node, Atom):
        return DNF.atom(make_atom(node.kind, node.left, node.right, node.shift, universe),
                        width, universe)
    if isinstance(node, And):
        out = DNF.true(width, universe)
        for item in node.items:
            out = out & _elim(item, universe, width)
            if out.is_false:
                break
        return out
    if isinstance(node, Or):
        out = DNF.false(width, universe)
        for item in node.items:
            out = out | _elim(item, universe, width)
        return out
    if isinstance(node, Not):
        return ~_elim(node.item, universe, width)
    if isinstance(node, Exists):
        return project(_elim(node.body, universe, width), node.var)
    if isinstance(node, Forall):
        return ~project(~_elim(node.body, universe, width), node.var)
    raise FormulaError(f"unknown formula node {node!r}")


def eliminate(f: Formula) -> DNF:
    """A quantifier-free DNF equivalent to ``f`` on its universe."""
    if f.quantifier_free:
        return to_dnf(f)
    width = max(all_vars(f.node) | {f.arity})
    return _elim(f.node, f.universe, width).with_arity(f.arity)


# --------------------------------------------------------------------------
# subsets of the line


@dataclass(frozen=True)
class Point:
    at: ExtPoint

    def __str__(self) -> str:
        return f"{{{self.at}}}"


@dataclass(frozen=True)
class Interval:
    lo: Bound
    hi: Bound

    def __str__(self) -> str:
        return f"({self.lo}, {self.hi})"


def _system_piece(system, universe: Universe):
    b = bounds_of(system, 1)
    if b.rest:
        raise FormulaError("describe_1d needs a set of arity 1")
    if b.equals:
        t, k = b.equals[0]
        return Point(ExtPoint(t.value, k))
    lo: Bound = NEG_INF
    hi: Bound = POS_INF
    for t, k in b.lowers:
        val = ExtPoint(t.value, k)
        if cmp_ext(val, lo) > 0:
            lo = val
    for t, k in b.uppers:
        val = ExtPoint(t.value, k)
        if cmp_ext(val, hi) < 0:
            hi = val
    return Interval(lo, hi)


def _in_universe(p: ExtPoint, universe: Universe) -> bool:
    return universe is Universe.MBAR or p.is_rational


def describe_1d(X: DNF) -> list:
    """Sorted, disjoint, maximal pieces (points and open intervals) of ``X``."""
    if X.arity != 1:
        raise FormulaError("describe_1d needs a set of arity 1")
    universe = X.universe
    points, intervals = set(), []
    for s in X.systems:
        piece = _system_piece(s, universe)
        if isinstance(piece, Point):
            points.add(piece.at)
        else:
            intervals.append(piece)
    points = {p for p in points
              if not any(cmp_ext(iv.lo, p) < 0 < cmp_ext(iv.hi, p) for iv in intervals)}
    intervals.sort(key=lambda iv: _SortKey(iv.lo))
    merged: list[list] = []
    for iv in intervals:
        if merged:
            hi = merged[-1][1]
            c = cmp_ext(iv.lo, hi)
            if c == 0 and isinstance(hi, ExtPoint):
                if hi in points:
                    points.discard(hi)
                    c = -1
                elif not _in_universe(hi, universe):
                    c = -1
            if c < 0:
                if cmp_ext(iv.hi, hi) > 0:
                    merged[-1][1] = iv.hi
                continue
        merged.append([iv.lo, iv.hi])
    pieces: list = [Interval(lo, hi) for lo, hi in merged]
    pieces.extend(Point(p) for p in points)
    pieces.sort(key=lambda pc: _SortKey(pc.at) if isinstance(pc, Point)
                else _SortKey(pc.lo, after=True))
    return pieces


class _SortKey:
    __slots__ = ("v", "after")

    def __init__(self, v, after: bool = False):
        self.v = v
        self.after = after

    def __lt__(self, other) -> bool:
        c = cmp_ext(self.v, other.v)
        if c != 0:
            return c < 0
        return not self.after and other.after


def pieces_to_dnf(pieces: Iterable, universe: Universe) -> DNF:
    systems = []
    for pc in pieces:
        if isinstance(pc, Point):
            systems.append([make_atom(EQ, Var(1), Const(pc.at.q), pc.at.k, universe)])
            continue
        atoms = []
        if isinstance(pc.lo, ExtPoint):
            # lo < x1  <=>  lo.q < x1 - lo.k*xi
            atoms.append(make_atom(LT, Const(pc.lo.q), Var(1), -pc.lo.k, universe))
        if isinstance(pc.hi, ExtPoint):
            atoms.append(make_atom(LT, Var(1), Const(pc.hi.q), pc.hi.k, universe))
        systems.append(atoms)
    return DNF.build(systems, 1, universe)


def is_finite_1d(X: DNF) -> bool:
    return not any(isinstance(p, Interval) for p in describe_1d(X))
