"""Dimension functions ``dim[I]`` built from a distinguished set of the line.

A point's coordinates are classified by membership in ``I`` (class 0) or its
complement (class 1).  Inside one product class ``I<tau>`` the dimension of a
set is computed by peeling off the last coordinate: a complement coordinate
is forgotten, an ``I`` coordinate contributes one exactly over the part of
the projection whose fibers contain an interval.

Two readings of the recursion are available.  ``recursive`` (the default)
measures the projected pieces with ``dim[I]`` again; ``literal`` measures them
with the topological dimension.  Only the first is permutation invariant,
see ``RECTANGLE``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

from . import dbm
from .exact import ExtPoint, NEG_INF
from .formula import (
    DNF,
    EQ,
    LT,
    Const,
    FormulaError,
    Universe,
    Var,
    cartesian_classes,
    lift_1d,
    make_atom,
    permute,
)
from .qe import (
    Interval,
    Point,
    describe_1d,
    is_empty,
    is_finite_1d,
    pieces_to_dnf,
    project_last,
    project_system,
)

NEG = float("-inf")


class Mode(str, Enum):
    RECURSIVE = "recursive"
    LITERAL = "literal"

    @classmethod
    def parse(cls, text) -> "Mode":
        if isinstance(text, Mode):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise FormulaError(f"unknown mode {text!r}; expected recursive or literal") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DimFn:
    """``dim[I]`` for a subset ``I`` of the line."""

    I: DNF
    mode: Mode = Mode.RECURSIVE

    def __post_init__(self):
        if self.I.arity != 1:
            raise FormulaError("the defining set of a dimension function must have arity 1")
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    @property
    def universe(self) -> Universe:
        return self.I.universe

    @property
    def well_formed(self) -> bool:
        """Whether ``I`` has an interior, as the construction assumes."""
        return affine_dim(self.I) == 1

    def classes(self, n: int) -> dict:
        return _classes(self.I, n)

    def __call__(self, X: DNF):
        return dim_I(X, self)

    def __str__(self) -> str:
        return f"dim[{self.I}]"


@lru_cache(maxsize=256)
def _classes(I: DNF, n: int) -> dict:
    return cartesian_classes(I, n)


def topdim_fn(universe: Universe = Universe.M) -> DimFn:
    """``dim[M]``, which is the topological dimension."""
    return DimFn(DNF.true(1, universe))


def _eq_components(atoms) -> dict:
    parent: dict[int, int] = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in atoms:
        if a.kind != EQ:
            continue
        l = a.left.index if isinstance(a.left, Var) else 0
        r = a.right.index if isinstance(a.right, Var) else 0
        parent[find(l)] = find(r)
    return parent


def affine_dim(X: DNF):
    """Topological dimension read off the equalities of each system.

    A consistent system cuts out a nonempty relatively open piece of the
    affine space given by its equalities (its strict bounds are open), so its
    dimension is the number of coordinates left free by the equalities.
    """
    best = NEG
    n = X.arity
    for s in X.systems:
        if not dbm.consistent(s):
            continue
        parent = _eq_components(s)

        def root(a):
            while parent.get(a, a) != a:
                a = parent[a]
            return a

        tied = {root(0)}
        free = 0
        for i in range(1, n + 1):
            r = root(i)
            if r not in tied:
                tied.add(r)
                free += 1
        best = max(best, free)
        if best == n:
            break
    return best


def interior_shadow(Y: DNF) -> DNF:
    """Points of ``Pi(Y)`` over which the last fiber of ``Y`` contains an interval.

    A fiber is a finite union of points and open intervals, one per system;
    it has interior iff some system not pinning the last coordinate by an
    equation is satisfiable over the point.
    """
    n = Y.arity
    systems = []
    for s in Y.systems:
        if any(a.kind == EQ and n in a.vars for a in s):
            continue
        p = project_system(s, n, Y.universe)
        if p is not None:
            systems.append(p)
    return DNF.build(systems, n - 1, Y.universe)


def _plus(v, i: int):
    return v if v == NEG else v + i


def _dim_class(Y: DNF, tau: tuple, d: DimFn):
    """``dim[I]`` of a set assumed to lie inside ``I<tau>``."""
    if is_empty(Y):
        return NEG
    n = len(tau)
    if n == 1:
        return affine_dim(Y) if tau[0] == 0 else 0
    if tau[-1] == 1:
        return _dim_class(project_last(Y), tau[:-1], d)
    base = project_last(Y)
    s1 = interior_shadow(Y)
    s0 = base & ~s1
    if d.mode is Mode.RECURSIVE:
        measure = lambda Z: _dim_class(Z, tau[:-1], d)
    else:
        measure = affine_dim
    return max(measure(s0), _plus(measure(s1), 1))


def dim_I(X: DNF, d: DimFn):
    """``dim[I](X)``, with ``-inf`` for the empty set."""
    if X.universe is not d.universe:
        raise FormulaError("set and dimension function live over different universes")
    n = X.arity
    if n == 0:
        return NEG if X.is_false else 0
    best = NEG
    for tau, cls in d.classes(n).items():
        Y = X & cls
        if Y.is_false:
            continue
        best = max(best, _dim_class(Y, tau, d))
        if best == n:
            break
    return best


def fiber_partition(X: DNF, d: "DimFn | None" = None) -> tuple[DNF, DNF]:
    """``(X(0), X(1))``: the projection split by the dimension of the last fiber.

    With ``d=None`` the fibers are measured topologically.  A fiber has
    ``dim[I]`` one iff its part inside ``I`` contains an interval.
    """
    n = X.arity
    if n < 2:
        raise FormulaError("fiber_partition needs arity at least 2")
    Y = X if d is None else X & lift_1d(d.I, n, n)
    x1 = interior_shadow(Y)
    x0 = project_last(X) & ~x1
    return x0, x1


# --------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    verdicts: dict = field(default_factory=lambda: {"1": True, "2": True, "3": True, "4": True})
    counterexamples: list = field(default_factory=list)
    checked: dict = field(default_factory=lambda: {"1": 0, "2": 0, "3": 0, "4": 0})

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failed(self, axiom: str, n: int | None = None) -> bool:
        return any(c["axiom"] == axiom and (n is None or c["n"] == n) for c in self.counterexamples)

    def record(self, axiom: str, n: int, inputs: dict, lhs, rhs) -> None:
        self.checked[axiom] += 1
        if lhs != rhs:
            self.verdicts[axiom] = False
            self.counterexamples.append(
                {"axiom": axiom, "n": n, "inputs": inputs, "lhs": _num(lhs), "rhs": _num(rhs)})

    def to_json(self) -> dict:
        return {"passed": self.passed, "verdicts": self.verdicts, "checked": self.checked,
                "counterexamples": self.counterexamples}


def _num(v):
    return "-inf" if v == NEG else int(v)


def rectangle(a=0, universe: Universe = Universe.M) -> DNF:
    """``(-inf, a) x (a, inf)``: separates the two readings when ``I = (a, inf)``.

    Recursively it has dimension 1 either way round; the literal reading
    gives it 2 but its mirror image 1.
    """
    a = ExtPoint(a) if not isinstance(a, ExtPoint) else a
    return DNF.build([[make_atom(LT, Var(1), Const(a.q), a.k, universe),
                       make_atom(LT, Const(a.q), Var(2), -a.k, universe)]], 2, universe)


RECTANGLE = rectangle()


def _curated(d: DimFn) -> list:
    """The rectangle at the finite left end of ``I``'s first interval, if any."""
    for pc in describe_1d(d.I):
        if isinstance(pc, Interval) and isinstance(pc.lo, ExtPoint):
            return [rectangle(pc.lo, d.universe)]
    return [rectangle(0, d.universe)]


def normalization_sets(universe: Universe) -> list[tuple[DNF, int | float]]:
    out = [(DNF.false(1, universe), NEG), (DNF.true(1, universe), 1)]
    points = [ExtPoint(0), ExtPoint(1, 0), ExtPoint(-3, 0), ExtPoint("1/2")]
    if universe is Universe.MBAR:
        points.append(ExtPoint(0, 1))
    for p in points:
        out.append((DNF.atom(make_atom(EQ, Var(1), Const(p.q), p.k, universe), 1, universe), 0))
    return out


def check_axioms(d: "DimFn | Callable", families: Sequence[DNF], n_max: int = 3,
                 seed: int = 0, curated: bool = True) -> AxiomReport:
    """Check the dimension-function axioms for ``d`` on the given sets.

    (1) on the empty set, singletons and the line; (2) on consecutive pairs of
    equal arity; (3) on one or more permutations per set; (4) on every set of
    arity at least 2, for both halves of its fiber partition.
    """
    if isinstance(d, DimFn):
        universe = d.universe
        dim = d
        part = lambda X: fiber_partition(X, d)
    else:
        universe = families[0].universe if families else Universe.M
        dim = d
        part = lambda X: fiber_partition(X, None)
    rng = random.Random(seed)
    report = AxiomReport()
    for X, expected in normalization_sets(universe):
        report.record("1", 1, {"X": str(X)}, dim(X), expected)
    sets = [X for X in families if X.arity <= n_max]
    if curated and isinstance(d, DimFn):
        sets = _curated(d) + sets
    values = {}

    def measure(X):
        if X not in values:
            values[X] = dim(X)
        return values[X]

    previous: dict[int, DNF] = {}
    for X in sets:
        n = X.arity
        dx = measure(X)
        Y = previous.get(n)
        if Y is not None:
            report.record("2", n, {"X": str(X), "Y": str(Y)}, measure(X | Y), max(dx, measure(Y)))
        previous[n] = X
        if n >= 2:
            perms = [p for p in permutations(range(1, n + 1)) if list(p) != list(range(1, n + 1))]
            chosen = perms if n == 2 else rng.sample(perms, 2)
            for sigma in chosen:
                report.record("3", n, {"X": str(X), "sigma": list(sigma)},
                              measure(permute(X, sigma)), dx)
            parts = part(X)
            for i, Xi in enumerate(parts):
                lhs = measure(X & Xi.with_arity(n))
                rhs = _plus(measure(Xi), i) if not Xi.is_false else NEG
                report.record("4", n, {"X": str(X), "i": i, "X(i)": str(Xi)}, lhs, rhs)
    return report


# --------------------------------------------------------------------------
# recovering I


def fineq(I1: DNF, I2: DNF) -> bool:
    """Whether two subsets of the line differ in finitely many points."""
    if I1.universe is not I2.universe:
        raise FormulaError("fineq compares sets over the same universe")
    return is_finite_1d((I1 - I2) | (I2 - I1))


def recover_I(d: DimFn) -> DNF:
    """``{a : dim((a, b)) = 1 for every b > a}``.

    That holds exactly when ``I`` contains a right neighborhood of ``a``: the
    interval pieces of ``I`` together with their left endpoints.
    """
    pieces = []
    for pc in describe_1d(d.I):
        if not isinstance(pc, Interval):
            continue
        pieces.append(pc)
        lo = pc.lo
        if isinstance(lo, ExtPoint) and (d.universe is Universe.MBAR or lo.is_rational):
            pieces.append(Point(lo))
    return pieces_to_dnf(pieces, d.universe)


def _lt(left, right_bound, var_first: bool, universe):
    """``x < b`` (var_first) or ``b < x`` as an atom or boolean."""
    if not isinstance(right_bound, ExtPoint):
        return True  # x < +inf, -inf < x
    if var_first:
        return make_atom(LT, left, Const(right_bound.q), right_bound.k, universe)
    return make_atom(LT, Const(right_bound.q), left, -right_bound.k, universe)


def interval_signature(d: DimFn) -> DNF:
    """Pairs ``a < b`` such that ``dim((a, b)) = 0``."""
    u = d.universe
    out = DNF.atom(make_atom(LT, Var(1), Var(2), 0, u), 2, u)
    for pc in describe_1d(d.I):
        if not isinstance(pc, Interval):
            continue
        meets = DNF.true(2, u)
        for a in (_lt(Var(1), pc.hi, True, u), _lt(Var(2), pc.lo, False, u)):
            meets = meets & DNF.atom(a, 2, u)
        out = out & ~meets
    return out


def dimfn_equal(d1: DimFn, d2: DimFn) -> bool:
    """``dim[J1] = dim[J2]`` iff ``J1`` and ``J2`` differ in finitely many points."""
    return fineq(d1.I, d2.I)
