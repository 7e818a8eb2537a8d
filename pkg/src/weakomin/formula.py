"""Terms, atoms, formulas and disjunctive normal forms.

The atom language is closed under integer xi-shifts:

* ``Atom("lt", t1, t2, k)`` means ``t1 < t2 + k*xi``
* ``Atom("eq", t1, t2, k)`` means ``t1 = t2 + k*xi``

The relation ``U(x, y)`` (``y < x + xi``) is ``Atom("lt", y, x, 1)``.

Atoms are kept in a canonical form by :func:`make_atom`: constants are stored
as rationals (any xi-part of a constant moves into the shift), atoms between
two constants or a variable and itself fold to booleans, and equalities are
oriented with the smaller term on the left.  Over Q an equality with a nonzero
shift is unsatisfiable and folds to ``False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from . import dbm
from .exact import ExtPoint, as_ext, cmp_ext, get_cut

LT = "lt"
EQ = "eq"


class Universe(str, Enum):
    M = "M"
    MBAR = "Mbar"

    @classmethod
    def parse(cls, text: "str | Universe") -> "Universe":
        if isinstance(text, Universe):
            return text
        key = text.strip().lower()
        if key in ("m", "q"):
            return cls.M
        if key in ("mbar", "m-bar", "m̄", "ext"):
            return cls.MBAR
        raise ValueError(f"unknown universe {text!r}")

    def __str__(self) -> str:
        return self.value


class FormulaError(ValueError):
    pass


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True, slots=True)
class Var:
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True, slots=True)
class Const:
    value: Fraction

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, Const]


def term_key(t: Term) -> tuple:
    if isinstance(t, Var):
        return (0, t.index, 0)
    return (1, 0, t.value)


def _split_term(t) -> tuple[Term, int]:
    """Coerce to a canonical term and return the xi-part it carried."""
    if isinstance(t, Var):
        return t, 0
    if isinstance(t, Const):
        if isinstance(t.value, ExtPoint):
            return Const(t.value.q), t.value.k
        return t, 0
    p = as_ext(t)
    return Const(p.q), p.k


# --------------------------------------------------------------------------
# atoms


@dataclass(frozen=True, slots=True)
class Atom:
    kind: str
    left: Term
    right: Term
    shift: int = 0

    @property
    def vars(self) -> frozenset[int]:
        return frozenset(t.index for t in (self.left, self.right) if isinstance(t, Var))

    def holds(self, values: Mapping[int, ExtPoint]) -> bool:
        lv = values[self.left.index] if isinstance(self.left, Var) else ExtPoint(self.left.value)
        rv = values[self.right.index] if isinstance(self.right, Var) else ExtPoint(self.right.value)
        c = cmp_ext(lv, rv.shift(self.shift))
        return c < 0 if self.kind == LT else c == 0

    def __str__(self) -> str:
        if self.shift == 0:
            op = "<" if self.kind == LT else "="
            return f"{self.left} {op} {self.right}"
        return f"{self.kind}({self.left}, {self.right}, {self.shift})"


def make_atom(kind: str, left, right, shift: int = 0,
              universe: Universe = Universe.M) -> "Atom | bool":
    """Build an atom in canonical form, folding it to a bool where decided."""
    if kind not in (LT, EQ):
        raise FormulaError(f"unknown atom kind {kind!r}")
    left, lk = _split_term(left)
    right, rk = _split_term(right)
    shift = shift + rk - lk
    if isinstance(left, Const) and isinstance(right, Const):
        c = cmp_ext(ExtPoint(left.value), ExtPoint(right.value, shift))
        return c < 0 if kind == LT else c == 0
    if left == right:
        return shift > 0 if kind == LT else shift == 0
    if kind == EQ:
        if term_key(left) > term_key(right):
            left, right, shift = right, left, -shift
        if universe is Universe.M and shift != 0:
            return False
    return Atom(kind, left, right, shift)


def canonical(atom: "Atom | bool", universe: Universe) -> "Atom | bool":
    """Re-fold a possibly hand-built atom for the given universe."""
    if isinstance(atom, bool):
        return atom
    return make_atom(atom.kind, atom.left, atom.right, atom.shift, universe)


def negated_atoms(atom: Atom, universe: Universe) -> list["Atom | bool"]:
    """Alternatives whose disjunction is the negation of ``atom``."""
    l, r, k = atom.left, atom.right, atom.shift
    if atom.kind == LT:
        # not (l < r + k xi)  <=>  r < l - k xi  or  l = r + k xi
        return [make_atom(LT, r, l, -k, universe), make_atom(EQ, l, r, k, universe)]
    return [make_atom(LT, l, r, k, universe), make_atom(LT, r, l, -k, universe)]


def substitute_atom(atom: Atom, mapping: Mapping[int, tuple], universe: Universe) -> "Atom | bool":
    """Replace variables by ``term + shift*xi``; ``mapping[i] = (term, shift)``."""
    l, r = atom.left, atom.right
    lk = rk = 0
    if isinstance(l, Var) and l.index in mapping:
        l, lk = mapping[l.index]
    if isinstance(r, Var) and r.index in mapping:
        r, rk = mapping[r.index]
    return make_atom(atom.kind, l, r, atom.shift + rk - lk, universe)


# --------------------------------------------------------------------------
# formulas


@dataclass(frozen=True, slots=True)
class And:
    items: tuple


@dataclass(frozen=True, slots=True)
class Or:
    items: tuple


@dataclass(frozen=True, slots=True)
class Not:
    item: object


@dataclass(frozen=True, slots=True)
class Exists:
    var: int
    body: object


@dataclass(frozen=True, slots=True)
class Forall:
    var: int
    body: object


Node = Union[Atom, And, Or, Not, Exists, Forall]
TRUE = And(())
FALSE = Or(())


def free_vars(node) -> frozenset[int]:
    if isinstance(node, Atom):
        return node.vars
    if isinstance(node, (And, Or)):
        return frozenset().union(*(free_vars(i) for i in node.items))
    if isinstance(node, Not):
        return free_vars(node.item)
    return free_vars(node.body) - {node.var}


def all_vars(node) -> frozenset[int]:
    if isinstance(node, Atom):
        return node.vars
    if isinstance(node, (And, Or)):
        return frozenset().union(*(all_vars(i) for i in node.items))
    if isinstance(node, Not):
        return all_vars(node.item)
    return all_vars(node.body) | {node.var}


def is_quantifier_free(node) -> bool:
    if isinstance(node, Atom):
        return True
    if isinstance(node, (And, Or)):
        return all(is_quantifier_free(i) for i in node.items)
    if isinstance(node, Not):
        return is_quantifier_free(node.item)
    return False


def node_atoms(node) -> Iterable[Atom]:
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, (And, Or)):
        for i in node.items:
            yield from node_atoms(i)
    elif isinstance(node, Not):
        yield from node_atoms(node.item)
    else:
        yield from node_atoms(node.body)


def node_str(node) -> str:
    if isinstance(node, Atom):
        return str(node)
    if isinstance(node, And):
        if not node.items:
            return "true"
        return "(" + " & ".join(_operand(i) for i in node.items) + ")"
    if isinstance(node, Or):
        if not node.items:
            return "false"
        return "(" + " | ".join(_operand(i) for i in node.items) + ")"
    if isinstance(node, Not):
        return "!" + _wrap(node.item)
    q = "E" if isinstance(node, Exists) else "A"
    return f"{q} x{node.var}. {_wrap(node.body)}"


def _operand(node) -> str:
    # a quantifier scope runs to the right, so it must be closed off
    s = node_str(node)
    return f"({s})" if isinstance(node, (Exists, Forall)) else s


def _wrap(node) -> str:
    s = node_str(node)
    if isinstance(node, (Exists, Forall)) or (isinstance(node, Atom) and " " in s):
        return f"({s})"
    return s


@dataclass(frozen=True)
class Formula:
    """A formula with declared arity and universe; free variables are x1..xn."""

    node: object
    arity: int
    universe: Universe = Universe.M

    def __post_init__(self):
        extra = [i for i in free_vars(self.node) if i < 1 or i > self.arity]
        if extra:
            raise FormulaError(f"free variable x{min(extra)} outside arity {self.arity}")

    @property
    def quantifier_free(self) -> bool:
        return is_quantifier_free(self.node)

    def __str__(self) -> str:
        s = node_str(self.node)
        if isinstance(self.node, (And, Or)) and self.node.items and s.startswith("("):
            return s[1:-1]
        return s


def atom_formula(atom: "Atom | bool") -> object:
    if atom is True:
        return TRUE
    if atom is False:
        return FALSE
    return atom


# --------------------------------------------------------------------------
# conjunctive systems and DNF

System = frozenset  # frozenset[Atom]


def _edge_key(atom: Atom) -> tuple:
    l = atom.left.index if isinstance(atom.left, Var) else 0
    r = atom.right.index if isinstance(atom.right, Var) else 0
    return (l, r)


def _lt_bound(atom: Atom) -> ExtPoint:
    lq = atom.left.value if isinstance(atom.left, Const) else 0
    rq = atom.right.value if isinstance(atom.right, Const) else 0
    return ExtPoint(rq - lq, atom.shift)


def simplify_system(atoms: Iterable, consistency: bool = True) -> "System | None":
    """Drop trivial atoms, keep the tightest strict bound per pair of nodes,
    and return ``None`` when the conjunction is unsatisfiable."""
    tight: dict[tuple, Atom] = {}
    eqs = set()
    for a in atoms:
        if a is True:
            continue
        if a is False:
            return None
        if a.kind == EQ:
            eqs.add(a)
            continue
        key = _edge_key(a)
        old = tight.get(key)
        if old is None or cmp_ext(_lt_bound(a), _lt_bound(old)) < 0:
            tight[key] = a
    system = frozenset(eqs) | frozenset(tight.values())
    if consistency and not dbm.consistent(system):
        return None
    return system


def _prune(systems: Iterable[System]) -> frozenset:
    uniq = sorted(set(systems), key=len)
    kept: list[System] = []
    for s in uniq:
        if not any(k <= s for k in kept):
            kept.append(s)
    return frozenset(kept)


def _conj_systems(xs: Iterable[System], ys: Iterable[System]) -> list[System]:
    out = []
    ys = list(ys)
    for a in xs:
        for b in ys:
            s = simplify_system(a | b)
            if s is not None:
                out.append(s)
    return out


@dataclass(frozen=True)
class DNF:
    """A finite union of consistent conjunctive systems over x1..x_arity.

    Systems are pruned for consistency on construction, so a DNF with no
    systems is exactly the empty set.
    """

    systems: frozenset
    arity: int
    universe: Universe = Universe.M

    @classmethod
    def build(cls, systems: Iterable[Iterable], arity: int,
              universe: Universe = Universe.M) -> "DNF":
        simplified = []
        for s in systems:
            t = simplify_system(canonical(a, universe) for a in s)
            if t is not None:
                simplified.append(t)
        return cls(_prune(simplified), arity, universe)

    @classmethod
    def true(cls, arity: int, universe: Universe = Universe.M) -> "DNF":
        return cls(frozenset([frozenset()]), arity, universe)

    @classmethod
    def false(cls, arity: int, universe: Universe = Universe.M) -> "DNF":
        return cls(frozenset(), arity, universe)

    @classmethod
    def atom(cls, atom: "Atom | bool", arity: int, universe: Universe = Universe.M) -> "DNF":
        if atom is True:
            return cls.true(arity, universe)
        if atom is False:
            return cls.false(arity, universe)
        return cls.build([[atom]], arity, universe)

    @property
    def is_false(self) -> bool:
        return not self.systems

    @property
    def is_true(self) -> bool:
        """Syntactic truth (an empty system is present)."""
        return frozenset() in self.systems

    @property
    def vars(self) -> frozenset[int]:
        return frozenset().union(*(a.vars for s in self.systems for a in s)) if self.systems else frozenset()

    def _check(self, other: "DNF") -> None:
        if self.universe is not other.universe:
            raise FormulaError("cannot combine sets over different universes")

    def __or__(self, other: "DNF") -> "DNF":
        self._check(other)
        return DNF(_prune(self.systems | other.systems), max(self.arity, other.arity), self.universe)

    def __and__(self, other: "DNF") -> "DNF":
        self._check(other)
        systems = _conj_systems(self.systems, other.systems)
        return DNF(_prune(systems), max(self.arity, other.arity), self.universe)

    def __invert__(self) -> "DNF":
        result: list[System] = [frozenset()]
        for system in sorted(self.systems, key=len):
            alts: list[System] = []
            trivially_true = False
            for atom in system:
                for alt in negated_atoms(atom, self.universe):
                    if alt is True:
                        trivially_true = True
                    elif alt is not False:
                        alts.append(frozenset([alt]))
            if trivially_true:
                continue
            result = list(_prune(_conj_systems(result, alts)))
            if not result:
                break
        return DNF(_prune(result), self.arity, self.universe)

    def __sub__(self, other: "DNF") -> "DNF":
        return self & ~other

    def with_arity(self, arity: int) -> "DNF":
        return DNF(self.systems, arity, self.universe)

    def with_universe(self, universe: Universe) -> "DNF":
        """Reinterpret the same constraints in another universe."""
        systems = [[make_atom(a.kind, a.left, a.right, a.shift, universe) for a in s]
                   for s in self.systems]
        return DNF.build(systems, self.arity, universe)

    def substitute(self, mapping: Mapping[int, tuple], arity: int | None = None) -> "DNF":
        systems = [[substitute_atom(a, mapping, self.universe) for a in s] for s in self.systems]
        return DNF.build(systems, self.arity if arity is None else arity, self.universe)

    def rename(self, mapping: Mapping[int, int], arity: int | None = None) -> "DNF":
        return self.substitute({i: (Var(j), 0) for i, j in mapping.items()}, arity)

    def evaluate(self, point) -> bool:
        values = point_values(point, self.arity, self.universe)
        return any(all(a.holds(values) for a in s) for s in self.systems)

    def sorted_systems(self) -> list[list[Atom]]:
        rows = [sorted(s, key=str) for s in self.systems]
        return sorted(rows, key=lambda r: [str(a) for a in r])

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        parts = [" & ".join(str(a) for a in row) for row in self.sorted_systems()]
        if len(parts) == 1:
            return parts[0]
        return " | ".join(f"({p})" for p in parts)

    def to_formula(self) -> Formula:
        node = Or(tuple(And(tuple(row)) for row in self.sorted_systems()))
        return Formula(node, self.arity, self.universe)


def point_values(point, arity: int, universe: Universe) -> dict[int, ExtPoint]:
    if isinstance(point, Mapping):
        values = {i: as_ext(v) for i, v in point.items()}
    else:
        if len(point) != arity:
            raise FormulaError(f"point has {len(point)} coordinates, arity is {arity}")
        values = {i + 1: as_ext(v) for i, v in enumerate(point)}
    if universe is Universe.M:
        for i, v in values.items():
            if not v.is_rational:
                raise FormulaError(f"coordinate x{i} = {v} is not in Q")
    return values


# --------------------------------------------------------------------------
# operations


def _dnf_node(node, universe: Universe, arity: int) -> DNF:
    if isinstance(node, Atom):
        a = make_atom(node.kind, node.left, node.right, node.shift, universe)
        return DNF.atom(a, arity, universe)
    if isinstance(node, And):
        out = DNF.true(arity, universe)
        for item in node.items:
            out = out & _dnf_node(item, universe, arity)
            if out.is_false:
                break
        return out
    if isinstance(node, Or):
        out = DNF.false(arity, universe)
        for item in node.items:
            out = out | _dnf_node(item, universe, arity)
        return out
    if isinstance(node, Not):
        return ~_dnf_node(node.item, universe, arity)
    raise FormulaError("to_dnf needs a quantifier-free formula")


def to_dnf(f: Formula) -> DNF:
    """Pointwise-equivalent DNF of a quantifier-free formula."""
    if not f.quantifier_free:
        raise FormulaError("to_dnf needs a quantifier-free formula; use eliminate")
    return _dnf_node(f.node, f.universe, f.arity)


def evaluate(f: "Formula | DNF", point) -> bool:
    """Truth of a quantifier-free formula (or DNF) at a point."""
    if isinstance(f, DNF):
        return f.evaluate(point)
    if not f.quantifier_free:
        raise FormulaError("evaluate needs a quantifier-free formula")
    values = point_values(point, f.arity, f.universe)
    return _eval_node(f.node, values)


def _eval_node(node, values) -> bool:
    if isinstance(node, Atom):
        return node.holds(values)
    if isinstance(node, And):
        return all(_eval_node(i, values) for i in node.items)
    if isinstance(node, Or):
        return any(_eval_node(i, values) for i in node.items)
    if isinstance(node, Not):
        return not _eval_node(node.item, values)
    raise FormulaError("quantified node in quantifier-free evaluation")


def permute(X: DNF, sigma: Sequence[int]) -> DNF:
    """``X^sigma = {(x_sigma(1), ..., x_sigma(n)) : x in X}``.

    ``sigma`` lists ``sigma(1), ..., sigma(n)`` (1-based).  A point ``y`` lies
    in the result iff ``x`` with ``x_j = y_{sigma^-1(j)}`` lies in ``X``.
    """
    n = X.arity
    if sorted(sigma) != list(range(1, n + 1)):
        raise FormulaError(f"{tuple(sigma)} is not a permutation of 1..{n}")
    inverse = {s: i + 1 for i, s in enumerate(sigma)}
    return X.rename(inverse)


def fiber(X: DNF, a: Sequence) -> DNF:
    """The fiber over the first ``len(a)`` coordinates, renumbered from x1."""
    n, m = X.arity, len(a)
    if not 0 < m < n:
        raise FormulaError(f"fiber over {m} coordinates of a set of arity {n}")
    values = point_values(list(a), m, X.universe)
    mapping: dict[int, tuple] = {i: (Const(v), 0) for i, v in values.items()}
    for j in range(m + 1, n + 1):
        mapping[j] = (Var(j - m), 0)
    return X.substitute(mapping, n - m)


def lift_1d(I: DNF, var: int, arity: int) -> DNF:
    """Read a set of the line as the condition ``x_var in I`` in arity ``arity``."""
    if I.arity != 1:
        raise FormulaError("expected a subset of the line")
    return I.rename({1: var}, arity)


def cartesian_classes(I: DNF, arity: int) -> dict[tuple, DNF]:
    """``I<tau>`` for every ``tau in {0,1}^arity`` (0: inside I, 1: outside)."""
    inside = [lift_1d(I, j, arity) for j in range(1, arity + 1)]
    comp = ~I
    outside = [lift_1d(comp, j, arity) for j in range(1, arity + 1)]
    classes = {}
    for tau in product((0, 1), repeat=arity):
        out = DNF.true(arity, I.universe)
        for j, t in enumerate(tau):
            out = out & (inside[j] if t == 0 else outside[j])
        classes[tau] = out
    return classes
