"""Randomized generation and pointwise cross-checks.

The oracle here shares nothing with elimination.  It decides ``E v. phi`` at a
point by trying finitely many values for ``v``: the truth of ``phi`` can only
change where ``v`` equals some known value plus a multiple of xi reachable
from ``v`` through a chain of atoms over variables bound inside ``phi``.  It
tries those critical values themselves (when they lie in the universe), one
value strictly between each consecutive pair, and one beyond each end.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .cells import Band, BoundaryFn, Cell, Decomposition, EmptyCell, Graph, sample_point
from .exact import NEG_INF, POS_INF, ExtPoint, as_ext, cmp_ext, get_cut, rational_between
from .formula import (
    DNF,
    EQ,
    LT,
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
    free_vars,
    make_atom,
    node_atoms,
    point_values,
    to_dnf,
)
from .qe import conj_satisfiable, eliminate, is_empty, project_last, equivalent

CONSTANTS = (Fraction(-2), Fraction(-1), Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2))


@dataclass
class Report:
    name: str
    checked: int = 0
    failures: int = 0
    first_failure: dict | None = None
    seed: object = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def fail(self, info: dict) -> None:
        self.failures += 1
        if self.first_failure is None:
            self.first_failure = info

    def merge(self, other: "Report") -> None:
        self.checked += other.checked
        self.failures += other.failures
        if self.first_failure is None and other.first_failure is not None:
            self.first_failure = other.first_failure

    def to_json(self) -> dict:
        return {"check": self.name, "passed": self.passed, "checked": self.checked,
                "failures": self.failures, "first_failure": self.first_failure,
                "seed": self.seed, **self.details}


# --------------------------------------------------------------------------
# random formulas


def _random_atom(rng: random.Random, pool: int, universe: Universe) -> Atom:
    left = Var(rng.randint(1, pool))
    if pool > 1 and rng.random() < 0.7:
        right = Var(rng.choice([i for i in range(1, pool + 1) if i != left.index]))
    else:
        right = Const(rng.choice(CONSTANTS))
    roll = rng.random()
    if roll < 0.3:
        # U(left, right): right < left + xi
        return Atom(LT, right, left, 1)
    kind = EQ if roll < 0.5 else LT
    shift = rng.choice((0, 0, 0, 1, -1))
    if kind == EQ and universe is Universe.M:
        shift = 0
    return Atom(kind, left, right, shift)


def _wrap(node, var: int, quant, rng: random.Random):
    """Put a quantifier over a random subformula holding every free ``var``."""
    if var not in free_vars(node):
        return quant(var, node)
    children = []
    if isinstance(node, (And, Or)):
        children = [i for i, c in enumerate(node.items) if var in free_vars(c)]
    elif isinstance(node, Not):
        children = [0]
    elif isinstance(node, (Exists, Forall)):
        children = [0]
    if len(children) != 1 or rng.random() < 0.5:
        return quant(var, node)
    i = rng.choice(children)
    if isinstance(node, (And, Or)):
        items = list(node.items)
        items[i] = _wrap(items[i], var, quant, rng)
        return type(node)(tuple(items))
    if isinstance(node, Not):
        return Not(_wrap(node.item, var, quant, rng))
    return type(node)(node.var, _wrap(node.body, var, quant, rng))


def random_formula(seed, n: int, atom_budget: int = 4, quantifier_budget: int = 0,
                   universe: "Universe | str" = Universe.M) -> Formula:
    """A random formula of arity ``n``, determined by ``seed``.

    Bound variables get fresh indices above ``n``; atoms compare variables
    with each other or with small constants, with shifts in {-1, 0, 1}.
    """
    universe = Universe.parse(universe)
    rng = random.Random(f"formula:{seed}:{n}:{atom_budget}:{quantifier_budget}:{universe}")
    q = rng.randint(0, quantifier_budget) if quantifier_budget > 0 else 0
    pool = n + q
    count = rng.randint(1, atom_budget) if atom_budget > 0 else 0
    if count == 0:
        return Formula(And(()) if rng.random() < 0.5 else Or(()), n, universe)
    items: list = [_random_atom(rng, pool, universe) for _ in range(count)]
    while len(items) > 1:
        a = items.pop(rng.randrange(len(items)))
        b = items.pop(rng.randrange(len(items)))
        node = (And if rng.random() < 0.6 else Or)((a, b))
        if rng.random() < 0.25:
            node = Not(node)
        items.append(node)
    node = items[0]
    if rng.random() < 0.15:
        node = Not(node)
    for var in rng.sample(range(n + 1, pool + 1), q):
        node = _wrap(node, var, Exists if rng.random() < 0.65 else Forall, rng)
    return Formula(node, n, universe)


def random_set(seed, n: int, atom_budget: int = 4, quantifier_budget: int = 1,
               universe: "Universe | str" = Universe.M) -> DNF:
    return eliminate(random_formula(seed, n, atom_budget, quantifier_budget, universe))


# --------------------------------------------------------------------------
# the test-point oracle


def _bound_inside(node) -> frozenset:
    if isinstance(node, Atom):
        return frozenset()
    if isinstance(node, (And, Or)):
        return frozenset().union(*(_bound_inside(i) for i in node.items))
    if isinstance(node, Not):
        return _bound_inside(node.item)
    return _bound_inside(node.body) | {node.var}


@lru_cache(maxsize=4096)
def _chains(v: int, body) -> tuple:
    """``(term, s)`` such that ``v = term + s*xi`` may be a critical value.

    Walks simple paths from ``v`` along atoms, passing only through
    variables bound inside ``body``, and stops at the first other term.
    """
    inner = _bound_inside(body) - {v}
    edges: dict = {}
    for a in node_atoms(body):
        # a.left ~ a.right + shift
        edges.setdefault(a.left, []).append((a.right, a.shift))
        edges.setdefault(a.right, []).append((a.left, -a.shift))
    out = set()
    start = Var(v)

    def walk(node, s, seen):
        for nxt, k in edges.get(node, ()):
            if nxt in seen:
                continue
            t = s + k
            if isinstance(nxt, Var) and nxt.index in inner:
                walk(nxt, t, seen | {nxt})
            elif nxt != start:
                out.add((nxt, t))

    walk(start, 0, frozenset({start}))
    return tuple(out)


class _Key:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return cmp_ext(self.v, other.v) < 0

    def __eq__(self, other):
        return cmp_ext(self.v, other.v) == 0


def _between(a, b) -> ExtPoint:
    """Some rational strictly between ``a`` and ``b``; cheaper than the simplest one."""
    if a is NEG_INF:
        m = Fraction(math.floor(float(b))) - 1
    elif b is POS_INF:
        m = Fraction(math.ceil(float(a))) + 1
    elif a.k == b.k == 0:
        return ExtPoint((a.q + b.q) / 2)
    else:
        m = Fraction((float(a) + float(b)) / 2)
    if cmp_ext(a, m) < 0 < cmp_ext(b, m):
        return ExtPoint(m)
    return ExtPoint(rational_between(a, b))


def _candidates(v: int, body, values: dict, universe: Universe) -> list:
    crit = set()
    for t, s in _chains(v, body):
        base = values[t.index] if isinstance(t, Var) else ExtPoint(t.value)
        crit.add(base.shift(s))
    if not crit:
        return [ExtPoint(0)]
    ordered = sorted(crit, key=_Key)
    out = [_between(NEG_INF, ordered[0])]
    out.extend(_between(a, b) for a, b in zip(ordered, ordered[1:]))
    out.append(_between(ordered[-1], POS_INF))
    out.extend(p for p in ordered if universe is Universe.MBAR or p.is_rational)
    return out


def _oracle(node, values: dict, universe: Universe) -> bool:
    if isinstance(node, Atom):
        return node.holds(values)
    if isinstance(node, And):
        return all(_oracle(i, values, universe) for i in node.items)
    if isinstance(node, Or):
        return any(_oracle(i, values, universe) for i in node.items)
    if isinstance(node, Not):
        return not _oracle(node.item, values, universe)
    want = isinstance(node, Exists)
    for c in _candidates(node.var, node.body, values, universe):
        if _oracle(node.body, {**values, node.var: c}, universe) is want:
            return want
    return not want


def oracle_eval(f: "Formula | DNF", point) -> bool:
    """Truth of ``f`` at ``point``, deciding quantifiers by test points."""
    if isinstance(f, DNF):
        return f.evaluate(point)
    return _oracle(f.node, point_values(point, f.arity, f.universe), f.universe)


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    """Rationals ``p/q`` with ``|p/q| <= B`` and ``q <= D``, plus points
    straddling the instance's endpoints; capped at ``max_points`` for n >= 2."""

    B: Fraction = Fraction(4)
    D: int = 8
    straddle: bool = True
    max_points: int = 40
    seed: int = 0

    def values(self) -> list[Fraction]:
        B = Fraction(self.B)
        vals = {Fraction(p, q) for q in range(1, self.D + 1)
                for p in range(-int(B * q), int(B * q) + 1)}
        return sorted(vals)

    def to_json(self) -> dict:
        return {"B": str(self.B), "D": self.D, "straddle": self.straddle,
                "max_points": self.max_points, "seed": self.seed}


def _instance_shape(sources) -> tuple[set, int]:
    consts, reach = {Fraction(0)}, 1
    for f in sources:
        atoms = list(node_atoms(f.node)) if isinstance(f, Formula) else [a for s in f.systems for a in s]
        for a in atoms:
            for t in (a.left, a.right):
                if isinstance(t, Const):
                    consts.add(Fraction(t.value.q) if isinstance(t.value, ExtPoint) else t.value)
        reach = max(reach, sum(abs(a.shift) for a in atoms))
    return consts, min(reach, 4)


def _neighbours(e: ExtPoint, ordered: list, side: int | None = None) -> list:
    """Rationals just below and just above ``e`` relative to the sorted ``ordered``.

    ``side`` -1 or 1 returns only that one.
    """
    out = []
    if side != 1:
        i = bisect_left(ordered, _Key(e), key=_Key)
        out.append(rational_between(ordered[i - 1] if i > 0 else NEG_INF, e))
    if side != -1:
        i = bisect_right(ordered, _Key(e), key=_Key)
        out.append(rational_between(e, ordered[i] if i < len(ordered) else POS_INF))
    return out


@lru_cache(maxsize=256)
def _line(g: GridSpec, consts: frozenset, reach: int, universe: Universe, cut) -> tuple:
    """Sorted one-dimensional test values and the instance endpoints."""
    endpoints = sorted({ExtPoint(c, k) for c in consts for k in range(-reach, reach + 1)}, key=_Key)
    line: set = set(ExtPoint(v) for v in g.values())
    if g.straddle:
        ordered = sorted(line | set(endpoints), key=_Key)
        for e in endpoints:
            line.update(ExtPoint(x) for x in _neighbours(e, ordered))
        line.update(e for e in endpoints if universe is Universe.MBAR or e.is_rational)
    return tuple(sorted(line, key=_Key)), tuple(endpoints)


def grid_points(g: GridSpec, sources, n: int, universe: Universe) -> list[tuple]:
    consts, reach = _instance_shape(sources)
    line, endpoints = _line(g, frozenset(consts), reach, universe, get_cut())
    if n == 0:
        return [()]
    if n == 1:
        return [(v,) for v in line]
    rng = random.Random(f"grid:{g.seed}:{n}:{[str(e) for e in endpoints]}")
    points = []
    seen = set()
    attempts = 0
    while len(points) < g.max_points and attempts < 20 * g.max_points:
        attempts += 1
        p: list = []
        for j in range(n):
            roll = rng.random()
            if j and roll < 0.45:
                # relate to an earlier coordinate: equal, or just off a shift of it
                anchor = p[rng.randrange(j)]
                k = rng.randint(-reach, reach)
                target = anchor.shift(k)
                if rng.random() < 0.4 and (universe is Universe.MBAR or target.is_rational):
                    p.append(target)
                else:
                    p.append(ExtPoint(_neighbours(target, line, rng.choice((-1, 1)))[0]))
            else:
                p.append(rng.choice(line))
        t = tuple(p)
        if t not in seen:
            seen.add(t)
            points.append(t)
    return points


def _show(point) -> list:
    return [str(as_ext(v)) for v in point]


def _arity_universe(f) -> tuple[int, Universe]:
    return f.arity, f.universe


def grid_check_equiv(f1, f2, g: GridSpec = GridSpec()) -> Report:
    """Pointwise agreement of two sets over the grid.

    Quantified formulas are decided by the oracle, so this also compares an
    elimination result against its input.
    """
    (n1, u1), (n2, u2) = _arity_universe(f1), _arity_universe(f2)
    if n1 != n2 or u1 is not u2:
        raise FormulaError("grid_check_equiv needs equal arity and universe")
    report = Report("grid_check_equiv", seed=g.seed)
    for p in grid_points(g, [f1, f2], n1, u1):
        report.checked += 1
        a, b = oracle_eval(f1, p), oracle_eval(f2, p)
        if a != b:
            report.fail({"point": _show(p), "left": a, "right": b})
            break
    return report


def _outer_block(f: Formula) -> tuple[list[int], object]:
    block, node = [], f.node
    while isinstance(node, Exists):
        block.append(node.var)
        node = node.body
    return block, node


def qe_soundness_check(f: Formula, g: GridSpec = GridSpec()) -> Report:
    """Check ``eliminate(f)`` at each grid point, one direction at a time.

    Where it holds, a witness for the outer existential block is read off the
    eliminated matrix and confirmed by the oracle; where it fails, the oracle
    must find no witness among its test values.
    """
    report = Report("qe_soundness_check", seed=g.seed, details={"formula": str(f)})
    result = eliminate(f)
    block, body = _outer_block(f)
    width = max(set(block) | {f.arity} | set(free_vars(body)))
    body_f = Formula(body, width, f.universe)
    matrix = eliminate(body_f) if block else None
    slots = {v: i for i, v in enumerate(block, 1)}
    for p in grid_points(g, [f], f.arity, f.universe):
        report.checked += 1
        values = point_values(p, f.arity, f.universe)
        truth = result.evaluate(p)
        if not block:
            if truth != oracle_eval(f, p):
                report.fail({"point": _show(p), "eliminated": truth})
            continue
        if not truth:
            if oracle_eval(f, p):
                report.fail({"point": _show(p), "eliminated": False, "oracle": True})
            continue
        witness = _block_witness(matrix, values, slots, f.universe)
        if witness is None:
            report.fail({"point": _show(p), "eliminated": True, "witness": None})
            continue
        full = {**values, **witness}
        if not _oracle(body, full, f.universe):
            report.fail({"point": _show(p), "eliminated": True,
                         "witness": {f"x{v}": str(w) for v, w in witness.items()}})
    return report


def _block_witness(matrix: DNF, values: dict, slots: dict, universe: Universe):
    mapping = {}
    for i in range(1, matrix.arity + 1):
        if i in slots:
            mapping[i] = (Var(slots[i]), 0)
        elif i in values:
            mapping[i] = (Const(values[i].q), values[i].k)
    fiber = matrix.substitute(mapping, len(slots))
    for s in fiber.systems:
        ok, w = conj_satisfiable(s, len(slots), universe)
        if ok:
            return {v: as_ext(w[i - 1]) for v, i in slots.items()}
    return None


# --------------------------------------------------------------------------
# decomposition audits


def _lt_dnf(f: BoundaryFn, g: BoundaryFn, arity: int, universe: Universe) -> DNF:
    return DNF.atom(make_atom(LT, f.base, g.base, g.shift - f.shift, universe), arity, universe)


def _layer_key(layer, prefix_sample):
    """Where a sibling layer sits: graphs at their value, bands just below their top."""
    if isinstance(layer, Graph):
        return (_Key(layer.f.value(prefix_sample)), 1)
    hi = POS_INF if layer.hi is POS_INF else layer.hi.value(prefix_sample)
    return (_Key(hi), 0)


def _check_siblings(base: Cell, layers: list, universe: Universe, report: Report) -> None:
    n = base.arity
    base_dnf = base.as_dnf() if n else DNF.true(0, universe)
    sample = base.sample
    ordered = sorted(layers, key=lambda l: _layer_key(l, sample))
    where = {"base": str(base), "layers": [str(l) for l in ordered]}
    # the chain must run from -inf to +inf through each boundary exactly once
    expect_lo = NEG_INF
    i = 0
    while i < len(ordered):
        layer = ordered[i]
        if not isinstance(layer, Band) or layer.lo != expect_lo:
            report.fail({"audit": "cover", **where})
            return
        if layer.hi is POS_INF:
            if i != len(ordered) - 1:
                report.fail({"audit": "disjointness", **where})
            return
        f = layer.hi
        if isinstance(layer.lo, BoundaryFn):
            report.checked += 1
            if not is_empty(base_dnf.with_arity(n) & ~_lt_dnf(layer.lo, f, n, universe)):
                report.fail({"audit": "band", "band": str(layer), **where})
        nxt = ordered[i + 1] if i + 1 < len(ordered) else None
        if isinstance(nxt, Graph) and nxt.f == f:
            if not f.m_valued(universe):
                report.fail({"audit": "graph", "graph": str(nxt), **where})
            i += 2
        elif universe is Universe.M and f.shift != 0:
            # an irrational boundary over Q: nothing to cover there
            i += 1
        else:
            report.fail({"audit": "cover", "missing": f"graph({f})", **where})
            return
        expect_lo = f
    report.fail({"audit": "cover", "missing": "band to +inf", **where})


def decomposition_audit(d: Decomposition, sources=None) -> Report:
    """Symbolic checks that ``d`` is a cylindrical partition refining each source.

    Level by level, the layers over each base cell must run from ``-inf`` to
    ``+inf`` with consecutive boundaries strictly ordered on the base (band
    validity) and a graph at every boundary that carries universe points.
    That makes the cells over each base a partition of its cylinder, and
    since every cell projects onto its base the projections of two cells are
    equal or disjoint.  Each cell must then lie inside or outside each source,
    as its provenance says, and its sample point must agree.
    """
    sources = d.sources if sources is None else list(sources)
    universe, n = d.universe, d.arity
    report = Report("decomposition_audit", details={"cells": len(d.cells)})
    cells = list(d.cells)
    if len(set(cells)) != len(cells):
        report.fail({"audit": "disjointness", "reason": "duplicate cell"})
    for level in range(n, 0, -1):
        prefixes = sorted({c.layers[:level] for c in cells}, key=str)
        groups: dict = {}
        for pre in prefixes:
            groups.setdefault(pre[:-1], []).append(pre[-1])
        for base_layers, layers in groups.items():
            base = Cell(base_layers, universe)
            try:
                base = Cell(base_layers, universe, sample_point(base))
            except EmptyCell as exc:
                report.fail({"audit": "sample", "cell": str(base), "error": str(exc)})
                continue
            report.checked += 1
            _check_siblings(base, layers, universe, report)
    negations = [~X for X in sources]
    for ci, c in enumerate(cells):
        report.checked += 1
        try:
            p = sample_point(c)
        except EmptyCell as exc:
            report.fail({"audit": "sample", "cell": str(c), "error": str(exc)})
            continue
        cdnf = c.as_dnf()
        if not cdnf.evaluate(p):
            report.fail({"audit": "sample", "cell": str(c), "point": _show(p)})
        for i, X in enumerate(sources):
            inside = ci in d.provenance.get(i, [])
            if X.evaluate(p) != inside:
                report.fail({"audit": "provenance", "cell": str(c), "source": i})
                continue
            if inside and not is_empty(cdnf & negations[i]):
                report.fail({"audit": "cover", "cell": str(c), "source": i,
                             "reason": "cell leaves its source"})
            if not inside and not is_empty(cdnf & X):
                report.fail({"audit": "cover", "cell": str(c), "source": i,
                             "reason": "source meets a cell outside its provenance"})
        if c.arity:
            coherent = equivalent(project_last(cdnf), c.base.as_dnf() if c.arity > 1
                                  else DNF.true(0, universe))
            if not coherent:
                report.fail({"audit": "coherence", "cell": str(c)})
    return report


def random_family(seed, count: int = 3, n: int = 2, atom_budget: int = 3,
                  universe: "Universe | str" = Universe.M) -> list[DNF]:
    return [random_set(f"{seed}.{i}", n, atom_budget, 1, universe) for i in range(count)]
