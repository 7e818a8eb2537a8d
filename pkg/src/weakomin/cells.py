"""Strong cell decomposition.

Every boundary function here is ``x_i + k*xi`` or ``c + k*xi``.  A cell is a
stack of layers; layer ``j`` is either the graph of a boundary function of the
earlier coordinates or the band strictly between two of them (or infinities).

The decomposition is cylindrical.  At level ``j`` the atoms mentioning
``x_j`` contribute boundary functions; the base atoms, together with the order
relations between every pair of boundary functions, are decomposed one level
down.  Over each base cell the boundary functions are then totally ordered,
ties are merged, and the fiber is cut into bands and graphs.  Over Q a graph
is emitted only for functions of shift 0; the others take irrational values
and bound bands without carrying points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .exact import NEG_INF, POS_INF, ExtPoint, as_ext, cmp_ext, get_cut, rational_between
from .formula import DNF, EQ, LT, Const, FormulaError, Universe, Var, make_atom, simplify_system
from .qe import bounds_of


class EmptyCell(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryFn:
    """The function ``base + shift*xi`` of the earlier coordinates."""

    base: object  # Var (a coordinate) or Const
    shift: int = 0

    def value(self, point: Sequence) -> ExtPoint:
        if isinstance(self.base, Var):
            return as_ext(point[self.base.index - 1]).shift(self.shift)
        return ExtPoint(self.base.value, self.shift)

    def m_valued(self, universe: Universe) -> bool:
        return universe is Universe.MBAR or self.shift == 0

    def key(self) -> tuple:
        if isinstance(self.base, Const):
            return (0, self.base.value, self.shift)
        return (1, self.base.index, self.shift)

    def __str__(self) -> str:
        if isinstance(self.base, Const):
            return str(ExtPoint(self.base.value, self.shift))
        if self.shift == 0:
            return str(self.base)
        op = "+" if self.shift > 0 else "-"
        return f"{self.base} {op} {abs(self.shift)}*xi"

    def to_json(self) -> dict:
        base = str(self.base) if isinstance(self.base, Var) else str(ExtPoint(self.base.value))
        return {"base": base, "shift": self.shift}

    @classmethod
    def from_json(cls, data) -> "BoundaryFn":
        base = data["base"]
        if isinstance(base, str) and base.startswith("x"):
            b = Var(int(base[1:]))
            return cls(b, int(data.get("shift", 0)))
        p = ExtPoint.parse(str(base))
        return cls(Const(p.q), p.k + int(data.get("shift", 0)))


def _bound_json(b):
    return str(b) if b is NEG_INF or b is POS_INF else b.to_json()


def _bound_from_json(data):
    if data == "-inf":
        return NEG_INF
    if data == "+inf":
        return POS_INF
    return BoundaryFn.from_json(data)


def _bound_value(b, point):
    return b if b is NEG_INF or b is POS_INF else b.value(point)


@dataclass(frozen=True)
class Graph:
    f: BoundaryFn

    def __str__(self) -> str:
        return f"graph({self.f})"


@dataclass(frozen=True)
class Band:
    lo: object
    hi: object

    def __str__(self) -> str:
        return f"band({self.lo}, {self.hi})"


@dataclass(frozen=True)
class Cell:
    layers: tuple
    universe: Universe = Universe.M
    sample: tuple = field(default=(), compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.layers)

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(1 if isinstance(l, Band) else 0 for l in self.layers)

    @property
    def base(self) -> "Cell":
        return Cell(self.layers[:-1], self.universe, self.sample[:-1])

    def atoms(self) -> frozenset:
        out = []
        for j, layer in enumerate(self.layers, 1):
            x = Var(j)
            if isinstance(layer, Graph):
                out.append(make_atom(EQ, x, layer.f.base, layer.f.shift, self.universe))
                continue
            if isinstance(layer.lo, BoundaryFn):
                out.append(make_atom(LT, layer.lo.base, x, -layer.lo.shift, self.universe))
            if isinstance(layer.hi, BoundaryFn):
                out.append(make_atom(LT, x, layer.hi.base, layer.hi.shift, self.universe))
        system = simplify_system(out, consistency=False)
        return frozenset() if system is None else system

    def as_dnf(self) -> DNF:
        return DNF.build([self.atoms()], self.arity, self.universe)

    def __str__(self) -> str:
        return " x ".join(str(l) for l in self.layers) or "point"

    def to_json(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, Graph):
                layers.append({"kind": "graph", "f": layer.f.to_json()})
            else:
                layers.append({"kind": "band", "lo": _bound_json(layer.lo),
                               "hi": _bound_json(layer.hi)})
        return {"signature": list(self.signature), "layers": layers}

    @classmethod
    def from_json(cls, data, universe: Universe = Universe.M) -> "Cell":
        layers = []
        for layer in data["layers"]:
            if layer["kind"] == "graph":
                layers.append(Graph(BoundaryFn.from_json(layer["f"])))
            else:
                layers.append(Band(_bound_from_json(layer["lo"]), _bound_from_json(layer["hi"])))
        cell = cls(tuple(layers), universe)
        try:
            return cls(cell.layers, universe, sample_point(cell))
        except EmptyCell:
            return cell


def _layer_value(layer, prefix: Sequence):
    if isinstance(layer, Graph):
        return layer.f.value(prefix)
    lo = _bound_value(layer.lo, prefix)
    hi = _bound_value(layer.hi, prefix)
    if cmp_ext(lo, hi) >= 0:
        raise EmptyCell(f"band {layer} is empty over {tuple(str(v) for v in prefix)}")
    return ExtPoint(rational_between(lo, hi))


def sample_point(c: Cell) -> tuple:
    """A universe point of ``c``, built layer by layer."""
    point: list = []
    for layer in c.layers:
        v = _layer_value(layer, point)
        if c.universe is Universe.M and not v.is_rational:
            raise EmptyCell(f"graph layer {layer} leaves Q")
        point.append(v)
    return tuple(point)


def cell_dim(c: Cell) -> int:
    return sum(c.signature)


def meets_M(c: Cell) -> bool:
    """Whether a cell over Q + Z*xi contains a point with rational coordinates.

    Bands always do, by density of Q; a graph layer keeps rationals rational
    exactly when its shift is zero (constants are rational).
    """
    return all(layer.f.shift == 0 for layer in c.layers if isinstance(layer, Graph))


@dataclass
class Decomposition:
    cells: list
    provenance: dict
    sources: list
    arity: int
    universe: Universe = Universe.M

    def cells_of(self, i: int) -> list:
        return [self.cells[j] for j in self.provenance[i]]

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "universe": str(self.universe),
            "cells": [c.to_json() for c in self.cells],
            "provenance": {str(i): v for i, v in self.provenance.items()},
        }


_CACHE: dict = {}
_CACHE_LIMIT = 4096


def _stack(atoms: frozenset, j: int, universe: Universe) -> tuple:
    key = (atoms, j, universe, get_cut())
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    if j == 0:
        result = (Cell((), universe, ()),)
    else:
        result = _build_level(atoms, j, universe)
    if len(_CACHE) >= _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[key] = result
    return result


def _build_level(atoms: frozenset, j: int, universe: Universe) -> tuple:
    base_atoms = set()
    fns = set()
    for a in atoms:
        if j not in a.vars:
            base_atoms.add(a)
            continue
        b = bounds_of([a], j)
        for t, k in b.lowers + b.uppers + b.equals:
            fns.add(BoundaryFn(t, k))
    ordered = sorted(fns, key=BoundaryFn.key)
    for f, g in combinations(ordered, 2):
        for kind in (LT, EQ):
            a = make_atom(kind, f.base, g.base, g.shift - f.shift, universe)
            if a is not True and a is not False:
                base_atoms.add(a)
    out = []
    for D in _stack(frozenset(base_atoms), j - 1, universe):
        out.extend(_cylinder(D, ordered, universe))
    return tuple(out)


def _cylinder(D: Cell, fns: list, universe: Universe) -> list:
    p = D.sample
    valued = sorted(((f.value(p), f) for f in fns), key=lambda vf: _Key(vf[0]))
    groups: list[tuple[ExtPoint, BoundaryFn]] = []
    for v, f in valued:
        if groups and groups[-1][0] == v:
            if f.key() < groups[-1][1].key():
                groups[-1] = (v, f)
            continue
        groups.append((v, f))
    cells = []
    lo_fn, lo_val = NEG_INF, NEG_INF
    for v, f in groups + [(POS_INF, POS_INF)]:
        band = Band(lo_fn, f)
        cells.append(Cell(D.layers + (band,), universe,
                          p + (ExtPoint(rational_between(lo_val, v)),)))
        if f is not POS_INF and f.m_valued(universe):
            cells.append(Cell(D.layers + (Graph(f),), universe, p + (v,)))
        lo_fn, lo_val = f, v
    return cells


class _Key:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other) -> bool:
        return cmp_ext(self.v, other.v) < 0


def decompose(sets: Sequence[DNF]) -> Decomposition:
    """A strong cell decomposition of the whole space partitioning each set."""
    if not sets:
        raise FormulaError("decompose needs at least one set")
    n = sets[0].arity
    universe = sets[0].universe
    for X in sets:
        if X.arity != n or X.universe is not universe:
            raise FormulaError("all sets must share arity and universe")
    atoms = frozenset(a for X in sets for s in X.systems for a in s)
    cells = list(_stack(atoms, n, universe))
    provenance = {i: [ci for ci, c in enumerate(cells) if X.evaluate(c.sample)]
                  for i, X in enumerate(sets)}
    return Decomposition(cells, provenance, list(sets), n, universe)


def topdim(X: DNF) -> "int | float":
    """Largest cell dimension among the cells of ``X``; ``-inf`` when empty."""
    if X.is_false:
        return float("-inf")
    if X.arity == 0:
        return 0
    d = decompose([X])
    return max((cell_dim(c) for c in d.cells_of(0)), default=float("-inf"))
