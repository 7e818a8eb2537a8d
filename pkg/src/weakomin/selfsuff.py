"""Self-sufficient subsets of the line, over Q and over Q + Z*xi.

An infinite definable ``I`` is self-sufficient when no definable bijection
carries an infinite subset of ``I`` onto a subset of the complement; it is
enough to rule out definable maps from infinite subsets of ``I`` into the
complement with infinite image.

Over Q every definable function is piecewise a coordinate or a constant (the
cell boundary functions with shift 0), so such maps have finite image and
every infinite definable set is self-sufficient.  Over Q + Z*xi the
translation ``x -> x + xi`` is available, and it refutes every set whose
complement is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .cells import Graph, decompose, meets_M
from .dimension import NEG, fineq
from .exact import NEG_INF, ExtPoint, cmp_ext, rational_between
from .formula import DNF, EQ, LT, FormulaError, Universe, Var, lift_1d, make_atom
from .qe import Interval, Point, describe_1d, is_empty, is_finite_1d, pieces_to_dnf, project, subset

__all__ = [
    "Verdict",
    "WitnessReport",
    "FunctionCheck",
    "fineq",
    "check_function_witness",
    "graph_taxonomy",
    "self_sufficient_M",
    "self_sufficient_ext",
    "restrict_to_M",
    "min_extension_dim",
]


class Verdict(str, Enum):
    SELF_SUFFICIENT = "SelfSufficient"
    NOT_SELF_SUFFICIENT = "NotSelfSufficient"
    FINITE = "NotApplicable-finite"

    def __str__(self) -> str:
        return self.value


@dataclass
class WitnessReport:
    verdict: Verdict
    universe: Universe
    K1: Interval | None = None
    K2: Interval | None = None
    shift: int = 0
    adjustment: list = field(default_factory=list)
    verified: bool | None = None
    justification: str = ""

    def to_json(self) -> dict:
        out = {"verdict": str(self.verdict), "universe": str(self.universe)}
        if self.K1 is not None:
            out.update({
                "K1": [str(self.K1.lo), str(self.K1.hi)],
                "K2": [str(self.K2.lo), str(self.K2.hi)],
                "k": self.shift,
                "adjustment": [str(p) for p in self.adjustment],
                "verified": self.verified,
            })
        if self.justification:
            out["justification"] = self.justification
        return out


@dataclass
class FunctionCheck:
    """Outcome of testing a graph as a refuter of self-sufficiency."""

    is_function: bool
    refutes: bool
    reason: str
    domain: DNF | None = None
    image: DNF | None = None

    def to_json(self) -> dict:
        return {
            "is_function": self.is_function,
            "refutes": self.refutes,
            "reason": self.reason,
            "domain": None if self.domain is None else str(self.domain),
            "image": None if self.image is None else str(self.image),
        }


def check_function_witness(F: DNF, I: DNF) -> FunctionCheck:
    """Decide whether ``F`` is the graph of a map ``J -> complement of I``
    with ``J`` an infinite subset of ``I`` and infinite image."""
    if F.arity != 2 or I.arity != 1 or F.universe is not I.universe:
        raise FormulaError("expected a binary relation and a set of the line over one universe")
    u = F.universe
    two = F.with_arity(3) & F.rename({2: 3}, 3) & DNF.atom(make_atom(LT, Var(2), Var(3), 0, u), 3, u)
    if not is_empty(two):
        return FunctionCheck(False, False, "not-a-function: some fiber has two points")
    domain = project(F, 2, 1)
    image = project(F, 1, 2).rename({2: 1}, 1)
    if is_finite_1d(domain):
        return FunctionCheck(True, False, "finite domain", domain, image)
    if not subset(domain, I):
        return FunctionCheck(True, False, "domain leaves I", domain, image)
    if not subset(image, ~I):
        return FunctionCheck(True, False, "image meets I", domain, image)
    if is_finite_1d(image):
        return FunctionCheck(True, False, "finite image", domain, image)
    return FunctionCheck(True, True, "refutes self-sufficiency", domain, image)


def graph_taxonomy(F: DNF) -> set:
    """Boundary functions carrying the points of ``F`` over its one-point fibers.

    Over Q these are always ``x1`` or constants; the caller can check that.
    """
    if F.arity != 2:
        raise FormulaError("graph_taxonomy needs a binary relation")
    d = decompose([F])
    return {c.layers[1].f for c in d.cells_of(0) if isinstance(c.layers[1], Graph)}


_TAXONOMY = ("definable maps over Q are piecewise a coordinate or a constant, "
             "so a map from a subset of I into its complement has finite image")


def self_sufficient_M(I: DNF) -> WitnessReport:
    if I.universe is not Universe.M:
        raise FormulaError("self_sufficient_M expects a set over Q")
    if is_finite_1d(I):
        return WitnessReport(Verdict.FINITE, I.universe, justification="I is finite")
    return WitnessReport(Verdict.SELF_SUFFICIENT, I.universe, justification=_TAXONOMY)


def _interval_dnf(lo, hi, universe: Universe) -> DNF:
    return pieces_to_dnf([Interval(lo, hi)], universe)


def _translation_witness(c: ExtPoint, right, avoid: list, xi: ExtPoint):
    """Choose ``d`` with ``c < d < min(c + xi, right)`` so that ``(c - xi, d - xi)``
    misses every point of ``avoid``."""
    cap = c + xi
    if cmp_ext(right, cap) < 0:
        cap = right
    for a in avoid:
        if cmp_ext(a, c - xi) > 0:
            top = a + xi
            if cmp_ext(top, cap) < 0:
                cap = top
    return ExtPoint(rational_between(c, cap))


def self_sufficient_ext(I: DNF) -> WitnessReport:
    """Classify ``I`` over Q + Z*xi, with a translation witness when refuted.

    Refutation: with ``J1`` the leftmost interval of the complement and ``c``
    its left endpoint, everything left of ``c`` lies in ``I`` except finitely
    many points ``A``.  Then ``K2 = (c, d)`` sits in the complement and
    ``K1 = K2 - xi`` in ``I`` once ``d`` is small enough to keep ``K1`` off
    ``A``.  If the complement is unbounded below the roles swap.
    """
    u = I.universe
    if u is not Universe.MBAR:
        raise FormulaError("self_sufficient_ext expects a set over Q + Z*xi")
    if is_finite_1d(I):
        return WitnessReport(Verdict.FINITE, u, justification="I is finite")
    comp = ~I
    if is_finite_1d(comp):
        return WitnessReport(Verdict.SELF_SUFFICIENT, u,
                             justification="I is cofinite, so it differs from the whole line "
                                           "by finitely many points")
    xi = ExtPoint(0, 1)
    comp_pieces = describe_1d(comp)
    first_gap = next(p for p in comp_pieces if isinstance(p, Interval))
    if first_gap.lo is not NEG_INF:
        c, source_pieces, target = first_gap.lo, comp_pieces, first_gap
        k = 1
    else:
        in_pieces = describe_1d(I)
        target = next(p for p in in_pieces if isinstance(p, Interval))
        c, source_pieces = target.lo, in_pieces
        k = -1
    adjustment = [p.at for p in source_pieces if isinstance(p, Point) and cmp_ext(p.at, c) < 0]
    d = _translation_witness(c, target.hi, adjustment, xi)
    inner = Interval(c, d)
    outer = Interval(c - xi, d - xi)
    K1, K2 = (outer, inner) if k == 1 else (inner, outer)
    report = WitnessReport(Verdict.NOT_SELF_SUFFICIENT, u, K1, K2, k, adjustment)
    report.verified = verify_witness(I, report)
    if not report.verified:
        raise AssertionError(f"translation witness failed to verify for {I}")
    return report


def verify_witness(I: DNF, report: WitnessReport) -> bool:
    """``K1`` inside ``I``, ``K2`` outside, and ``x -> x + k*xi`` maps ``K1`` onto ``K2``."""
    u = I.universe
    K1 = _interval_dnf(report.K1.lo, report.K1.hi, u)
    K2 = _interval_dnf(report.K2.lo, report.K2.hi, u)
    if K1.is_false or not is_empty(K1 - I) or not is_empty(K2 & I):
        return False
    graph = DNF.atom(make_atom(EQ, Var(2), Var(1), report.shift, u), 2, u) & K1.with_arity(2)
    image = project(graph, 1, 2).rename({2: 1}, 1)
    if not (is_empty(image - K2) and is_empty(K2 - image)):
        return False
    return check_function_witness(graph, I).refutes


def restrict_to_M(I: DNF) -> DNF:
    """The same constraints read over Q."""
    if I.universe is not Universe.MBAR:
        raise FormulaError("restrict_to_M expects a set over Q + Z*xi")
    return I.with_universe(Universe.M)


def min_extension_dim(X: DNF, I_bar: DNF):
    """Largest ``sum of i_j over coordinates j landing in I_bar`` among the
    cells of the extension of ``X`` that contain rational points."""
    if X.universe is not Universe.M or I_bar.universe is not Universe.MBAR:
        raise FormulaError("min_extension_dim expects X over Q and I_bar over Q + Z*xi")
    report = self_sufficient_ext(I_bar)
    if report.verdict is not Verdict.SELF_SUFFICIENT:
        raise FormulaError(f"I_bar is not self-sufficient ({report.verdict})")
    n = X.arity
    if X.is_false:
        return NEG
    if n == 0:
        return 0
    Xbar = X.with_universe(Universe.MBAR)
    sets = [Xbar] + [lift_1d(I_bar, j, n) for j in range(1, n + 1)]
    dec = decompose(sets)
    best = NEG
    for ci in dec.provenance[0]:
        cell = dec.cells[ci]
        if not meets_M(cell):
            continue
        total = sum(bit for j, bit in enumerate(cell.signature, 1) if ci in dec.provenance[j])
        best = max(best, total)
    return best
