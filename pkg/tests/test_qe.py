from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakomin.exact import NEG_INF, POS_INF, ExtPoint, cmp_ext
from weakomin.formula import EQ, LT, DNF, Atom, Const, Universe, Var, to_dnf
from weakomin.harness import GridSpec, grid_points, oracle_eval, random_formula
from weakomin.parser import parse
from weakomin.qe import (
    Interval,
    Point,
    conj_satisfiable,
    describe_1d,
    eliminate,
    equivalent,
    is_empty,
    is_finite_1d,
    pieces_to_dnf,
    project_last,
    subset,
)

M, MBAR = Universe.M, Universe.MBAR
x1, x2 = Var(1), Var(2)
seeds = st.integers(0, 10**6)
universes = st.sampled_from([M, MBAR])


def S(text, universe=M, arity=None):
    return eliminate(parse(text, universe, arity))


# -- conjunctions

def test_conj_unsat_examples():
    assert conj_satisfiable([Atom(LT, x1, x1, 0)]) == (False, None)
    assert conj_satisfiable([Atom(LT, x1, x2, 0), Atom(LT, x2, x1, 0)])[0] is False


def test_conj_band_witness():
    atoms = [Atom(LT, x1, x2, 1), Atom(LT, x2, x1, 1)]
    ok, w = conj_satisfiable(atoms, 2)
    assert ok and DNF.build([atoms], 2).evaluate(w)


@given(seeds, universes)
@settings(max_examples=80, deadline=None)
def test_witnesses_satisfy_their_system(seed, universe):
    X = to_dnf(random_formula(seed, 3, 6, 0, universe))
    for s in X.systems:
        ok, w = conj_satisfiable(s, 3, universe)
        assert ok
        assert DNF.build([s], 3, universe).evaluate(w)


# -- projection and elimination

def test_project_examples():
    assert S("E x2. x1 < x2").is_true
    assert S("E x2. (x1 < x2 & U(x1,x2))").is_true
    assert S("E x2. x1 = x2").is_true


def test_two_step_chain_widens_to_two_xi():
    X = S("E x3. (U(x3,x1) & U(x2,x3))")
    assert equivalent(X, DNF.atom(Atom(LT, x1, x2, 2), 2))
    assert X.evaluate((Fraction(5, 2), 0))
    assert not X.evaluate((3, 0))


def test_universal_with_unbounded_counterexample_is_empty():
    assert is_empty(S("A x2. (!(x1 < x2) | U(x1,x2))"))


def test_project_last_matches_fiberwise_satisfiability():
    X = to_dnf(parse("x1 < x2 & U(x2, x1) & x2 < 1"))
    P = project_last(X)
    for a in (Fraction(-3), Fraction(-1, 2), 0, Fraction(1, 2), 1, 2):
        fiber_sat = any(conj_satisfiable(
            [Atom(a_.kind, a_.left, a_.right, a_.shift) for a_ in s] + [Atom(EQ, x1, Const(Fraction(a)), 0)],
            2)[0] for s in X.systems)
        assert P.evaluate((a,)) == fiber_sat


@given(seeds, universes)
@settings(max_examples=60, deadline=None)
def test_eliminate_agrees_with_test_value_oracle(seed, universe):
    f = random_formula(seed, 1 + seed % 2, 5, 2, universe)
    X = eliminate(f)
    assert X.arity == f.arity
    for p in grid_points(GridSpec(max_points=20), [X], f.arity, universe):
        assert X.evaluate(p) == oracle_eval(f, p), (str(f), p)


@given(seeds, universes)
@settings(max_examples=40, deadline=None)
def test_eliminate_on_quantifier_free_input_is_normalization(seed, universe):
    f = random_formula(seed, 2, 5, 0, universe)
    assert eliminate(f) == to_dnf(f)


# -- emptiness

def test_emptiness_examples():
    assert is_empty(DNF.false(2))
    assert is_empty(DNF.build([[Atom(EQ, x1, x2, 1)]], 2))
    assert not is_empty(DNF.atom(Atom(LT, x1, x2, 1), 2))
    assert not is_empty(DNF.atom(Atom(EQ, x1, x2, 1), 2, MBAR))


def test_subset_and_equivalence():
    assert subset(S("0 < x1 & x1 < 1"), S("0 < x1"))
    assert not subset(S("0 < x1"), S("0 < x1 & x1 < 1"))
    assert equivalent(S("!(x1 < 0)"), S("0 < x1 | x1 = 0"))


# -- the line

def test_describe_examples():
    assert describe_1d(S("0 < x1")) == [Interval(ExtPoint(0), POS_INF)]
    assert describe_1d(S("U(0, x1)")) == [Interval(NEG_INF, ExtPoint(0, 1))]
    assert describe_1d(S("!(x1 = 0)")) == [Interval(NEG_INF, ExtPoint(0)), Interval(ExtPoint(0), POS_INF)]


def test_irrational_endpoint_does_not_split_over_Q():
    # x1 < xi or xi < x1 covers Q, but leaves the single point xi in Mbar
    assert describe_1d(S("lt(x1, 0, 1) | lt(0, x1, -1)")) == [Interval(NEG_INF, POS_INF)]
    assert len(describe_1d(S("lt(x1, 0, 1) | lt(0, x1, -1)", MBAR))) == 2


def test_finiteness_examples():
    assert is_finite_1d(S("x1 = 0 | x1 = 3"))
    assert is_finite_1d(DNF.false(1))
    assert not is_finite_1d(S("0 < x1 & x1 < 1/1000"))


def _pos(piece):
    return piece.at if isinstance(piece, Point) else piece.lo


@given(seeds, universes)
@settings(max_examples=80, deadline=None)
def test_pieces_are_canonical(seed, universe):
    X = eliminate(random_formula(seed, 1, 5, 1, universe))
    pieces = describe_1d(X)
    assert equivalent(pieces_to_dnf(pieces, universe), X)
    for a, b in zip(pieces, pieces[1:]):
        hi = a.at if isinstance(a, Point) else a.hi
        assert cmp_ext(hi, _pos(b)) <= 0
        if isinstance(a, Interval) and isinstance(b, Interval) and hi == b.lo:
            # touching intervals stay apart only across a universe point not in X
            assert (universe is MBAR or hi.is_rational) and not X.evaluate((hi,))
    for p in grid_points(GridSpec(), [X], 1, universe):
        inside = any(
            (isinstance(pc, Point) and pc.at == p[0])
            or (isinstance(pc, Interval) and cmp_ext(pc.lo, p[0]) < 0 < cmp_ext(pc.hi, p[0]))
            for pc in pieces)
        assert inside == X.evaluate(p)
