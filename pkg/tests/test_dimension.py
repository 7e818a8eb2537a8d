from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakomin.cells import topdim
from weakomin.dimension import (
    NEG,
    DimFn,
    Mode,
    check_axioms,
    dim_I,
    dimfn_equal,
    fiber_partition,
    fineq,
    interval_signature,
    recover_I,
    rectangle,
    topdim_fn,
)
from weakomin.exact import ExtPoint
from weakomin.formula import DNF, Universe, lift_1d, permute
from weakomin.harness import random_set
from weakomin.parser import parse
from weakomin.qe import Interval, describe_1d, eliminate, equivalent, is_finite_1d, subset

M, MBAR = Universe.M, Universe.MBAR
seeds = st.integers(0, 10**6)
small = st.fractions(-3, 3, max_denominator=2)


def S(text, universe=M, arity=None):
    return eliminate(parse(text, universe, arity))


POS = DimFn(S("0 < x1"))


def interval(a, b, universe=M):
    return S(f"{a} < x1 & x1 < {b}", universe)


def line_dim(A: DNF, I: DNF):
    """dim[I] of a subset of the line: 1 iff A meets I in an interval."""
    if A.is_false:
        return NEG
    return 0 if is_finite_1d(A & I) else 1


def infinite_set(seed, universe=M):
    for k in range(50):
        J = random_set(f"{seed}/{k}", 1, 3, 0, universe)
        if not is_finite_1d(J):
            return J
    return DNF.true(1, universe)


def test_dim_examples():
    assert dim_I(DNF.false(2), POS) == NEG
    assert dim_I(S("x1 < 0"), POS) == 0
    assert dim_I(interval(-1, 1), POS) == 1
    assert dim_I(rectangle(0), POS) == 1
    assert dim_I(permute(rectangle(0), (2, 1)), POS) == 1
    assert dim_I(rectangle(0), DimFn(POS.I, Mode.LITERAL)) == 2


def test_mode_parse():
    assert Mode.parse("LITERAL") is Mode.LITERAL
    with pytest.raises(ValueError):
        Mode.parse("other")


def test_fiber_partition_examples():
    x0, x1 = fiber_partition(DNF.true(2))
    assert x0.is_false and x1.is_true
    x0, x1 = fiber_partition(S("x1 = x2"))
    assert x0.is_true and x1.is_false


@given(seeds, small, small)
@settings(max_examples=80, deadline=None)
def test_interval_criterion(seed, a, b):
    # a convex set has dim 0 exactly when it meets I in finitely many points
    if a >= b:
        a, b = b, a - 1
    J = infinite_set(seed)
    A = interval(a, b)
    assert dim_I(A, DimFn(J)) == line_dim(A, J)


@given(seeds, seeds, seeds)
@settings(max_examples=40, deadline=None)
def test_products_add(sI, sA, sB):
    J = infinite_set(sI)
    d = DimFn(J)
    A, B = random_set(sA, 1, 3, 0, M), random_set(sB, 1, 3, 0, M)
    P = lift_1d(A, 1, 2) & lift_1d(B, 2, 2)
    expected = NEG if NEG in (line_dim(A, J), line_dim(B, J)) else line_dim(A, J) + line_dim(B, J)
    assert dim_I(P, d) == expected


@given(seeds, seeds)
@settings(max_examples=40, deadline=None)
def test_monotone_and_below_topdim(sI, sX):
    d = DimFn(infinite_set(sI))
    X = random_set(sX, 2, 4, 1, M)
    Y = X & random_set(sX + 1, 2, 3, 1, M)
    assert subset(Y, X)
    assert dim_I(Y, d) <= dim_I(X, d) <= topdim(X)


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_whole_line_gives_topdim(seed):
    X = random_set(seed, 1 + seed % 3, 4, 1, M)
    assert dim_I(X, topdim_fn()) == topdim(X)


def test_axioms_hold_in_recursive_mode():
    fams = [random_set(f"ax{i}", 1 + i % 3, 4, 1, M) for i in range(24)]
    for d in (POS, topdim_fn(), DimFn(S("0 < x1 & x1 < 1 | 2 < x1"))):
        r = check_axioms(d, fams, n_max=3, seed=1)
        assert r.passed, r.counterexamples[:1]


def test_literal_reading_breaks_permutation_invariance():
    r = check_axioms(DimFn(POS.I, Mode.LITERAL), [], n_max=2)
    assert r.failed("3", 2)
    ce = next(c for c in r.counterexamples if c["axiom"] == "3")
    assert {ce["lhs"], ce["rhs"]} == {1, 2}


def test_recover_examples():
    assert equivalent(recover_I(POS), S("0 < x1 | x1 = 0"))
    assert recover_I(topdim_fn()).is_true
    J = S("0 < x1 & x1 < 1 | 2 < x1 & x1 < 3")
    assert fineq(recover_I(DimFn(J)), J)


@given(seeds, st.sampled_from([M, MBAR]))
@settings(max_examples=60, deadline=None)
def test_recover_is_finitely_close(seed, universe):
    J = infinite_set(seed, universe)
    assert fineq(recover_I(DimFn(J)), J)


def test_signature_examples():
    assert interval_signature(topdim_fn()).is_false
    assert equivalent(interval_signature(POS), S("x1 < x2 & !(0 < x2)", M, 2))


@given(seeds, small, small)
@settings(max_examples=60, deadline=None)
def test_signature_lists_zero_dimensional_intervals(seed, a, b):
    if a == b:
        return
    a, b = min(a, b), max(a, b)
    d = DimFn(infinite_set(seed))
    assert interval_signature(d).evaluate((a, b)) == (dim_I(interval(a, b), d) == 0)


def test_fineq_examples():
    assert fineq(POS.I, POS.I)
    assert fineq(POS.I, S("0 < x1 & !(x1 = 1) & !(x1 = 2)"))
    assert not fineq(POS.I, S("1 < x1"))


def test_dimfn_equal_examples():
    J = POS.I
    assert dimfn_equal(DimFn(J), DimFn(J | S("x1 = -5")))
    assert not dimfn_equal(POS, DimFn(S("1 < x1")))
    assert not dimfn_equal(POS, DimFn(~J))


@given(seeds, seeds)
@settings(max_examples=50, deadline=None)
def test_equal_dimension_functions_have_equal_signatures(s1, s2):
    d1, d2 = DimFn(infinite_set(s1)), DimFn(infinite_set(s2))
    assert dimfn_equal(d1, d2) == equivalent(interval_signature(d1), interval_signature(d2))


@given(seeds, st.sampled_from([Fraction(-1), Fraction(0), Fraction(1, 2)]))
@settings(max_examples=30, deadline=None)
def test_adding_a_point_does_not_change_dim(seed, p):
    J = infinite_set(seed)
    J2 = J | S(f"x1 = {p}")
    X = random_set(seed, 2, 4, 1, M)
    assert dim_I(X, DimFn(J)) == dim_I(X, DimFn(J2))
