from fractions import Fraction

from hypothesis import given, settings, strategies as st

from weakomin.exact import ExtPoint
from weakomin.formula import DNF, Atom, Exists, Forall, Formula, Universe, evaluate, to_dnf
from weakomin.harness import (
    GridSpec,
    grid_check_equiv,
    grid_points,
    oracle_eval,
    qe_soundness_check,
    random_family,
    random_formula,
)
from weakomin.parser import parse
from weakomin.qe import eliminate

M, MBAR = Universe.M, Universe.MBAR
seeds = st.integers(0, 10**6)
universes = st.sampled_from([M, MBAR])


def test_generation_is_deterministic():
    assert str(random_formula(7, 3, 6, 2)) == str(random_formula(7, 3, 6, 2))
    assert [str(X) for X in random_family(3, 3, 2)] == [str(X) for X in random_family(3, 3, 2)]
    assert grid_points(GridSpec(), [], 2, M) == grid_points(GridSpec(), [], 2, M)


@given(seeds, universes)
def test_generation_limits(seed, universe):
    assert random_formula(seed, 3, 4, 0, universe).quantifier_free
    assert random_formula(seed, 2, 3, 1, universe).arity == 2


def test_single_atom_budget():
    for seed in range(20):
        node = random_formula(seed, 1, 1).node
        while not isinstance(node, Atom):
            node = node.item  # only negation can wrap a lone atom
        assert isinstance(node, Atom)


@given(seeds, universes)
@settings(max_examples=40, deadline=None)
def test_generated_formulas_are_well_scoped(seed, universe):
    f = random_formula(seed, 1 + seed % 3, 6, 2, universe)
    eliminate(f)  # raises on unbound variables above the arity


def test_grid_values():
    g = GridSpec()
    vals = g.values()
    assert vals[0] == -4 and vals[-1] == 4 and Fraction(1, 8) in vals and Fraction(1, 9) not in vals
    line = grid_points(g, [parse("U(0, x1)")], 1, M)
    # straddles xi on both sides, never hits it over Q
    assert all(p[0].is_rational for p in line)
    assert (ExtPoint(0, 1),) in grid_points(g, [parse("U(0, x1)", MBAR)], 1, MBAR)


def test_equivalence_examples():
    f = parse("x1 < x2 | U(x2, x1)")
    assert grid_check_equiv(f, f).passed
    r = grid_check_equiv(DNF.true(2), DNF.false(2))
    assert not r.passed and r.checked == 1 and r.first_failure["left"] is True


@given(seeds, universes)
@settings(max_examples=40, deadline=None)
def test_normalization_vs_tree(seed, universe):
    f = random_formula(seed, 1 + seed % 3, 5, 0, universe)
    assert grid_check_equiv(to_dnf(f), f).passed


def test_soundness_examples():
    assert qe_soundness_check(parse("E x3. (U(x3,x1) & U(x2,x3))")).passed
    assert qe_soundness_check(parse("A x2. (!(x1 < x2) | U(x1,x2))")).passed
    assert qe_soundness_check(parse("E x2. (x1 < x2 & U(x1,x2))", MBAR)).passed


def _brute_exists(body, arity, universe, point):
    """A witness search over a fine grid and a few xi shifts."""
    values = [Fraction(p, 16) for p in range(-128, 129)]
    cands = [ExtPoint(v) for v in values]
    if universe is MBAR:
        cands += [ExtPoint(v, k) for v in values[::4] for k in (-2, -1, 1, 2)]
    f = Formula(body, arity + 1, universe)
    return any(evaluate(f, tuple(point) + (c,)) for c in cands)


@given(seeds, universes)
@settings(max_examples=40, deadline=None)
def test_oracle_is_never_beaten_by_brute_force(seed, universe):
    body = random_formula(seed, 2, 4, 0, universe)
    ex = Formula(Exists(2, body.node), 1, universe)
    for p in grid_points(GridSpec(D=2), [ex], 1, universe)[::3]:
        found = _brute_exists(body.node, 1, universe, p)
        if found:
            assert oracle_eval(ex, p)
        al = Formula(Forall(2, body.node), 1, universe)
        if not oracle_eval(ex, p):
            assert not found
            assert not oracle_eval(al, p)


def test_oracle_examples():
    assert oracle_eval(parse("E x2. (x1 < x2 & U(x1,x2))"), (0,))
    assert not oracle_eval(parse("A x2. (!(x1 < x2) | U(x1,x2))"), (0,))
    assert oracle_eval(parse("E x2. eq(x2, x1, 1)", MBAR), (0,))
    assert not oracle_eval(parse("E x2. (x2 = x1 & x2 < x1)", MBAR), (0,))
    assert not oracle_eval(parse("E x2. eq(x2, x1, 1)"), (0,))
