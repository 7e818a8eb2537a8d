from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakomin.cells import (
    Band,
    BoundaryFn,
    Cell,
    Decomposition,
    EmptyCell,
    Graph,
    cell_dim,
    decompose,
    meets_M,
    sample_point,
    topdim,
)
from weakomin.dimension import affine_dim, topdim_fn, dim_I
from weakomin.exact import NEG_INF, POS_INF, ExtPoint, cmp_ext
from weakomin.formula import DNF, Const, Universe, Var, permute
from weakomin.harness import GridSpec, decomposition_audit, grid_points, random_family, random_set
from weakomin.parser import parse
from weakomin.qe import describe_1d, eliminate, Interval

M, MBAR = Universe.M, Universe.MBAR
seeds = st.integers(0, 10**6)
universes = st.sampled_from([M, MBAR])
x1 = Var(1)


def S(text, universe=M, arity=None):
    return eliminate(parse(text, universe, arity))


U_BAND = "x1 < x2 & U(x1,x2)"


def test_u_band_is_one_open_cell():
    d = decompose([S(U_BAND)])
    (cell,) = d.cells_of(0)
    assert cell.signature == (1, 1)
    assert cell.layers[1] == Band(BoundaryFn(x1, 0), BoundaryFn(x1, 1))
    assert cell_dim(cell) == 2
    assert decomposition_audit(d).passed


def test_u_section_over_Q_has_no_graph_at_its_end():
    d = decompose([S("U(0, x1)")])
    layers = [c.layers[0] for c in d.cells]
    assert Graph(BoundaryFn(Const(Fraction(0)), 1)) not in layers
    assert [str(l) for l in layers] == ["band(-inf, 0 + 1*xi)", "band(0 + 1*xi, +inf)"]
    d_bar = decompose([S("U(0, x1)", MBAR)])
    assert len(d_bar.cells) == 3


def test_full_space_is_one_cell():
    d = decompose([DNF.true(2)])
    assert len(d.cells) == 1 and decomposition_audit(d).passed


def test_cell_dim_examples():
    assert cell_dim(Cell((Graph(BoundaryFn(Const(Fraction(0)))), Graph(BoundaryFn(x1))))) == 0
    assert cell_dim(Cell((Band(NEG_INF, POS_INF),) * 3)) == 3


def test_topdim_examples():
    assert topdim(S("x1 = 0")) == 0
    assert topdim(DNF.true(1)) == 1
    assert topdim(S(U_BAND)) == 2
    assert topdim(DNF.false(2)) == float("-inf")


def test_sample_point_examples():
    assert sample_point(Cell((Band(NEG_INF, POS_INF),))) == (ExtPoint(0),)
    zero = BoundaryFn(Const(Fraction(0)))
    (v,) = sample_point(Cell((Band(zero, BoundaryFn(Const(Fraction(0)), 1)),)))
    assert v.is_rational and cmp_ext(ExtPoint(0), v) < 0 < cmp_ext(ExtPoint(0, 1), v)
    p = sample_point(Cell((Band(NEG_INF, POS_INF), Graph(BoundaryFn(x1, 0)))))
    assert p[0] == p[1]


def test_sample_point_rejects_empty_cells():
    zero = BoundaryFn(Const(Fraction(0)))
    with pytest.raises(EmptyCell):
        sample_point(Cell((Band(zero, zero),)))
    with pytest.raises(EmptyCell):
        sample_point(Cell((Graph(BoundaryFn(Const(Fraction(0)), 1)),), M))


def test_meets_M_examples():
    assert not meets_M(Cell((Graph(BoundaryFn(Const(Fraction(0)), 1)),), MBAR))
    assert meets_M(Cell((Band(NEG_INF, POS_INF),) * 2, MBAR))
    c = Cell((Band(NEG_INF, POS_INF), Graph(BoundaryFn(x1, 0))), MBAR)
    assert meets_M(c) and all(v.is_rational for v in sample_point(c))


@given(seeds, universes)
@settings(max_examples=25, deadline=None)
def test_decompositions_pass_audit(seed, universe):
    fam = random_family(seed, 1 + seed % 3, 1 + (seed // 3) % 2, 3, universe)
    assert decomposition_audit(decompose(fam)).passed


@given(seeds, universes)
@settings(max_examples=40, deadline=None)
def test_each_grid_point_lies_in_exactly_one_cell(seed, universe):
    fam = random_family(seed, 2, 2, 3, universe)
    d = decompose(fam)
    dnfs = [c.as_dnf() for c in d.cells]
    for p in grid_points(GridSpec(max_points=25), fam, 2, universe):
        hits = [i for i, C in enumerate(dnfs) if C.evaluate(p)]
        assert len(hits) == 1, p
        for i, X in enumerate(fam):
            assert X.evaluate(p) == (hits[0] in d.provenance[i])


def test_audit_flags_a_missing_cell():
    d = decompose([S(U_BAND)])
    broken = Decomposition(d.cells[1:], {0: []}, d.sources, d.arity, d.universe)
    r = decomposition_audit(broken, [DNF.true(2)])
    assert not r.passed
    assert r.first_failure["audit"] == "cover"


def test_audit_flags_a_corrupted_band():
    d = decompose([S("0 < x1")])
    cells = list(d.cells)
    i = next(i for i, c in enumerate(cells) if c.layers[0].lo is NEG_INF)
    cells[i] = Cell((Band(NEG_INF, BoundaryFn(Const(Fraction(1)))),), M)
    r = decomposition_audit(Decomposition(cells, d.provenance, d.sources, 1, M))
    assert not r.passed and r.first_failure["audit"] == "cover"


def test_audit_flags_wrong_provenance():
    d = decompose([S("0 < x1")])
    flipped = {0: [i for i in range(len(d.cells)) if i not in d.provenance[0]]}
    r = decomposition_audit(Decomposition(d.cells, flipped, d.sources, 1, M))
    assert not r.passed and r.first_failure["audit"] == "provenance"


@given(seeds, universes)
@settings(max_examples=30, deadline=None)
def test_json_round_trip(seed, universe):
    d = decompose(random_family(seed, 2, 2, 3, universe))
    for c in d.cells:
        back = Cell.from_json(c.to_json(), universe)
        assert back == c
        assert back.as_dnf() == c.as_dnf()


# -- topological dimension against independent computations

@given(seeds, universes)
@settings(max_examples=60, deadline=None)
def test_topdim_matches_equality_rank(seed, universe):
    # dimension of a consistent system = free coordinates after equalities
    X = random_set(seed, 1 + seed % 3, 4, 1, universe)
    assert topdim(X) == affine_dim(X)


@given(seeds, universes)
@settings(max_examples=60, deadline=None)
def test_topdim_on_the_line_is_presence_of_an_interval(seed, universe):
    X = random_set(seed, 1, 4, 1, universe)
    pieces = describe_1d(X)
    expected = 1 if any(isinstance(p, Interval) for p in pieces) else (0 if pieces else float("-inf"))
    assert topdim(X) == expected


@given(seeds, seeds, universes)
@settings(max_examples=30, deadline=None)
def test_topdim_of_union_is_max(s1, s2, universe):
    X, Y = random_set(s1, 2, 3, 1, universe), random_set(s2, 2, 3, 1, universe)
    assert topdim(X | Y) == max(topdim(X), topdim(Y))


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_topdim_ignores_coordinate_order(seed):
    X = random_set(seed, 3, 4, 1, M)
    assert topdim(permute(X, (3, 1, 2))) == topdim(X)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_dim_of_whole_line_is_topdim(seed):
    X = random_set(seed, 2, 4, 1, M)
    assert dim_I(X, topdim_fn()) == topdim(X)
