"""Decision procedures and dimension theory for the ordered rationals with
the relation ``U(x, y)`` iff ``y < x + xi`` for an irrational cut ``xi``."""

from .cells import Band, BoundaryFn, Cell, Decomposition, Graph, cell_dim, decompose, meets_M, sample_point, topdim
from .dimension import (
    AxiomReport,
    DimFn,
    Mode,
    check_axioms,
    dim_I,
    dimfn_equal,
    fiber_partition,
    fineq,
    interval_signature,
    recover_I,
)
from .exact import Cut, ExtPoint, PrecisionExhausted, cut_cmp, get_cut, rational_between, use_cut
from .formula import DNF, Atom, Const, Formula, FormulaError, Universe, Var, evaluate, permute, to_dnf
from .harness import (
    GridSpec,
    Report,
    decomposition_audit,
    grid_check_equiv,
    oracle_eval,
    qe_soundness_check,
    random_formula,
)
from .parser import ParseError, parse
from .qe import (
    ConstraintSystem,
    conj_satisfiable,
    describe_1d,
    eliminate,
    equivalent,
    is_empty,
    is_finite_1d,
    project_last,
)
from .selfsuff import (
    Verdict,
    WitnessReport,
    check_function_witness,
    min_extension_dim,
    restrict_to_M,
    self_sufficient_ext,
    self_sufficient_M,
)

__version__ = "0.1.0"
