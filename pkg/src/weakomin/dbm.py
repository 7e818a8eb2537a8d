"""Consistency of conjunctions of shifted order atoms.

Every atom is a difference constraint ``x_a - x_b < e`` (or ``= e``) with
``e`` on the extension line, node 0 standing for the constant origin.  A
conjunction is satisfiable over Q (and over Q + Z*xi) exactly when the
difference-bound matrix has no negative cycle, treating a zero-weight cycle
through a strict edge as negative.  Over Q this needs one observation: the
only non-strict edges come from equalities, whose offsets are rational there,
so the solution set is a nonempty open subset of a rational affine subspace.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .exact import get_cut

_ZERO = Fraction(0)


def atom_edges(atom) -> list[tuple[int, int, Fraction, int, bool]]:
    """Difference edges ``(a, b, q, k, strict)`` meaning ``x_a - x_b (<|<=) q + k*xi``."""
    from .formula import Var

    left, right = atom.left, atom.right
    a = left.index if isinstance(left, Var) else 0
    b = right.index if isinstance(right, Var) else 0
    lq = _ZERO if isinstance(left, Var) else left.value
    rq = _ZERO if isinstance(right, Var) else right.value
    q = rq - lq
    k = atom.shift
    if atom.kind == "lt":
        return [(a, b, q, k, True)]
    return [(a, b, q, k, False), (b, a, -q, -k, False)]


def consistent(atoms: Iterable) -> bool:
    edges = [e for atom in atoms for e in atom_edges(atom)]
    if not edges:
        return True
    sign = get_cut().sign
    nodes = sorted({e[0] for e in edges} | {e[1] for e in edges})
    pos = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    # dist[i][j] = (q, k, strict) bounding x_i - x_j, or None for no bound
    dist: list[list] = [[None] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = (_ZERO, 0, False)

    def tighter(w1, w2) -> bool:
        if w2 is None:
            return True
        s = sign(w1[0] - w2[0], w2[1] - w1[1])
        return s < 0 or (s == 0 and w1[2] and not w2[2])

    for a, b, q, k, strict in edges:
        w = (q, k, strict)
        i, j = pos[a], pos[b]
        if tighter(w, dist[i][j]):
            dist[i][j] = w
    for m in range(n):
        row_m = dist[m]
        for i in range(n):
            w_im = dist[i][m]
            if w_im is None:
                continue
            row_i = dist[i]
            for j in range(n):
                w_mj = row_m[j]
                if w_mj is None:
                    continue
                cand = (w_im[0] + w_mj[0], w_im[1] + w_mj[1], w_im[2] or w_mj[2])
                if tighter(cand, row_i[j]):
                    row_i[j] = cand
            d = row_i[i]
            s = sign(d[0], -d[1])
            if s < 0 or (s == 0 and d[2]):
                return False
    return True
