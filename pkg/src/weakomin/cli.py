"""Command line front end.

Every command prints one JSON object per line (or a short text rendering with
``--format text``).  Exit status: 0 on success, 1 for bad input, 2 when an
internal consistency check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .cells import decompose, topdim
from .dimension import DimFn, Mode, check_axioms, dim_I, fineq, interval_signature, recover_I
from .exact import Cut, ExtPoint, PrecisionExhausted, use_cut
from .formula import FormulaError, Universe
from .harness import oracle_eval, random_set
from .parser import parse
from .qe import eliminate
from .selfsuff import min_extension_dim, restrict_to_M, self_sufficient_M, self_sufficient_ext

COMMANDS = ("normalize", "qe", "cells", "topdim", "dim", "selfsuff", "fineq", "recover-i",
            "signature", "ext-dim", "check-axioms", "oracle")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    universe: Universe = Universe.M
    xi: Cut = Cut()
    mode: Mode = Mode.RECURSIVE
    seed: int = 0
    format: str = "json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--universe", default=d("M"), help="M (rationals) or Mbar (Q + Z*xi)")
    p.add_argument("--xi", default=d("sqrt2"), help="cut backend: sqrt2 or pi[:budget]")
    p.add_argument("--mode", default=d("recursive"), help="dimension recursion: recursive or literal")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--format", choices=("json", "text"), default=d("json"))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weakomin", description="Decision procedures for (Q, <, U) with U(x,y) iff y < x + xi.")
    _common(p, False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text):
        c = sub.add_parser(name, help=help_text)
        _common(c, True)
        return c

    cmd("normalize", "quantifier-free formula to DNF").add_argument("formula")
    cmd("qe", "eliminate quantifiers").add_argument("formula")
    cmd("cells", "cell decomposition partitioning the given sets").add_argument("formulas", nargs="+")
    cmd("topdim", "topological dimension").add_argument("formula")
    c = cmd("dim", "dim[I] of a set")
    c.add_argument("--I", required=True, dest="I", help="defining set, a formula in x1")
    c.add_argument("formula")
    c = cmd("selfsuff", "self-sufficiency of a subset of the line")
    c.add_argument("--ext", action="store_true", help="decide over Q + Z*xi, with a witness")
    c.add_argument("formula")
    c = cmd("fineq", "finite symmetric difference of two subsets of the line")
    c.add_argument("left")
    c.add_argument("right")
    cmd("recover-i", "recover I from dim[I]").add_argument("formula")
    cmd("signature", "pairs a < b with dim[I]((a, b)) = 0").add_argument("formula")
    c = cmd("ext-dim", "dimension through the extension, for X over Q")
    c.add_argument("--I", required=True, dest="I", help="self-sufficient set over Q + Z*xi")
    c.add_argument("formula")
    c = cmd("check-axioms", "check the dimension axioms on random sets")
    c.add_argument("--I", dest="I", default="true", help="defining set (default: the whole line)")
    c.add_argument("--count", type=int, default=30)
    c.add_argument("--n-max", type=int, default=3)
    c = cmd("oracle", "evaluate a formula at a point by test values")
    c.add_argument("formula")
    c.add_argument("point", nargs="*", help="coordinates such as 1/2 or 1 - 1*xi")
    return p


def _config(ns) -> RunConfig:
    try:
        return RunConfig(Universe.parse(ns.universe), Cut.parse(ns.xi), Mode.parse(ns.mode),
                         ns.seed, ns.format)
    except (FormulaError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _num(v):
    return "-inf" if v == float("-inf") else int(v)


def _set(text: str, universe: Universe, arity: int | None = None):
    return eliminate(parse(text, universe, arity))


def _line_set(text: str, universe: Universe):
    return _set(text, universe, 1)


def _dispatch(ns, cfg: RunConfig) -> dict:
    u = cfg.universe
    c = ns.command
    if c == "normalize":
        f = parse(ns.formula, u)
        if not f.quantifier_free:
            raise InputError("normalize expects a quantifier-free formula; use qe")
        X = eliminate(f)
        return {"dnf": str(X), "arity": X.arity}
    if c == "qe":
        X = eliminate(parse(ns.formula, u))
        return {"dnf": str(X), "arity": X.arity}
    if c == "cells":
        fs = [parse(t, u) for t in ns.formulas]
        n = max(f.arity for f in fs)
        sets = [_set(t, u, n) for t in ns.formulas]
        return decompose(sets).to_json()
    if c == "topdim":
        return {"topdim": _num(topdim(_set(ns.formula, u)))}
    if c == "dim":
        d = DimFn(_line_set(ns.I, u), cfg.mode)
        return {"dim": _num(dim_I(_set(ns.formula, u), d))}
    if c == "selfsuff":
        if ns.ext:
            return self_sufficient_ext(_line_set(ns.formula, Universe.MBAR)).to_json()
        if u is Universe.MBAR:
            raise InputError("selfsuff over Mbar needs --ext")
        return self_sufficient_M(_line_set(ns.formula, Universe.M)).to_json()
    if c == "fineq":
        return {"fineq": fineq(_line_set(ns.left, u), _line_set(ns.right, u))}
    if c == "recover-i":
        J = _line_set(ns.formula, u)
        d = DimFn(J, cfg.mode)
        R = recover_I(d)
        return {"dnf": str(R), "arity": 1, "fineq": fineq(R, J)}
    if c == "signature":
        S = interval_signature(DimFn(_line_set(ns.formula, u), cfg.mode))
        return {"dnf": str(S), "arity": 2}
    if c == "ext-dim":
        I_bar = _line_set(ns.I, Universe.MBAR)
        X = _set(ns.formula, Universe.M)
        return {"dim": _num(min_extension_dim(X, I_bar)),
                "dim_I": _num(dim_I(X, DimFn(restrict_to_M(I_bar))))}
    if c == "check-axioms":
        d = DimFn(_line_set(ns.I, u), cfg.mode)
        fams = [random_set(f"{cfg.seed}.{i}", 1 + i % ns.n_max, 4, 1, u) for i in range(ns.count)]
        return check_axioms(d, fams, n_max=ns.n_max, seed=cfg.seed).to_json()
    if c == "oracle":
        f = parse(ns.formula, u, len(ns.point) if ns.point else None)
        point = [ExtPoint.parse(p) for p in ns.point]
        return {"value": oracle_eval(f, point)}
    raise InputError(f"unknown command {c}")


def _text(result: dict) -> str:
    if set(result) <= {"dnf", "arity"}:
        return result["dnf"]
    if len(result) == 1:
        return str(next(iter(result.values())))
    return " ".join(f"{k}={v}" for k, v in result.items())


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
        with use_cut(cfg.xi):
            result = _dispatch(ns, cfg)
    except (InputError, FormulaError, ValueError, PrecisionExhausted) as exc:
        print(json.dumps({"error": str(exc)}, separators=(",", ":")), file=out)
        return 1
    except Exception as exc:  # internal invariant trouble
        print(json.dumps({"error": f"internal: {type(exc).__name__}: {exc}"}, separators=(",", ":")), file=out)
        return 2
    if cfg.format == "text":
        print(_text(result), file=out)
    else:
        print(json.dumps(result, separators=(",", ":")), file=out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
