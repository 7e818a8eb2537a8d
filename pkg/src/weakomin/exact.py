"""Exact arithmetic on the rationals and on the extension line Q + Z*xi.

A point of the extension line is written ``q + k*xi`` with ``q`` rational and
``k`` an integer.  Because ``xi`` is irrational this representation is unique,
so structural equality is exact equality.  Order queries reduce to the sign of
``q - m*xi``, which is decided by the active :class:`Cut`.

The active cut lives in a context variable (in the spirit of
``decimal.localcontext``); use :func:`use_cut` to switch backends.
"""

from __future__ import annotations

import contextvars
import math
import re
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import mpmath

__all__ = [
    "Cut",
    "EmptyInterval",
    "ExtPoint",
    "NEG_INF",
    "POS_INF",
    "PrecisionExhausted",
    "as_ext",
    "as_rational",
    "cmp_ext",
    "cut_cmp",
    "ext_floor",
    "get_cut",
    "rational_between",
    "use_cut",
]


class PrecisionExhausted(ArithmeticError):
    """The pi backend could not separate a value from zero within its budget."""


class EmptyInterval(ValueError):
    pass


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as a rational")


class Cut:
    """A fixed positive irrational ``xi``.

    ``backend="sqrt2"`` decides signs exactly by squaring.  ``backend="pi"``
    refines rational enclosures of pi, doubling the working precision up to
    ``budget`` bits.
    """

    BACKENDS = ("sqrt2", "pi")

    def __init__(self, backend: str = "sqrt2", budget: int = 1024):
        if backend not in self.BACKENDS:
            raise ValueError(f"unknown xi backend {backend!r}")
        if budget < 1:
            raise ValueError("precision budget must be positive")
        self.backend = backend
        self.budget = int(budget)
        self._cache: dict[tuple[Fraction, int], int] = {}

    @classmethod
    def parse(cls, spec: str) -> "Cut":
        """Read ``sqrt2``, ``pi`` or ``pi:<bits>``."""
        name, _, budget = spec.partition(":")
        if budget:
            return cls(name, int(budget))
        return cls(name)

    def __repr__(self) -> str:
        if self.backend == "pi":
            return f"Cut('pi', {self.budget})"
        return "Cut('sqrt2')"

    def __str__(self) -> str:
        return f"pi:{self.budget}" if self.backend == "pi" else "sqrt2"

    def __eq__(self, other) -> bool:
        return isinstance(other, Cut) and (self.backend, self.budget) == (
            other.backend,
            other.budget,
        )

    def __hash__(self) -> int:
        return hash((self.backend, self.budget))

    def approx(self) -> float:
        return math.sqrt(2.0) if self.backend == "sqrt2" else math.pi

    def sign(self, q: Fraction, m: int) -> int:
        """Sign of ``q - m*xi``."""
        if m == 0:
            return (q > 0) - (q < 0)
        key = (q, m)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self.backend == "sqrt2":
            result = _sqrt2_sign(q, m)
        else:
            result = self._pi_sign(q, m)
        if len(self._cache) > 200_000:
            self._cache.clear()
        self._cache[key] = result
        return result

    def _pi_sign(self, q: Fraction, m: int) -> int:
        prec = min(64, self.budget)
        while True:
            with mpmath.workprec(prec):
                man, exp = (+mpmath.mp.pi).man_exp
            approx = Fraction(int(man)) * Fraction(2) ** int(exp)
            # pi lies in [2, 4): one ulp at `prec` bits is 2**(2 - prec).
            radius = abs(m) * Fraction(1, 2 ** max(prec - 3, 0))
            centre = q - m * approx
            if centre > radius:
                return 1
            if centre < -radius:
                return -1
            if prec >= self.budget:
                raise PrecisionExhausted(
                    f"sign of {q} - {m}*pi undecided at {self.budget} bits"
                )
            prec = min(2 * prec, self.budget)


def _sqrt2_sign(q: Fraction, m: int) -> int:
    # q - m*sqrt(2): opposite signs (or q == 0) decide directly, else square.
    sq = (q > 0) - (q < 0)
    sm = 1 if m > 0 else -1
    if sq != sm:
        return sq if sq != 0 else -sm
    bigger = q * q > 2 * m * m
    return sq if bigger else -sq


SQRT2 = Cut("sqrt2")
_active: contextvars.ContextVar[Cut] = contextvars.ContextVar("xi_cut", default=SQRT2)


def get_cut() -> Cut:
    return _active.get()


@contextmanager
def use_cut(cut: Cut | str) -> Iterator[Cut]:
    if isinstance(cut, str):
        cut = Cut.parse(cut)
    token = _active.set(cut)
    try:
        yield cut
    finally:
        _active.reset(token)


def cut_cmp(q, m: int, cut: Cut | None = None) -> int:
    """Sign of ``q - m*xi``; zero only when both are zero."""
    return (cut or get_cut()).sign(as_rational(q), int(m))


class _Infinity:
    __slots__ = ("positive",)

    def __init__(self, positive: bool):
        self.positive = positive

    def __repr__(self) -> str:
        return "POS_INF" if self.positive else "NEG_INF"

    def __str__(self) -> str:
        return "+inf" if self.positive else "-inf"

    def __neg__(self) -> "_Infinity":
        return NEG_INF if self.positive else POS_INF

    def __lt__(self, other) -> bool:
        if other is self:
            return False
        return not self.positive

    def __gt__(self, other) -> bool:
        if other is self:
            return False
        return self.positive

    def __le__(self, other) -> bool:
        return other is self or self < other

    def __ge__(self, other) -> bool:
        return other is self or self > other

    def __reduce__(self):
        return (_infinity, (self.positive,))


def _infinity(positive: bool) -> _Infinity:
    return POS_INF if positive else NEG_INF


POS_INF = _Infinity(True)
NEG_INF = _Infinity(False)

_EXT_RE = re.compile(
    r"^\s*(?:(?P<q>[+-]?\d+(?:/\d+)?)\s*(?:(?P<sign>[+-])\s*(?P<k>\d+)\s*\*\s*xi)?"
    r"|(?P<konly>[+-]?\d*)\s*\*?\s*xi)\s*$"
)


@dataclass(frozen=True, slots=True)
class ExtPoint:
    """The point ``q + k*xi``; a member of Q exactly when ``k == 0``."""

    q: Fraction
    k: int = 0

    def __post_init__(self):
        if not isinstance(self.q, Fraction):
            object.__setattr__(self, "q", as_rational(self.q))
        if not isinstance(self.k, int) or isinstance(self.k, bool):
            raise TypeError("xi coefficient must be an integer")

    @property
    def is_rational(self) -> bool:
        return self.k == 0

    def __add__(self, other) -> "ExtPoint":
        other = as_ext(other)
        return ExtPoint(self.q + other.q, self.k + other.k)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtPoint":
        other = as_ext(other)
        return ExtPoint(self.q - other.q, self.k - other.k)

    def __rsub__(self, other) -> "ExtPoint":
        return as_ext(other) - self

    def __neg__(self) -> "ExtPoint":
        return ExtPoint(-self.q, -self.k)

    def shift(self, k: int) -> "ExtPoint":
        return ExtPoint(self.q, self.k + k) if k else self

    def _cmp(self, other) -> int:
        if isinstance(other, _Infinity):
            return -1 if other.positive else 1
        other = as_ext(other)
        return get_cut().sign(self.q - other.q, other.k - self.k)

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def __float__(self) -> float:
        return float(self.q) + self.k * get_cut().approx()

    def __str__(self) -> str:
        q = str(self.q)
        if self.k == 0:
            return q
        op = "+" if self.k > 0 else "-"
        return f"{q} {op} {abs(self.k)}*xi"

    @classmethod
    def parse(cls, text: str) -> "ExtPoint":
        """Read ``q``, ``q + k*xi`` or ``q - k*xi`` (also ``xi``, ``2*xi``)."""
        m = _EXT_RE.match(text)
        if not m:
            raise ValueError(f"not an extension-line point: {text!r}")
        if m.group("q") is not None:
            k = int(m.group("k") or 0)
            if m.group("sign") == "-":
                k = -k
            return cls(Fraction(m.group("q")), k)
        konly = m.group("konly")
        k = int(konly + "1") if konly in ("", "+", "-") else int(konly)
        return cls(Fraction(0), k)


def as_ext(value) -> ExtPoint:
    if isinstance(value, ExtPoint):
        return value
    return ExtPoint(as_rational(value), 0)


Bound = Union[ExtPoint, _Infinity]


def cmp_ext(a, b, cut: Cut | None = None) -> int:
    """Three-way comparison on the extension line extended by the infinities."""
    if isinstance(a, _Infinity) or isinstance(b, _Infinity):
        if a is b:
            return 0
        if isinstance(a, _Infinity):
            return 1 if a.positive else -1
        return -1 if b.positive else 1
    a, b = as_ext(a), as_ext(b)
    if a.k == b.k:
        return (a.q > b.q) - (a.q < b.q)
    return (cut or get_cut()).sign(a.q - b.q, b.k - a.k)


def ext_floor(value, scale: int = 1) -> int:
    """``floor(value * scale)`` for a point of the extension line."""
    value = as_ext(value)
    if value.k == 0:
        return math.floor(value.q * scale)
    scaled = ExtPoint(value.q * scale, value.k * scale)
    cut = get_cut()
    n = math.floor(float(scaled.q) + scaled.k * cut.approx())
    while cmp_ext(scaled, n) < 0:
        n -= 1
    while cmp_ext(scaled, n + 1) >= 0:
        n += 1
    return n


def rational_between(lo: Bound, hi: Bound) -> Fraction:
    """A rational strictly between ``lo`` and ``hi``.

    Prefers 0, then integers, then dyadics with the smallest denominator,
    always taking the candidate nearest to zero.
    """
    lo = lo if isinstance(lo, _Infinity) else as_ext(lo)
    hi = hi if isinstance(hi, _Infinity) else as_ext(hi)
    if cmp_ext(lo, hi) >= 0:
        raise EmptyInterval(f"({lo}, {hi}) is empty")
    if cmp_ext(lo, 0) < 0 < cmp_ext(hi, 0):
        return Fraction(0)
    if cmp_ext(hi, 0) <= 0:
        return -rational_between(-hi, -lo)
    # 0 <= lo < hi, lo finite
    if hi is POS_INF:
        return Fraction(ext_floor(lo) + 1)
    scale = 1
    while True:
        cand = Fraction(ext_floor(lo, scale) + 1, scale)
        if cmp_ext(cand, hi) < 0:
            return cand
        scale *= 2
