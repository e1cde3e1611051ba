"""Exact-where-possible arithmetic.

Integer and :class:`~fractions.Fraction` inputs stay exact end to end so that
tests such as "allocation probability equals 1" are decided without rounding.
Floats fall back to an absolute tolerance of :data:`EPS`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, Fraction, float]

EPS = 1e-9


def is_exact(x) -> bool:
    t = type(x)
    if t is int or t is Fraction:
        return True
    if t is float:
        return False
    return isinstance(x, Rational) and not isinstance(x, bool)


def simplify(x: Number) -> Number:
    """Collapse integral fractions to ``int``."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def div(a: Number, b: Number) -> Number:
    if type(a) is int and type(b) is int:
        q, r = divmod(a, b)
        return q if r == 0 else Fraction(a, b)
    if is_exact(a) and is_exact(b):
        return simplify(Fraction(a) / Fraction(b))
    return a / b


def close(a: Number, b: Number) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(a - b) <= EPS


def is_zero(x: Number) -> bool:
    return close(x, 0)


def is_one(x: Number) -> bool:
    return close(x, 1)


def le(a: Number, b: Number) -> bool:
    """``a <= b`` with float tolerance."""
    if is_exact(a) and is_exact(b):
        return a <= b
    return a <= b + EPS


def to_number(value) -> Number:
    """Parse a JSON/CLI scalar into an exact number when it is rational.

    Decimal literals such as ``0.6`` become ``Fraction(3, 5)``; strings like
    ``"3/2"`` are accepted as well.
    """
    if isinstance(value, bool):
        raise TypeError(f"expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return simplify(Fraction(value))
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return simplify(Fraction(repr(value)))
    if isinstance(value, str):
        return simplify(Fraction(value.strip()))
    raise TypeError(f"expected a number, got {value!r}")


def to_json_number(x: Number):
    if isinstance(x, Fraction):
        return float(x)
    return x


def fmt(x: Number) -> str:
    """Exact string for rationals (``"1/3"``), repr for floats."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(x) if isinstance(x, float) else str(x)
