"""Scalar helpers shared by the exact (Fraction) and floating point code paths."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable

Scalar = Any  # int | Fraction | float


def is_exact(value) -> bool:
    return isinstance(value, Rational)


def all_exact(values: Iterable) -> bool:
    return all(isinstance(v, Rational) for v in values)


def to_fraction(value) -> Fraction:
    """Parse a JSON scalar as an exact rational.

    Strings like ``"1/4"`` or ``"0.1"`` are read with decimal semantics, floats
    through their shortest repr so that ``0.1`` means one tenth.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def parse_scalar(value, rational: bool = False):
    """JSON scalar -> int/Fraction/float.  ``"p/q"`` strings are always exact."""
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value) if rational else value
    if isinstance(value, float):
        return to_fraction(value) if rational else value
    if isinstance(value, Fraction):
        return value
    raise TypeError(f"cannot read {value!r} as a number")


def scalar_to_json(value):
    """Lossless JSON form: ints stay ints, Fractions become ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return int(value)
    return float(value)


def as_float(value) -> float:
    return float(value)


def log2_exact(value):
    """log2 as an int when ``value`` is an exact power of two, else a float."""
    if value <= 0:
        raise ValueError("log2 of a non-positive number")
    if isinstance(value, (Fraction, int)):
        q = Fraction(value)
        num, den = q.numerator, q.denominator
        if num & (num - 1) == 0 and den & (den - 1) == 0:
            return num.bit_length() - den.bit_length()
        return math.log2(num) - math.log2(den)
    mant, exp = math.frexp(value)
    if mant == 0.5:
        return exp - 1
    return math.log2(value)


def dyadic_band(value) -> int:
    """The unique integer m with 2**(m-1) < value <= 2**m."""
    if value <= 0:
        raise ValueError("dyadic band of a non-positive number")
    if isinstance(value, (Fraction, int)):
        q = Fraction(value)
        m = q.numerator.bit_length() - q.denominator.bit_length()
        # now 2**(m-1) < q < 2**(m+1); fix up with exact comparisons
        while Fraction(2) ** m < q:
            m += 1
        while Fraction(2) ** (m - 1) >= q:
            m -= 1
        return m
    mant, exp = math.frexp(value)  # value = mant * 2**exp, 0.5 <= mant < 1
    return exp - 1 if mant == 0.5 else exp
