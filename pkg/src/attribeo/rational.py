"""Exact rational parsing and rendering."""

from __future__ import annotations

import decimal
from fractions import Fraction
from typing import Any

DEFAULT_PRECISION = 6


def parse_rational(text: Any) -> Fraction:
    """Parse a decimal (``"0.1"``) or ``num/den`` literal into an exact Fraction.

    Integers are accepted as-is. Floats are converted through their shortest
    repr so that ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a number: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        text = repr(text)
    if not isinstance(text, str):
        raise ValueError(f"not a number: {text!r}")
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"unparseable number: {text!r}") from exc
    return value


def format_rational(value: Fraction) -> str:
    """``160/3`` in lowest terms; integers without a denominator."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def decimal_string(value: Fraction, precision: int = DEFAULT_PRECISION) -> str:
    """Round ``value`` to ``precision`` significant digits, fixed-point notation."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    value = Fraction(value)
    if value == 0:
        return "0"
    with decimal.localcontext() as ctx:
        ctx.prec = precision
        ctx.rounding = decimal.ROUND_HALF_EVEN
        d = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
    return format(d, "f")


def rational_json(value: Fraction, precision: int = DEFAULT_PRECISION) -> dict[str, str]:
    value = Fraction(value)
    return {
        "num": str(value.numerator),
        "den": str(value.denominator),
        "decimal": decimal_string(value, precision),
    }
