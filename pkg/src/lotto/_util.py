"""Small shared helpers."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest repr, so
    ``1.3`` becomes ``13/10`` rather than its binary expansion."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def parse_sweep(text: str) -> list[Fraction]:
    """``a:b:step`` (inclusive, exact rational steps) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"sweep must be start:stop:step, got {text!r}")
        start, stop, step = (as_fraction(p) for p in parts)
        if step <= 0:
            raise ValueError("sweep step must be positive")
        out = []
        v = start
        while v <= stop:
            out.append(v)
            v += step
        return out
    return [as_fraction(p) for p in text.split(",") if p.strip()]


def frac_text(x) -> str:
    """Exact decimal text for terminating rationals (``1/20`` -> ``0.05``),
    ``p/q`` otherwise."""
    x = as_fraction(x)
    q, twos, fives = x.denominator, 0, 0
    while q % 2 == 0:
        q, twos = q // 2, twos + 1
    while q % 5 == 0:
        q, fives = q // 5, fives + 1
    if q != 1:
        return str(x)
    places = max(twos, fives)
    if places == 0:
        return str(x.numerator)
    scaled = abs(x.numerator) * 10**places // x.denominator
    digits = str(scaled).rjust(places + 1, "0")
    text = (digits[:-places] + "." + digits[-places:]).rstrip("0").rstrip(".")
    return ("-" if x < 0 else "") + text
