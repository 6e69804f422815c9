"""Exact rational helpers: parsing, formatting, bit sizes, seed derivation.

All numeric state in this package is `fractions.Fraction`; nothing here or
downstream ever rounds.  Rationals travel through files as "p/q" strings
(plain "p" when q == 1) so that reports can be parsed back exactly.
"""

from __future__ import annotations

from fractions import Fraction

Rat = Fraction

_MIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def rat(value) -> Fraction:
    """Coerce an int, "p/q" string, or Fraction to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


def parse_rat(text: str) -> Fraction:
    """Parse "p/q" or "p" (integers, optional sign) into a Fraction."""
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def fmt_rat(q: Fraction) -> str:
    """Canonical "p/q" string; integers render without the denominator."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def bit_size(q: Fraction) -> int:
    """Bits to write numerator and denominator (sign bit not counted)."""
    return abs(q.numerator).bit_length() + q.denominator.bit_length()


def mix64(master_seed: int, index: int) -> int:
    """Derive the per-trial seed ``mix64(master, i)`` (splitmix64 finalizer).

    Fixed here so that independently written runners can reproduce the
    same trial streams from one master seed.
    """
    z = (master_seed + (index + 1) * _MIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64
