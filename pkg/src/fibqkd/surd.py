"""Exact arithmetic in Q(i, sqrt 2).

Every amplitude that appears in the protocol is a Gaussian rational times a
power of 1/sqrt(2), so the field Q(i)(sqrt 2) is closed under everything the
state algebra needs (sums, products, complex conjugation).  Elements are kept
as ``a + b*sqrt(2)`` with ``a`` and ``b`` Gaussian rationals.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
import math


class Surd:
    """An element ``(ar + i*ai) + (br + i*bi)*sqrt(2)`` with rational parts."""

    __slots__ = ("ar", "ai", "br", "bi")

    def __init__(self, ar=0, ai=0, br=0, bi=0):
        self.ar = Fraction(ar)
        self.ai = Fraction(ai)
        self.br = Fraction(br)
        self.bi = Fraction(bi)

    @classmethod
    def coerce(cls, x) -> "Surd":
        if isinstance(x, Surd):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x)
        if isinstance(x, complex) and x.real.is_integer() and x.imag.is_integer():
            return cls(int(x.real), int(x.imag))
        raise TypeError(f"cannot convert {x!r} to an exact scalar")

    # --- constants -------------------------------------------------------
    @classmethod
    def sqrt2(cls) -> "Surd":
        return cls(0, 0, 1, 0)

    @classmethod
    def inv_sqrt2(cls) -> "Surd":
        return cls(0, 0, Fraction(1, 2), 0)

    @classmethod
    def i(cls) -> "Surd":
        return cls(0, 1)

    # --- arithmetic ------------------------------------------------------
    def __add__(self, other):
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return Surd(self.ar + o.ar, self.ai + o.ai, self.br + o.br, self.bi + o.bi)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.ar, -self.ai, -self.br, -self.bi)

    def __sub__(self, other):
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return Surd.coerce(other) - self

    def __mul__(self, other):
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        # a, b, c, d Gaussian rationals: (a + b r)(c + d r) = (ac + 2bd) + (ad + bc) r
        a = complex_mul(self.ar, self.ai, o.ar, o.ai)
        bd = complex_mul(self.br, self.bi, o.br, o.bi)
        ad = complex_mul(self.ar, self.ai, o.br, o.bi)
        bc = complex_mul(self.br, self.bi, o.ar, o.ai)
        return Surd(a[0] + 2 * bd[0], a[1] + 2 * bd[1], ad[0] + bc[0], ad[1] + bc[1])

    __rmul__ = __mul__

    def conjugate(self) -> "Surd":
        return Surd(self.ar, -self.ai, self.br, -self.bi)

    def abs2(self) -> "Surd":
        """Squared modulus ``z * conj(z)``; real, possibly with a sqrt(2) part."""
        return self * self.conjugate()

    # --- inspection ------------------------------------------------------
    def is_zero(self) -> bool:
        return not (self.ar or self.ai or self.br or self.bi)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not (self.ai or self.br or self.bi)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational number")
        return self.ar

    def __complex__(self) -> complex:
        r = math.sqrt(2.0)
        return complex(float(self.ar) + r * float(self.br), float(self.ai) + r * float(self.bi))

    def __float__(self) -> float:
        if self.ai or self.bi:
            raise ValueError(f"{self} has an imaginary part")
        return float(self.ar) + math.sqrt(2.0) * float(self.br)

    def __eq__(self, other) -> bool:
        try:
            o = Surd.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.ar, self.ai, self.br, self.bi) == (o.ar, o.ai, o.br, o.bi)

    def __hash__(self) -> int:
        return hash((self.ar, self.ai, self.br, self.bi))

    def __repr__(self) -> str:
        return f"Surd({self.ar}, {self.ai}, {self.br}, {self.bi})"


def complex_mul(ar, ai, br, bi):
    return ar * br - ai * bi, ar * bi + ai * br
