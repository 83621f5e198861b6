"""Scalar arithmetic shared by the exact and numeric modes.

Exact mode uses ``QC`` (complex numbers with Fraction real and imaginary
parts), plain ``Fraction`` and ``int``. Numeric mode uses ``float`` and
``complex``. The helpers below dispatch so that the cylinder-function and
spanning-element code never has to care which mode it is in; mixing an exact
value with a float silently degrades to floating point, which is what the
thermodynamic evaluations want.
"""

from __future__ import annotations

from fractions import Fraction

_EXACT_TYPES = (int, Fraction)


class QC:
    """A Gaussian rational: re + im*i with Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("QC is immutable")

    @staticmethod
    def _coerce(x):
        if isinstance(x, QC):
            return x
        if isinstance(x, _EXACT_TYPES):
            return QC(x, 0)
        return None

    def __add__(self, other):
        o = QC._coerce(other)
        if o is None:
            return self.to_complex() + other
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QC) else -QC._coerce(other) if QC._coerce(other) is not None else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = QC._coerce(other)
        if o is None:
            return self.to_complex() * other
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QC._coerce(other)
        if o is None:
            return self.to_complex() / other
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero QC")
        return QC((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        return QC._coerce(other) / self

    def conjugate(self) -> "QC":
        return QC(self.re, -self.im)

    def __eq__(self, other):
        o = QC._coerce(other)
        if o is None:
            return self.to_complex() == other
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"QC({self.re}, {self.im})"


def conj(x):
    """Complex conjugate for any supported scalar."""
    if isinstance(x, (QC, complex)):
        return x.conjugate()
    return x


def is_zero(x) -> bool:
    if isinstance(x, QC):
        return not bool(x)
    return x == 0


def is_exact(x) -> bool:
    return isinstance(x, _EXACT_TYPES + (QC,))


def to_complex(x) -> complex:
    if isinstance(x, QC):
        return x.to_complex()
    return complex(x)


def abs2(x):
    """|x|^2, exact for exact inputs."""
    c = conj(x)
    return c * x
