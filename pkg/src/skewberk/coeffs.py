"""Coefficient field: exact Gaussian rationals, or complex doubles in numeric mode.

Exact arithmetic is the default.  A series whose coefficients are Python
``complex`` values is in numeric mode; zero testing there uses the tolerance
``NUMERIC_TOL`` (override per call where a ``tol`` argument exists).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

NUMERIC_TOL = 1e-12

_RATIONAL_TYPES = (int, Fraction, type(mpq(0)))


def _q(x) -> mpq:
    if isinstance(x, type(mpq(0))):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class QI:
    """An element a + b*i of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @staticmethod
    def _mk(re, im) -> "QI":
        # trusted constructor for values that are already mpq
        obj = object.__new__(QI)
        obj.re = re
        obj.im = im
        return obj

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, QI):
            return _mk(self.re + other.re, self.im + other.im)
        if isinstance(other, _RATIONAL_TYPES):
            return QI(self.re + _q(other), self.im)
        if isinstance(other, complex):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, QI):
            return _mk(self.re - other.re, self.im - other.im)
        if isinstance(other, _RATIONAL_TYPES):
            return QI(self.re - _q(other), self.im)
        if isinstance(other, complex):
            return complex(self) - other
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QI):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return _mk(a * c, _ZERO)
            return _mk(a * c - b * d, a * d + b * c)
        if isinstance(other, _RATIONAL_TYPES):
            o = _q(other)
            return QI(self.re * o, self.im * o)
        if isinstance(other, complex):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QI":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("division by zero in Q(i)")
        return _mk(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, QI):
            return self * other.inverse()
        if isinstance(other, _RATIONAL_TYPES):
            return QI(self.re / _q(other), self.im / _q(other))
        if isinstance(other, complex):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, complex):
            return other / complex(self)
        return QI(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = QI(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    def norm(self) -> mpq:
        return self.re * self.re + self.im * self.im

    # comparisons --------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _RATIONAL_TYPES):
            return not self.im and self.re == _q(other)
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(Fraction(int(self.re.numerator), int(self.re.denominator)))
        return hash((self.re, self.im))

    def sort_key(self):
        return (self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"QI({format_coeff(self)})"


_mk = QI._mk
_ZERO = mpq(0)


def coerce(x):
    """Map ints, Fractions, strings and complex values into the coefficient field."""
    if isinstance(x, (QI, complex)):
        return x
    if isinstance(x, float):
        return complex(x)
    if isinstance(x, _RATIONAL_TYPES):
        return QI(x)
    if isinstance(x, str):
        return parse_coeff(x)
    raise TypeError(f"unsupported coefficient {x!r}")


def is_zero(c, tol: float | None = None) -> bool:
    if isinstance(c, complex):
        return abs(c) <= (NUMERIC_TOL if tol is None else tol)
    return not c


def is_numeric(c) -> bool:
    return isinstance(c, complex)


def to_fraction(x) -> Fraction:
    x = _q(x)
    return Fraction(int(x.numerator), int(x.denominator))


def unit_power(c) -> int | None:
    """Return a with c == i**a (a in 0..3) when c is a unit of Z[i], else None."""
    if isinstance(c, complex):
        for a, u in enumerate((1, 1j, -1, -1j)):
            if abs(c - u) <= NUMERIC_TOL:
                return a
        return None
    table = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}
    return table.get((c.re, c.im))


def root_of_unity(order: int, k: int, numeric: bool = False):
    """exp(2*pi*i*k/order), exact when the value lies in Q(i)."""
    k %= order
    if not numeric and 4 % order == 0:
        a = (k * 4 // order) % 4
        return (QI(1), QI(0, 1), QI(-1), QI(0, -1))[a]
    if not numeric:
        from .errors import RootsOfUnityUnavailable

        raise RootsOfUnityUnavailable(f"roots of unity of order {order} are not in Q(i)")
    angle = 2 * math.pi * k / order
    return complex(math.cos(angle), math.sin(angle))


def _exact_sqrt_q(x: mpq) -> mpq | None:
    if x < 0:
        return None
    n, d = int(x.numerator), int(x.denominator)
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return mpq(rn, rd)
    return None


def exact_sqrt(c: QI) -> QI | None:
    """A square root of c in Q(i), or None when c is not a square there."""
    if not c:
        return QI(0)
    a, b = c.re, c.im
    r = _exact_sqrt_q(a * a + b * b)
    if r is None:
        return None
    x2 = (a + r) / 2
    x = _exact_sqrt_q(x2)
    if x is not None and x:
        y = b / (2 * x)
        return QI(x, y)
    y = _exact_sqrt_q((r - a) / 2)
    if y is None or not y:
        return None
    return QI(b / (2 * y), y)


# text format ------------------------------------------------------------

_NUM = r"[+-]?\d+(?:/\d+)?"


def _fmt_q(x: mpq) -> str:
    if x.denominator == 1:
        return str(int(x.numerator))
    return f"{int(x.numerator)}/{int(x.denominator)}"


def _fmt_float(x: float) -> str:
    return repr(float(x))


def format_coeff(c) -> str:
    """Canonical text: ``A``, ``A/B``, ``(A+B*i)``, ``(B*i)``; floats in numeric mode."""
    if isinstance(c, complex):
        return f"({_fmt_float(c.real)}{'+' if c.imag >= 0 else '-'}{_fmt_float(abs(c.imag))}*i)"
    if not c.im:
        return _fmt_q(c.re)
    im = _fmt_q(c.im)
    if not c.re:
        return f"({im}*i)"
    sign = "+" if c.im > 0 else "-"
    return f"({_fmt_q(c.re)}{sign}{_fmt_q(abs(c.im))}*i)"


_COEFF_RE = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<sign>[+-])?\s*(?P<im>\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$"
)
_FLOAT = r"[+-]?(?:\d+\.?\d*(?:[eE][+-]?\d+)?|inf|nan)"
_FLOAT_COEFF_RE = re.compile(rf"^\s*(?P<re>{_FLOAT})\s*(?P<sign>[+-])\s*(?P<im>{_FLOAT[5:]})\s*\*\s*i\s*$")


def parse_coeff(text: str):
    """Inverse of :func:`format_coeff` (parentheses optional)."""
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    m = _FLOAT_COEFF_RE.match(s)
    if m and ("." in s or "e" in s.lower()):
        im = float(m.group("im"))
        return complex(float(m.group("re")), -im if m.group("sign") == "-" else im)
    m = _COEFF_RE.match(s)
    if not m or (m.group("re") is None and "i" not in s):
        raise ValueError(f"bad coefficient {text!r}")
    re_part = Fraction(m.group("re")) if m.group("re") else Fraction(0)
    im_part = Fraction(0)
    if "i" in s:
        mag = Fraction(m.group("im")) if m.group("im") else Fraction(1)
        im_part = -mag if m.group("sign") == "-" else mag
        if m.group("re") is not None and m.group("sign") is None and m.group("im") is None:
            # "3i" style is ambiguous with "3 i": read as pure imaginary 3*i.
            im_part, re_part = re_part, Fraction(0)
    return QI(re_part, im_part)


def sort_key(c):
    if isinstance(c, complex):
        return (c.real, c.imag)
    return (c.re, c.im)


__all__ = [
    "QI",
    "NUMERIC_TOL",
    "coerce",
    "is_zero",
    "is_numeric",
    "exact_sqrt",
    "root_of_unity",
    "unit_power",
    "format_coeff",
    "parse_coeff",
    "sort_key",
    "to_fraction",
    "gmpy2",
]
