"""Truncated Puiseux series with exact rational exponents.

A series is a finite sum of terms ``a * z**beta`` known modulo ``z**trunc``.
Exponents are kept internally as integers over a common denominator ``ram``
so that products only add integers.  ``trunc`` is a :class:`Fraction` or
``INF`` for a series that is exactly a polynomial in ``z**(1/ram)``.

Precision rules follow the usual "known modulo z^T" bookkeeping::

    trunc(s + t) = min(trunc s, trunc t)
    trunc(s * t) = min(ord s + trunc t, ord t + trunc s)
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping

from .coeffs import (
    QI,
    coerce,
    format_coeff,
    is_numeric,
    is_zero,
    parse_coeff,
    root_of_unity,
    unit_power,
)
from .errors import IndeterminateOrder, RootsOfUnityUnavailable, SeriesParseError

INF = math.inf


def ext_add(a, b):
    """Addition on Q extended by +inf (keeps Fractions exact)."""
    if a == INF or b == INF:
        return INF
    return a + b


def as_exponent(x):
    """Normalize an exponent-like value to Fraction or INF."""
    if x is None:
        return INF
    if isinstance(x, float):
        if x == INF:
            return INF
        raise TypeError("exponents must be exact rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return INF if x.strip() in ("inf", "oo", "∞") else Fraction(x)
    return Fraction(x)


def fmt_exponent(x) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class PuiseuxSeries:
    """An immutable truncated Puiseux series."""

    __slots__ = ("_q", "_t", "_trunc", "_numeric", "_hash")

    def __init__(self, terms: Mapping | None = None, trunc=INF):
        trunc = as_exponent(trunc)
        q = 1
        raw: dict[Fraction, object] = {}
        for e, c in (terms or {}).items():
            e = Fraction(e)
            c = coerce(c)
            if trunc != INF and e >= trunc:
                continue
            raw[e] = raw[e] + c if e in raw else c
            q = q * e.denominator // math.gcd(q, e.denominator)
        scaled = {}
        for e, c in raw.items():
            if not is_zero(c):
                scaled[int(e * q)] = c
        self._init(scaled, q, trunc)

    def _init(self, scaled: dict, q: int, trunc):
        g = q
        for k in scaled:
            g = math.gcd(g, k)
            if g == 1:
                break
        if g > 1:
            scaled = {k // g: c for k, c in scaled.items()}
            q //= g
        if not scaled:
            q = 1
        self._t = dict(sorted(scaled.items()))
        self._q = q
        self._trunc = trunc
        self._numeric = any(is_numeric(c) for c in scaled.values())
        self._hash = None

    @classmethod
    def _raw(cls, scaled: dict, q: int, trunc) -> "PuiseuxSeries":
        obj = cls.__new__(cls)
        if trunc != INF:
            limit = trunc * q
            scaled = {k: c for k, c in scaled.items() if k < limit and not is_zero(c)}
        else:
            scaled = {k: c for k, c in scaled.items() if not is_zero(c)}
        obj._init(scaled, q, trunc)
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, trunc=INF) -> "PuiseuxSeries":
        return cls({}, trunc)

    @classmethod
    def one(cls) -> "PuiseuxSeries":
        return cls({0: 1})

    @classmethod
    def monomial(cls, coeff, exponent=1, trunc=INF) -> "PuiseuxSeries":
        return cls({Fraction(exponent): coeff}, trunc)

    @classmethod
    def constant(cls, c) -> "PuiseuxSeries":
        return cls({0: c})

    @classmethod
    def parse(cls, text: str) -> "PuiseuxSeries":
        return _Parser(text).parse()

    # accessors ----------------------------------------------------------
    @property
    def trunc(self):
        return self._trunc

    @property
    def ram(self) -> int:
        return self._q

    @property
    def numeric(self) -> bool:
        return self._numeric

    @property
    def is_exact(self) -> bool:
        return self._trunc == INF

    @property
    def terms(self) -> dict:
        q = self._q
        return {Fraction(k, q): c for k, c in self._t.items()}

    def items(self) -> list:
        q = self._q
        return [(Fraction(k, q), c) for k, c in self._t.items()]

    def support(self) -> list:
        return [Fraction(k, self._q) for k in self._t]

    def coeff(self, exponent):
        e = Fraction(exponent) * self._q
        if e.denominator != 1:
            return QI(0)
        return self._t.get(int(e), QI(0))

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        """True when no term is stored (the value may still be unknown above trunc)."""
        return not self._t

    def ord(self):
        if self._t:
            return Fraction(next(iter(self._t)), self._q)
        if self._trunc == INF:
            return INF
        raise IndeterminateOrder(f"all known terms vanish below z^{fmt_exponent(self._trunc)}")

    def ord_lower_bound(self):
        """ord when determinate, otherwise trunc (a valid lower bound)."""
        if self._t:
            return Fraction(next(iter(self._t)), self._q)
        return self._trunc

    def leading(self):
        """(exponent, coefficient) of the lowest term."""
        if not self._t:
            self.ord()
            raise ValueError("the zero series has no leading term")
        k, c = next(iter(self._t.items()))
        return Fraction(k, self._q), c

    def truncate(self, T) -> "PuiseuxSeries":
        """Forget everything at or above z^T."""
        T = as_exponent(T)
        if T >= self._trunc:
            return self
        return PuiseuxSeries._raw(self._t, self._q, T)

    def terms_below(self, t, inclusive: bool = False) -> "PuiseuxSeries":
        """The exact polynomial formed by terms with exponent < t (or <= t)."""
        t = as_exponent(t)
        q = self._q
        keep = {
            k: c for k, c in self._t.items()
            if t == INF or (Fraction(k, q) <= t if inclusive else Fraction(k, q) < t)
        }
        return PuiseuxSeries._raw(keep, q, INF)

    def with_trunc(self, T) -> "PuiseuxSeries":
        """Same terms below T, declared exact up to T (T may exceed the current trunc)."""
        return PuiseuxSeries._raw(self._t, self._q, as_exponent(T))

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(a: "PuiseuxSeries", b: "PuiseuxSeries"):
        q = a._q * b._q // math.gcd(a._q, b._q)
        ta = a._t if a._q == q else {k * (q // a._q): c for k, c in a._t.items()}
        tb = b._t if b._q == q else {k * (q // b._q): c for k, c in b._t.items()}
        return q, ta, tb

    @staticmethod
    def _wrap(x) -> "PuiseuxSeries":
        if isinstance(x, PuiseuxSeries):
            return x
        if isinstance(x, str):
            return PuiseuxSeries.parse(x)
        return PuiseuxSeries({0: x})

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            try:
                other = PuiseuxSeries._wrap(other)
            except TypeError:
                return NotImplemented
        q, ta, tb = PuiseuxSeries._lift(self, other)
        out = dict(ta)
        for k, c in tb.items():
            out[k] = out[k] + c if k in out else c
        return PuiseuxSeries._raw(out, q, min(self._trunc, other._trunc))

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries._raw({k: -c for k, c in self._t.items()}, self._q, self._trunc)

    def __sub__(self, other):
        if not isinstance(other, PuiseuxSeries):
            try:
                other = PuiseuxSeries._wrap(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PuiseuxSeries":
        c = coerce(c)
        if is_zero(c):
            return PuiseuxSeries._raw({}, 1, INF)
        return PuiseuxSeries._raw({k: v * c for k, v in self._t.items()}, self._q, self._trunc)

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        vs, vt = self.ord_lower_bound(), other.ord_lower_bound()
        trunc = min(ext_add(vs, other._trunc), ext_add(vt, self._trunc))
        q, ta, tb = PuiseuxSeries._lift(self, other)
        limit = None if trunc == INF else trunc * q
        out: dict[int, object] = {}
        lb = list(tb.items())
        for ka, ca in ta.items():
            for kb, cb in lb:
                k = ka + kb
                if limit is not None and k >= limit:
                    break
                p = ca * cb
                out[k] = out[k] + p if k in out else p
        return PuiseuxSeries._raw(out, q, trunc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = PuiseuxSeries.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self, prec=None) -> "PuiseuxSeries":
        """1/s.  trunc(1/s) = trunc(s) - 2 ord(s), capped at ``prec`` when given."""
        v, a = self.leading()
        inv_a = (1 / a) if is_numeric(a) else QI(1) / a
        lead_inv = PuiseuxSeries.monomial(inv_a, -v)
        T = ext_add(self._trunc, -2 * v)
        if prec is not None:
            T = min(T, as_exponent(prec))
        # s = a z^v (1 + u) with ord u > 0
        u = self * lead_inv - 1
        if u.is_zero() and u.trunc == INF:
            return lead_inv
        if T == INF:
            raise ValueError("inverse of a non-monomial exact series needs a precision cap")
        need = T + v
        u = u.truncate(need)
        # 1/(1+u) coefficient by coefficient over the common denominator
        q = u._q
        limit = need * q
        if limit != int(limit):
            limit = math.ceil(limit)
        limit = int(limit)
        us = sorted(u._t.items())
        one = 1.0 + 0j if is_numeric(a) else QI(1)
        b = {0: one}
        for k in range(1, limit):
            acc_k = None
            for j, c in us:
                if j > k:
                    break
                bk = b.get(k - j)
                if bk is not None:
                    p = c * bk
                    acc_k = p if acc_k is None else acc_k + p
            if acc_k is not None and not is_zero(acc_k):
                b[k] = -acc_k
        acc = PuiseuxSeries._raw(b, q, need)
        return (acc * lead_inv).truncate(T)

    def div(self, other: "PuiseuxSeries", prec=None) -> "PuiseuxSeries":
        """self / other, known as far as the operands allow (capped at ``prec``)."""
        if len(other._t) == 1 and other._trunc == INF:
            out = self * other.inverse()
            return out if prec is None else out.truncate(prec)
        vt = other.ord()
        if self.is_zero() and self._trunc == INF:
            return self
        cap = ext_add(self._trunc, -vt)
        if prec is not None:
            cap = min(cap, as_exponent(prec))
        if cap == INF:
            raise ValueError("exact division by a non-monomial series needs a precision cap")
        vs = self.ord_lower_bound()
        out = self * other.inverse(prec=cap - vs if vs != INF else cap)
        return out.truncate(cap)

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self.div(other)
        c = coerce(other)
        return self.scale((1 / c) if is_numeric(c) else QI(1) / c)

    # substitutions ------------------------------------------------------
    def ramify(self, k: int) -> "PuiseuxSeries":
        """z -> z^(1/k)."""
        if k < 1:
            raise ValueError("ramification index must be positive")
        T = self._trunc if self._trunc == INF else self._trunc / k
        return PuiseuxSeries._raw(self._t, self._q * k, T)

    def unramify(self, k: int) -> "PuiseuxSeries":
        """z -> z^k."""
        if k < 1:
            raise ValueError("ramification index must be positive")
        T = self._trunc if self._trunc == INF else self._trunc * k
        return PuiseuxSeries._raw({e * k: c for e, c in self._t.items()}, self._q, T)

    def shift(self, exponent) -> "PuiseuxSeries":
        """Multiply by z^exponent."""
        return self * PuiseuxSeries.monomial(1, exponent)

    # Galois action ------------------------------------------------------
    def galois_conjugates(self, numeric: bool | None = None) -> list:
        """All images under z^(1/m) -> zeta * z^(1/m), m = ram, in order zeta^0, zeta^1, ..."""
        m = self._q
        numeric = self._numeric if numeric is None else numeric
        if m == 1:
            return [self]
        if not numeric and 4 % m != 0:
            raise RootsOfUnityUnavailable(f"conjugation needs {m}-th roots of unity")
        out = []
        for s in range(m):
            out.append(
                PuiseuxSeries._raw(
                    {k: c * root_of_unity(m, k * s, numeric) for k, c in self._t.items()},
                    m,
                    self._trunc,
                )
            )
        return out

    def conjugate_index(self, other: "PuiseuxSeries", tol: float | None = None) -> int | None:
        """s with other = sigma^s(self) (both read modulo their common trunc), else None."""
        if self._trunc != other._trunc:
            T = min(self._trunc, other._trunc)
            return self.truncate(T).conjugate_index(other.truncate(T), tol)
        if len(self._t) != len(other._t) or self._q != other._q:
            return None
        m = self._q
        pairs = []
        for (ka, ca), (kb, cb) in zip(self._t.items(), other._t.items()):
            if ka != kb:
                return None
            pairs.append((ka, ca, cb))
        numeric = self._numeric or other._numeric
        for s in range(m):
            ok = True
            for k, ca, cb in pairs:
                r = (k * s) % m
                if numeric:
                    zeta = root_of_unity(m, r, True)
                    if abs(complex(ca) * zeta - complex(cb)) > (tol or 1e-9) * max(1.0, abs(complex(cb))):
                        ok = False
                        break
                else:
                    if (4 * r) % m:
                        ok = False
                        break
                    if unit_power(cb / ca) != (4 * r) // m:
                        ok = False
                        break
            if ok:
                return s
        return None

    def is_conjugate(self, other: "PuiseuxSeries", tol: float | None = None) -> bool:
        return self.conjugate_index(other, tol) is not None

    # evaluation ---------------------------------------------------------
    def evaluate(self, z: complex) -> complex:
        """Numeric value at z, principal branch of z^(1/ram); truncation ignored."""
        if z == 0:
            return complex(self.coeff(0)) if self._t else 0j
        import cmath

        root = cmath.exp(cmath.log(z) / self._q)
        total = 0j
        for k, c in self._t.items():
            total += complex(c) * root**k
        return total

    # comparison and text ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self._q == other._q and self._trunc == other._trunc and self._t == other._t
        if isinstance(other, (int, Fraction, QI)):
            return self == PuiseuxSeries({0: other})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._q, self._trunc, tuple(self._t.items())))
        return self._hash

    def agrees_with(self, other: "PuiseuxSeries", T, tol: float | None = None) -> bool:
        """Equality of all coefficients below z^T."""
        T = as_exponent(T)
        diff = self.terms_below(T) - other.terms_below(T)
        if not self._numeric and not other._numeric:
            return diff.is_zero()
        bound = 1e-9 if tol is None else tol
        return all(abs(complex(c)) <= bound for _, c in diff.items())

    def sort_key(self):
        from .coeffs import sort_key

        return tuple((Fraction(k, self._q), sort_key(c)) for k, c in self._t.items())

    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return f"PuiseuxSeries({format_series(self)!r})"


def horner(coeffs: Iterable, x: PuiseuxSeries) -> PuiseuxSeries:
    """Evaluate sum coeffs[j] * x**j (coeffs low degree first, series or scalars)."""
    coeffs = list(coeffs)
    acc = PuiseuxSeries._wrap(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        acc = acc * x + a
    return acc


# text format ------------------------------------------------------------


def _fmt_mono(e: Fraction) -> str:
    if e == 1:
        return "z"
    if e.denominator == 1 and e > 0:
        return f"z^{e.numerator}"
    return f"z^({fmt_exponent(e)})"


def format_series(s: PuiseuxSeries) -> str:
    parts: list[str] = []
    for e, c in s.items():
        neg = False
        if not is_numeric(c) and not c.im and c.re < 0:
            neg, c = True, -c
        if e == 0:
            body = format_coeff(c)
        elif not is_numeric(c) and c == 1:
            body = _fmt_mono(e)
        else:
            body = f"{format_coeff(c)}*{_fmt_mono(e)}"
        parts.append(("-" if neg else "+", body))
    if s.trunc != INF:
        T = s.trunc
        parts.append(("+", "O(1)" if T == 0 else f"O({_fmt_mono(T)})"))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:/\d+)?")
_INT = re.compile(r"\d+")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise SeriesParseError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> PuiseuxSeries:
        terms: dict[Fraction, object] = {}
        trunc = INF
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        if not self.peek():
            self.error("empty series")
        while True:
            kind, e, c = self.term()
            if kind == "O":
                if sign < 0:
                    self.error("O-term cannot be negated")
                trunc = min(trunc, e)
            else:
                c = -c if sign < 0 else c
                terms[e] = terms[e] + c if e in terms else c
            ch = self.peek()
            if not ch:
                break
            if ch not in "+-":
                self.error("expected '+' or '-'")
            sign = -1 if ch == "-" else 1
            self.pos += 1
        return PuiseuxSeries(terms, trunc)

    def term(self):
        ch = self.peek()
        if ch == "O":
            self.pos += 1
            self.expect("(")
            if self.peek() == "1":
                self.pos += 1
                e = Fraction(0)
            else:
                e = self.mono()
            self.expect(")")
            return "O", e, None
        if ch == "z":
            return "t", self.mono(), QI(1)
        c = self.coeff()
        if self.peek() == "*":
            self.pos += 1
            if self.peek() == "i":
                self.pos += 1
                c = c * QI(0, 1)
                if self.peek() != "*":
                    return "t", Fraction(0), c
                self.pos += 1
            return "t", self.mono(), c
        if self.peek() == "z":
            return "t", self.mono(), c
        return "t", Fraction(0), c

    def coeff(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            depth, j = 0, self.pos
            while j < len(self.text):
                if self.text[j] == "(":
                    depth += 1
                elif self.text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if j >= len(self.text):
                self.error("unbalanced parenthesis")
            inner = self.text[self.pos + 1 : j]
            try:
                c = parse_coeff(inner)
            except ValueError:
                self.error("malformed coefficient")
            self.pos = j + 1
            return c
        if ch == "i":
            self.pos += 1
            return QI(0, 1)
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a coefficient or 'z'")
        self.pos = m.end()
        tok = m.group(0)
        if "." in tok or "e" in tok.lower():
            if "/" in tok:
                self.pos = start
                self.error("fractions of decimals are not allowed")
            return complex(float(tok))
        return QI(Fraction(tok))

    def mono(self) -> Fraction:
        self.expect("z")
        if self.peek() != "^":
            return Fraction(1)
        self.pos += 1
        if self.peek() == "(":
            self.pos += 1
            neg = False
            if self.peek() == "-":
                neg = True
                self.pos += 1
            m = _INT.match(self.text, self.pos)
            if not m:
                self.error("expected an integer exponent")
            self.pos = m.end()
            num = int(m.group(0))
            den = 1
            if self.peek() == "/":
                self.pos += 1
                m = _INT.match(self.text, self.pos)
                if not m:
                    self.error("expected a denominator")
                self.pos = m.end()
                den = int(m.group(0))
                if den == 0:
                    self.error("zero denominator")
            self.expect(")")
            return Fraction(-num if neg else num, den)
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.error("expected an exponent")
        self.pos = m.end()
        return Fraction(int(m.group(0)))


def parse_series(text: str) -> PuiseuxSeries:
    return PuiseuxSeries.parse(text)


Z = PuiseuxSeries.monomial(1, 1)
