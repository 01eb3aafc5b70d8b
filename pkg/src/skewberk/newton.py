"""Newton-Puiseux root finding for polynomials in w over Puiseux series.

The classical scheme: read the root valuations off the lower convex hull of
the points (j, ord a_j), solve the characteristic polynomial of each edge
for the leading coefficient, shift, and recurse on the points 0..mu where mu
is the multiplicity of that characteristic root.  A simple characteristic
root is finished by Newton iteration, which converges quadratically in the
z-adic sense.

Coefficients that are known only as ``O(z^T)`` enter the hull with the
lower bound T.  An edge through such a point is only trusted when it does
not matter at the requested precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coeffs import QI, exact_sqrt, is_numeric, sort_key, to_fraction
from .errors import InsufficientPrecision, SplittingFieldRequired
from .series import INF, PuiseuxSeries, as_exponent, horner

# a root of multiplicity m is only resolved to about eps**(1/m); this covers m <= 4
CLUSTER_TOL = 1e-3


@dataclass(frozen=True)
class Root:
    """A root modulo z^root.trunc, with its multiplicity."""

    root: PuiseuxSeries
    multiplicity: int

    def __iter__(self):
        return iter((self.root, self.multiplicity))


# characteristic polynomials ----------------------------------------------


def _qi_key(c: QI):
    return (str(c.re), str(c.im))


@lru_cache(maxsize=4096)
def _gaussian_roots_cached(key: tuple) -> tuple:
    import sympy

    X = sympy.Symbol("X")
    coeffs = [sympy.Rational(re) + sympy.I * sympy.Rational(im) for re, im in key]
    poly = sympy.Poly(list(reversed(coeffs)), X, domain="QQ_I")
    _, factors = poly.factor_list()
    out = []
    for f, mult in factors:
        if f.degree() != 1:
            raise SplittingFieldRequired(
                f"characteristic factor {f.as_expr()} does not split over Q(i)"
            )
        a, b = f.all_coeffs()
        r = sympy.nsimplify(-b / a)
        re_, im_ = sympy.re(r), sympy.im(r)
        out.append((QI(to_fraction_sym(re_), to_fraction_sym(im_)), mult))
    return tuple(out)


def to_fraction_sym(x) -> Fraction:
    import sympy

    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def exact_roots(coeffs: list) -> list:
    """Roots with multiplicity of sum coeffs[k] X^k over Q(i) (nonzero roots only expected)."""
    deg = len(coeffs) - 1
    if deg == 1:
        return [(-coeffs[0] / coeffs[1], 1)]
    if deg == 2:
        a, b, c = coeffs[2], coeffs[1], coeffs[0]
        disc = b * b - a * c * 4
        if not disc:
            return [(-b / (a * 2), 2)]
        s = exact_sqrt(disc)
        if s is not None:
            return [((-b + s) / (a * 2), 1), ((-b - s) / (a * 2), 1)]
        raise SplittingFieldRequired("characteristic quadratic does not split over Q(i)")
    # pure binomial a X^n + b with a unit-ratio root is common; let sympy decide
    return list(_gaussian_roots_cached(tuple(_qi_key(c) for c in coeffs)))


def numeric_roots(coeffs: list) -> list:
    vals = [complex(c) for c in coeffs]
    raw = np.roots(list(reversed(vals)))
    clusters: list[list[complex]] = []
    for r in raw:
        r = complex(r)
        for cl in clusters:
            if abs(cl[0] - r) <= CLUSTER_TOL * max(1.0, abs(r)):
                cl.append(r)
                break
        else:
            clusters.append([r])
    return [(sum(cl) / len(cl), len(cl)) for cl in clusters]


def char_roots(coeffs: list, numeric: bool) -> list:
    if numeric:
        out = numeric_roots(coeffs)
    else:
        out = exact_roots(coeffs)
    return sorted(out, key=lambda rm: sort_key(rm[0]))


# polynomial helpers -------------------------------------------------------


def _shift(P: list, s: PuiseuxSeries, cap=INF) -> list:
    n = len(P) - 1
    a = [p.truncate(cap) for p in P]
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            a[j] = (a[j] + a[j + 1] * s).truncate(cap)
    return a


def derivative(P: list) -> list:
    return [P[j] * j for j in range(1, len(P))]


# hull ---------------------------------------------------------------------


def _lower_hull(points: list) -> list:
    """points: (j, v) with v finite, sorted by j.  Returns hull vertices."""
    hull: list = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the chord hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


# solver -------------------------------------------------------------------


class _Solver:
    def __init__(self, prec, numeric: bool):
        self.prec = prec
        self.cap = INF
        self.numeric = numeric
        self.out: list[Root] = []

    def emit(self, root: PuiseuxSeries, mult: int):
        self.out.append(Root(root, mult))

    def solve(self, P: list, base: PuiseuxSeries, count: int, lo):
        """Find the ``count`` roots of P of valuation > lo, add ``base`` to each."""
        prec = self.prec
        # exact zero constant terms give the exact root ``base``
        k = 0
        while k < count and P[k].is_zero() and P[k].trunc == INF:
            k += 1
        if k:
            self.emit(base, k)
            P = P[k:]
            count -= k
        if count == 0:
            return
        points = []
        uncertain = set()
        for j in range(count + 1):
            p = P[j]
            if p.is_zero():
                if p.trunc == INF:
                    continue
                uncertain.add(j)
            points.append((j, p.ord_lower_bound()))
        if count in uncertain:
            raise InsufficientPrecision("leading coefficient of the local polynomial is unknown")
        hull = _lower_hull(points)
        edges = []
        for (j0, v0), (j1, v1) in zip(hull, hull[1:]):
            gamma = Fraction(v0 - v1) / (j1 - j0)
            edges.append((gamma, j0, j1))
        edges.sort(key=lambda e: e[0])
        cluster = 0
        for gamma, j0, j1 in edges:
            if gamma >= prec:
                cluster += j1 - j0
                continue
            level = dict(points)[j0] + gamma * j0
            on_line = [(j, v) for j, v in points if j0 <= j <= j1 and v + gamma * j == level]
            if any(j in uncertain for j, _ in on_line):
                raise InsufficientPrecision(
                    f"coefficient truncation hides the edge of slope {gamma} below precision {prec}"
                )
            # characteristic polynomial in X = coefficient of z^gamma
            cpoly = [QI(0)] * (j1 - j0 + 1)
            for j, v in on_line:
                cpoly[j - j0] = P[j].coeff(v)
            numeric = self.numeric or any(is_numeric(c) for c in cpoly)
            for c, mu in char_roots(cpoly, numeric):
                term = PuiseuxSeries.monomial(c, gamma)
                new_base = base + term
                Q = _shift(P, term, cap=self.cap)
                if mu == 1:
                    self.newton(Q, new_base, gamma)
                else:
                    self.solve(Q, new_base, mu, gamma)
        if cluster:
            self.emit(base.with_trunc(prec) if base.trunc == INF else base.truncate(prec), cluster)

    def newton(self, Q: list, base: PuiseuxSeries, lo):
        """Simple root of Q with valuation > lo."""
        prec = self.prec
        if Q[0].is_zero() and Q[0].trunc == INF:
            self.emit(base, 1)
            return
        dQ = derivative(Q)
        v1 = Q[1].ord()
        work = prec + v1
        Qc = [q.truncate(work) for q in Q]
        dQc = [q.truncate(work) for q in dQ]
        r = PuiseuxSeries.zero()
        last = None
        for _ in range(200):
            val = horner(Qc, r)
            if self.numeric and last is not None and val.ord_lower_bound() <= last and _float_noise(val, r, len(Q) - 1):
                # rounding floor reached: the absolute tolerance cannot see relative cancellation
                break
            last = val.ord_lower_bound()
            if val.ord_lower_bound() >= work:
                if val.trunc < work:
                    raise InsufficientPrecision("coefficients too coarse for the requested root precision")
                break
            if val.is_zero():
                raise InsufficientPrecision("coefficients too coarse for the requested root precision")
            d = horner(dQc, r)
            delta = val.div(d, prec=prec)
            r = (r - delta).truncate(prec)
        else:
            raise InsufficientPrecision("Newton lifting did not converge")
        cand = r.terms_below(prec)
        if all(q.trunc == INF for q in Q) and len(cand) < 64:
            if horner(Q, cand).is_zero():
                self.emit(base + cand, 1)
                return
        self.emit((base + cand).with_trunc(prec), 1)


def _float_noise(val: PuiseuxSeries, r: PuiseuxSeries, deg: int, rel: float = 1e-8) -> bool:
    scale = max([1.0] + [abs(complex(c)) for _, c in r.items()]) ** max(deg, 1)
    return all(abs(complex(c)) <= rel * scale for _, c in val.items())


def newton_puiseux(P, precision, numeric: bool = False, cap=None) -> list:
    """Roots of sum P[j] w^j (low degree first), each correct modulo z^precision.

    Returns a list of :class:`Root` in canonical order: increasing valuation of
    each successive term, characteristic roots by (re, im).  Exact roots (the
    polynomial vanishes identically at a finite series) carry trunc = inf.
    """
    prec = as_exponent(precision)
    if prec == INF:
        raise ValueError("precision must be finite")
    P = [PuiseuxSeries._wrap(p) for p in P]
    while len(P) > 1 and P[-1].is_zero() and P[-1].trunc == INF:
        P.pop()
    n = len(P) - 1
    if n < 1:
        raise ValueError("polynomial must have positive degree in w")
    if P[-1].is_zero():
        raise InsufficientPrecision("leading coefficient is unknown")
    numeric = numeric or any(p.numeric for p in P)
    solver = _Solver(prec, numeric)
    solver.cap = INF if cap is None else as_exponent(cap)
    solver.solve(P, PuiseuxSeries.zero(), n, -INF)
    return solver.out


def residual(P, root: PuiseuxSeries) -> PuiseuxSeries:
    return horner([PuiseuxSeries._wrap(p) for p in P], root)
