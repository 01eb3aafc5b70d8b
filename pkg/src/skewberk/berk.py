"""Points of the Berkovich closed unit ball over the Puiseux field.

A point is written ``zeta(phi, e^{-t})``: the closed disc of radius e^{-t}
around the series ``phi``.  Only exact rational ``t`` occur (types 1 and 2);
``t = inf`` is a rigid point.  The center is canonicalized by dropping all
terms of exponent >= t, so two points are equal exactly when their
canonical data agree.

The numerical invariants follow the approximating sequence of the center:
along [x, Gauss] the multiplicity is the running lcm of exponent
denominators, and the capacity alpha grows with slope 1/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .coeffs import sort_key
from .errors import (
    IndeterminateOrder,
    NotType2,
    RootsOfUnityUnavailable,
    SeriesParseError,
    SplittingFieldRequired,
)
from .series import INF, PuiseuxSeries, as_exponent, ext_add, fmt_exponent

OVER_L = "OverL"
OVER_LAURENT = "OverLaurent"


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def dist_exponent(a: PuiseuxSeries, b: PuiseuxSeries, need=INF):
    """ord(a - b), or a lower bound >= ``need`` when the difference is only known to vanish."""
    diff = a - b
    if not diff.is_zero():
        return diff.ord()
    if diff.trunc == INF:
        return INF
    if need != INF and diff.trunc >= need:
        return diff.trunc
    raise IndeterminateOrder(
        f"centers agree to z^{fmt_exponent(diff.trunc)}; cannot decide at level {fmt_exponent(need)}"
    )


def beyond(a: PuiseuxSeries, b: PuiseuxSeries, t) -> bool:
    """ord(a - b) > t, decided from the known terms."""
    diff = a - b
    if not diff.is_zero():
        return diff.ord() > t
    if diff.trunc == INF or diff.trunc > t:
        return True
    raise IndeterminateOrder(f"cannot decide agreement beyond z^{fmt_exponent(t)}")


class Order(Enum):
    LESS = "Less"
    GREATER = "Greater"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class SegmentProfile:
    """Breakpoints t_0 = 0 < t_1 < ... and multiplicities m_n on (t_n, t_{n+1}]."""

    breakpoints: tuple
    multiplicities: tuple
    end: object

    def multiplicity_at(self, s) -> int:
        m = self.multiplicities[0]
        for b, mm in zip(self.breakpoints, self.multiplicities):
            if s > b:
                m = mm
        return m


class BerkPoint:
    """The point zeta(center, e^{-t}) of the closed unit ball."""

    __slots__ = ("center", "t", "view", "_hash")

    def __init__(self, center, t=INF, view: str = OVER_L):
        if isinstance(center, str):
            center = PuiseuxSeries.parse(center)
        elif not isinstance(center, PuiseuxSeries):
            center = PuiseuxSeries._wrap(center)
        t = as_exponent(t)
        if t != INF and t < 0:
            raise ValueError("radius exponent must be >= 0 inside the unit ball")
        if t != INF:
            if center.trunc < t:
                from .errors import InsufficientPrecision

                raise InsufficientPrecision(
                    f"center known to z^{fmt_exponent(center.trunc)} cannot pin a point at t = {fmt_exponent(t)}"
                )
            center = center.terms_below(t)
        if view not in (OVER_L, OVER_LAURENT):
            raise ValueError(f"unknown view {view!r}")
        self.center = center
        self.t = t
        self.view = view
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def gauss(cls, view: str = OVER_L) -> "BerkPoint":
        return cls(PuiseuxSeries.zero(), Fraction(0), view)

    @classmethod
    def rigid(cls, center, view: str = OVER_L) -> "BerkPoint":
        return cls(center, INF, view)

    @classmethod
    def parse(cls, text: str, view: str = OVER_L) -> "BerkPoint":
        s = text.strip()
        if not (s.startswith("zeta(") and s.endswith(")")):
            raise SeriesParseError("expected zeta(<series>, <t>)", text, 0)
        inner = s[5:-1]
        cut = inner.rfind(",")
        if cut < 0:
            raise SeriesParseError("missing radius exponent", text, len(text) - 1)
        t_text = inner[cut + 1 :].strip()
        try:
            t = as_exponent(t_text)
        except (ValueError, ZeroDivisionError):
            raise SeriesParseError("bad radius exponent", text, 5 + cut + 1) from None
        return cls(PuiseuxSeries.parse(inner[:cut]), t, view)

    @classmethod
    def from_json(cls, obj: dict, view: str = OVER_L) -> "BerkPoint":
        return cls(PuiseuxSeries.parse(obj["center"]), as_exponent(obj["t"]), view)

    # basic data ---------------------------------------------------------
    @property
    def is_rigid(self) -> bool:
        return self.t == INF

    @property
    def certified_rigid(self) -> bool:
        """A rigid point whose center is an exact finite series."""
        return self.t == INF and self.center.trunc == INF

    def norm_exponent(self):
        """-log|x| = min(ord center, t)."""
        c = self.center
        if c.is_zero():
            if c.trunc == INF:
                return self.t
            if c.trunc >= self.t:
                return self.t
            raise IndeterminateOrder("center vanishes to its known precision")
        return min(c.ord(), self.t)

    def A(self):
        return ext_add(self.t, 1)

    def with_view(self, view: str) -> "BerkPoint":
        return BerkPoint(self.center, self.t, view)

    def with_t(self, t) -> "BerkPoint":
        return BerkPoint(self.center, t, self.view)

    # invariants ---------------------------------------------------------
    def approx_sequence(self) -> SegmentProfile:
        bps, ms = [Fraction(0)], [1]
        m = 1
        for e, _ in self.center.items():
            if self.t != INF and e >= self.t:
                break
            m2 = _lcm(m, e.denominator)
            if m2 != m:
                bps.append(e)
                ms.append(m2)
                m = m2
        return SegmentProfile(tuple(bps), tuple(ms), self.t)

    def alpha(self):
        if self.t == INF:
            return INF
        prof = self.approx_sequence()
        total = Fraction(0)
        bps = list(prof.breakpoints) + [self.t]
        for n, m in enumerate(prof.multiplicities):
            lo, hi = bps[n], min(self.t, bps[n + 1])
            if hi > lo:
                total += (hi - lo) / m
        return total

    def multiplicity(self) -> int:
        m = 1
        for e, _ in self.center.items():
            if self.t != INF and e >= self.t:
                break
            m = _lcm(m, e.denominator)
        return m

    def generic_multiplicity(self) -> int:
        if self.t == INF:
            raise NotType2("generic multiplicity is defined at type-2 points")
        return _lcm(self.multiplicity(), Fraction(self.A()).denominator)

    # order structure ----------------------------------------------------
    def _leq_overl(self, other: "BerkPoint") -> bool:
        if self.t < other.t:
            return False
        if other.t == 0:
            return True
        return dist_exponent(self.center, other.center, other.t) >= other.t

    def _conjugates(self) -> list:
        try:
            return [BerkPoint(c, self.t, OVER_L) for c in self.center.galois_conjugates()]
        except RootsOfUnityUnavailable:
            raise

    def leq(self, other: "BerkPoint") -> bool:
        """self <= other in the tree order (self lies in the disc of other)."""
        if self.view == OVER_LAURENT or other.view == OVER_LAURENT:
            o = other.with_view(OVER_L)
            return any(c._leq_overl(o) for c in self.with_view(OVER_L)._conjugates())
        return self._leq_overl(other)

    def compare(self, other: "BerkPoint") -> Order:
        a, b = self.leq(other), other.leq(self)
        if a and b:
            return Order.EQUAL
        if a:
            return Order.LESS
        if b:
            return Order.GREATER
        return Order.INCOMPARABLE

    def wedge(self, other: "BerkPoint") -> "BerkPoint":
        need = min(self.t, other.t)
        s = min(need, dist_exponent(self.center, other.center, need))
        return BerkPoint(self.center, s, self.view)

    # evaluation ---------------------------------------------------------
    def log_abs_poly(self, P: list, precision=None):
        """(-log|P(x)|, certified) for P = sum P[j] w^j.

        Factors P over the Puiseux field and applies the product rule
        |P(x)| = |a_n| prod max(|center - r_i|, e^{-t}).  When the roots are
        not available exactly, falls back to the monomial bound
        min_j (ord a_j + j*norm(x)) and reports certified = False.
        """
        from .newton import newton_puiseux

        P = [PuiseuxSeries._wrap(p) for p in P]
        while len(P) > 1 and P[-1].is_zero() and P[-1].trunc == INF:
            P.pop()
        lead = P[-1].ord()
        if len(P) == 1:
            return lead, True
        if precision is None:
            if self.t == INF:
                raise ValueError("rigid points need an explicit root precision")
            precision = self.t + 1
        try:
            roots = newton_puiseux(P, precision)
        except SplittingFieldRequired:
            r = self.norm_exponent()
            return min(ext_add(p.ord_lower_bound(), j * r) for j, p in enumerate(P)), False
        total = lead
        for root in roots:
            d = dist_exponent(self.center, root.root, min(self.t, precision))
            total = ext_add(total, min(d, self.t) * root.multiplicity)
        return total, True

    # identity and text --------------------------------------------------
    def _canonical_conjugate(self) -> PuiseuxSeries:
        try:
            conj = self.center.galois_conjugates()
        except RootsOfUnityUnavailable:
            return None
        return min(conj, key=lambda s: s.sort_key())

    def __eq__(self, other):
        if not isinstance(other, BerkPoint):
            return NotImplemented
        if self.t != other.t:
            return False
        if self.view == OVER_LAURENT or other.view == OVER_LAURENT:
            if self.center == other.center:
                return True
            return self.center.is_conjugate(other.center)
        return self.center == other.center

    def __hash__(self):
        if self._hash is None:
            if self.view == OVER_LAURENT:
                canon = self._canonical_conjugate()
                key = (self.t, canon) if canon is not None else (self.t, len(self.center))
            else:
                key = (self.t, self.center)
            self._hash = hash(key)
        return self._hash

    def to_json(self) -> dict:
        return {"center": str(self.center), "t": fmt_exponent(self.t)}

    def __str__(self):
        return f"zeta({self.center}, {fmt_exponent(self.t)})"

    def __repr__(self):
        return f"BerkPoint({str(self)!r})"


# balls ----------------------------------------------------------------------

OPEN = "open"
CLOSED = "closed"


@dataclass
class Ball:
    """A closed disc (the point ``boundary`` and everything below it) or an open
    disc (the tangent direction at ``boundary`` pointing to ``direction``).

    For an open ball, ``direction`` is a series whose terms run up to and
    including exponent t, so it determines a branch at the boundary point.
    The open ball with boundary at the Gauss point and direction 0 is the
    open unit ball.
    """

    boundary: BerkPoint
    direction: PuiseuxSeries
    kind: str = OPEN
    level: int = 0
    contains_critical: bool = False
    image_index: int | None = None
    container_index: int | None = None
    degree: int = 1
    meta: dict = field(default_factory=dict)

    @classmethod
    def open(cls, direction, t, **kw) -> "Ball":
        if isinstance(direction, str):
            direction = PuiseuxSeries.parse(direction)
        t = as_exponent(t)
        direction = direction.terms_below(t, inclusive=True)
        return cls(BerkPoint(direction, t), direction, OPEN, **kw)

    @classmethod
    def closed(cls, center, t, **kw) -> "Ball":
        if isinstance(center, str):
            center = PuiseuxSeries.parse(center)
        p = BerkPoint(center, t)
        return cls(p, p.center, CLOSED, **kw)

    @property
    def t(self):
        return self.boundary.t

    def contains_point(self, x: BerkPoint) -> bool:
        """Whether the point x lies in this ball."""
        t = self.t
        if self.kind == CLOSED:
            return x.leq(self.boundary)
        return x.t > t and beyond(x.center, self.direction, t)

    def contains_ball(self, other: "Ball") -> bool:
        t, s = self.t, other.t
        if self.kind == CLOSED:
            return other.boundary.leq(self.boundary)
        if s < t or (s == t and other.kind == CLOSED):
            return False
        probe = other.direction if s == t else other.boundary.center
        return beyond(probe, self.direction, t)

    def disjoint_from(self, other: "Ball") -> bool:
        # discs in a tree are either nested or disjoint
        return not (self.contains_ball(other) or other.contains_ball(self))

    def to_json(self) -> dict:
        out = {
            "boundary": self.boundary.to_json(),
            "direction": str(self.direction),
            "kind": self.kind,
            "level": self.level,
            "critical": self.contains_critical,
        }
        return out

    def key(self):
        return (self.kind, self.t, self.direction if self.kind == OPEN else self.boundary.center)

    def __str__(self):
        if self.kind == CLOSED:
            return f"closed{self.boundary}"
        return f"open({self.boundary} -> {self.direction})"


def direction_sort_key(b: Ball):
    return (b.t, b.direction.sort_key())


__all__ = [
    "BerkPoint",
    "Ball",
    "Order",
    "SegmentProfile",
    "OVER_L",
    "OVER_LAURENT",
    "OPEN",
    "CLOSED",
    "dist_exponent",
    "sort_key",
]
