"""Nested ball covers of the invariant Cantor set K.

Level 0 is an open ball B_0 around 0 with f_rond(B_0) strictly larger than
B_0.  Level n+1 consists of the components of f_rond^{-1}(ball) over the
level-n balls; each new ball records the level-n ball it maps onto
(``image_index``) and the level-n ball that contains it
(``container_index``).  These two indices coincide only by accident, so
both are kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .berk import OPEN, Ball, BerkPoint
from .errors import (
    BudgetExceeded,
    CriticalInK,
    IndeterminateOrder,
    InvalidRoot,
    NoCover,
    SkewBerkError,
)
from .series import INF, PuiseuxSeries, as_exponent, fmt_exponent
from .skew import DEFAULT_BUDGET, InK, SkewMap, Unresolved


# classification results ----------------------------------------------------


@dataclass(frozen=True)
class EscapesAt:
    steps: int
    exit_exponent: Fraction

    def to_json(self) -> dict:
        return {"status": "Escapes", "steps": self.steps, "exit_exponent": fmt_exponent(self.exit_exponent)}


@dataclass(frozen=True)
class InCoverAtDepth:
    depth: int
    itinerary: tuple = ()
    reason: str = "budget"

    def to_json(self) -> dict:
        return {"status": "InCoverAtDepth", "depth": self.depth, "itinerary": list(self.itinerary), "reason": self.reason}


@dataclass(frozen=True)
class CertifiedInK:
    preperiod: int
    period: int
    itinerary: tuple = ()

    def to_json(self) -> dict:
        return {"status": "CertifiedInK", "preperiod": self.preperiod, "period": self.period, "itinerary": list(self.itinerary)}


# the cover -----------------------------------------------------------------


def root_ball(f: SkewMap, t0=None) -> Ball:
    """The level-0 open ball with boundary zeta(0, e^{-t0})."""
    if f.is_product():
        raise NoCover("product map: K is the single rigid point 0")
    t_rho = f.rho0()
    user = t0 is not None
    t0 = t_rho / 2 if t0 is None else as_exponent(t0)
    if not 0 < t0 < t_rho:
        raise InvalidRoot(f"t0 = {fmt_exponent(t0)} must lie in (0, {fmt_exponent(t_rho)}) to contain K")
    B0 = Ball.open(PuiseuxSeries.zero(), t0, level=0)
    image = image_ball(f, B0)
    if not (image.contains_ball(B0) and not B0.contains_ball(image)):
        raise InvalidRoot(
            f"f(B0) does not strictly contain B0 for t0 = {fmt_exponent(t0)}"
            + ("" if user else " (default choice)")
        )
    B0.contains_critical = any(_contains_branch(B0, br.root) for br in f.critical_branches())
    return B0


def image_ball(f: SkewMap, B: Ball) -> Ball:
    """f_rond(B) for a ball whose tangent direction is not critical-sensitive."""
    y = f.apply_point(B.boundary)
    if B.kind == OPEN:
        d = f.apply_rigid(B.direction)
        return Ball.open(d.terms_below(y.t, inclusive=True) if d.trunc > y.t else d, y.t)
    return Ball(y, y.center, B.kind)


def _contains_branch(B: Ball, root: PuiseuxSeries) -> bool:
    return B.contains_point(BerkPoint.rigid(root))


@dataclass
class BallCover:
    f: SkewMap
    levels: list = field(default_factory=list)

    @classmethod
    def build(cls, f: SkewMap, depth: int, t0=None) -> "BallCover":
        cover = cls(f, [[root_ball(f, t0)]])
        for _ in range(depth):
            cover.refine()
        return cover

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> list:
        while self.depth < n:
            self.refine()
        return self.levels[n]

    def refine(self) -> list:
        """Append level n+1 built by preimage_ball of every level-n ball."""
        n = self.depth
        prev = self.levels[n]
        new: list[Ball] = []
        for i, B in enumerate(prev):
            for nb in self.f.preimage_ball(B):
                nb.level = n + 1
                nb.image_index = i
                new.append(nb)
        for nb in new:
            if n == 0:
                holders = [0] if prev[0].contains_ball(nb) else []
            else:
                holders = [j for j, P in enumerate(prev) if P.contains_ball(nb)]
            if len(holders) != 1:
                raise SkewBerkError(f"level-{n + 1} ball {nb} has {len(holders)} containers at level {n}")
            nb.container_index = holders[0]
        new.sort(key=lambda b: (b.container_index, b.image_index, b.direction.sort_key()))
        for a in range(len(new)):
            for b in range(a + 1, len(new)):
                if not new[a].disjoint_from(new[b]):
                    raise SkewBerkError(f"level-{n + 1} balls overlap: {new[a]} and {new[b]}")
        self.levels.append(new)
        return new

    def locate(self, x: BerkPoint, level: int) -> int | None:
        """Index of the level ball containing x, or None."""
        for i, B in enumerate(self.level(level)):
            try:
                if B.contains_point(x):
                    return i
            except IndeterminateOrder:
                return None
        return None

    def to_json(self) -> dict:
        out = []
        for lv in self.levels:
            rows = []
            for b in lv:
                row = b.to_json()
                row["parent"] = b.container_index
                row["image"] = b.image_index
                row["degree"] = b.degree
                rows.append(row)
            out.append(rows)
        return {"map": self.f.to_json(), "levels": out}


# classification -------------------------------------------------------------


def classify_point(f: SkewMap, x: BerkPoint, budget: int = DEFAULT_BUDGET, cover: BallCover | None = None, level: int | None = None):
    """Escapes / CertifiedInK / InCoverAtDepth for a point of the open unit ball.

    A rigid point whose center is truncated stands for the closed ball of
    all series sharing its known terms; it is iterated as that ball and the
    answer holds for every point of it.
    """
    t_rho = f.rho0()
    if x.t == INF and x.center.trunc != INF:
        x = BerkPoint(x.center, x.center.trunc, x.view)
        as_ball = True
    else:
        as_ball = False
    seen: dict = {}
    itinerary: list = []
    for n in range(budget + 1):
        c = x.center
        if not c.is_zero():
            v = c.ord()
            if v < t_rho and (not as_ball or v < x.t):
                return EscapesAt(n, v)
        if x.t < t_rho and (c.is_zero() or c.ord() >= x.t):
            if as_ball:
                return InCoverAtDepth(n, tuple(itinerary), "precision")
            return EscapesAt(n, x.t)
        if cover is not None and level is not None:
            itinerary.append(cover.locate(x, level))
        if not as_ball:
            if x in seen:
                k = seen[x]
                return CertifiedInK(k, n - k, tuple(itinerary))
            seen[x] = n
        if n < budget:
            x = f.apply_point(x)
    return InCoverAtDepth(budget, tuple(itinerary), "budget")


def choose_markov_level(f: SkewMap, cover: BallCover | None = None, max_level: int = 8) -> int:
    """Least N with every level-(N-1) ball free of critical branches."""
    if f.is_product():
        raise NoCover("product map: no Markov coding")
    for br in f.critical_data():
        if isinstance(br.escape_status, InK):
            raise CriticalInK(f"critical branch {br.series} lies in K ({br.escape_status})")
        if isinstance(br.escape_status, Unresolved):
            raise BudgetExceeded(f"escape of critical branch {br.series} unresolved")
    cover = cover or BallCover.build(f, 0)
    for N in range(1, max_level + 1):
        if not any(b.contains_critical for b in cover.level(N - 1)):
            return N
    raise BudgetExceeded(f"no critical-free level below {max_level}")
