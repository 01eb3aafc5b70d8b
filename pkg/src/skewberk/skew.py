"""Superattracting skew products and their action on Berkovich points.

For f(z, w) = (z^d, w^c + sum_j h_j(z) w^j) the induced map on series is

    f_rond(phi) = phi(z^(1/d))^c + sum_j h_j(z^(1/d)) phi(z^(1/d))^j

and on type-2 points the radius follows the Jacobian formula

    t' = (t + sum_i J_i * min(ord(phi - c_i), t)) / d

where c_i are the critical branches (roots of d f/dw) with orders J_i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .berk import CLOSED, OPEN, Ball, BerkPoint, beyond, dist_exponent
from .errors import HypothesisFailed, IndeterminateOrder, InsufficientPrecision
from .newton import newton_puiseux
from .series import INF, PuiseuxSeries, as_exponent, ext_add, fmt_exponent, horner

DEFAULT_BRANCH_PREC = Fraction(8)
DEFAULT_BUDGET = 32


@dataclass(frozen=True)
class Escapes:
    steps: int
    exit_exponent: object = None

    def __str__(self):
        return f"Escapes({self.steps})"


@dataclass(frozen=True)
class InK:
    preperiod: int
    period: int

    def __str__(self):
        return f"InK({self.preperiod},{self.period})"


@dataclass(frozen=True)
class Unresolved:
    budget: int

    def __str__(self):
        return f"Unresolved({self.budget})"


@dataclass(frozen=True)
class CriticalBranch:
    series: PuiseuxSeries
    J: int
    nu: int
    in_crit_plus: bool
    escape_status: object

    def to_json(self) -> dict:
        return {
            "series": str(self.series),
            "J": self.J,
            "nu": self.nu,
            "crit_plus": self.in_crit_plus,
            "escape": str(self.escape_status),
        }


@dataclass(frozen=True)
class Preimage:
    root: PuiseuxSeries
    r: int
    e: Fraction


@dataclass
class PreimageReport:
    over_l: list
    classes: list = field(default_factory=list)

    def laurent_total(self):
        return sum(p.r * p.e for p in self.classes)


# polynomial helpers over series (low degree first) --------------------------


def poly_add(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else None
        y = b[i] if i < len(b) else None
        out.append(x + y if x is not None and y is not None else (x if y is None else y))
    return out


def poly_mul(a: list, b: list) -> list:
    out = [PuiseuxSeries.zero() for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero() and x.trunc == INF:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def poly_pow(a: list, n: int) -> list:
    out = [PuiseuxSeries.one()]
    for _ in range(n):
        out = poly_mul(out, a)
    return out


class SkewMap:
    """The germ f(z, w) = (z^d, w^c + sum_{j<c} h_j(z) w^j)."""

    def __init__(self, d: int, c: int, h: dict | None = None, strict: bool = True, mode: str = "exact"):
        if c < 2 or d < 2:
            raise ValueError("need c >= 2 and d >= 2")
        if strict and not c < d:
            raise ValueError(f"small relative degree requires c < d (got c={c}, d={d})")
        if mode not in ("exact", "numeric"):
            raise ValueError(f"unknown mode {mode!r}")
        self.d, self.c, self.strict, self.mode = d, c, strict, mode
        hh: dict[int, PuiseuxSeries] = {}
        for j, s in (h or {}).items():
            j = int(j)
            s = PuiseuxSeries._wrap(s)
            if not 0 <= j < c:
                raise ValueError(f"h index {j} outside 0..{c - 1}")
            if s.ram != 1 or any(e < 1 for e in s.support()):
                raise ValueError(f"h_{j} must be a power series in z vanishing at 0")
            if not (s.is_zero() and s.trunc == INF):
                hh[j] = s
        self.h = hh
        self._branch_cache: dict = {}
        self._critical_cache: dict = {}

    # data ---------------------------------------------------------------
    @property
    def numeric(self) -> bool:
        return self.mode == "numeric"

    def coeffs(self) -> list:
        """[h_0, ..., h_{c-1}, 1] as series."""
        return [self.h.get(j, PuiseuxSeries.zero()) for j in range(self.c)] + [PuiseuxSeries.one()]

    def jac_coeffs(self) -> list:
        """Coefficients of d/dw (w^c + sum h_j w^j)."""
        cs = self.coeffs()
        return [cs[j] * j for j in range(1, self.c + 1)]

    def is_product(self) -> bool:
        return not self.h

    def __repr__(self):
        hs = ", ".join(f"h_{j}={s}" for j, s in sorted(self.h.items()))
        return f"SkewMap(d={self.d}, c={self.c}{', ' + hs if hs else ''})"

    # JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        out = {"d": self.d, "c": self.c, "h": {str(j): str(s) for j, s in sorted(self.h.items())}}
        if self.mode != "exact":
            out["mode"] = self.mode
        return out

    @classmethod
    def from_json(cls, obj, strict: bool = True) -> "SkewMap":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            int(obj["d"]),
            int(obj["c"]),
            {int(j): PuiseuxSeries.parse(s) for j, s in obj.get("h", {}).items()},
            strict=strict,
            mode=obj.get("mode", "exact"),
        )

    # the induced map ----------------------------------------------------
    def apply_rigid(self, phi: PuiseuxSeries) -> PuiseuxSeries:
        """f_rond(phi), with truncation propagated."""
        phi = PuiseuxSeries._wrap(phi)
        psi = phi.ramify(self.d)
        cs = [s.ramify(self.d) for s in self.coeffs()]
        return horner(cs, psi)

    def rho0(self):
        """Exponent t_rho = min_j ord(h_j)/(c - j); inf for the product map."""
        best = INF
        for j, s in self.h.items():
            best = min(best, Fraction(s.ord()) / (self.c - j))
        return best

    # critical branches --------------------------------------------------
    def critical_branches(self, precision=DEFAULT_BRANCH_PREC) -> list:
        """Roots (with orders J) of jac_w, each known modulo z^precision."""
        precision = as_exponent(precision)
        if precision not in self._branch_cache:
            self._branch_cache[precision] = newton_puiseux(self.jac_coeffs(), precision, numeric=self.numeric)
        return self._branch_cache[precision]

    def _branches_beyond(self, need) -> list:
        """Branches at a precision strictly above ``need`` (grid-rounded for caching)."""
        p = DEFAULT_BRANCH_PREC
        while p <= need:
            p *= 2
        return self.critical_branches(p)

    def jac_exponent(self, x: BerkPoint):
        """-log|jac(f)(x)| = (d - 1) + sum_i J_i min(ord(center - c_i), t)."""
        t = x.t
        total = Fraction(self.d - 1)
        if t == INF:
            for br in self.critical_branches():
                total = ext_add(total, dist_exponent(x.center, br.root) * br.multiplicity)
            return total
        for br in self._branches_beyond(t):
            dd = dist_exponent(x.center, br.root, t)
            total += min(dd, t) * br.multiplicity
        return total

    def apply_point(self, x: BerkPoint) -> BerkPoint:
        """f_rond on a point of the closed unit ball."""
        center = self.apply_rigid(x.center)
        if x.t == INF:
            return BerkPoint(center, INF, x.view)
        s = Fraction(0)
        for br in self._branches_beyond(x.t):
            s += min(dist_exponent(x.center, br.root, x.t), x.t) * br.multiplicity
        t_new = (x.t + s) / self.d
        return BerkPoint(center, t_new, x.view)

    def iterate_point(self, x: BerkPoint, n: int) -> BerkPoint:
        for _ in range(n):
            x = self.apply_point(x)
        return x

    def critical_data(self, precision=DEFAULT_BRANCH_PREC, budget: int = DEFAULT_BUDGET) -> list:
        key = (as_exponent(precision), budget)
        if key in self._critical_cache:
            return self._critical_cache[key]
        t_rho = self.rho0()
        out = []
        for br in self.critical_branches(precision):
            J = br.multiplicity
            nu = Fraction(self.d, 1 + J).denominator
            out.append(CriticalBranch(br.root, J, nu, nu >= 2, self._escape(br.root, t_rho, budget)))
        self._critical_cache[key] = out
        return out

    def _escape(self, phi: PuiseuxSeries, t_rho, budget: int):
        seen = {}
        x = phi
        for n in range(budget + 1):
            try:
                v = x.ord()
            except IndeterminateOrder:
                return Unresolved(budget)
            if v < t_rho:
                return Escapes(n, v)
            if x.trunc == INF:
                if x in seen:
                    return InK(seen[x], n - seen[x])
                seen[x] = n
            if n < budget:
                x = self.apply_rigid(x)
        return Unresolved(budget)

    # preimages ----------------------------------------------------------
    def preimages_rigid(self, psi: PuiseuxSeries, precision) -> PreimageReport:
        """Rigid preimages of psi with (r_i, e_i); Laurent classes in ``classes``."""
        psi = PuiseuxSeries._wrap(psi)
        m = psi.ram
        roots = self._solve_preimage(psi, precision)
        over_l = [Preimage(r.root, r.multiplicity, Fraction(self.d * r.root.ram, m)) for r in roots]
        classes: list[Preimage] = []
        try:
            conj_targets = psi.galois_conjugates(numeric=self.numeric)
        except Exception:
            conj_targets = None
        if conj_targets is not None:
            pool = []
            for target in conj_targets:
                pool.extend(self._solve_preimage(target, precision))
            for r in pool:
                if any(_same_class(r.root, p.root) for p in classes):
                    continue
                classes.append(Preimage(r.root, r.multiplicity, Fraction(self.d * r.root.ram, m)))
        return PreimageReport(over_l, classes)

    def _solve_preimage(self, psi: PuiseuxSeries, precision) -> list:
        cs = self.coeffs()
        cs[0] = cs[0] - psi.unramify(self.d)
        return newton_puiseux(cs, precision, numeric=self.numeric)

    def preimage_ball(self, B: Ball) -> list:
        """Connected components of f_rond^{-1}(B), each mapping onto B."""
        tB = B.t
        psi = B.direction
        target = self.d * tB
        prec = target + 1
        roots = self._solve_preimage(psi, prec)
        branches = self._branches_beyond(target)
        found: list[tuple] = []
        for r in roots:
            phi = r.root
            deltas = [(dist_exponent(phi, br.root, target), br.multiplicity) for br in branches]
            t = _solve_pl(deltas, target)
            found.append((phi, t, r.multiplicity))
        balls: list[Ball] = []
        for phi, t, mult in found:
            for b in balls:
                if b.t != t:
                    continue
                ref = b.meta["roots"][0]
                d = dist_exponent(phi, ref, t)
                if (B.kind == CLOSED and d >= t) or (B.kind == OPEN and d > t):
                    b.meta["roots"].append(phi)
                    b.degree += mult
                    break
            else:
                if B.kind == CLOSED:
                    nb = Ball.closed(phi.terms_below(t) if phi.trunc == INF else phi, t)
                else:
                    nb = Ball.open(phi, t)
                nb.degree = mult
                nb.level = B.level + 1
                nb.meta["roots"] = [phi]
                balls.append(nb)
        for nb in balls:
            nb.contains_critical = any(
                _ball_has_branch(nb, br.root) for br in branches
            )
        balls.sort(key=lambda b: b.direction.sort_key())
        return balls

    # derived maps -------------------------------------------------------
    def compose(self, p: int) -> "SkewMap":
        """f^p, again a skew product with degrees (d^p, c^p)."""
        if p < 1:
            raise ValueError("iterate must be positive")
        Q = self.coeffs()
        cur = list(Q)
        dz = self.d
        for _ in range(p - 1):
            # f o f^k: Q(z^(d^k), F_k(z, w))
            outer = [s.unramify(dz) for s in Q]
            acc = [outer[-1]]
            for a in reversed(outer[:-1]):
                acc = poly_add(poly_mul(acc, cur), [a])
            cur = acc
            dz *= self.d
        h = {j: s for j, s in enumerate(cur[:-1]) if not (s.is_zero() and s.trunc == INF)}
        return SkewMap(self.d**p, self.c**p, h, strict=self.strict, mode=self.mode)

    def base_change(self, k: int) -> "SkewMap":
        """Conjugate by z -> z^k: the map with h_j(z^k)."""
        return SkewMap(self.d, self.c, {j: s.unramify(k) for j, s in self.h.items()}, strict=self.strict, mode=self.mode)

    def require_strict(self):
        if not self.c < self.d:
            raise HypothesisFailed("this computation needs c < d")


def _same_class(a: PuiseuxSeries, b: PuiseuxSeries) -> bool:
    if a.ram != b.ram:
        return False
    if a == b:
        return True
    try:
        return a.is_conjugate(b)
    except Exception:
        return False


def _ball_has_branch(ball: Ball, root: PuiseuxSeries) -> bool:
    t = ball.t
    ref = ball.direction if ball.kind == OPEN else ball.boundary.center
    try:
        if ball.kind == OPEN:
            return beyond(root, ref, t)
        return dist_exponent(root, ref, t) >= t
    except IndeterminateOrder:
        raise InsufficientPrecision("critical branch precision too low for ball membership") from None


def _solve_pl(deltas: list, target) -> Fraction:
    """Solve t + sum J_i min(delta_i, t) = target for t >= 0 (monotone, piecewise linear)."""
    target = Fraction(target)
    bps = sorted({dl for dl, _ in deltas if dl != INF and dl < target})
    lo = Fraction(0)
    for b in bps + [INF]:
        # on [lo, b] the slope is 1 + sum of J with delta > lo
        slope = 1 + sum(J for dl, J in deltas if dl > lo)
        base = lo + sum(J * min(dl, lo) for dl, J in deltas)
        t = lo + (target - base) / slope
        if b == INF or t <= b:
            return t
        lo = b
    raise AssertionError("unreachable")


def parse_map(text: str, strict: bool = True) -> SkewMap:
    return SkewMap.from_json(json.loads(text), strict=strict)


__all__ = [
    "SkewMap",
    "CriticalBranch",
    "Escapes",
    "InK",
    "Unresolved",
    "Preimage",
    "PreimageReport",
    "parse_map",
    "fmt_exponent",
]
