"""Multiplicity bounds on K and the unbounded-multiplicity witness.

The bound collects generic multiplicities b(y) and b(f_rond y) over the
boundary points y of two consecutive cover levels.  When a critical branch
with nu = 1 meets the cover the coarse factor L^N is applied, with
L = lcm_j q(d/(1+j)).

The witness follows a fixed critical branch c0 with nu >= 2.  The balls of
the cover containing c0 have boundaries chat_n = zeta(c0, e^{-t_n}) with

    t_n + sum_i J_i min(ord(c0 - c_i), t_n) = d * t_{n-1},

and once t_n passes every other branch the slope is constant, so

    A_{n+1} - A_n = d/(J+1) * (A_n - A_{n-1}),

and the denominators of A_n pick up a factor nu at each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .berk import BerkPoint, dist_exponent
from .cover import BallCover, choose_markov_level, root_ball
from .errors import CriticalInK, HypothesisFailed
from .series import INF, PuiseuxSeries, fmt_exponent
from .skew import InK, SkewMap, Unresolved, _solve_pl

UNBOUNDED = "Unbounded"
UNRESOLVED = "Unresolved"


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass
class MultiplicityReport:
    bound: object
    evidence: list = field(default_factory=list)
    upper_bound_only: bool = True
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "bound": self.bound if isinstance(self.bound, (int, str)) else str(self.bound),
            "upper_bound_only": self.upper_bound_only,
            "evidence": self.evidence,
            "notes": self.notes,
        }


def bound_multiplicity(f: SkewMap, cover: BallCover | None = None, N: int | None = None) -> MultiplicityReport:
    if f.is_product():
        return MultiplicityReport(1, [], False, ["product map: K is the rigid point 0"])
    crit = f.critical_data()
    for br in crit:
        if br.in_crit_plus and not _escapes(br.escape_status):
            raise HypothesisFailed(f"Crit+ branch {br.series} does not escape ({br.escape_status})")
    cover = cover or BallCover.build(f, 0)
    correction = False
    notes = []
    if N is None:
        try:
            N = choose_markov_level(f, cover)
        except CriticalInK:
            N = 1
            correction = True
            notes.append("a nu = 1 critical branch lies in K; L^N factor applied")
    meets = [
        br for br in crit
        if not br.in_crit_plus
        and any(b.contains_point(BerkPoint.rigid(br.series)) for lv in (N - 1, N) for b in cover.level(lv))
    ]
    if meets:
        correction = True
    Q = 1
    evidence = []
    for lv in sorted({max(N - 1, 0), N}):
        seen = set()
        for b in cover.level(lv):
            y = b.boundary
            if y in seen:
                continue
            seen.add(y)
            fy = f.apply_point(y)
            by, bfy = y.generic_multiplicity(), fy.generic_multiplicity()
            Q = _lcm(Q, _lcm(by, bfy))
            evidence.append({"level": lv, "point": str(y), "m": y.multiplicity(), "b": by, "b_image": bfy})
    bound = Q
    if correction:
        L = 1
        for j in range(f.c):
            L = _lcm(L, Fraction(f.d, 1 + j).denominator)
        bound = Q * L**N
        notes.append(f"L = {L}, N = {N}")
    return MultiplicityReport(bound, evidence, True, notes)


def _escapes(status) -> bool:
    return not isinstance(status, (InK, Unresolved))


def unbounded_witness(f: SkewMap, branch: int | PuiseuxSeries = 0, n_max: int = 12, t0=None) -> MultiplicityReport:
    """Exact A-sequence along the cover balls around a periodic Crit+ branch."""
    if f.is_product():
        raise HypothesisFailed("K is a singleton for the product map")
    crit = f.critical_data()
    br = _pick(crit, branch)
    if br.nu < 2:
        raise HypothesisFailed(f"nu({br.series}) = 1: the branch is not in Crit+")
    st = br.escape_status
    if not isinstance(st, InK):
        raise HypothesisFailed(f"branch {br.series} is not periodic in K ({st})")
    if st.preperiod:
        raise HypothesisFailed("strictly preperiodic critical branches are not supported")
    g, c0 = f, br.series
    if st.period > 1:
        g = f.compose(st.period)
    branches = g.critical_branches()
    deltas = [(dist_exponent(c0, b.root, INF) if b.root.trunc == INF else dist_exponent(c0, b.root, b.root.trunc), b.multiplicity) for b in branches]
    J = sum(m for dl, m in deltas if dl == INF)
    nu = Fraction(g.d, 1 + J).denominator
    finite = [dl for dl, _ in deltas if dl != INF]
    tmax = max(finite, default=Fraction(0))
    B0 = root_ball(g, t0)
    ts = [B0.t]
    trace = []
    regime_start = None
    for n in range(n_max + 1):
        if n > 0:
            ts.append(_solve_pl(deltas, g.d * ts[-1]))
        t = ts[-1]
        y = BerkPoint(c0, t)
        A = 1 + t
        trace.append({"n": n, "t": fmt_exponent(t), "A": fmt_exponent(A), "q": A.denominator, "b": y.generic_multiplicity()})
        if regime_start is None and n >= 1 and ts[-2] >= tmax:
            regime_start = n
    # cross-check against the recurrence inside the constant-slope regime
    notes = [f"J = {J}, nu = {nu}, d/(J+1) = {fmt_exponent(Fraction(g.d, J + 1))}"]
    if regime_start is not None:
        ratio = Fraction(g.d, J + 1)
        for n in range(max(regime_start, 1), len(ts) - 1):
            lhs = ts[n + 1] - ts[n]
            if lhs != ratio * (ts[n] - ts[n - 1]):
                raise AssertionError(f"recurrence fails at n = {n}")
        notes.append(f"recurrence verified from n = {regime_start}")
    qs = [e["q"] for e in trace]
    grows = regime_start is not None and len(qs) - regime_start >= 3 and all(
        qs[k + 1] >= nu * qs[k] for k in range(regime_start, len(qs) - 1)
    )
    bound = UNBOUNDED if grows else UNRESOLVED
    return MultiplicityReport(bound, trace, False, notes)


def _pick(crit: list, branch):
    if isinstance(branch, int):
        return crit[branch]
    branch = PuiseuxSeries._wrap(branch)
    for br in crit:
        if br.series == branch:
            return br
    raise KeyError(f"no critical branch {branch}")
