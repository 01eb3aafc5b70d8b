"""Curves of the stable set from itineraries, by ball-constrained pullback.

Given an admissible word v_0 ... v_n of level-N balls, start from the
direction series of B_{v_n} and pull back n times, each time keeping the
unique rigid preimage inside B_{v_i}.  The pullback is a z-adic
contraction: the set of series with a given itinerary is a ball whose
radius exponent s_i obeys

    s_i + sum_j J_j min(ord(phi_i - c_j), s_i) = d * s_{i+1},

so s_0 grows geometrically with the word length and every coefficient
below s_0 is independent of the seed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .berk import BerkPoint, dist_exponent
from .errors import InsufficientPrecision, NoPreimageInBall
from .markov import MarkovGraph, ParryData, cylinder_mass, sample_itinerary
from .series import INF, PuiseuxSeries, as_exponent, fmt_exponent
from .skew import SkewMap, _solve_pl


@dataclass
class CurveGerm:
    series: PuiseuxSeries
    itinerary: tuple
    m: int
    certified_order: Fraction
    cylinder_exponents: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "series": str(self.series),
            "itinerary": list(self.itinerary),
            "m": self.m,
            "certified_order": fmt_exponent(self.certified_order),
            "cylinder_exponents": [fmt_exponent(s) for s in self.cylinder_exponents],
        }


def _pullback(f: SkewMap, graph: MarkovGraph, word, seed: PuiseuxSeries, W) -> tuple:
    balls = graph.vertices
    branches = f._branches_beyond(W)
    phi = seed
    s = balls[word[-1]].t
    exps = [s]
    for i in range(len(word) - 2, -1, -1):
        B = balls[word[i]]
        T = phi.trunc
        # ord of d/dw at the preimage is at most (c-1) * t(B) off the critical set
        p = W if T == INF else min(W, f.d * T - (f.c - 1) * B.t)
        if p <= B.t:
            raise InsufficientPrecision(f"pullback precision {fmt_exponent(p)} cannot resolve ball at level {fmt_exponent(B.t)}")
        roots = [r.root for r in f._solve_preimage(phi, p)]
        inside = [r for r in roots if B.contains_point(BerkPoint.rigid(r))]
        if len(inside) != 1:
            raise NoPreimageInBall(f"{len(inside)} preimages of step {i + 1} in ball {word[i]}")
        phi = inside[0]
        deltas = [(dist_exponent(phi, br.root, W), br.multiplicity) for br in branches]
        s = _solve_pl(deltas, f.d * s)
        exps.append(s)
    exps.reverse()
    return phi, exps


def itinerary_to_curve(f: SkewMap, graph: MarkovGraph, word, precision, check_seed: bool = True) -> CurveGerm:
    """The curve with itinerary ``word``; coefficients below certified_order are exact."""
    word = list(word)
    if not word:
        raise ValueError("empty itinerary")
    graph.check_word(word)
    P = as_exponent(precision)
    W = f.d * P
    last = graph.vertices[word[-1]]
    seed = last.direction
    phi, exps = _pullback(f, graph, word, seed, W)
    s0 = exps[0]
    cert = min(s0, P)
    series = phi.truncate(min(s0, W))
    if check_seed:
        bumped = seed + PuiseuxSeries.monomial(1, last.t + 1)
        other, _ = _pullback(f, graph, word, bumped, W)
        diff = (phi - other).truncate(cert)
        if not diff.is_zero():
            raise AssertionError(f"seed dependence below certified order at z^{fmt_exponent(diff.ord())}")
    m = series.terms_below(cert).ram
    return CurveGerm(series, tuple(word), m, cert, exps)


@dataclass
class InvarianceReport:
    rows: list

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.rows)

    def to_json(self) -> dict:
        return {"ok": self.ok, "rows": self.rows}


def verify_invariance(f: SkewMap, curves: dict) -> InvarianceReport:
    """ord(f_rond(phi_w) - phi_{shift w}) against the shifted curve's certified order."""
    rows = []
    for w, cg in curves.items():
        sw = tuple(w[1:])
        if sw not in curves:
            continue
        target = curves[sw]
        res = f.apply_rigid(cg.series) - target.series
        r = res.ord_lower_bound()
        rows.append({
            "word": list(w),
            "residual_order": fmt_exponent(r),
            "certified_order": fmt_exponent(target.certified_order),
            "ok": r >= target.certified_order,
        })
    return InvarianceReport(rows)


# laminarity -----------------------------------------------------------------


def _eval_log(s: PuiseuxSeries, t: complex, m: int) -> complex:
    """Evaluate s at z = t^m, i.e. z^beta = t^(m*beta), principal powers of t."""
    total = 0j
    lt = cmath.log(t)
    for e, c in s.items():
        total += complex(c) * cmath.exp(lt * float(e * m))
    return total


@dataclass
class DisjointnessReport:
    pairs: list

    @property
    def ok(self) -> bool:
        return all(p["symbolic_ok"] and p["numeric_ok"] for p in self.pairs)

    @property
    def min_gap(self) -> float:
        return min((p["gap"] for p in self.pairs), default=math.inf)

    def to_json(self) -> dict:
        return {"ok": self.ok, "min_gap": self.min_gap, "pairs": self.pairs}


def disjointness_check(
    curves: list,
    r_min: float,
    r_max: float,
    samples: int = 16,
    gap: float = 1e-6,
    f: SkewMap | None = None,
    graph: MarkovGraph | None = None,
) -> DisjointnessReport:
    """Symbolic and numeric separation of curves with distinct itineraries.

    Two curves whose words part at index k agree to order about d^k, far
    beyond any stored precision once k is large.  With ``f`` and ``graph``
    the symbolic check then moves along the dynamics: after k steps the
    images are the curves of the shifted words, which sit in different
    level balls and separate at low order.  ``separation_step`` records k
    (0 when the curves themselves already differ below their certified order).
    """
    out = []
    shifted: dict = {}

    def curve_of(word, like):
        if word not in shifted:
            shifted[word] = itinerary_to_curve(f, graph, word, like.certified_order, check_seed=False)
        return shifted[word]

    for a in range(len(curves)):
        for b in range(a + 1, len(curves)):
            ca, cb = curves[a], curves[b]
            k = next((i for i, (x, y) in enumerate(zip(ca.itinerary, cb.itinerary)) if x != y), None)
            if k is None:
                # one word extends the other: same cylinder, nothing to separate
                continue
            T = min(ca.certified_order, cb.certified_order)
            diff = (ca.series - cb.series).truncate(T)
            sym = not diff.is_zero()
            step = 0
            order = diff.ord() if sym else None
            if not sym and k > 0 and f is not None and graph is not None:
                sa, sb = curve_of(tuple(ca.itinerary[k:]), ca), curve_of(tuple(cb.itinerary[k:]), cb)
                d2 = (sa.series - sb.series).truncate(min(sa.certified_order, sb.certified_order))
                if not d2.is_zero():
                    sym, step, order = True, k, d2.ord()
            m = max(ca.m, cb.m, diff.ram if not diff.is_zero() else 1)
            g = math.inf
            if not diff.is_zero():
                for i in range(samples):
                    r = r_min * (r_max / r_min) ** (i / max(1, samples - 1)) if r_max > r_min else r_min
                    for j in range(4):
                        t = cmath.rect(r ** (1 / m), 2 * math.pi * (j + 0.5) / 4)
                        g = min(g, abs(_eval_log(diff, t, m)))
            else:
                # agreement through every stored coefficient: numerically indistinguishable
                g = 0.0
            out.append({
                "pair": [a, b],
                "divergence_index": k,
                "separation_step": step if sym else None,
                "separation_order": fmt_exponent(order) if sym else None,
                "symbolic_ok": sym,
                "gap": g,
                "numeric_ok": g >= gap,
            })
    return DisjointnessReport(out)


# plaques --------------------------------------------------------------------


def heuristic_radius(s: PuiseuxSeries) -> float:
    """1/2 * 1/limsup |a_beta|^(1/beta), the limsup read off the second half of the terms."""
    items = [(e, abs(complex(c))) for e, c in s.items() if e > 0 and c]
    if len(items) < 2:
        return 0.5
    tail = items[len(items) // 2 :]
    growth = max(a ** (1 / float(e)) for e, a in tail)
    return 0.5 / max(growth, 1e-300)


@dataclass
class PlaqueSample:
    itinerary: tuple
    weight: Fraction
    points: list
    radius: float
    warning: str | None = None

    def csv_rows(self) -> list:
        it = "-".join(map(str, self.itinerary))
        return [
            f"{it},{self.weight.numerator},{self.weight.denominator},{t.real!r},{t.imag!r},{z.real!r},{z.imag!r},{w.real!r},{w.imag!r}"
            for t, z, w in self.points
        ]


CSV_HEADER = "itinerary,weight_num,weight_den,t_re,t_im,z_re,z_im,w_re,w_im"


def emit_plaques(
    f: SkewMap,
    graph: MarkovGraph,
    parry: ParryData,
    count: int,
    depth: int,
    radius: float | None,
    seed: int,
    precision=30,
    r_min: float = 0.01,
    n_points: int = 8,
    prefix_len: int = 1,
) -> list:
    """Parry-sampled curves with weights mass(prefix)/(m * samples sharing the prefix)."""
    words = [tuple(sample_itinerary(parry, depth + 1, seed * 1_000_003 + i)) for i in range(count)]
    share: dict = {}
    for w in words:
        share[w[:prefix_len]] = share.get(w[:prefix_len], 0) + 1
    out = []
    for w in words:
        cg = itinerary_to_curve(f, graph, w, precision)
        s = cg.series.terms_below(cg.certified_order)
        r_h = heuristic_radius(s)
        r = r_h if radius is None else radius
        warn = "radius beyond convergence heuristic" if r > r_h else None
        weight = cylinder_mass(parry, w[:prefix_len]) / (cg.m * share[w[:prefix_len]])
        pts = []
        lo = min(r_min, r)
        for i in range(n_points):
            rr = lo * (r / lo) ** (i / max(1, n_points - 1))
            t = cmath.rect(rr, 2 * math.pi * i / n_points)
            z = t**cg.m
            pts.append((t, z, _eval_log(s, t, cg.m)))
        out.append(PlaqueSample(w, weight, pts, r, warn))
    return out


# base change ----------------------------------------------------------------


def base_change_map(f: SkewMap, k: int) -> SkewMap:
    if k < 1:
        raise ValueError("base change order must be positive")
    return f if k == 1 else f.base_change(k)


def base_change_commutes(f: SkewMap, k: int, phis) -> bool:
    """ramify(f_k(phi), k) == f(ramify(phi, k)) for every sample phi."""
    fk = base_change_map(f, k)
    return all(fk.apply_rigid(p).ramify(k) == f.apply_rigid(p.ramify(k)) for p in phis)
