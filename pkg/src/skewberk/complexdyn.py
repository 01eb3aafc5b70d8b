"""Numeric complex dynamics near the superattracting point.

Orbits contract like exp(-C c^n) or exp(-C d^n), far past double underflow,
so points are stored as (log|x|, arg x).  A sum is evaluated by factoring
out its dominant term; near-total cancellation of that sum is retried with
mpmath at 50 digits and, failing that, the orbit stops as undecided.

Points of the stable set W are transversally unstable in relative terms: a
relative error e in w grows roughly like |z|^(-4^n / 3) per step, so plain
iteration of (t, phi(t)) leaves W after a couple of steps.  Curve points are
therefore followed along the curve family: the orbit of (t, phi_x(t)) is
(t^(d^n), phi_{shift^n x}(t^(d^n))), and phi_{shift^n x} is known up to the
level of the ball of x_n.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath

from .curves import CurveGerm
from .markov import MarkovGraph
from .series import PuiseuxSeries
from .skew import SkewMap

CANCEL_TOL = 1e-12
GUARD_BAND = 0.2
DEFAULT_STEPS = 25

RATE_C = "RateC"
RATE_D = "RateD"
UNDECIDED = "Undecided"


class CancellationLoss(ArithmeticError):
    """A sum cancelled beyond what the working precision can resolve."""


@dataclass(frozen=True)
class LogComplex:
    logmag: float
    phase: float = 0.0

    @classmethod
    def from_complex(cls, x: complex) -> "LogComplex":
        if x == 0:
            return ZERO
        return cls(math.log(abs(x)), cmath.phase(x))

    def is_zero(self) -> bool:
        return self.logmag == -math.inf

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.is_zero() or other.is_zero():
            return ZERO
        return LogComplex(self.logmag + other.logmag, _wrap(self.phase + other.phase))

    def __pow__(self, n: int) -> "LogComplex":
        if n == 0:
            return ONE
        if self.is_zero():
            return ZERO
        return LogComplex(self.logmag * n, _wrap(self.phase * n))

    def scale(self, a: complex) -> "LogComplex":
        return self * LogComplex.from_complex(a)

    def to_complex(self) -> complex:
        if self.logmag < -745:
            return 0j
        return cmath.rect(math.exp(self.logmag), self.phase)


ZERO = LogComplex(-math.inf, 0.0)
ONE = LogComplex(0.0, 0.0)


def _wrap(phi: float) -> float:
    phi = math.fmod(phi, 2 * math.pi)
    if phi <= -math.pi:
        phi += 2 * math.pi
    elif phi > math.pi:
        phi -= 2 * math.pi
    return phi


def log_sum(terms: list) -> tuple:
    """(sum, retried) for LogComplex terms; CancellationLoss if nothing survives."""
    live = [t for t in terms if not t.is_zero()]
    if not live:
        return ZERO, False
    top = max(t.logmag for t in live)
    s = sum(cmath.rect(math.exp(t.logmag - top), t.phase) for t in live)
    if abs(s) > CANCEL_TOL:
        return LogComplex(top + math.log(abs(s)), cmath.phase(s)), False
    with mpmath.workdps(50):
        S = mpmath.fsum(mpmath.expj(t.phase) * mpmath.exp(t.logmag - top) for t in live)
        mag = abs(S)
        if mag < mpmath.mpf(10) ** -15:
            raise CancellationLoss(f"relative size {mpmath.nstr(mag, 3)} after cancellation")
        return LogComplex(top + float(mpmath.log(mag)), float(mpmath.arg(S))), True


# maps in log form ------------------------------------------------------------


def _eval_series(s: PuiseuxSeries, z: LogComplex) -> list:
    """Terms a_e z^e of s as LogComplex (integer or rational e, principal branch)."""
    out = []
    for e, a in s.items():
        ez = LogComplex(z.logmag * float(e), _wrap(z.phase * float(e))) if not z.is_zero() else (ONE if e == 0 else ZERO)
        out.append(ez.scale(complex(a)))
    return out


def step(f: SkewMap, z: LogComplex, w: LogComplex) -> tuple:
    """One application of f in log form; returns (z', w', retried)."""
    terms = [w ** f.c]
    for j, hj in f.h.items():
        wj = w**j
        for t in _eval_series(hj, z):
            terms.append(t * wj)
    w1, retried = log_sum(terms)
    return z ** f.d, w1, retried


def h_norm(f: SkewMap, r: float) -> float:
    """Bound for sup |h| on the polydisk of radius r, where w^c + z h(z, w) is the second component."""
    total = 0.0
    for j, hj in f.h.items():
        for e, a in hj.items():
            total += abs(complex(a)) * r ** (float(e) - 1 + j)
    return total


# orbits ----------------------------------------------------------------------


@dataclass
class OrbitRecord:
    logmag_z: list
    logmag_w: list
    phases: list
    in_omega0: list
    stop: str = "budget"
    retried_steps: list = field(default_factory=list)
    error_bounds: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.logmag_z) - 1

    def logmag(self, n: int) -> float:
        return max(self.logmag_z[n], self.logmag_w[n])

    def csv_rows(self) -> list:
        return [f"{n},{self.logmag_z[n]!r},{self.logmag_w[n]!r},{int(self.in_omega0[n])}" for n in range(len(self.logmag_z))]

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "stop": self.stop,
            "logmag_z": self.logmag_z,
            "logmag_w": self.logmag_w,
            "in_omega0": self.in_omega0,
            "retried_steps": self.retried_steps,
            "notes": self.notes,
        }


CSV_HEADER = "n,logmag_z,logmag_w,in_omega0"


def _in_omega0(c: int, z: LogComplex, w: LogComplex) -> bool:
    # |z| < |w|^c
    if w.is_zero():
        return False
    return z.is_zero() or z.logmag < c * w.logmag


def iterate_orbit(f: SkewMap, p, n: int = DEFAULT_STEPS) -> OrbitRecord:
    """Plain iteration of p = (z, w) in log form."""
    z, w = (x if isinstance(x, LogComplex) else LogComplex.from_complex(complex(x)) for x in p)
    r = max(math.exp(z.logmag) if not z.is_zero() else 0.0, math.exp(w.logmag) if not w.is_zero() else 0.0)
    if r >= 1:
        raise ValueError("the starting point must lie in the open unit bidisk")
    hn = h_norm(f, r)
    check_invariance = hn < 0.5 and r < 0.5
    rec = OrbitRecord([z.logmag], [w.logmag], [(z.phase, w.phase)], [_in_omega0(f.c, z, w)])
    if not check_invariance:
        rec.notes.append(f"Omega_0 invariance not asserted: sup|h| bound {hn:.3g} on radius {r:.3g}")
    entered = rec.in_omega0[0]
    for k in range(n):
        try:
            z, w, retried = step(f, z, w)
        except CancellationLoss as exc:
            rec.stop = "cancellation"
            rec.notes.append(f"step {k + 1}: {exc}")
            break
        if retried:
            rec.retried_steps.append(k + 1)
        rec.logmag_z.append(z.logmag)
        rec.logmag_w.append(w.logmag)
        rec.phases.append((z.phase, w.phase))
        inside = _in_omega0(f.c, z, w)
        rec.in_omega0.append(inside)
        if entered and check_invariance and not inside:
            raise AssertionError(f"orbit left Omega_0 at step {k + 1}")
        entered = entered or inside
    return rec


def _extend_word(graph: MarkovGraph, word, length: int) -> list:
    """Admissible extension by the least successor (any choice lies on some curve)."""
    word = list(word)
    while len(word) < length:
        row = graph.adjacency[word[-1]]
        word.append(next(j for j, a in enumerate(row) if a))
    return word


def curve_orbit(f: SkewMap, graph: MarkovGraph, curve: CurveGerm, t: complex, n: int = DEFAULT_STEPS) -> OrbitRecord:
    """Orbit of (t^m, phi(t^m)) followed along the curve family.

    Step 0 evaluates the curve itself; step k >= 1 uses the direction of the
    ball of the k-th symbol, whose error relative to w_k is at most
    |z_k|^(t_ball - ord(direction)).
    """
    word = _extend_word(graph, curve.itinerary, n + 1)
    lt = LogComplex.from_complex(complex(t))
    z = lt ** curve.m
    rec = OrbitRecord([], [], [], [])
    s = curve.series.terms_below(curve.certified_order)
    for k in range(n + 1):
        if k == 0:
            phi, t_ball = s, curve.certified_order
        else:
            ball = graph.vertices[word[k]]
            phi, t_ball = ball.direction, ball.t
        w, _ = log_sum(_eval_series(phi, z))
        rel = (float(t_ball) - float(phi.ord())) * z.logmag
        rec.error_bounds.append(rel / math.log(10))
        rec.logmag_z.append(z.logmag)
        rec.logmag_w.append(w.logmag)
        rec.phases.append((z.phase, w.phase))
        rec.in_omega0.append(_in_omega0(f.c, z, w))
        z = z ** f.d
    worst = max(rec.error_bounds)
    if worst > -12:
        rec.notes.append(f"coarse step: log10 relative error bound {worst:.1f}")
    return rec


# rates and the Green function --------------------------------------------------


@dataclass(frozen=True)
class Rate:
    kind: str
    estimate: float
    n: int

    def to_json(self) -> dict:
        return {"rate": self.kind, "estimate": self.estimate, "n": self.n}


def attraction_rate(rec: OrbitRecord, c: int, d: int) -> Rate:
    """(1/n) log|log|f^n p||, decided against log c and log d with a guard band."""
    n = rec.steps
    if rec.stop == "cancellation" or n < 10:
        return Rate(UNDECIDED, math.nan, n)
    L = rec.logmag(n)
    if not math.isfinite(L) or L >= 0:
        return Rate(UNDECIDED, math.nan, n)
    est = math.log(-L) / n
    mid = (math.log(c) + math.log(d)) / 2
    if abs(est - mid) < GUARD_BAND / 2:
        return Rate(UNDECIDED, est, n)
    return Rate(RATE_C if est < mid else RATE_D, est, n)


MINUS_INF = -math.inf


def green_complex(f: SkewMap, p, tolerance: float = 1e-10, budget: int = 200) -> float:
    """g(p) = lim c^-n log|w_n|; -inf when the orbit never enters Omega_0."""
    z, w = (x if isinstance(x, LogComplex) else LogComplex.from_complex(complex(x)) for x in p)
    c = f.c
    if w.is_zero() and z.is_zero():
        return MINUS_INF
    inside_at = None
    for k in range(budget + 1):
        if _in_omega0(c, z, w):
            inside_at = k if inside_at is None else inside_at
            # sum of the increment bounds log(2)/c^j over j >= k
            tail = math.log(2) * c / ((c - 1) * c**k)
            if tail <= tolerance or z.is_zero() or f.is_product():
                return w.logmag / c**k
        elif inside_at is not None:
            raise AssertionError(f"orbit left Omega_0 at step {k}")
        if k < budget:
            z, w, _ = step(f, z, w)
        if w.is_zero():
            return MINUS_INF
    return MINUS_INF


def green_curve_point(f: SkewMap, graph: MarkovGraph, curve: CurveGerm, t: complex, n: int = DEFAULT_STEPS) -> float:
    """Green function at (t^m, phi(t^m)) along the curve family; -inf if Omega_0 is never reached."""
    rec = curve_orbit(f, graph, curve, t, n)
    for k, inside in enumerate(rec.in_omega0):
        if inside:
            return rec.logmag_w[k] / f.c**k
    return MINUS_INF


# cross-validation ---------------------------------------------------------------


@dataclass
class CrosscheckReport:
    curve_rates: list
    generic_rates: list
    disagreements: list

    @property
    def agreement(self) -> int:
        return len(self.curve_rates) + len(self.generic_rates) - len(self.disagreements)

    def to_json(self) -> dict:
        return {
            "agreement": f"{self.agreement}/{len(self.curve_rates) + len(self.generic_rates)}",
            "curve_points": [r.to_json() for r in self.curve_rates],
            "generic_points": [r.to_json() for r in self.generic_rates],
            "disagreements": self.disagreements,
        }


def crosscheck(f: SkewMap, graph: MarkovGraph | None, curve_points, offcurve, n: int = DEFAULT_STEPS) -> CrosscheckReport:
    """curve_points: (CurveGerm, t) pairs, expected RateD; offcurve: (z, w), expected RateC."""
    cr, gr, bad = [], [], []
    for cg, t in curve_points:
        r = attraction_rate(curve_orbit(f, graph, cg, t, n), f.c, f.d)
        cr.append(r)
        if r.kind != RATE_D:
            bad.append({"point": f"curve {list(cg.itinerary)} at t={t}", "expected": RATE_D, "got": r.kind, "estimate": r.estimate})
    for p in offcurve:
        r = attraction_rate(iterate_orbit(f, p, n), f.c, f.d)
        gr.append(r)
        if r.kind != RATE_C:
            bad.append({"point": str(p), "expected": RATE_C, "got": r.kind, "estimate": r.estimate})
    return CrosscheckReport(cr, gr, bad)
