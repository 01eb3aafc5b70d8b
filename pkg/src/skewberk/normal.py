"""Formal reduction of a superattracting germ to skew-product normal form.

A germ g(z, w) = (z^d (1 + eps), w^c + ...) is conjugated in three stages,
all modulo a total degree M:

1. straighten_z: Phi = (z (1 + phi), w) with z o Phi o g = (z o Phi)^d, via
   1 + phi = prod_{n >= 1} (1 + eps o g^{n-1})^(d^-n).
2. bottcher_1d on the restriction to {z = 0}, making it exactly w^c.
3. For m = 1, 2, ... write the z^m part of the second component as
   g_m^- + g_m^+ (w-degree below / at least c) and conjugate by
   (z, w + z^m g_m^+ / (c w^(c-1))), which removes g_m^+.

What is left is (z^d, w^c + sum_{j<c} h_j(z) w^j).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .coeffs import QI, coerce, format_coeff, is_zero, parse_coeff
from .errors import SeriesParseError, SkewBerkError
from .series import PuiseuxSeries
from .skew import SkewMap


class DivisionObstruction(SkewBerkError):
    """g_m^+ not divisible by w^(c-1); cannot happen for valid input."""


# bivariate truncated series --------------------------------------------------


class BivariateSeries:
    """Sum of c * z^i * w^j over i + j < trunc (trunc None means exact polynomial)."""

    __slots__ = ("terms", "trunc")

    def __init__(self, terms=None, trunc: int | None = None):
        out = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError("bivariate exponents must be nonnegative")
            c = coerce(c)
            if (trunc is None or i + j < trunc) and not is_zero(c):
                out[(int(i), int(j))] = c
        self.terms = out
        self.trunc = trunc

    # constructors
    @classmethod
    def z(cls, trunc=None):
        return cls({(1, 0): 1}, trunc)

    @classmethod
    def w(cls, trunc=None):
        return cls({(0, 1): 1}, trunc)

    @classmethod
    def const(cls, c, trunc=None):
        return cls({(0, 0): c}, trunc)

    def with_trunc(self, M) -> "BivariateSeries":
        T = M if self.trunc is None else (self.trunc if M is None else min(M, self.trunc))
        return BivariateSeries(self.terms, T)

    # arithmetic
    @staticmethod
    def _tr(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        other = _bwrap(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return BivariateSeries(out, self._tr(self.trunc, other.trunc))

    __radd__ = __add__

    def __neg__(self):
        return BivariateSeries({k: -c for k, c in self.terms.items()}, self.trunc)

    def __sub__(self, other):
        return self + (-_bwrap(other))

    def __rsub__(self, other):
        return _bwrap(other) - self

    def order(self) -> int | None:
        return min((i + j for i, j in self.terms), default=None)

    def _olb(self):
        """Lower bound for the total order; None means exact zero."""
        if self.terms:
            return self.order()
        return self.trunc

    def __mul__(self, other):
        other = _bwrap(other)
        va, vb = self._olb(), other._olb()
        if (va is None and self.trunc is None) or (vb is None and other.trunc is None):
            return BivariateSeries({}, None)
        cands = []
        if self.trunc is not None:
            cands.append(self.trunc + vb)
        if other.trunc is not None:
            cands.append(other.trunc + va)
        T = min(cands) if cands else None
        out = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                if T is not None and i + j + k + l >= T:
                    continue
                key = (i + k, j + l)
                p = a * b
                out[key] = out[key] + p if key in out else p
        return BivariateSeries(out, T)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = BivariateSeries.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c):
        c = coerce(c)
        return BivariateSeries({k: v * c for k, v in self.terms.items()}, self.trunc)

    def coeff(self, i, j):
        return self.terms.get((i, j), QI(0))

    def is_zero(self) -> bool:
        return not self.terms

    def agrees_with(self, other, M: int) -> bool:
        diff = (self - other).terms
        return all(i + j >= M for i, j in diff)

    def truncate(self, M: int) -> "BivariateSeries":
        return BivariateSeries(self.terms, M if self.trunc is None else min(M, self.trunc))

    def compose(self, A: "BivariateSeries", B: "BivariateSeries", M: int) -> "BivariateSeries":
        """self(A, B) mod total degree M; A and B must vanish at the origin."""
        if (0, 0) in A.terms or (0, 0) in B.terms:
            raise ValueError("substitution needs series without constant term")
        A, B = A.truncate(M), B.truncate(M)
        imax = max((i for i, _ in self.terms), default=0)
        jmax = max((j for _, j in self.terms), default=0)
        pa = [BivariateSeries.const(1, M)]
        for _ in range(imax):
            pa.append(pa[-1] * A)
        pb = [BivariateSeries.const(1, M)]
        for _ in range(jmax):
            pb.append(pb[-1] * B)
        out = BivariateSeries({}, M)
        for (i, j), c in self.terms.items():
            if i + j >= M:
                continue
            out = out + (pa[i] * pb[j]).scale(c)
        return out.truncate(M)

    def restrict_z0(self) -> dict:
        """{j: coeff of w^j} of the restriction to z = 0."""
        return {j: c for (i, j), c in self.terms.items() if i == 0}

    def z_part(self, m: int) -> dict:
        """{j: coeff} of z^m * (sum_j coeff w^j)."""
        return {j: c for (i, j), c in self.terms.items() if i == m}

    def __eq__(self, other):
        return isinstance(other, BivariateSeries) and self.terms == other.terms and self.trunc == other.trunc

    def __str__(self):
        keys = sorted(self.terms, key=lambda k: (k[0] + k[1], k[0]))
        parts = []
        for i, j in keys:
            c = self.terms[(i, j)]
            mon = "*".join(x for x in (_pw("z", i), _pw("w", j)) if x)
            cs = format_coeff(c)
            if not mon:
                parts.append(cs)
            elif cs == "1":
                parts.append(mon)
            elif cs == "-1":
                parts.append("-" + mon)
            else:
                parts.append(f"{cs}*{mon}")
        s = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        if self.trunc is not None:
            s += f" + O(deg {self.trunc})"
        return s

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str, trunc: int | None = None) -> "BivariateSeries":
        return _parse_bivariate(text, trunc)


def _pw(v, n):
    return "" if n == 0 else (v if n == 1 else f"{v}^{n}")


def _bwrap(x) -> BivariateSeries:
    if isinstance(x, BivariateSeries):
        return x
    if isinstance(x, str):
        return BivariateSeries.parse(x)
    return BivariateSeries.const(x)


_TERM_RE = re.compile(r"\s*([+-])?\s*(\([^()]*\)|\d+(?:/\d+)?)?\s*\*?\s*((?:[zw](?:\^\d+)?\s*\*?\s*)*)")
_FACTOR_RE = re.compile(r"([zw])(?:\^(\d+))?")


def _parse_bivariate(text: str, trunc) -> BivariateSeries:
    """Terms ``c*z^i*w^j`` joined by + and -; coefficients as in univariate series."""
    s = text.strip()
    m = re.search(r"\+\s*O\(deg\s*(\d+)\)\s*$", s)
    if m:
        trunc = int(m.group(1)) if trunc is None else min(trunc, int(m.group(1)))
        s = s[: m.start()].rstrip()
    terms: dict = {}
    pos = 0
    if s in ("", "0"):
        return BivariateSeries({}, trunc)
    while pos < len(s):
        mt = _TERM_RE.match(s, pos)
        sign, coeff, mono = mt.group(1), mt.group(2), mt.group(3)
        if mt.end() == pos or (coeff is None and not mono.strip()):
            raise SeriesParseError("expected a term", s, pos)
        if pos > 0 and sign is None:
            raise SeriesParseError("expected + or -", s, pos)
        c = parse_coeff(coeff) if coeff else QI(1)
        if sign == "-":
            c = -c
        i = j = 0
        for var, e in _FACTOR_RE.findall(mono):
            if var == "z":
                i += int(e or 1)
            else:
                j += int(e or 1)
        terms[(i, j)] = terms[(i, j)] + c if (i, j) in terms else c
        pos = mt.end()
    return BivariateSeries(terms, trunc)


# germs -------------------------------------------------------------------------


@dataclass
class GermMap:
    fz: BivariateSeries
    fw: BivariateSeries
    d: int
    c: int

    def compose(self, other: "GermMap", M: int) -> "GermMap":
        """self o other mod total degree M."""
        return GermMap(self.fz.compose(other.fz, other.fw, M), self.fw.compose(other.fz, other.fw, M), self.d, self.c)

    def agrees_with(self, other: "GermMap", M: int) -> bool:
        return self.fz.agrees_with(other.fz, M) and self.fw.agrees_with(other.fw, M)

    def to_json(self, M: int | None = None) -> dict:
        out = {"fz": str(BivariateSeries(self.fz.terms)), "fw": str(BivariateSeries(self.fw.terms))}
        if M is not None:
            out["M"] = M
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GermMap":
        M = obj.get("M")
        fz = BivariateSeries.parse(obj["fz"], M)
        fw = BivariateSeries.parse(obj["fw"], M)
        return cls.from_components(fz, fw)

    @classmethod
    def from_components(cls, fz: BivariateSeries, fw: BivariateSeries) -> "GermMap":
        d = _z_degree(fz)
        c = _w_degree(fw)
        return cls(fz, fw, d, c)

    @staticmethod
    def identity(M=None) -> "GermMap":
        return GermMap(BivariateSeries.z(M), BivariateSeries.w(M), 1, 1)


def _z_degree(fz: BivariateSeries) -> int:
    lead = [i for (i, j) in fz.terms if j == 0]
    if not lead or min(lead) < 2:
        raise ValueError("first component must be z^d (1 + eps) with d >= 2")
    d = min(lead)
    if fz.coeff(d, 0) != 1:
        raise ValueError("first component must have leading term exactly z^d")
    # every term must be divisible by z^d
    if any(i < d for (i, j) in fz.terms):
        raise ValueError("first component must be divisible by z^d")
    return d


def _w_degree(fw: BivariateSeries) -> int:
    rest = fw.restrict_z0()
    if not rest:
        raise ValueError("second component vanishes on z = 0")
    c = min(rest)
    if c < 2:
        raise ValueError("restriction to z = 0 must be superattracting of order >= 2")
    if rest[c] != 1:
        raise ValueError("restriction to z = 0 must start with w^c exactly")
    if (0, 0) in fw.terms:
        raise ValueError("the germ must fix the origin")
    return c


def _binomial_power(u: BivariateSeries, alpha: Fraction, M: int) -> BivariateSeries:
    """(1 + u)^alpha mod total degree M, for u without constant term."""
    out = BivariateSeries.const(1, M)
    term = BivariateSeries.const(1, M)
    coef = Fraction(1)
    u = u.truncate(M)
    for k in range(1, M + 1):
        term = term * u
        if term.is_zero():
            break
        coef = coef * (alpha - k + 1) / k
        out = out + term.scale(coef)
    return out.truncate(M)


def invert_tangent_identity(H: GermMap, M: int) -> GermMap:
    """H^{-1} mod degree M for H = id + (higher order), by fixed point."""
    dz = H.fz - BivariateSeries.z()
    dw = H.fw - BivariateSeries.w()
    if any(i + j < 2 for (i, j) in dz.terms) or any(i + j < 2 for (i, j) in dw.terms):
        raise ValueError("conjugacy must be tangent to the identity")
    P = GermMap.identity(M)
    for _ in range(M):
        nz = BivariateSeries.z(M) - dz.compose(P.fz, P.fw, M)
        nw = BivariateSeries.w(M) - dw.compose(P.fz, P.fw, M)
        nxt = GermMap(nz, nw, 1, 1)
        if nxt.agrees_with(P, M):
            return nxt
        P = nxt
    return P


# stage 1 -----------------------------------------------------------------------


@dataclass
class Stage:
    name: str
    conj: GermMap
    m: int | None = None

    def to_json(self) -> dict:
        out = {"stage": self.name, "conjugacy": self.conj.to_json()}
        if self.m is not None:
            out["m"] = self.m
        return out


def straighten_z(g: GermMap, M: int):
    """(Phi, g~) with Phi = (z(1+phi), w) and first component of g~ equal to z^d."""
    d = g.d
    W = M + d
    eps_terms = {(i - d, j): c for (i, j), c in g.fz.terms.items() if not (i == d and j == 0)}
    eps = BivariateSeries(eps_terms, M if g.fz.trunc is None else min(M, g.fz.trunc - d))
    one_phi = BivariateSeries.const(1, M)
    it = GermMap.identity(M)
    n = 1
    while True:
        e = eps.compose(it.fz, it.fw, M) if n > 1 else eps.truncate(M)
        if e.is_zero():
            break
        one_phi = one_phi * _binomial_power(e, Fraction(1, d**n), M)
        it = g.compose(it, M)
        n += 1
        if n > 4 * M + 8:
            raise SkewBerkError("first-component straightening did not stabilize")
    phi = (one_phi - 1).truncate(M)
    Phi = GermMap(BivariateSeries.z(W) * one_phi, BivariateSeries.w(W), 1, 1)
    Phi_inv = invert_tangent_identity(Phi, W)
    gt = Phi.compose(g.compose(Phi_inv, W), W)
    gt = GermMap(gt.fz, gt.fw, g.d, g.c)
    return phi, Phi, gt


def straighten_identity_holds(g: GermMap, phi: BivariateSeries, M: int) -> bool:
    """z o Phi o g == (z o Phi)^d modulo total degree M."""
    zphi = BivariateSeries.z(M) * (phi + 1)
    lhs = zphi.compose(g.fz, g.fw, M)
    rhs = zphi ** g.d
    return lhs.agrees_with(rhs, M)


# stage 2 -----------------------------------------------------------------------


def _univ(coeffs: dict, M: int) -> PuiseuxSeries:
    return PuiseuxSeries({k: v for k, v in coeffs.items() if k < M}, M)


def bottcher_1d(p, M: int, c: int | None = None) -> PuiseuxSeries:
    """beta = w + O(w^2) with beta o p == beta^c mod w^M (series in the letter z)."""
    p = PuiseuxSeries._wrap(p)
    if c is None:
        c = int(p.ord())
    if p.ram != 1 or p.ord() != c or p.coeff(c) != 1:
        raise ValueError("the restriction must start with exactly w^c")
    p = p.truncate(M)
    beta = PuiseuxSeries({1: 1}, M)
    for m in range(2, M - c + 1):
        res = _subst(beta, p, M) - beta.truncate(M) ** c
        k = c + m - 1
        a = res.coeff(k)
        if not is_zero(a):
            beta = beta + PuiseuxSeries.monomial(a / c, m).with_trunc(M)
    res = (_subst(beta, p, M) - beta**c).truncate(M)
    if not res.is_zero():
        raise SkewBerkError("Bottcher residual does not vanish")
    return beta.truncate(M - c + 1)


def _subst(a: PuiseuxSeries, b: PuiseuxSeries, M: int) -> PuiseuxSeries:
    """a(b) mod w^M for power series a, b with b(0) = 0."""
    out = PuiseuxSeries.zero(M)
    power = PuiseuxSeries.one().with_trunc(M)
    n = 0
    for e, coef in sorted(a.items()):
        while n < e:
            power = (power * b).truncate(M)
            n += 1
        out = out + power.scale(coef)
    return out.truncate(M)


def _series_to_w(s: PuiseuxSeries, M: int) -> BivariateSeries:
    return BivariateSeries({(0, int(e)): c for e, c in s.items()}, M)


def bottcher_stage(g: GermMap, M: int):
    rest = g.fw.restrict_z0()
    p = _univ(rest, M)
    beta = bottcher_1d(p, M, g.c)
    Bmap = GermMap(BivariateSeries.z(M), _series_to_w(beta, M), 1, 1)
    B_inv = invert_tangent_identity(Bmap, M)
    gt = Bmap.compose(g.compose(B_inv, M), M)
    return beta, Bmap, GermMap(gt.fz, gt.fw, g.d, g.c)


# stage 3 -----------------------------------------------------------------------


def eliminate_step(g: GermMap, m: int, M: int):
    """Remove g_m^+ by (z, w + z^m phi_m(w)); returns (phi_m, conjugacy, new germ) or None."""
    gm = g.fw.z_part(m)
    plus = {j: a for j, a in gm.items() if j >= g.c}
    if not plus:
        return None
    phi = {}
    for j, a in plus.items():
        k = j - (g.c - 1)
        if k < 1:
            raise DivisionObstruction(f"g_{m}^+ has w^{j}, below w^(c-1)")
        phi[k] = a / g.c
    Phi = GermMap(
        BivariateSeries.z(M),
        BivariateSeries.w(M) + BivariateSeries({(m, k): a for k, a in phi.items()}, M),
        1,
        1,
    )
    Phi_inv = invert_tangent_identity(Phi, M)
    gt = Phi.compose(g.compose(Phi_inv, M), M)
    return phi, Phi, GermMap(gt.fz, gt.fw, g.d, g.c)


@dataclass
class NormalForm:
    M: int
    ledger: list = field(default_factory=list)
    H: GermMap | None = None
    Psi: GermMap | None = None
    germ: GermMap | None = None
    h: dict = field(default_factory=dict)
    skew: SkewMap | None = None

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "d": self.germ.d,
            "c": self.germ.c,
            "h": {str(j): str(s) for j, s in sorted(self.h.items())},
            "normal_form": self.germ.to_json(),
            "psi": self.Psi.to_json(),
            "ledger": [s.to_json() for s in self.ledger],
        }


def normalize(g: GermMap, M: int) -> NormalForm:
    """Full pipeline; Psi o g~ == g o Psi mod total degree M."""
    ledger: list[Stage] = []
    H = GermMap.identity(M)
    cur = g
    if any(not (i == g.d and j == 0) for (i, j) in g.fz.terms):
        _, Phi, cur = straighten_z(cur, M)
        Phi = GermMap(Phi.fz.truncate(M), Phi.fw.truncate(M), 1, 1)
        cur = GermMap(cur.fz.truncate(M), cur.fw.truncate(M), g.d, g.c)
        ledger.append(Stage("straighten_z", Phi))
        H = Phi.compose(H, M)
    if any(j != cur.c for j in cur.fw.restrict_z0()):
        _, Bm, cur = bottcher_stage(cur, M)
        ledger.append(Stage("bottcher", Bm))
        H = Bm.compose(H, M)
    for m in range(1, M):
        step = eliminate_step(cur, m, M)
        if step is None:
            continue
        _, Phi_m, cur = step
        ledger.append(Stage("eliminate", Phi_m, m))
        H = Phi_m.compose(H, M)
    Psi = invert_tangent_identity(H, M)
    h: dict[int, PuiseuxSeries] = {}
    for (i, j), a in cur.fw.terms.items():
        if (i, j) == (0, cur.c):
            continue
        if j >= cur.c or i == 0:
            raise SkewBerkError(f"normal form still has the term z^{i} w^{j}")
        h.setdefault(j, {})[i] = a
    hs = {j: PuiseuxSeries(t, M - j) for j, t in h.items()}
    sk = SkewMap(cur.d, cur.c, hs, strict=False)
    return NormalForm(M, ledger, H, Psi, cur, hs, sk)


def verify_conjugacy(g: GermMap, nf: NormalForm) -> bool:
    """Psi o g~ == g o Psi modulo total degree M."""
    M = nf.M
    lhs = nf.Psi.compose(nf.germ, M)
    rhs = g.compose(nf.Psi, M)
    return lhs.agrees_with(rhs, M)
