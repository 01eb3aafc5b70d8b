"""The non-Archimedean Green function.

On the annulus rho_0 < |x| < 1 the Green function is log|x|, and it satisfies
g(f_rond x) = (c/d) g(x).  So for a point whose orbit reaches the annulus at
step n,

    g(x) = -(d/c)^n * (norm exponent of f_rond^n x),

an exact rational.  Points certified in K get -inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .berk import BerkPoint
from .cover import CertifiedInK, EscapesAt, classify_point
from .series import fmt_exponent
from .skew import DEFAULT_BUDGET, SkewMap

VALUE = "value"
MINUS_INF = "-inf"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class GreenValue:
    kind: str
    value: Fraction | None = None
    steps: int = 0
    itinerary: tuple = ()

    def is_value(self) -> bool:
        return self.kind == VALUE

    def to_json(self) -> dict:
        out = {"value": fmt_exponent(self.value) if self.kind == VALUE else self.kind, "steps": self.steps}
        if self.kind == UNRESOLVED and self.itinerary:
            out["itinerary"] = list(self.itinerary)
        return out

    def __str__(self):
        return fmt_exponent(self.value) if self.kind == VALUE else self.kind


def g_na(f: SkewMap, x: BerkPoint, budget: int = DEFAULT_BUDGET, cover=None, level=None) -> GreenValue:
    status = classify_point(f, x, budget, cover, level)
    if isinstance(status, EscapesAt):
        n = status.steps
        return GreenValue(VALUE, -Fraction(f.d, f.c) ** n * status.exit_exponent, n)
    if isinstance(status, CertifiedInK):
        return GreenValue(MINUS_INF, None, status.preperiod + status.period, status.itinerary)
    return GreenValue(UNRESOLVED, None, status.depth, status.itinerary)


@dataclass
class FunctionalEquationReport:
    checked: int
    resolved: int
    violations: list

    def to_json(self) -> dict:
        return {"checked": self.checked, "resolved": self.resolved, "violations": self.violations}


def functional_equation_check(f: SkewMap, samples, budget: int = DEFAULT_BUDGET) -> FunctionalEquationReport:
    """g(f_rond x) = (c/d) g(x) on every sample where both sides resolve."""
    ratio = Fraction(f.c, f.d)
    violations = []
    resolved = 0
    checked = 0
    for x in samples:
        checked += 1
        g0 = g_na(f, x, budget)
        g1 = g_na(f, f.apply_point(x), budget)
        if g0.kind == VALUE and g1.kind == VALUE:
            resolved += 1
            if g1.value != ratio * g0.value:
                violations.append({"point": str(x), "g": str(g0), "g_image": str(g1)})
        elif g0.kind == MINUS_INF or g1.kind == MINUS_INF:
            resolved += 1
            if g0.kind != g1.kind:
                violations.append({"point": str(x), "g": str(g0), "g_image": str(g1)})
    return FunctionalEquationReport(checked, resolved, violations)
