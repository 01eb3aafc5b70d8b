import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from skewberk.berk import OVER_LAURENT, Ball, BerkPoint, Order
from skewberk.errors import NotType2, SplittingFieldRequired
from skewberk.series import INF, PuiseuxSeries

from .oracles import random_root_case
from .strategies import exponents, series

S = PuiseuxSeries.parse


def Z(center, t):
    return BerkPoint(center, t)


class TestInvariantsOfExamples:
    def test_norm_exponent(self):
        assert BerkPoint.gauss().norm_exponent() == 0
        assert Z("-z", Fraction(1, 2)).norm_exponent() == Fraction(1, 2)
        assert BerkPoint.rigid("-4*z^(3/5)").norm_exponent() == Fraction(3, 5)

    def test_A(self):
        assert BerkPoint.gauss().A() == 1
        assert Z("z^2", Fraction(5, 2)).A() == Fraction(7, 2)
        assert BerkPoint.rigid("z").A() == INF

    def test_approx_sequence(self):
        p = Z("0", 3).approx_sequence()
        assert p.multiplicities == (1,)
        p = Z("z^(1/2)", 2).approx_sequence()
        assert p.breakpoints == (0, Fraction(1, 2)) and p.multiplicities == (1, 2)
        p = Z("z^(1/2) + z^(3/4)", 1).approx_sequence()
        assert p.breakpoints == (0, Fraction(1, 2), Fraction(3, 4)) and p.multiplicities == (1, 2, 4)

    def test_alpha(self):
        assert BerkPoint.gauss().alpha() == 0
        assert Z("z^(1/2)", Fraction(3, 2)).alpha() == 1
        assert Z("0", 2).alpha() == 2

    def test_alpha_matches_minimal_polynomial(self):
        # -log|w^2 - z| at zeta(z^(1/2), e^{-3/2}), divided by the degree
        x = Z("z^(1/2)", Fraction(3, 2))
        g, ok = x.log_abs_poly([S("-z"), 0, 1])
        assert ok and g / 2 == x.alpha()

    def test_multiplicity(self):
        assert BerkPoint.rigid("z^(3/5)").multiplicity() == 5
        assert Z("z^(1/2)", Fraction(1, 4)).multiplicity() == 1
        assert Z("z^(1/2)", 2).multiplicity() == 2

    def test_generic_multiplicity(self):
        assert BerkPoint.gauss().generic_multiplicity() == 1
        assert Z("0", 2).generic_multiplicity() == 1
        assert Z("z^2", Fraction(5, 2)).generic_multiplicity() == 2
        with pytest.raises(NotType2):
            BerkPoint.rigid("z").generic_multiplicity()

    def test_compare_and_wedge(self):
        assert Z("z^2", 6).compare(Z("0", 2)) is Order.LESS
        assert Z("0", 2).compare(Z("z^2", 6)) is Order.GREATER
        w = BerkPoint.rigid("z^2").wedge(BerkPoint.rigid("-z^2"))
        assert w == Z("z^2", 2) == Z("0", 2)
        x = Z("z", 3)
        assert x.compare(x) is Order.EQUAL
        assert Z("z", 3).compare(Z("-z", 3)) is Order.INCOMPARABLE

    def test_canonical_center(self):
        assert Z("z + z^5", 2).center == S("z")

    def test_galois_identification(self):
        a = BerkPoint.rigid("z^(1/2)", view=OVER_LAURENT)
        b = BerkPoint.rigid("-z^(1/2)", view=OVER_LAURENT)
        assert a == b and hash(a) == hash(b)
        assert BerkPoint.rigid("z^(1/2)") != BerkPoint.rigid("-z^(1/2)")

    def test_text_round_trip(self):
        x = Z("z^2 - (1/2)*z^(5/2)", 3)
        assert BerkPoint.parse(str(x)) == x
        assert BerkPoint.from_json(x.to_json()) == x

    def test_ball_containment(self):
        B = Ball.closed(S("0"), 2)
        assert B.contains_point(BerkPoint.rigid("z^2"))
        assert not B.contains_point(BerkPoint.rigid("z"))
        assert B.contains_ball(Ball.closed(S("z^2"), 6))


# properties ------------------------------------------------------------------


@st.composite
def type2(draw, lo=Fraction(1, 4), hi=6):
    c = draw(series(lo=0, hi=6, max_terms=3, exact=True))
    t = draw(exponents(0, hi, (1, 2, 3, 4)))
    assume(t >= lo)
    return BerkPoint(c, t)


@settings(max_examples=60, deadline=None)
@given(type2())
def test_alpha_convexity_bounds(x):
    """alpha <= t <= m(x) * alpha at every breakpoint of the segment to the Gauss point."""
    prof = x.approx_sequence()
    for s in list(prof.breakpoints[1:]) + [x.t]:
        y = x.with_t(s)
        a = y.alpha()
        assert a <= s <= y.multiplicity() * a


@settings(max_examples=60, deadline=None)
@given(type2())
def test_generic_multiplicity_divisible(x):
    assert x.generic_multiplicity() % x.multiplicity() == 0


@settings(max_examples=60, deadline=None)
@given(type2(), st.integers(1, 4))
def test_order_and_wedge(x, drop):
    y = x.with_t(max(Fraction(0), x.t - drop))
    assert x.leq(y)
    w = x.wedge(y)
    assert w == y
    assert x.wedge(x) == x


@settings(max_examples=40, deadline=None)
@given(type2(), st.integers(0, 10**9), st.sampled_from([Fraction(1, 2), 1, 2]))
def test_skewness_comparison(x, seed, drop):
    """alpha(x')/alpha(x) <= 1 <= g_P(x)/g_P(x') <= alpha(x)/alpha(x') for x <= x'."""
    x2 = x.with_t(x.t - drop) if x.t > drop else x.with_t(x.t / 2)
    P, _ = random_root_case(random.Random(seed))
    try:
        g1, ok1 = x.log_abs_poly(P)
        g2, ok2 = x2.log_abs_poly(P)
    except SplittingFieldRequired:
        assume(False)
    assume(ok1 and ok2 and g2 > 0)
    a1, a2 = x.alpha(), x2.alpha()
    assert a2 <= a1
    assert 1 <= g1 / g2 <= a1 / a2


@settings(max_examples=40, deadline=None)
@given(type2(), st.lists(st.integers(-3, 3).filter(bool), min_size=2, max_size=6, unique=True))
def test_unique_low_multiplicity_direction(x, coeffs):
    """Off one tangent direction every rigid point has multiplicity at least b(x)."""
    m, b = x.multiplicity(), x.generic_multiplicity()
    assume(m < b)
    at = {a: BerkPoint.rigid(x.center + PuiseuxSeries.monomial(a, x.t)).multiplicity() for a in coeffs}
    assert all(v >= b for v in at.values())
    assert BerkPoint.rigid(x.center).multiplicity() == m
