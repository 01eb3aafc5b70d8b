import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewberk.coeffs import QI
from skewberk.errors import IndeterminateOrder, RootsOfUnityUnavailable, SeriesParseError
from skewberk.series import INF, PuiseuxSeries

from .strategies import series

S = PuiseuxSeries.parse


class TestOrder:
    def test_polynomial(self):
        assert S("z^2 - z^3").ord() == 2

    def test_exact_zero_is_infinite(self):
        assert PuiseuxSeries.zero().ord() == INF

    def test_fractional(self):
        assert S("-4*z^(3/5)").ord() == Fraction(3, 5)

    def test_truncated_zero_is_indeterminate(self):
        with pytest.raises(IndeterminateOrder):
            PuiseuxSeries.zero(trunc=3).ord()


class TestArithmetic:
    def test_monomial_product(self):
        assert S("z^2") * S("z^3") == S("z^5")

    def test_square_root_squared(self):
        assert S("z^(1/2)") ** 2 == S("z")

    def test_critical_value_expression(self):
        c1 = S("2*z^(1/5)")
        assert c1**3 - 3 * S("z^(1/5)") * c1**2 == S("-4*z^(3/5)")

    def test_mul_truncation_rule(self):
        a = PuiseuxSeries({1: 1}, 4)
        b = PuiseuxSeries({2: 1, 3: 1}, 5)
        # min(ord a + trunc b, ord b + trunc a) = min(6, 6)
        assert (a * b).trunc == 6

    def test_terms_at_trunc_dropped(self):
        s = PuiseuxSeries({1: 1, 5: 1}, 5)
        assert s.support() == [1]

    def test_inverse_round_trip(self):
        s = S("1 + z - 2*z^(3/2)")
        inv = s.inverse(prec=8)
        assert (s * inv).truncate(8) == PuiseuxSeries.one().with_trunc(8)

    def test_gaussian_coefficients(self):
        s = S("(1+2*i)*z")
        assert (s * s).coeff(2) == QI(-3, 4)


class TestRamify:
    def test_ramify(self):
        assert S("z^2").ramify(4) == S("z^(1/2)")

    def test_ramify_identity(self):
        s = S("z + 3*z^(7/2)")
        assert s.ramify(1) == s

    def test_ramify_linear(self):
        assert S("2*z").ramify(5) == S("2*z^(1/5)")

    def test_unramify(self):
        assert S("z^(1/2)").unramify(2) == S("z")
        assert S("-4*z^(3/5)").unramify(5) == S("-4*z^3")

    def test_trunc_scales(self):
        s = PuiseuxSeries({2: 1}, 8)
        assert s.ramify(4).trunc == 2


class TestGalois:
    def test_integral_series_single_conjugate(self):
        assert S("z^2").galois_conjugates() == [S("z^2")]

    def test_square_root(self):
        assert set(S("z^(1/2)").galois_conjugates()) == {S("z^(1/2)"), S("-z^(1/2)")}

    def test_fourth_roots(self):
        conj = S("z^(1/2) + z^(3/4)").galois_conjugates()
        assert len(set(conj)) == 4
        expected = {
            S("z^(1/2) + z^(3/4)"),
            S("z^(1/2) - z^(3/4)"),
            S("-z^(1/2) + (1*i)*z^(3/4)"),
            S("-z^(1/2) - (1*i)*z^(3/4)"),
        }
        assert set(conj) == expected

    def test_cube_roots_unavailable_exactly(self):
        with pytest.raises(RootsOfUnityUnavailable):
            S("z^(1/3)").galois_conjugates()

    def test_cube_roots_numeric(self):
        conj = S("z^(1/3)").galois_conjugates(numeric=True)
        assert len(conj) == 3


class TestText:
    @pytest.mark.parametrize(
        "text",
        ["0", "1", "-z", "(1-2*i)*z^(-1) - 3/2*z^2 + O(z^(7/2))", "z^(1/2) + (1*i)*z^(3/4)", "O(z^3)"],
    )
    def test_round_trip(self, text):
        s = S(text)
        assert S(str(s)) == s

    def test_parse_error_position(self):
        with pytest.raises(SeriesParseError) as info:
            S("z^^2")
        assert info.value.pos == 2
        assert "^" in str(info.value)

    def test_parse_error_trailing(self):
        with pytest.raises(SeriesParseError):
            S("z + ")


@settings(max_examples=80, deadline=None)
@given(series(exact=True), series(exact=True))
def test_ord_is_additive(s, t):
    assert (s * t).ord() == s.ord() + t.ord()


@settings(max_examples=80, deadline=None)
@given(series(exact=True), series(exact=True))
def test_strong_triangle(s, t):
    total = s + t
    lo = min(s.ord(), t.ord())
    if total.is_zero():
        return
    assert total.ord() >= lo
    if s.ord() != t.ord():
        assert total.ord() == lo


@settings(max_examples=60, deadline=None)
@given(series(), series(), st.integers(1, 6))
def test_ramify_is_multiplicative(s, t, k):
    assert (s * t).ramify(k) == s.ramify(k) * t.ramify(k)


@settings(max_examples=60, deadline=None)
@given(series(), st.integers(1, 6))
def test_unramify_inverts_ramify(s, k):
    assert s.ramify(k).unramify(k) == s


@settings(max_examples=60, deadline=None)
@given(series(exact=True, dens=(1, 2, 4)))
def test_conjugates_share_support(s):
    conj = s.galois_conjugates()
    m = math.lcm(*(Fraction(e).denominator for e in s.support()))
    assert len(set(conj)) == m
    for c in conj:
        assert c.support() == s.support()
        assert c.ord() == s.ord()


@settings(max_examples=60, deadline=None)
@given(series())
def test_text_round_trip(s):
    assert PuiseuxSeries.parse(str(s)) == s
