import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewberk.coeffs import QI
from skewberk.errors import InsufficientPrecision, SplittingFieldRequired
from skewberk.newton import exact_roots, newton_puiseux, residual
from skewberk.series import INF, PuiseuxSeries

from .oracles import check_root_case, random_root_case
from .strategies import power_series

S = PuiseuxSeries.parse


class TestExamples:
    def test_difference_of_squares(self):
        roots = newton_puiseux([S("-z^4"), 0, 1], 10)
        assert sorted(str(r.root) for r in roots) == ["-z^2", "z^2"]
        assert all(r.root.trunc == INF for r in roots)

    def test_leading_coefficient_not_one(self):
        roots = newton_puiseux([0, S("-6*z"), 3], 10)
        assert {str(r.root) for r in roots} == {"0", "2*z"}

    def test_galois_pair(self):
        # (w - z^2)^2 - z^5
        roots = newton_puiseux([S("z^4 - z^5"), S("-2*z^2"), 1], 10)
        got = {r.root.truncate(10) for r in roots}
        assert got == {S("z^2 + z^(5/2)").truncate(10), S("z^2 - z^(5/2)").truncate(10)}

    def test_irrational_constant_needs_splitting_field(self):
        with pytest.raises(SplittingFieldRequired):
            newton_puiseux([-2, 0, 1], 5)

    def test_gaussian_constants_split(self):
        roots = newton_puiseux([1, 0, 1], 5)
        assert {r.root.coeff(0) for r in roots} == {QI(0, 1), QI(0, -1)}

    def test_double_root(self):
        roots = newton_puiseux([S("z^2"), S("-2*z"), 1], 10)
        assert [(str(r.root), r.multiplicity) for r in roots] == [("z", 2)]

    def test_truncated_coefficients_raise(self):
        with pytest.raises(InsufficientPrecision):
            newton_puiseux([PuiseuxSeries.zero(trunc=2), PuiseuxSeries({0: 1}), 1], 10)

    def test_exact_roots_quadratic(self):
        assert sorted(exact_roots([QI(-1), QI(0), QI(1)]), key=lambda r: r[0].re) == [(QI(-1), 1), (QI(1), 1)]


class TestSoundness:
    def test_seeded_random_roots(self):
        rng = random.Random(20)
        for _ in range(30):
            P, roots = random_root_case(rng)
            ok, msg = check_root_case(P, roots)
            assert ok, msg

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_roots_property(self, seed):
        P, roots = random_root_case(random.Random(seed))
        ok, msg = check_root_case(P, roots, prec=12)
        assert ok, msg

    @settings(max_examples=40, deadline=None)
    @given(st.lists(power_series(lo=0, hi=4), min_size=1, max_size=3))
    def test_multiplicities_sum_to_degree(self, cs):
        P = cs + [PuiseuxSeries.one()]
        roots = newton_puiseux(P, 8, numeric=True)
        assert sum(r.multiplicity for r in roots) == len(cs)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(power_series(lo=0, hi=4), min_size=1, max_size=3))
    def test_residuals_vanish_to_precision(self, cs):
        P = cs + [PuiseuxSeries.one()]
        try:
            roots = newton_puiseux(P, 8)
        except SplittingFieldRequired:
            return
        # roots of a monic P over k[[z]] are integral, so one factor z^8-close suffices
        for r in roots:
            res = residual(P, r.root)
            assert res.is_zero() or res.ord_lower_bound() >= 8
