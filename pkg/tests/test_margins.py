"""Margin models: latent boxes, quantiles, fitting, serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from dvinets.errors import InputError, UnknownCategoryError
from dvinets.margins import (
    CONTINUOUS,
    DISCRETE,
    ContinuousMargin,
    OrdinalMargin,
    bounds,
    continuous_pit,
    fit_empirical_ordinal,
    margin_from_json,
    margin_to_json,
    normalize_kinds,
    quantile,
)


def _margin_abc():
    return OrdinalMargin.from_pmf([0.0, 1.0, 2.0], [0.2, 0.5, 0.3])


class TestOrdinalMargin:
    def test_bounds_are_cdf_intervals(self):
        m = _margin_abc()
        assert m.bounds(0.0) == (0.0, 0.2)
        a, b = m.bounds(1.0)
        assert a == 0.2 and abs(b - 0.7) < 1e-15
        a, b = m.bounds(2.0)
        assert b == 1.0

    def test_box_width_equals_pmf_bitwise(self):
        # cdf is primary and pmf its first difference, so the box width
        # b - a reproduces pmf exactly in floating point, not just approximately
        rng = np.random.default_rng(0)
        for _ in range(20):
            k = rng.integers(2, 9)
            w = rng.dirichlet(np.ones(k))
            m = OrdinalMargin.from_pmf(np.arange(k, dtype=float), w)
            for i, v in enumerate(m.support):
                a, b = m.bounds(v)
                assert b - a == m.pmf[i]

    def test_bounds_array_matches_scalar(self):
        m = _margin_abc()
        y = np.array([2.0, 0.0, 1.0, 1.0])
        a, b = m.bounds_array(y)
        for t, v in enumerate(y):
            sa, sb = m.bounds(v)
            assert a[t] == sa and b[t] == sb

    def test_unknown_category_raises(self):
        m = _margin_abc()
        with pytest.raises(UnknownCategoryError):
            m.bounds(7.0)
        with pytest.raises(UnknownCategoryError):
            m.bounds_array(np.array([0.0, 7.0]))

    def test_quantile_is_right_continuous_inverse(self):
        # smallest v with G(v) > u: at u exactly on a cdf step the next
        # category is returned
        m = _margin_abc()
        assert m.quantile(0.0) == 0.0
        assert m.quantile(0.19) == 0.0
        assert m.quantile(0.2) == 1.0
        assert m.quantile(0.699) == 1.0
        assert m.quantile(m.cdf[1]) == 2.0
        assert m.quantile(0.999999) == 2.0

    def test_quantile_rejects_out_of_range(self):
        m = _margin_abc()
        with pytest.raises(InputError):
            m.quantile(-0.1)
        with pytest.raises(InputError):
            m.quantile(1.0)

    def test_validation_rejects_bad_margins(self):
        with pytest.raises(InputError):
            OrdinalMargin.from_pmf([0.0, 1.0], [0.5, 0.0])  # zero mass
        with pytest.raises(InputError):
            OrdinalMargin(np.array([1.0, 0.0]), np.array([0.5, 1.0]))  # unsorted
        with pytest.raises(InputError):
            OrdinalMargin(np.array([0.0, 1.0]), np.array([0.5, 0.9]))  # cdf != 1
        with pytest.raises(InputError):
            OrdinalMargin(np.array([]), np.array([]))

    def test_json_round_trip(self):
        m = _margin_abc()
        m2 = margin_from_json(margin_to_json(m))
        assert np.array_equal(m.support, m2.support)
        assert np.allclose(m.cdf, m2.cdf, rtol=0, atol=1e-15)
        assert m2.kind == DISCRETE


class TestFitEmpiricalOrdinal:
    def test_frequencies(self):
        m = fit_empirical_ordinal(np.array([0, 0, 1, 1, 0]))
        assert np.array_equal(m.support, [0.0, 1.0])
        assert np.allclose(m.pmf, [0.6, 0.4], rtol=0, atol=1e-15)

    def test_laplace_adds_one_count_over_full_support(self):
        m = fit_empirical_ordinal(
            np.array([0, 0, 1]), full_support=[0, 1, 2], laplace=True
        )
        assert np.array_equal(m.support, [0.0, 1.0, 2.0])
        assert np.allclose(m.pmf, np.array([3, 2, 1]) / 6.0, rtol=0, atol=1e-15)

    def test_laplace_requires_declared_support(self):
        with pytest.raises(InputError):
            fit_empirical_ordinal(np.array([0, 1]), laplace=True)
        with pytest.raises(InputError):
            fit_empirical_ordinal(
                np.array([0, 5]), full_support=[0, 1], laplace=True
            )

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(InputError):
            fit_empirical_ordinal(np.array([]))
        with pytest.raises(InputError):
            fit_empirical_ordinal(np.array([0.0, np.nan]))


class TestContinuousMargin:
    def test_plotting_positions(self):
        # order statistics at k/(T+1)
        m = ContinuousMargin.from_sample(np.array([3.0, 1.0, 2.0, 4.0]))
        assert np.array_equal(m.xs, [1.0, 2.0, 3.0, 4.0])
        assert np.allclose(m.ps, np.arange(1, 5) / 5.0, rtol=0, atol=1e-15)

    def test_ties_collapse_to_highest_position(self):
        m = ContinuousMargin.from_sample(np.array([1.0, 1.0, 2.0]))
        assert np.array_equal(m.xs, [1.0, 2.0])
        assert np.allclose(m.ps, [0.5, 0.75], rtol=0, atol=1e-15)

    def test_pit_and_quantile_round_trip(self):
        rng = np.random.default_rng(3)
        y = rng.standard_normal(50)
        m = ContinuousMargin.from_sample(y)
        xs = np.linspace(m.xs[0], m.xs[-1], 17)
        u = m.cdf_value(xs)
        assert np.allclose(m.quantile(u), xs, rtol=0, atol=1e-12)

    def test_pit_clamped_inside_open_interval(self):
        m = ContinuousMargin.from_sample(np.array([0.0, 1.0, 2.0]))
        assert 0.0 < m.cdf_value(-100.0) < 1.0
        assert 0.0 < m.cdf_value(100.0) < 1.0

    def test_parametric_margin_uses_callables(self):
        m = ContinuousMargin.from_cdf(norm.cdf, norm.ppf)
        assert abs(m.cdf_value(0.0) - 0.5) < 1e-15
        assert abs(m.quantile(0.975) - norm.ppf(0.975)) < 1e-12

    def test_parametric_to_json_tabulates_quantile_grid(self):
        m = ContinuousMargin.from_cdf(norm.cdf, norm.ppf)
        obj = m.to_json()
        assert len(obj["xs"]) == 512
        m2 = margin_from_json(obj)
        # tabulated form agrees with the exact ppf away from the tails
        for u in (0.1, 0.35, 0.5, 0.82):
            assert abs(m2.quantile(u) - norm.ppf(u)) < 1e-2

    def test_rejects_degenerate_samples(self):
        with pytest.raises(InputError):
            ContinuousMargin.from_sample(np.array([5.0, 5.0, 5.0]))
        with pytest.raises(InputError):
            ContinuousMargin.from_sample(np.array([1.0, np.inf]))

    def test_module_level_helpers(self):
        m = _margin_abc()
        assert bounds(m, 1.0) == m.bounds(1.0)
        assert quantile(m, 0.5) == m.quantile(0.5)
        c = ContinuousMargin.from_cdf(norm.cdf, norm.ppf)
        assert continuous_pit(c, 1.3) == c.cdf_value(1.3)


class TestNormalizeKinds:
    def test_accepts_valid_tuples(self):
        assert normalize_kinds([DISCRETE, CONTINUOUS], 2) == (DISCRETE, CONTINUOUS)

    def test_none_defaults_to_all_discrete(self):
        assert normalize_kinds(None, 3) == (DISCRETE,) * 3

    def test_rejects_wrong_length_and_unknown(self):
        with pytest.raises(InputError):
            normalize_kinds([DISCRETE], 2)
        with pytest.raises(InputError):
            normalize_kinds(["weird"], 1)

    def test_unknown_margin_json_kind(self):
        with pytest.raises(InputError):
            margin_from_json({"kind": "mystery"})


@st.composite
def ordinal_margins(draw):
    k = draw(st.integers(min_value=2, max_value=8))
    weights = draw(
        st.lists(
            st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
            min_size=k,
            max_size=k,
        )
    )
    w = np.asarray(weights)
    return OrdinalMargin.from_pmf(np.arange(k, dtype=float), w / w.sum())


class TestOrdinalProperties:
    @settings(max_examples=60, deadline=None)
    @given(ordinal_margins(), st.floats(min_value=0.0, max_value=0.999999))
    def test_quantile_box_brackets_u(self, m, u):
        v = m.quantile(u)
        a, b = m.bounds(v)
        assert a <= u < b

    @settings(max_examples=60, deadline=None)
    @given(ordinal_margins())
    def test_boxes_partition_unit_interval(self, m):
        a, b = m.bounds_array(m.support)
        assert a[0] == 0.0 and b[-1] == 1.0
        # adjacent boxes share their endpoint bitwise
        assert np.array_equal(b[:-1], a[1:])
