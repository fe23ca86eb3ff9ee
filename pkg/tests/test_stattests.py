import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from evtad.errors import DataError, NumericalError
from evtad.evt import fit_gpd, sample_gpd
from evtad.stattests import (AD_GAMMAS, _make_report, _table_p_value,
                             anderson_darling_gpd, anderson_darling_statistic,
                             shapiro_wilk)

# the 11 weight readings from the original normality-test literature;
# the published statistic is 0.79
WEIGHTS_11 = np.array([148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236],
                      dtype=float)


class TestShapiroWilk:
    def test_published_reference_vector(self):
        rep = shapiro_wilk(WEIGHTS_11)
        assert rep.statistic == pytest.approx(0.789, abs=5e-4)
        # cross-check against an independent implementation of the same
        # approximation
        w_ref, p_ref = scipy.stats.shapiro(WEIGHTS_11)
        assert rep.statistic == pytest.approx(w_ref, abs=1e-8)
        assert rep.p_value == pytest.approx(p_ref, rel=1e-4)

    def test_agrees_with_reference_implementation(self):
        worst_w = worst_p = 0.0
        for k in range(20):
            rng = np.random.default_rng(k)
            n = int(rng.integers(10, 3000))
            x = rng.exponential(2.0, n) if k % 2 else rng.normal(3.0, 2.0, n)
            rep = shapiro_wilk(x)
            w_ref, p_ref = scipy.stats.shapiro(x)
            worst_w = max(worst_w, abs(rep.statistic - w_ref))
            if p_ref > 1e-12:
                worst_p = max(worst_p, abs(rep.p_value - p_ref) / p_ref)
        assert worst_w < 1e-8
        assert worst_p < 1e-3

    def test_rejects_exponential(self):
        x = np.random.default_rng(42).exponential(1.0, 5000)
        rep = shapiro_wilk(x)
        assert rep.p_value < 1e-10
        assert rep.reject_null

    def test_retains_normal(self):
        rejections = 0
        for ss in np.random.SeedSequence(2718).spawn(50):
            x = np.random.default_rng(ss).standard_normal(5000)
            rejections += shapiro_wilk(x).reject_null
        assert rejections <= 1

    def test_exact_affine_invariance(self):
        x = np.random.default_rng(3).exponential(1.0, 200)
        w0 = shapiro_wilk(x).statistic
        w1 = shapiro_wilk(3.5 * x + 11.0).statistic
        assert w1 == pytest.approx(w0, rel=1e-12)

    def test_w_at_most_one_and_near_one_on_normal_scores(self):
        # exact normal quantiles order perfectly; W approaches 1
        n = 50
        hazen = scipy.stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        rep = shapiro_wilk(hazen)
        assert rep.statistic <= 1.0
        assert rep.statistic > 0.999
        blom = scipy.stats.norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
        assert shapiro_wilk(blom).statistic > 0.998

    def test_small_n_exact_branch(self):
        rep = shapiro_wilk(np.array([1.0, 2.0, 2.5]))
        assert rep.n == 3
        assert 0.0 <= rep.p_value <= 1.0
        w_ref, _ = scipy.stats.shapiro(np.array([1.0, 2.0, 2.5]))
        assert rep.statistic == pytest.approx(w_ref, abs=1e-8)

    def test_n_bounds(self):
        with pytest.raises(DataError):
            shapiro_wilk(np.array([1.0, 2.0]))
        with pytest.raises(DataError):
            shapiro_wilk(np.zeros(5001))

    def test_zero_variance(self):
        with pytest.raises(NumericalError, match="zero-variance"):
            shapiro_wilk(np.full(20, 3.0))

    @given(seed=st.integers(0, 200), n=st.integers(12, 400))
    @settings(max_examples=40, deadline=None)
    def test_p_value_in_unit_interval(self, seed, n):
        x = np.random.default_rng(seed).normal(size=n)
        rep = shapiro_wilk(x)
        assert 0.0 <= rep.p_value <= 1.0
        assert rep.reject_null == (rep.p_value < rep.alpha)


class TestReportClamping:
    def test_tiny_p_clamped_with_marker(self):
        rep = _make_report("x", 1.0, 0.0, 1e-3, "m", 10)
        assert rep.p_value == 1e-300
        assert rep.p_display == "< 1e-300"
        assert rep.reject_null

    def test_normal_p_reported_verbatim(self):
        rep = _make_report("x", 1.0, 0.25, 1e-3, "m", 10)
        assert rep.p_display == "0.25"
        assert not rep.reject_null


class TestAndersonDarlingStatistic:
    def test_minimal_discrepancy_configuration(self):
        # data placed exactly at the fitted-GPD quantiles of (i-0.5)/n is
        # the best-case ordering; its A2 sits far below the median (50%)
        # critical value, which is ~0.38 at this shape
        gamma, sigma, n = 0.2, 1.5, 200
        u = (np.arange(1, n + 1) - 0.5) / n
        y = (sigma / gamma) * ((1 - u) ** -gamma - 1.0)
        a2 = anderson_darling_statistic(y, gamma, sigma)
        assert a2 < 0.38
        rep = anderson_darling_gpd(y, gamma, sigma)
        assert rep.p_value >= 0.5

    def test_support_violation(self):
        with pytest.raises(DataError, match="support"):
            anderson_darling_statistic(np.linspace(0.1, 3.0, 20), -0.5, 1.0)

    def test_needs_ten(self):
        with pytest.raises(DataError, match=">= 10"):
            anderson_darling_statistic(np.ones(5), 0.1, 1.0)


class TestAndersonDarlingGpd:
    def test_table_self_consistency(self):
        rejections = 0
        trials = 60
        for ss in np.random.SeedSequence(555).spawn(trials):
            rng = np.random.default_rng(ss)
            y = sample_gpd(rng, 0.2, 2.0, 1000)
            g, s = fit_gpd(y)
            rep = anderson_darling_gpd(y, g, s, alpha=0.05)
            assert rep.method.startswith("table")
            rejections += rep.p_value < 0.05
        assert rejections <= 8  # ~3 expected at the 5% level

    def test_bootstrap_self_consistency(self):
        rejections = 0
        trials = 30
        for ss in np.random.SeedSequence(556).spawn(trials):
            rng = np.random.default_rng(ss)
            y = sample_gpd(rng, 0.9, 1.0, 250)  # shape outside the table
            g, s = fit_gpd(y)
            rep = anderson_darling_gpd(y, g, s, alpha=0.05, n_bootstrap=999, seed=17)
            assert rep.method == "bootstrap-999"
            rejections += rep.p_value < 0.05
        assert rejections <= 5  # ~1.5 expected at the 5% level

    def test_wrong_distribution_rejected_by_bootstrap(self):
        # gaussian-tail excesses against a deliberately wrong heavy shape
        rng = np.random.default_rng(99)
        x = rng.standard_normal(10_000)
        t = np.quantile(x, 0.98)
        excesses = x[x > t] - t
        rep = anderson_darling_gpd(excesses, 5.0, 1.0, n_bootstrap=1999, seed=5)
        assert rep.method == "bootstrap-1999"
        assert rep.p_value < 0.001
        assert rep.reject_null

    def test_forced_table_out_of_range(self):
        y = sample_gpd(np.random.default_rng(0), 0.2, 1.0, 100)
        with pytest.raises(DataError, match="outside tabulated range"):
            anderson_darling_gpd(y, 2.0, 1.0, method="table")

    def test_bootstrap_minimum_size(self):
        y = sample_gpd(np.random.default_rng(0), 0.2, 1.0, 100)
        with pytest.raises(DataError, match=">= 999"):
            anderson_darling_gpd(y, 0.2, 1.0, method="bootstrap", n_bootstrap=100)

    def test_bootstrap_deterministic(self):
        y = sample_gpd(np.random.default_rng(1), 0.1, 1.0, 120)
        g, s = fit_gpd(y)
        r1 = anderson_darling_gpd(y, g, s, method="bootstrap", n_bootstrap=999, seed=3)
        r2 = anderson_darling_gpd(y, g, s, method="bootstrap", n_bootstrap=999, seed=3)
        assert r1 == r2

    def test_report_round_trip_fields(self):
        y = sample_gpd(np.random.default_rng(1), 0.1, 1.0, 500)
        g, s = fit_gpd(y)
        rep = anderson_darling_gpd(y, g, s)
        d = rep.to_dict()
        assert d["test"] == "anderson-darling-gpd"
        assert d["reject_null"] == (d["p_value"] < d["alpha"])


class TestTableInterpolation:
    def test_interpolates_between_levels(self):
        p_mid, how = _table_p_value(0.6, 0.0)
        assert 0.1 < p_mid < 0.5
        assert how == "table"

    def test_extrapolates_extreme_statistic(self):
        p, how = _table_p_value(10.0, 0.0)
        assert p < 1e-4
        assert how == "table-extrapolated"

    def test_clamps_tiny_statistic(self):
        p, how = _table_p_value(0.01, 0.0)
        assert p == 0.99
        assert how == "table-clamped"

    def test_gamma_rows_cover_declared_range(self):
        assert AD_GAMMAS[0] == -0.5 and AD_GAMMAS[-1] == 0.5
