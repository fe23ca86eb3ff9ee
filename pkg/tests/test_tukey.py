import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evtad.errors import DataError
from evtad.series import ErrorSeries
from evtad.tukey import detect_tukey, fit_tukey


def _es(values):
    values = np.asarray(values, dtype=float)
    return ErrorSeries(np.arange(len(values)), values)


class TestFitTukey:
    def test_formula(self):
        fit = fit_tukey(np.array([1.0, 1.0, 3.0, 3.0]))
        assert fit.q1 == 1.0 and fit.q3 == 3.0
        assert fit.tau_t == 3.0 + 3.0 * 2.0 == 9.0

    def test_constant_degenerate(self):
        fit = fit_tukey(np.full(10, 2.5))
        assert fit.q1 == fit.q3 == fit.tau_t == 2.5
        assert len(detect_tukey(fit, _es(np.full(10, 2.5)))) == 0

    def test_interpolated_percentiles(self):
        # independent oracle: position (n-1)p between order statistics
        x = np.arange(100.0)
        fit = fit_tukey(x)
        assert fit.q1 == pytest.approx(24.75)
        assert fit.q3 == pytest.approx(74.25)
        assert fit.tau_t == pytest.approx(222.75)

    def test_too_few(self):
        with pytest.raises(DataError, match=">= 4"):
            fit_tukey(np.array([1.0, 2.0, 3.0]))

    def test_bad_multiplier(self):
        with pytest.raises(DataError, match="multiplier"):
            fit_tukey(np.arange(10.0), multiplier=0.0)


class TestDetectTukey:
    def test_nothing_above_fence(self):
        fit = fit_tukey(np.arange(10.0))
        assert len(detect_tukey(fit, _es(np.arange(10.0)))) == 0

    def test_single_spike(self):
        base = np.concatenate([np.arange(20.0), [1000.0]])
        fit = fit_tukey(base)
        flags = detect_tukey(fit, _es(base))
        np.testing.assert_array_equal(flags, [20])

    def test_exponential_far_out_fraction(self):
        # oracle: for exp(1), P(X > tau) = exp(-tau); with Q1=-ln(.75),
        # Q3=-ln(.25) the far-out fence sits near 4.68, so ~0.9% exceed it
        rng = np.random.default_rng(2024)
        x = rng.exponential(1.0, 10_000)
        fit = fit_tukey(x)
        frac = len(detect_tukey(fit, _es(x))) / len(x)
        assert 0.001 <= frac <= 0.02

    @given(st.lists(st.floats(0.0, 1e6), min_size=4, max_size=200),
           st.permutations(range(8)))
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariance(self, values, perm):
        values = np.asarray(values)
        shuffled = values.copy()
        rng = np.random.default_rng(sum(perm))
        rng.shuffle(shuffled)
        assert fit_tukey(values).tau_t == pytest.approx(fit_tukey(shuffled).tau_t,
                                                        rel=1e-12, abs=1e-12)

    @given(st.lists(st.floats(0.0, 1e3), min_size=4, max_size=120),
           st.floats(0.01, 100.0))
    @settings(max_examples=80, deadline=None)
    def test_affine_equivariance_preserves_flags(self, values, c):
        x = np.asarray(values)
        fit1 = fit_tukey(x)
        fit2 = fit_tukey(c * x)
        assert fit2.tau_t == pytest.approx(c * fit1.tau_t, rel=1e-9, abs=1e-12)
        # flags can only disagree within rounding distance of the fence
        # (e.g. [a, a, a, b] puts the fence exactly at b)
        f1 = set(detect_tukey(fit1, _es(x)).tolist())
        f2 = set(detect_tukey(fit2, _es(c * x)).tolist())
        for idx in f1 ^ f2:
            assert abs(x[idx] - fit1.tau_t) <= 1e-9 * (1.0 + abs(fit1.tau_t))

    @given(st.lists(st.floats(0.0, 1e4), min_size=4, max_size=120))
    @settings(max_examples=60, deadline=None)
    def test_inner_fence_flags_superset(self, values):
        x = np.asarray(values)
        far = set(detect_tukey(fit_tukey(x, 3.0), _es(x)).tolist())
        inner = set(detect_tukey(fit_tukey(x, 1.5), _es(x)).tolist())
        assert far <= inner
