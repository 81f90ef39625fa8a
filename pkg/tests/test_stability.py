import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levycross import (
    DomainError,
    LevyModel,
    NormingPair,
    ParetoTails,
    RangeError,
    brownian_drift,
    c_alpha,
    classify,
    compound_poisson_with_drift,
    drift_minus_poisson,
    drift_only,
    g_func,
    invert_C,
    log_squared_model,
    rv_index_estimate,
    solve_norming_B,
)


class TestClassify:
    def test_pure_drift(self):
        rep = classify(drift_only(2.0))
        assert rep.class_in_probability == "PRS"
        assert rep.class_almost_sure == "stable"
        assert "d_X=2" in rep.certificate
        assert classify(drift_only(-1.0)).class_in_probability == "NRS"
        assert classify(drift_only(0.0)).class_in_probability == "none"

    def test_gaussian_part_blocks_small_time(self):
        rep = classify(brownian_drift(1.0, 1.0))
        assert rep.class_in_probability == "none"
        assert rep.class_almost_sure == "not_stable"

    def test_poisson_drift(self):
        rep = classify(drift_minus_poisson(1.0))
        assert rep.class_in_probability == "PRS"
        assert rep.class_almost_sure == "stable"

    def test_log_squared_probe_grows_like_log(self):
        # probe A(x)/(x pibar(x)) = |log x| at the formula's small-x end
        rep = classify(log_squared_model(1.0))
        assert rep.class_in_probability == "PRS"
        assert rep.class_almost_sure == "not_stable"  # zero drift
        xs, vals = zip(*rep.diagnostics)
        k = 8
        assert vals[k - 1] == pytest.approx(abs(math.log(xs[k - 1])), rel=1e-9)

    def test_zero_drift_compound_poisson_is_none(self):
        m = compound_poisson_with_drift(0.0, lam_plus=1.0, alpha_plus=1.0)
        assert classify(m).class_in_probability == "none"

    def test_unbounded_variation_without_drift_is_none(self):
        m = LevyModel(gamma=0.0, jumps=ParetoTails(c_plus=1.0, beta_plus=1.5, x0=1.0))
        assert classify(m).class_in_probability == "none"

    def test_large_time_uses_mean(self):
        rep = classify(drift_minus_poisson(2.0), "large_time")
        assert rep.class_in_probability == "PRS"
        assert rep.class_almost_sure == "stable"
        assert "mu=1" in rep.certificate
        # zero mean: oscillates, no stability
        rep0 = classify(drift_minus_poisson(1.0), "large_time")
        assert rep0.class_in_probability == "none"
        assert rep0.class_almost_sure == "not_stable"

    def test_large_time_ignores_gaussian_part(self):
        rep = classify(brownian_drift(1.0, 4.0), "large_time")
        assert rep.class_in_probability == "PRS"

    def test_stable_implies_prs_or_nrs(self, model_zoo):
        for regime in ("small_time", "large_time"):
            for name, m in model_zoo.items():
                rep = classify(m, regime)
                if rep.class_almost_sure == "stable":
                    assert rep.class_in_probability in ("PRS", "NRS"), (name, regime)


class TestNormingB:
    def test_drift_only_exact(self):
        for g in (0.5, 2.0, -3.0):
            for t in (1e-8, 1e-2, 1.0):
                assert solve_norming_B(drift_only(g), t) == abs(g) * t

    def test_log_squared_fixed_point(self):
        # B solves B = t / |log B|; frozen from an independent scalar iteration
        m = log_squared_model(1.0)
        b = solve_norming_B(m, 1e-6)
        assert b == pytest.approx(6.014491712793974e-08, rel=1e-9)
        assert b == pytest.approx(1e-6 / abs(math.log(b)), rel=1e-9)

    def test_poisson_drift_closed_form(self):
        # A(x) = 1 - x gives the fixed point B = t/(1+t)
        m = drift_minus_poisson(1.0)
        for t in (1e-6, 1e-3, 0.3):
            assert solve_norming_B(m, t) == pytest.approx(t / (1.0 + t), rel=1e-9)

    def test_slope_approaches_drift(self):
        m = drift_minus_poisson(1.0)
        t = 1e-6
        assert solve_norming_B(m, t) / t == pytest.approx(1.0, abs=2e-6)


class TestNormingPair:
    def test_drift_only_inversion(self):
        pair = NormingPair.build(drift_only(1.0), 0.5, r_lo=1e-3, r_hi=1e-1)
        assert invert_C(pair, 0.01) == pytest.approx(1e-4, rel=1e-8)
        pair0 = NormingPair.build(drift_only(2.0), 0.0, r_lo=1e-2, r_hi=1.0)
        assert invert_C(pair0, 0.5) == pytest.approx(0.25, rel=1e-8)

    def test_round_trip(self):
        m = drift_minus_poisson(1.0)
        pair = NormingPair.build(m, 0.5, r_lo=1e-4, r_hi=1e-1)
        for t in np.geomspace(pair.t_lo * 2, pair.t_hi / 2, 12):
            r = pair.B(t) / t**0.5
            assert invert_C(pair, r) == pytest.approx(t, rel=1e-8)

    def test_monotone_ratio_grid(self):
        pair = NormingPair.build(log_squared_model(1.0), 0.0, r_lo=1e-8, r_hi=1e-4)
        assert np.all(np.diff(pair.ratio_grid) > 0)

    def test_log_example_inverse_matches_closed_form_at_b0(self):
        # for this construction B(C) = r forces C(r) = r |log r| exactly
        pair = NormingPair.build(log_squared_model(1.0), 0.0, r_lo=1e-8, r_hi=1e-4)
        r = 1e-6
        assert invert_C(pair, r) == pytest.approx(r * abs(math.log(r)), rel=1e-7)

    def test_range_error_outside_bracket(self):
        pair = NormingPair.build(drift_only(1.0), 0.0, r_lo=1e-3, r_hi=1e-1)
        with pytest.raises(RangeError):
            invert_C(pair, 1e3)

    def test_drift_scaling(self):
        # doubling the drift scales C by 2^{-1/(1-b)} exactly
        for b in (0.0, 0.5):
            p1 = NormingPair.build(drift_only(1.0), b, r_lo=1e-3, r_hi=1e-1)
            p2 = NormingPair.build(drift_only(2.0), b, r_lo=1e-3, r_hi=1e-1)
            for r in (1e-3, 1e-2, 1e-1):
                scale = 2.0 ** (-1.0 / (1.0 - b))
                assert invert_C(p2, r) == pytest.approx(
                    scale * invert_C(p1, r), rel=1e-7
                )


class TestRVIndex:
    def test_exact_square(self):
        xs = np.geomspace(1e-2, 1e2, 8)
        assert rv_index_estimate(list(zip(xs, xs**2))) == pytest.approx(2.0, abs=1e-9)

    def test_drift_only_c_is_exact_power(self):
        pair = NormingPair.build(drift_only(1.0), 0.5, r_lo=1e-4, r_hi=1e-1)
        rs = np.geomspace(1e-4, 1e-1, 8)
        slope = rv_index_estimate([(r, invert_C(pair, r)) for r in rs])
        assert slope == pytest.approx(2.0, abs=1e-6)

    def test_needs_enough_points(self):
        with pytest.raises(DomainError):
            rv_index_estimate([(1.0, 1.0)] * 4)
        with pytest.raises(DomainError):
            rv_index_estimate([(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)])

    @given(st.floats(min_value=0.2, max_value=3.0),
           st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=50, deadline=None)
    def test_recovers_any_power_law(self, scale, index):
        xs = np.geomspace(1e-3, 1e3, 11)
        fs = scale * xs**index
        assert rv_index_estimate(list(zip(xs, fs))) == pytest.approx(index, abs=1e-8)


class TestGFunc:
    def test_value(self):
        assert g_func(0.5, 1.0) == pytest.approx(math.sqrt(2.0) - 1.0, rel=1e-14)

    def test_monotone_and_limits(self):
        xs = np.geomspace(1e-9, 1e9, 1000)
        for b in (0.2, 0.5, 0.8):
            vals = g_func(b, xs)
            assert np.all(np.diff(vals) > 0)
            assert vals[0] < 2.0 * xs[0] ** (1.0 - b)  # g ~ b x^{1-b} at 0
            assert vals[-1] > 1.0 - 1.1 * xs[-1] ** (-b)  # 1 - g ~ x^{-b} at inf
            assert np.all((vals > 0) & (vals < 1))

    def test_round_trip_value(self):
        assert c_alpha(0.5, math.sqrt(2.0) - 1.0) == pytest.approx(1.0, abs=1e-10)

    def test_grid_scan_oracle(self):
        # independent dense-scan inversion for b=0.3, alpha=0.05
        b, alpha = 0.3, 0.05
        xs = np.geomspace(1e-12, 1e3, 400001)
        vals = g_func(b, xs)
        k = int(np.searchsorted(vals, alpha))
        lo, hi = xs[k - 1], xs[k]
        c = c_alpha(b, alpha)
        assert lo <= c <= hi
        assert abs(g_func(b, c) - alpha) <= 1e-12

    @given(st.floats(min_value=0.1, max_value=0.9),
           st.floats(min_value=1e-6, max_value=0.9))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_tolerance(self, b, alpha):
        # (b, alpha) kept inside the solver's bracket contract: c <= 1e12
        assert abs(g_func(b, c_alpha(b, alpha)) - alpha) <= 1e-12

    def test_bracket_growth_contract(self):
        # alpha near 1 with small b pushes c beyond 1e12: declared solver error
        from levycross import SolverError
        with pytest.raises(SolverError):
            c_alpha(0.25, 0.99999)

    def test_small_alpha_asymptote(self):
        # c(alpha)/alpha^{1/(1-b)} -> b^{-1/(1-b)} as alpha -> 0
        for b in (0.2, 0.5, 0.8):
            ratio = c_alpha(b, 1e-6) / (1e-6) ** (1.0 / (1.0 - b))
            assert ratio == pytest.approx(b ** (-1.0 / (1.0 - b)), rel=0.05)

    def test_domain(self):
        with pytest.raises(DomainError):
            g_func(1.5, 1.0)
        with pytest.raises(DomainError):
            c_alpha(0.5, 1.5)
