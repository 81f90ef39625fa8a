import io
import math

import numpy as np
import pytest

from levycross import (
    ContractError,
    DomainError,
    LevyModel,
    ParetoTails,
    PathEvents,
    compound_poisson_with_drift,
    drift_minus_poisson,
    drift_only,
    dump_path_csv,
    first_passage,
    log_squared_model,
    passage_pair,
    path_rng,
    running_max_at,
    sample_path,
    value_at,
)
from levycross.pathsim import borrowed_rng


class TestSamplePath:
    def test_no_jumps(self):
        p = sample_path(drift_only(2.5), path_rng(1, 0), 1.0)
        assert p.drift_slope == 2.5
        assert len(p.jump_times) == 0
        assert p.small_jump_bias_bound == 0.0

    def test_poisson_count_statistics(self, poisson_drift):
        # jump count ~ Poisson(10): mean over 1e5 paths within 10 +- 0.03
        n = 100_000
        total = 0
        for i in range(n):
            total += len(sample_path(poisson_drift, borrowed_rng(77, i), 10.0).jump_times)
        assert total / n == pytest.approx(10.0, abs=0.03)

    def test_poisson_sizes_and_slope(self, poisson_drift):
        p = sample_path(poisson_drift, path_rng(5, 3), 20.0)
        assert np.all(p.jump_sizes == -1.0)
        assert p.drift_slope == pytest.approx(1.0, abs=1e-14)
        assert np.all(np.diff(p.jump_times) > 0)
        assert np.all((p.jump_times > 0) & (p.jump_times <= 20.0))

    def test_log_squared_cutoff_support(self):
        # rate pibar(e^-2) = e^2/4; the sampled law keeps the density on the
        # decreasing branch and an atom at 1/e, so sizes lie in (e^-2, 1/e]
        m = log_squared_model(1.0)
        h = math.exp(-2.0)
        count = 0
        for i in range(300):
            p = sample_path(m, borrowed_rng(9, i), 1.0, cutoff_h=h)
            if len(p.jump_sizes):
                assert np.all(p.jump_sizes > h)
                assert np.all(p.jump_sizes <= math.exp(-1.0) + 1e-15)
                count += len(p.jump_sizes)
        # empirical rate within 5 sigma of e^2/4
        rate = math.e**2 / 4.0
        assert count / 300.0 == pytest.approx(rate, abs=5 * math.sqrt(rate / 300.0))

    def test_infinite_activity_needs_cutoff(self):
        with pytest.raises(DomainError):
            sample_path(log_squared_model(1.0), path_rng(1, 0), 1.0, cutoff_h=0.0)

    def test_gaussian_part_rejected(self):
        with pytest.raises(ContractError):
            sample_path(LevyModel(gamma=1.0, sigma2=1.0), path_rng(1, 0), 1.0)

    def test_bias_bound_value(self):
        # horizon * int_{|x|<=h} |x| Pi(dx), via the closed tail form
        m = log_squared_model(1.0)
        h = 1e-3
        p = sample_path(m, path_rng(1, 0), 2.0, cutoff_h=h)
        j = m.jumps
        ref = 2.0 * (j.int_tail_plus(0.0, h) - h * j.pibar_plus(h))
        assert p.small_jump_bias_bound == pytest.approx(ref, rel=1e-12)

    def test_unbounded_variation_bias_is_inf(self):
        m = LevyModel(gamma=0.0, jumps=ParetoTails(c_plus=1.0, beta_plus=1.5, x0=1.0))
        p = sample_path(m, path_rng(1, 0), 1.0, cutoff_h=0.1)
        assert math.isinf(p.small_jump_bias_bound)
        assert np.all(np.abs(p.jump_sizes) > 0.1)

    def test_reproducibility_bit_identical(self, poisson_drift):
        a = sample_path(poisson_drift, path_rng(11, 42), 5.0)
        b = sample_path(poisson_drift, path_rng(11, 42), 5.0)
        assert np.array_equal(a.jump_times, b.jump_times)
        assert np.array_equal(a.jump_sizes, b.jump_sizes)
        c = sample_path(poisson_drift, borrowed_rng(11, 42), 5.0)
        assert np.array_equal(a.jump_times, c.jump_times)


class TestFirstPassage:
    def test_drift_affine_crossing(self):
        p = sample_path(drift_only(2.0), path_rng(1, 0), 1.0)
        rec = first_passage(p, 1.0, 0.0)
        assert rec.passage_time == pytest.approx(0.5, rel=1e-12)
        assert rec.overshoot_ratio == pytest.approx(1.0, rel=1e-9)
        assert not rec.censored and not rec.crossed_by_jump

    def test_drift_curved_crossing(self):
        p = sample_path(drift_only(1.0), path_rng(1, 0), 1.0)
        rec = first_passage(p, 0.5, 0.5)
        assert rec.passage_time == pytest.approx(0.25, rel=1e-12)

    def test_drift_exactness_grid(self):
        # (r/gamma)^{1/(1-b)} over the 3x3x3 grid to 1e-9 relative
        for g in (0.5, 1.0, 2.0):
            for b in (0.0, 0.5, 0.9):
                for r in (0.01, 0.1, 1.0):
                    ref = (r / g) ** (1.0 / (1.0 - b))
                    p = sample_path(drift_only(g), path_rng(1, 0), 10.0 * ref)
                    rec = first_passage(p, r, b)
                    assert rec.passage_time == pytest.approx(ref, rel=1e-9)
                    assert rec.position >= rec.boundary_value

    def test_hand_built_path_crosses_before_jump(self):
        path = PathEvents(1.0, np.array([0.2]), np.array([-1.0]), 1.0, 0.0, 0.0)
        rec = first_passage(path, 0.1, 0.0)
        assert rec.passage_time == pytest.approx(0.1, rel=1e-12)

    def test_negative_drift_censored(self):
        p = sample_path(drift_only(-1.0), path_rng(1, 0), 1.0)
        rec = first_passage(p, 0.5, 0.0)
        assert rec.censored
        assert math.isinf(rec.passage_time)

    def test_jump_crossing_records_overshoot(self):
        path = PathEvents(0.0, np.array([0.3]), np.array([2.0]), 1.0, 0.0, 0.0)
        rec = first_passage(path, 0.5, 0.0)
        assert rec.passage_time == 0.3
        assert rec.crossed_by_jump
        assert rec.overshoot_ratio == pytest.approx(4.0, rel=1e-12)

    def test_superlinear_boundary_immediate_for_positive_drift(self):
        p = sample_path(drift_minus_poisson(1.0), path_rng(2, 0), 1.0)
        rec = first_passage(p, 0.5, 1.5)
        assert rec.passage_time == 0.0
        assert not rec.censored

    def test_superlinear_boundary_jump_driven_without_drift(self):
        m = compound_poisson_with_drift(0.0, lam_plus=1.0, alpha_plus=1.0)
        p = sample_path(m, path_rng(2, 7), 30.0)
        rec = first_passage(p, 0.01, 1.5)
        assert rec.crossed_by_jump
        assert rec.passage_time in p.jump_times

    def test_large_time_starts_at_one(self):
        m = drift_minus_poisson(2.0)
        p = sample_path(m, path_rng(3, 1), 50.0)
        rec = first_passage(p, 0.5, 0.0, regime="large_time")
        assert rec.passage_time >= 1.0
        # X_1 = 2 - N_1 > 0.5 unless at least 2 early jumps: usually T = 1
        with pytest.raises(ContractError):
            first_passage(sample_path(m, path_rng(3, 1), 0.5), 0.5, 0.0,
                          regime="large_time")

    def test_two_sided_never_later_than_one_sided(self, poisson_drift):
        for i in range(500):
            p = sample_path(poisson_drift, borrowed_rng(21, i), 0.5)
            one, two = passage_pair(p, 0.05, 0.0)
            if not one.censored and not two.censored:
                assert two.passage_time <= one.passage_time * (1 + 1e-12)
            elif two.censored:
                assert one.censored

    def test_monotone_in_r_per_path(self, poisson_drift):
        for i in range(200):
            p = sample_path(poisson_drift, borrowed_rng(22, i), 2.0)
            for sided in ("one", "two"):
                prev = 0.0
                for r in (0.01, 0.05, 0.2, 0.8):
                    t = first_passage(p, r, 0.5, sided).passage_time
                    assert t >= prev - 1e-15
                    prev = t

    def test_domain_errors(self):
        p = sample_path(drift_only(1.0), path_rng(1, 0), 1.0)
        with pytest.raises(DomainError):
            first_passage(p, -1.0, 0.0)
        with pytest.raises(DomainError):
            first_passage(p, 1.0, -0.5)
        with pytest.raises(DomainError):
            first_passage(p, 1.0, 0.0, sided="three")


class TestBiasAccounting:
    def test_quantile_shift_within_bias_budget(self):
        # shrinking the cutoff by 10x moves passage quantiles by less than the
        # sum of the two bias bounds over the minimum drift slope
        m = log_squared_model(1.0)  # d = 0, slopes nu(h) > 0 for h > 0
        r, b = 0.05, 0.0
        horizon = 10.0

        def quantiles(h, seed):
            ts = []
            for i in range(4000):
                p = sample_path(m, borrowed_rng(seed, i), horizon, cutoff_h=h)
                rec = first_passage(p, r, b)
                ts.append(rec.passage_time if not rec.censored else horizon)
            return np.quantile(ts, [0.25, 0.5, 0.75]), ts

        h1, h2 = 1e-2, 1e-3
        q1, _ = quantiles(h1, 303)
        q2, _ = quantiles(h2, 303)
        j = m.jumps
        bias = horizon * (j.abs_moment_below(h1) + j.abs_moment_below(h2))
        from levycross import truncated_mean_nu
        slope = min(truncated_mean_nu(m, h1), truncated_mean_nu(m, h2))
        budget = bias / slope + 0.25  # + MC noise allowance at n=4000
        assert np.all(np.abs(q1 - q2) <= budget)


class TestPathHelpers:
    def test_value_and_running_max(self):
        path = PathEvents(1.0, np.array([0.25, 0.5]), np.array([-1.0, 2.0]),
                          1.0, 0.0, 0.0)
        assert value_at(path, 0.2) == pytest.approx(0.2)
        assert value_at(path, 0.25) == pytest.approx(-0.75)  # right continuous
        assert value_at(path, 0.6) == pytest.approx(1.6)
        assert running_max_at(path, 0.4) == pytest.approx(0.25)
        assert running_max_at(path, 0.6) == pytest.approx(1.6)
        assert running_max_at(path, 0.4, absolute=True) == pytest.approx(0.75)

    def test_dump_csv(self):
        path = PathEvents(1.0, np.array([0.25]), np.array([-1.0]), 1.0, 0.0, 0.0)
        buf = io.StringIO()
        dump_path_csv(path, buf, seed=7, stream=3)
        text = buf.getvalue()
        assert text.startswith("# seed=7,stream=3,h=0.0,bias_bound=0.0")
        assert "time,size" in text
        assert "0.25,-1.0" in text


class TestMirrorHelper:
    def test_mirrored_flips_everything(self):
        path = PathEvents(1.0, np.array([0.25]), np.array([-1.0]), 1.0, 0.0, 0.0)
        m = path.mirrored()
        assert m.drift_slope == -1.0
        assert m.jump_sizes[0] == 1.0
