import math

import mpmath as mp
import numpy as np
import pytest

import sinrcov as sc
from sinrcov import streams
from sinrcov.estimators import ModelValidityError

CFG = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=4.0,
                       noise_power=0.1, half_width=40.0)
GRID = sc.ThresholdGrid.from_db_range(-20, 20, 2)


class TestThresholdGrid:
    def test_db_range_point_count(self):
        assert len(GRID) == 21
        assert GRID.thresholds_db[0] == -20.0
        assert GRID.thresholds_db[-1] == 20.0

    def test_db_linear_mapping(self):
        np.testing.assert_allclose(GRID.thresholds_linear,
                                   10.0 ** (GRID.thresholds_db / 10.0),
                                   rtol=1e-14)

    def test_from_linear_round_trip(self):
        grid = sc.ThresholdGrid.from_linear_values([0.5, 1.0, 4.0])
        np.testing.assert_allclose(grid.thresholds_db,
                                   [10 * math.log10(0.5), 0.0,
                                    10 * math.log10(4.0)])

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            sc.ThresholdGrid.from_db_values([0.0, 0.0, 2.0])

    def test_rejects_inconsistent_pair(self):
        with pytest.raises(ValueError):
            sc.ThresholdGrid(np.array([0.0]), np.array([2.0]))


class TestEstimatorSettings:
    def test_rejects_dominant_above_total(self):
        with pytest.raises(ValueError):
            sc.EstimatorSettings(dominant_count=6, interferer_total=5)

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            sc.EstimatorSettings(trials=0)


class TestHybridSampleValue:
    def test_zero_s_gives_one(self):
        v = sc.hybrid_sample_value(0.0, [0.5, 1.0, 2.0], 2, 3, 1.0, 0.1, 4.0)
        assert v == 1.0

    def test_worked_example(self):
        # distances [0.5, 1, 2], T=1, eta=4 -> s = 0.0625; compose the
        # expected value from the closed-form tail piece.
        s = 0.0625
        tail = sc.tail_integral_closed_form(s, 4.0, 1.0, 2.0)
        expected = (math.exp(-s * 0.1) * (1.0 / (1.0 + s))
                    * math.exp(-2.0 * math.pi * tail))
        got = sc.hybrid_sample_value(s, [0.5, 1.0, 2.0], 2, 3, 1.0, 0.1, 4.0,
                                     quad_abs_tol=1e-10)
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(0.8104, abs=5e-5)

    def test_k_equals_n_has_no_tail_factor(self):
        d = np.array([0.4, 0.9, 1.3, 2.2, 3.1])
        s = 0.7
        manual = math.exp(-s * 0.1)
        for i in range(1, 5):
            manual /= 1.0 + s / d[i] ** 4
        got = sc.hybrid_sample_value(s, d, 5, 5, 1.0, 0.1, 4.0)
        assert got == pytest.approx(manual, abs=1e-15)

    def test_k1_tail_spans_whole_annulus(self):
        d = np.array([0.6, 1.1, 1.9])
        s = 0.3
        tail = sc.tail_integral_closed_form(s, 4.0, 0.6, 1.9)
        expected = math.exp(-s * 0.1) * math.exp(-2.0 * math.pi * tail)
        got = sc.hybrid_sample_value(s, d, 1, 3, 1.0, 0.1, 4.0,
                                     quad_abs_tol=1e-10)
        assert got == pytest.approx(expected, abs=1e-9)

    def test_rejects_insufficient_distances(self):
        with pytest.raises(ValueError):
            sc.hybrid_sample_value(1.0, [0.5, 1.0], 2, 3, 1.0, 0.1, 4.0)


class TestHybridCoverage:
    def test_tiny_threshold_is_near_one(self):
        grid = sc.ThresholdGrid.from_linear_values([1e-6])
        st = sc.EstimatorSettings(dominant_count=4, interferer_total=10,
                                  trials=2000, seed=1)
        curve = sc.hybrid_coverage(CFG, st, grid)
        assert curve.estimates[0] >= 0.999

    def test_k_equals_n_matches_manual_recomputation(self):
        st = sc.EstimatorSettings(dominant_count=5, interferer_total=5,
                                  trials=256, seed=9)
        curve = sc.hybrid_coverage(CFG, st, GRID, sampler="direct")
        t_lin = GRID.thresholds_linear
        acc = np.zeros(len(GRID))
        for m in range(st.trials):
            rng = streams.trial_stream(9, streams.GEOMETRY_DIRECT, m)
            d = sc.sample_ordered_distances_direct(1.0, 5, rng).distances
            s = t_lin * d[0] ** 4
            vals = np.exp(-s * 0.1)
            for i in range(1, 5):
                vals /= 1.0 + s / d[i] ** 4
            acc += vals
        np.testing.assert_allclose(curve.estimates, acc / st.trials,
                                   rtol=1e-12)

    def test_estimates_within_unit_interval(self):
        st = sc.EstimatorSettings(trials=500, seed=2)
        curve = sc.hybrid_coverage(CFG, st, GRID)
        assert np.all(curve.estimates >= 0.0)
        assert np.all(curve.estimates <= 1.0)

    def test_curve_nonincreasing(self):
        st = sc.EstimatorSettings(trials=2000, seed=3)
        curve = sc.hybrid_coverage(CFG, st, GRID)
        assert np.all(np.diff(curve.estimates) <= 1e-10)

    def test_same_seed_bit_identical(self):
        st = sc.EstimatorSettings(trials=1500, seed=4)
        a = sc.hybrid_coverage(CFG, st, GRID)
        b = sc.hybrid_coverage(CFG, st, GRID)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        np.testing.assert_array_equal(a.stderrs, b.stderrs)

    def test_thread_count_does_not_change_result(self):
        st = sc.EstimatorSettings(trials=3000, seed=5)
        a = sc.hybrid_coverage(CFG, st, GRID, threads=1)
        b = sc.hybrid_coverage(CFG, st, GRID, threads=8)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        np.testing.assert_array_equal(a.stderrs, b.stderrs)

    def test_window_and_direct_samplers_agree(self):
        st = sc.EstimatorSettings(dominant_count=4, interferer_total=10,
                                  trials=10_000, seed=0)
        w = sc.hybrid_coverage(CFG, st, GRID)
        d = sc.hybrid_coverage(CFG, st, GRID, sampler="direct")
        diff = np.abs(w.estimates - d.estimates)
        limit = 3.0 * (w.stderrs + d.stderrs)
        assert np.all(diff <= limit)

    def test_infeasible_window_rejected(self):
        small = sc.NetworkConfig(bs_density=0.001, half_width=1.0)
        st = sc.EstimatorSettings(interferer_total=10, trials=10)
        with pytest.raises(ValueError, match="window"):
            sc.hybrid_coverage(small, st, GRID)

    def test_all_trials_skipped_raises(self):
        # expected count == N, so underpopulated draws are common; seed 0
        # makes all three trials come up short.
        sparse = sc.NetworkConfig(bs_density=0.0025, half_width=40.0)
        st = sc.EstimatorSettings(dominant_count=2, interferer_total=16,
                                  trials=3, seed=0)
        with pytest.raises(sc.EstimatorError):
            sc.hybrid_coverage(sparse, st, GRID)

    def test_skipped_trials_reported(self):
        sparse = sc.NetworkConfig(bs_density=0.0025, half_width=40.0)
        st = sc.EstimatorSettings(dominant_count=2, interferer_total=16,
                                  trials=64, seed=1)
        curve = sc.hybrid_coverage(sparse, st, GRID)
        assert 0 < curve.trials_used[0] < 64
        assert np.all(curve.trials_used == curve.trials_used[0])


class TestEmpiricalCoverage:
    def test_no_interferers_no_noise_gives_full_coverage(self):
        cfg = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=4.0,
                               noise_power=0.0, half_width=40.0)
        st = sc.EstimatorSettings(dominant_count=1, interferer_total=1,
                                  trials=400, seed=6)
        curve = sc.empirical_coverage(cfg, st, GRID)
        assert np.all(curve.estimates == 1.0)

    def test_huge_threshold_gives_zero(self):
        grid = sc.ThresholdGrid.from_linear_values([1e12])
        st = sc.EstimatorSettings(trials=400, seed=7)
        curve = sc.empirical_coverage(CFG, st, grid)
        assert curve.estimates[0] == 0.0

    def test_stderr_is_binomial(self):
        st = sc.EstimatorSettings(trials=800, seed=8)
        curve = sc.empirical_coverage(CFG, st, GRID)
        p = curve.estimates
        np.testing.assert_allclose(curve.stderrs,
                                   np.sqrt(p * (1 - p) / curve.trials_used),
                                   atol=1e-15)

    def test_agrees_with_hybrid(self):
        st = sc.EstimatorSettings(dominant_count=4, interferer_total=10,
                                  trials=4000, seed=0)
        hyb = sc.hybrid_coverage(CFG, st, GRID)
        sim = sc.empirical_coverage(CFG, st, GRID)
        diff = np.abs(hyb.estimates - sim.estimates)
        assert np.all(diff <= 3.0 * (hyb.stderrs + sim.stderrs))

    def test_all_window_points_never_raises_coverage(self):
        # widening the interferer set reuses the same leading fading gains,
        # so per-trial SINR can only drop.
        st = sc.EstimatorSettings(dominant_count=4, interferer_total=10,
                                  trials=400, seed=9)
        nearest = sc.empirical_coverage(CFG, st, GRID)
        widened = sc.empirical_coverage(CFG, st, GRID,
                                        include_all_window_points=True)
        assert np.all(widened.estimates <= nearest.estimates + 1e-15)

    def test_thread_count_does_not_change_result(self):
        st = sc.EstimatorSettings(trials=3000, seed=10)
        a = sc.empirical_coverage(CFG, st, GRID, threads=1)
        b = sc.empirical_coverage(CFG, st, GRID, threads=6)
        np.testing.assert_array_equal(a.estimates, b.estimates)

    def test_curve_nonincreasing(self):
        st = sc.EstimatorSettings(trials=2000, seed=11)
        curve = sc.empirical_coverage(CFG, st, GRID)
        assert np.all(np.diff(curve.estimates) <= 0.0)


class TestSgCoverage:
    def test_matches_interference_limited_closed_form(self):
        cfg = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=4.0,
                               noise_power=0.0, half_width=40.0)
        grid = sc.ThresholdGrid.from_linear_values([0.1, 1.0])
        curve = sc.sg_coverage(cfg, grid)
        for value, t in zip(curve.estimates, (0.1, 1.0)):
            closed = 1.0 / (1.0 + math.sqrt(t) * math.atan(math.sqrt(t)))
            assert value == pytest.approx(closed, abs=1e-5)

    def test_reference_values_with_noise(self):
        # frozen from an independent nested-quadrature evaluation
        grid = sc.ThresholdGrid.from_linear_values([1.0])
        got4 = sc.sg_coverage(CFG, grid).estimates[0]
        assert got4 == pytest.approx(0.5566043768616691, abs=2e-6)
        cfg3 = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=3.0,
                                noise_power=0.1, half_width=40.0)
        got3 = sc.sg_coverage(cfg3, grid).estimates[0]
        assert got3 == pytest.approx(0.37232172496830057, abs=2e-6)

    def test_threshold_to_zero_limit(self):
        grid = sc.ThresholdGrid.from_linear_values([1e-12])
        curve = sc.sg_coverage(CFG, grid)
        assert curve.estimates[0] == pytest.approx(1.0, abs=1e-6)

    def test_rejects_low_eta(self):
        for eta in (1.5, 2.0):
            cfg = sc.NetworkConfig(pathloss_exponent=eta)
            with pytest.raises(ValueError):
                sc.sg_coverage(cfg, GRID)

    def test_strictly_decreasing_and_in_range(self):
        curve = sc.sg_coverage(CFG, GRID)
        assert np.all(np.diff(curve.estimates) < 0.0)
        assert np.all(curve.estimates > 0.0)
        assert np.all(curve.estimates < 1.0)
        assert np.all(curve.stderrs == 0.0)
        assert np.all(curve.trials_used == 0)

    def test_deterministic(self):
        a = sc.sg_coverage(CFG, GRID)
        b = sc.sg_coverage(CFG, GRID)
        np.testing.assert_array_equal(a.estimates, b.estimates)


def _moment_coefficient_reference(i: int) -> float:
    """50-digit evaluation of the printed coefficient series."""
    mp.mp.dps = 50
    ln2 = mp.log(2)
    if i == 2:
        return float((67 - 96 * ln2) / mp.pi ** 2)
    first = (mp.factorial(4) / mp.gamma(i)) * (
        mp.gamma(i - 2)
        - mp.fsum(mp.gamma(i + k - 2) / (mp.factorial(k)
                                         * mp.mpf(2) ** (i + k - 2))
                  for k in range(5)))
    second = (mp.gamma(i + 4) / mp.gamma(i)) * (
        1 - ln2 - mp.fsum(mp.factorial(k) / (mp.factorial(k + 2)
                                             * mp.mpf(2) ** (k + 1))
                          for k in range(i + 2)))
    return float((first + second) / mp.pi ** 2)


class TestMomentCoefficient:
    def test_base_case_value(self):
        got = sc.interference_moment_coefficient(2, 1.0)
        want = (67.0 - 96.0 * math.log(2.0)) / math.pi ** 2
        assert got == pytest.approx(want, rel=1e-15)

    def test_density_scaling_is_exact(self):
        for i in (2, 3, 7):
            for lam in (0.5, 2.0, 13.0):
                assert sc.interference_moment_coefficient(i, lam) == (
                    sc.interference_moment_coefficient(i, 1.0) / (lam * lam))

    @pytest.mark.parametrize("i", [3, 4, 5, 10, 20, 30])
    def test_matches_high_precision_series(self, i):
        got = sc.interference_moment_coefficient(i, 1.0)
        want = _moment_coefficient_reference(i)
        assert got == pytest.approx(want, rel=1e-8)

    def test_rejects_small_index(self):
        with pytest.raises(ValueError):
            sc.interference_moment_coefficient(1, 1.0)


class TestProbModelCoverage:
    PARAMS = sc.ProbModelParams(mu_s=1.0, sigma_s_sq=0.05, sigma0_sq=1.0,
                                interferer_total=10)

    def test_threshold_to_zero_is_one(self):
        grid = sc.ThresholdGrid.from_linear_values([1e-15])
        curve = sc.prob_model_coverage(self.PARAMS, CFG, grid)
        assert curve.estimates[0] == pytest.approx(1.0, abs=1e-12)

    def test_validity_guard_triggers(self):
        bad = sc.ProbModelParams(mu_s=0.1, sigma_s_sq=5.0, sigma0_sq=1.0,
                                 interferer_total=10)
        noiseless = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=4.0,
                                     noise_power=0.0, half_width=40.0)
        with pytest.raises(ModelValidityError):
            sc.prob_model_coverage(bad, noiseless, GRID)

    def test_zero_variance_reduces_to_exponential(self):
        noiseless = sc.NetworkConfig(bs_density=1.0, pathloss_exponent=4.0,
                                     noise_power=0.0, half_width=40.0)
        params = sc.ProbModelParams(mu_s=2.0, sigma_s_sq=0.0, sigma0_sq=1.5,
                                    interferer_total=5)
        curve = sc.prob_model_coverage(params, noiseless, GRID)
        t = GRID.thresholds_linear
        np.testing.assert_allclose(curve.estimates, np.exp(-t * 2.0 / 1.5),
                                   rtol=1e-12)

    def test_rejects_wrong_exponent(self):
        cfg3 = sc.NetworkConfig(pathloss_exponent=3.0)
        with pytest.raises(ValueError):
            sc.prob_model_coverage(self.PARAMS, cfg3, GRID)

    def test_range_and_monotone(self):
        curve = sc.prob_model_coverage(self.PARAMS, CFG, GRID)
        assert np.all(curve.estimates > 0.0)
        assert np.all(curve.estimates <= 1.0)
        assert np.all(np.diff(curve.estimates) < 0.0)


class TestVarianceDominance:
    def test_hybrid_stderr_below_simulation(self):
        st = sc.EstimatorSettings(dominant_count=4, interferer_total=10,
                                  trials=4000, seed=0)
        hyb = sc.hybrid_coverage(CFG, st, GRID)
        sim = sc.empirical_coverage(CFG, st, GRID)
        dominated = int((hyb.stderrs <= sim.stderrs).sum())
        assert dominated >= 19
