import numpy as np
import pytest

from forcecontact.errors import ConfigError, SchemaError
from forcecontact.filters import (
    gaussian_smooth,
    hampel_filter,
    percentile_interpolated,
    rolling_percentile,
    rolling_rms,
)

from oracles import (
    gaussian_kernel,
    hampel_oracle,
    rolling_percentile_oracle,
    rolling_rms_oracle,
)


class TestHampel:
    def test_constant_signal_is_fixed_point(self):
        x = np.array([5.0, 5, 5, 5, 5])
        assert np.array_equal(hampel_filter(x, half_width=2, k=3.0), x)

    def test_empty_input(self):
        assert hampel_filter(np.array([]), half_width=2, k=3.0).size == 0

    def test_isolated_spike_replaced_by_window_median(self):
        # MAD is 0 in every window, so the floor decides; oracle agrees
        x = np.array([1.0, 1, 100, 1, 1])
        expected = hampel_oracle(x, 2, 3.0, mad_floor=1e-9)
        assert np.array_equal(expected, np.ones(5))
        assert np.array_equal(hampel_filter(x, half_width=2, k=3.0, mad_floor=1e-9), expected)

    def test_rejects_non_finite_sample_with_position(self):
        x = np.array([1.0, np.nan, 2.0])
        with pytest.raises(SchemaError, match="index 1"):
            hampel_filter(x, half_width=1, k=3.0)

    def test_matches_bruteforce_on_random_inputs(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(1, 400))
            hw = int(rng.integers(1, 12))
            k = float(rng.uniform(1.0, 4.0))
            x = rng.normal(size=n) * 10
            spikes = rng.integers(0, n, max(1, n // 20))
            x[spikes] += rng.uniform(20, 50, spikes.size)
            got = hampel_filter(x, half_width=hw, k=k)
            assert np.array_equal(got, hampel_oracle(x, hw, k))

    def test_idempotent_under_defaults(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(50, 500))
            x = rng.normal(size=n)
            x[rng.integers(0, n, n // 25 + 1)] += 30.0
            once = hampel_filter(x, half_width=5, k=3.0)
            twice = hampel_filter(once, half_width=5, k=3.0)
            assert np.array_equal(once, twice)

    def test_bad_params(self):
        with pytest.raises(ConfigError):
            hampel_filter([1.0], half_width=0, k=3.0)
        with pytest.raises(ConfigError):
            hampel_filter([1.0], half_width=1, k=0.0)


class TestGaussianSmooth:
    def test_constant_preserved_exactly_including_edges(self):
        x = np.full(50, 2.75)
        y = gaussian_smooth(x, sigma=3.0)
        assert np.max(np.abs(y - 2.75)) < 1e-12

    def test_impulse_response_equals_kernel(self):
        n = 101
        x = np.zeros(n)
        x[50] = 1.0
        y = gaussian_smooth(x, sigma=2.0)
        w = gaussian_kernel(2.0)
        r = len(w) // 2
        np.testing.assert_allclose(y[50 - r : 50 + r + 1], w, rtol=1e-12, atol=1e-15)
        assert np.all(y[: 50 - r] == 0) and np.all(y[51 + r :] == 0)

    def test_single_sample_passthrough(self):
        y = gaussian_smooth(np.array([3.25]), sigma=5.0)
        np.testing.assert_allclose(y, [3.25], rtol=1e-12)

    def test_sigma_must_be_positive(self):
        with pytest.raises(ConfigError):
            gaussian_smooth(np.ones(4), sigma=0.0)
        with pytest.raises(ConfigError):
            gaussian_smooth(np.ones(4), sigma=-1.0)


class TestPercentileConvention:
    def test_ramp_995_example(self):
        # 1000 samples i/999: virtual index 0.995*1000 - 1 = 994 exactly
        x = np.sort(np.arange(1000) / 999.0)
        scale = percentile_interpolated(x, 0.995)
        assert scale == pytest.approx(994.0 / 999.0, rel=1e-15)
        assert 1.0 / scale == pytest.approx(1.0050301810865192, rel=1e-12)

    def test_interpolates_between_order_statistics(self):
        x = np.array([0.0, 10.0])
        # h = 0.6*2-1 = 0.2 -> 0 + 0.2*(10-0)
        assert percentile_interpolated(x, 0.6) == pytest.approx(2.0, rel=1e-15)

    def test_clamps_to_extremes(self):
        x = np.array([1.0, 2.0, 3.0])
        assert percentile_interpolated(x, 0.01) == 1.0
        assert percentile_interpolated(x, 0.999) == 3.0


class TestRollingPercentile:
    def test_constant_signal(self):
        x = np.full(40, 3.5)
        for q in (0.1, 0.5, 0.9):
            assert np.array_equal(rolling_percentile(x, 5, q), x)

    def test_median_ignores_isolated_spike(self):
        x = np.array([0.0, 0, 0, 10, 0, 0, 0])
        out = rolling_percentile(x, 3, 0.5)
        assert out[3] == 0.0

    def test_ramp_median_tracks_center(self):
        x = np.arange(100, dtype=np.float64)
        out = rolling_percentile(x, 5, 0.5)
        expected = rolling_percentile_oracle(x, 5, 0.5)
        assert np.array_equal(out, expected)
        assert np.array_equal(out[5:-5], x[5:-5])

    def test_matches_bruteforce_on_random_inputs(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(1, 600))
            hw = int(rng.integers(1, 60))
            q = float(rng.uniform(0.02, 0.98))
            x = rng.normal(size=n) * rng.uniform(0.1, 50)
            got = rolling_percentile(x, hw, q)
            assert np.array_equal(got, rolling_percentile_oracle(x, hw, q))

    def test_duplicate_values(self):
        rng = np.random.default_rng(11)
        x = rng.integers(0, 4, 200).astype(np.float64)
        got = rolling_percentile(x, 7, 0.25)
        assert np.array_equal(got, rolling_percentile_oracle(x, 7, 0.25))


class TestRollingRms:
    def test_constant(self):
        x = np.full(30, -2.0)
        np.testing.assert_allclose(rolling_rms(x, 4), 2.0, rtol=1e-15)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(5)
        for _ in range(15):
            n = int(rng.integers(1, 500))
            hw = int(rng.integers(1, 40))
            x = rng.normal(size=n) * 3
            got = rolling_rms(x, hw)
            assert np.array_equal(got, rolling_rms_oracle(x, hw))


class TestLengthPreservation:
    def test_all_filters_preserve_length(self):
        rng = np.random.default_rng(9)
        for n in (1, 2, 7, 100):
            x = rng.normal(size=n)
            assert hampel_filter(x, 3, 3.0).shape == (n,)
            assert gaussian_smooth(x, 2.0).shape == (n,)
            assert rolling_percentile(x, 4, 0.3).shape == (n,)
            assert rolling_rms(x, 4).shape == (n,)
