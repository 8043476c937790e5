import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bruteforce import (
    bf_gadf,
    bf_gasf,
    bf_gram,
    bf_paa,
    bf_rp,
    bf_rp_percentile_eps,
    bf_zero_crossings,
)
from otdrimg.encodings import (
    GADF,
    GASF,
    RP,
    InvalidDownsample,
    InvalidSeries,
    InvalidSignalSpec,
    RpConfig,
    gadf,
    gasf,
    generate_sinusoid,
    gram_matrix,
    paa,
    recurrence_plot,
    rescale_minmax,
    to_polar,
)


def random_series(rng, n):
    return rng.uniform(-5.0, 5.0, size=n)


class TestRescale:
    def test_affine_endpoints(self):
        np.testing.assert_allclose(rescale_minmax([0, 2, 4]), [-1.0, 0.0, 1.0])

    def test_constant_maps_to_zeros(self):
        np.testing.assert_array_equal(rescale_minmax([5, 5, 5]), [0.0, 0.0, 0.0])

    def test_minmax_positions(self):
        np.testing.assert_allclose(rescale_minmax([3, 1, 2]), [1.0, -1.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidSeries):
            rescale_minmax([1.0, float("nan"), 2.0])
        with pytest.raises(InvalidSeries):
            rescale_minmax([1.0, float("inf")])

    def test_too_short_rejected(self):
        with pytest.raises(InvalidSeries):
            rescale_minmax([1.0])

    def test_idempotent_on_full_range_series(self):
        rng = np.random.default_rng(11)
        x = np.concatenate([[-1.0, 1.0], rng.uniform(-1, 1, 30)])
        once = rescale_minmax(x)
        np.testing.assert_array_equal(once, rescale_minmax(once))
        np.testing.assert_allclose(once, x, atol=1e-15)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
    @settings(max_examples=200, derandomize=True)
    def test_range_and_length(self, values):
        out = rescale_minmax(values)
        assert out.size == len(values)
        assert out.min() >= -1.0 and out.max() <= 1.0


class TestPolar:
    def test_arccos_endpoints(self):
        np.testing.assert_allclose(to_polar([1, 0, -1]), [0.0, math.pi / 2, math.pi])

    def test_arccos_half(self):
        np.testing.assert_allclose(to_polar([0.5]), [math.pi / 3])

    def test_clamps_rounding_drift(self):
        assert to_polar([1 + 1e-16])[0] == 0.0
        assert to_polar([-1 - 1e-16])[0] == math.pi

    def test_angles_in_zero_pi(self):
        rng = np.random.default_rng(3)
        angles = to_polar(rng.uniform(-1, 1, 500))
        assert angles.min() >= 0.0 and angles.max() <= math.pi


class TestGasf:
    def test_two_point_example(self):
        m = gasf([math.pi / 2, 0.0])
        np.testing.assert_allclose(m.values, [[-1.0, 0.0], [0.0, 1.0]], atol=1e-15)
        assert m.kind == GASF

    def test_single_angle(self):
        np.testing.assert_array_equal(gasf([0.0]).values, [[1.0]])

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(7)
        angles = to_polar(rescale_minmax(random_series(rng, 16)))
        np.testing.assert_allclose(gasf(angles).values, bf_gasf(list(angles)), atol=1e-12)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            m = gasf(to_polar(rescale_minmax(random_series(rng, 40)))).values
            assert (m == m.T).all()

    def test_gram_identity(self):
        # cos(ti + tj) == x[i]x[j] - sqrt(1-x[i]^2) sqrt(1-x[j]^2)
        rng = np.random.default_rng(9)
        x = rescale_minmax(random_series(rng, 256))
        m = gasf(to_polar(x)).values
        comp = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
        ident = np.outer(x, x) - np.outer(comp, comp)
        assert np.abs(m - ident).max() <= 1e-9


class TestGadf:
    def test_two_point_example(self):
        m = gadf([math.pi / 2, 0.0])
        np.testing.assert_allclose(m.values, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-15)
        assert m.kind == GADF

    def test_zero_diagonal(self):
        rng = np.random.default_rng(10)
        m = gadf(to_polar(rescale_minmax(random_series(rng, 33)))).values
        assert (np.diag(m) == 0.0).all()

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(12)
        angles = to_polar(rescale_minmax(random_series(rng, 16)))
        np.testing.assert_allclose(gadf(angles).values, bf_gadf(list(angles)), atol=1e-12)

    def test_exactly_antisymmetric(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            m = gadf(to_polar(rescale_minmax(random_series(rng, 40)))).values
            assert (m == -m.T).all()


class TestGram:
    def test_orthonormal_columns(self):
        np.testing.assert_array_equal(
            gram_matrix(np.eye(2)), np.eye(2)
        )

    def test_single_column_norm_squared(self):
        np.testing.assert_array_equal(gram_matrix(np.array([[3.0], [4.0]])), [[25.0]])

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(14)
        x = rng.normal(size=(4, 4))
        expected = bf_gram([list(x[:, j]) for j in range(4)])
        np.testing.assert_allclose(gram_matrix(x), expected, atol=1e-12)

    def test_positive_semidefinite(self):
        rng = np.random.default_rng(15)
        g = gram_matrix(rng.normal(size=(10, 6)))
        assert np.linalg.eigvalsh(g).min() >= -1e-10


class TestRecurrencePlot:
    def test_fixed_epsilon_alternating(self):
        m = recurrence_plot([0, 1, 0, 1], RpConfig(percentile=None, epsilon=0.5))
        expected = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
        np.testing.assert_array_equal(m.values, expected)
        assert m.kind == RP

    def test_constant_series_all_ones(self):
        for cfg in (RpConfig(), RpConfig(percentile=None, epsilon=0.1)):
            m = recurrence_plot([2.0, 2.0, 2.0], cfg).values
            assert (m == 1).all()

    def test_percentile_density(self):
        rng = np.random.default_rng(16)
        n = 32
        x = rescale_minmax(random_series(rng, n))
        m = recurrence_plot(x, RpConfig(percentile=10.0)).values
        off_diag_ones = int(m.sum()) - n
        frac = off_diag_ones / (n * (n - 1))
        assert abs(frac - 0.10) <= 2.0 / (n * (n - 1))

    def test_matches_bruteforce_percentile(self):
        rng = np.random.default_rng(17)
        for n in (2, 3, 16, 32):
            x = rescale_minmax(random_series(rng, n))
            eps = bf_rp_percentile_eps(list(x), 10.0)
            expected = np.asarray(bf_rp(list(x), eps))
            np.fill_diagonal(expected, 1)
            got = recurrence_plot(x, RpConfig(percentile=10.0)).values
            np.testing.assert_array_equal(got, expected)

    def test_zero_percentile_falls_back_to_smallest_positive(self):
        # six of ten pairwise distances are 0, so the 10th percentile is 0;
        # the fallback epsilon (1.0) marks exactly the equal-value pairs
        x = [0.0, 0.0, 0.0, 0.0, 1.0]
        m = recurrence_plot(x, RpConfig(percentile=10.0)).values
        expected = bf_rp(x, 1.0)
        np.testing.assert_array_equal(m, expected)

    def test_binary_symmetric_reflexive(self):
        rng = np.random.default_rng(18)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            x = random_series(rng, n)
            cfg = (
                RpConfig(percentile=float(rng.uniform(1, 99)))
                if rng.random() < 0.5
                else RpConfig(percentile=None, epsilon=float(rng.uniform(0.01, 2)))
            )
            m = recurrence_plot(x, cfg).values
            assert set(np.unique(m)) <= {0, 1}
            assert (m == m.T).all()
            assert (np.diag(m) == 1).all()


class TestPaa:
    def test_segment_means(self):
        np.testing.assert_allclose(paa([1, 2, 3, 4], 2), [1.5, 3.5])

    def test_constant_preserved(self):
        np.testing.assert_allclose(paa([7] * 6, 3), [7.0, 7.0, 7.0])

    def test_identity_when_m_equals_n(self):
        rng = np.random.default_rng(19)
        x = random_series(rng, 37)
        np.testing.assert_array_equal(paa(x, 37), x)

    def test_mean_preserved_when_m_divides_n(self):
        rng = np.random.default_rng(20)
        x = random_series(rng, 120)
        for m in (1, 2, 3, 4, 6, 60, 120):
            assert abs(np.mean(paa(x, m)) - np.mean(x)) <= 1e-9

    def test_long_series_window_means(self):
        rng = np.random.default_rng(21)
        x = random_series(rng, 10_000)
        got = paa(x, 500)
        assert got.size == 500
        np.testing.assert_allclose(got, bf_paa(list(x), 500), atol=1e-12)

    def test_uneven_windows_match_bruteforce(self):
        rng = np.random.default_rng(22)
        for n, m in ((10, 3), (17, 5), (101, 7), (64, 63)):
            x = random_series(rng, n)
            np.testing.assert_allclose(paa(x, m), bf_paa(list(x), m), atol=1e-12)

    def test_invalid_lengths(self):
        with pytest.raises(InvalidDownsample):
            paa([1, 2, 3], 0)
        with pytest.raises(InvalidDownsample):
            paa([1, 2, 3], 4)

    @given(st.integers(2, 100), st.integers(1, 100))
    @settings(max_examples=200, derandomize=True)
    def test_windows_partition(self, n, m):
        if m > n:
            m = n
        x = np.arange(n, dtype=float)
        out = paa(x, m)
        assert out.size == m
        # windows partition the input: total mass is preserved
        bounds = [(k * n) // m for k in range(m + 1)]
        widths = np.diff(bounds)
        assert widths.sum() == n
        assert abs(float(out @ widths) - x.sum()) <= 1e-6 * max(1.0, abs(x.sum()))


class TestSinusoid:
    def test_peak_and_zero_mean(self):
        # fs a multiple of 4f puts samples exactly on the peaks; whole
        # periods sum to zero
        x = generate_sinusoid(4.0, 6.0, duration=1.0, sample_rate=240.0)
        assert x.max() == pytest.approx(4.0, abs=1e-12)
        assert abs(x.mean()) <= 1e-9

    def test_zero_amplitude(self):
        x = generate_sinusoid(0.0, 6.0, duration=1.0, sample_rate=100.0)
        assert (x == 0.0).all()

    def test_half_frequency_halves_zero_crossings(self):
        fast = generate_sinusoid(4.0, 6.0, duration=1.0, sample_rate=1000.0)
        slow = generate_sinusoid(4.0, 3.0, duration=1.0, sample_rate=1000.0)
        assert bf_zero_crossings(list(fast)) == 2 * bf_zero_crossings(list(slow))

    def test_seed_determinism(self):
        a = generate_sinusoid(4.0, 6.0, 2.0, 500.0, noise_sigma=0.5, seed=42)
        b = generate_sinusoid(4.0, 6.0, 2.0, 500.0, noise_sigma=0.5, seed=42)
        np.testing.assert_array_equal(a, b)
        c = generate_sinusoid(4.0, 6.0, 2.0, 500.0, noise_sigma=0.5, seed=43)
        assert (a != c).any()

    def test_invalid_specs(self):
        with pytest.raises(InvalidSignalSpec):
            generate_sinusoid(1.0, 10.0, 1.0, sample_rate=20.0)  # Nyquist
        with pytest.raises(InvalidSignalSpec):
            generate_sinusoid(1.0, 1.0, 0.0, sample_rate=100.0)
        with pytest.raises(InvalidSignalSpec):
            generate_sinusoid(1.0, 1.0, 1.0, sample_rate=100.0, noise_sigma=-0.1)


class TestOracleEquivalence:
    """Random-series equivalence of every kernel against its loop oracle."""

    def test_all_kernels(self):
        rng = np.random.default_rng(1234)
        for n in (2, 3, 16, 64):
            for _ in range(25):
                x = random_series(rng, n)
                norm = rescale_minmax(x)
                angles = to_polar(norm)
                np.testing.assert_allclose(
                    gasf(angles).values, bf_gasf(list(angles)), atol=1e-12
                )
                np.testing.assert_allclose(
                    gadf(angles).values, bf_gadf(list(angles)), atol=1e-12
                )
                m = max(1, n // 3)
                np.testing.assert_allclose(paa(x, m), bf_paa(list(x), m), atol=1e-12)
                eps = bf_rp_percentile_eps(list(norm), 10.0)
                expected = np.asarray(bf_rp(list(norm), eps))
                np.fill_diagonal(expected, 1)
                np.testing.assert_array_equal(
                    recurrence_plot(norm, RpConfig(percentile=10.0)).values, expected
                )
