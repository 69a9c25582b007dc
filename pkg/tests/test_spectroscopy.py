import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.signal import find_peaks

from qcrlab import (
    GridTooCoarse,
    PeakModel,
    PeaksNotResolved,
    SpectrumTrace,
    ValidationError,
    extract_peak_weights,
    fit_population,
    poisson_distribution,
    synthesize_spectrum,
    thermal_distribution,
)
from qcrlab.spectroscopy import default_grid, distribution, empirical_distribution

# seed used for every synthetic-noise test in this module
SEED = 20240611
PEAKS = PeakModel(spacing=4.4e6, linewidths=0.5e6)


def noisy(trace, level, seed=SEED):
    rng = np.random.default_rng(seed)
    sigma = level * trace.magnitude.max()
    return SpectrumTrace(trace.detuning, trace.magnitude + sigma * rng.standard_normal(trace.magnitude.size))


class TestDistributions:
    def test_thermal_examples(self):
        d = thermal_distribution(1.0)
        np.testing.assert_allclose(d.probs[:3], [0.5, 0.25, 0.125], rtol=1e-15)
        z = thermal_distribution(0.0)
        assert z.probs[0] == 1.0 and np.all(z.probs[1:] == 0)

    def test_thermal_deficit(self):
        d = thermal_distribution(0.92, n_max=9)
        assert d.deficit == pytest.approx((0.92 / 1.92) ** 10, rel=1e-10)
        assert d.deficit == pytest.approx(6.4e-4, rel=0.02)
        assert d.tail == pytest.approx(d.deficit, rel=1e-10)

    def test_poisson_examples(self):
        d = poisson_distribution(1.0)
        np.testing.assert_allclose(d.probs[:3], [math.exp(-1), math.exp(-1), math.exp(-1) / 2],
                                   rtol=1e-14)
        assert poisson_distribution(0.0).probs[0] == 1.0
        assert poisson_distribution(1.46, 9).probs.sum() >= 0.99999

    @given(n=st.floats(0.0, 4.0), n_max=st.integers(5, 30),
           family=st.sampled_from(["thermal", "poisson"]))
    def test_tail_closes_normalization(self, n, n_max, family):
        d = distribution(family, n, n_max)
        assert np.all(d.probs >= 0)
        assert d.probs.sum() + d.tail == pytest.approx(1.0, abs=1e-12)

    @given(n=st.floats(0.01, 3.0), family=st.sampled_from(["thermal", "poisson"]))
    def test_mean(self, n, family):
        d = distribution(family, n, 80)
        assert d.tail < 1e-6
        assert np.arange(81) @ d.probs == pytest.approx(n, abs=1e-6)

    @given(n=st.floats(0.01, 5.0))
    def test_shapes(self, n):
        t = thermal_distribution(n, 12).probs
        assert np.all(np.diff(t) < 0)
        p = poisson_distribution(n, 12).probs
        mode = int(np.argmax(p))
        # ties at integer n_bar put equal mass on n_bar - 1 and n_bar
        assert mode == math.floor(n) or (n == math.floor(n) and mode == n - 1)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            thermal_distribution(-0.1)
        with pytest.raises(ValidationError):
            poisson_distribution(-0.1)
        with pytest.raises(ValidationError):
            distribution("boltzmann", 1.0)

    def test_empirical(self):
        d = empirical_distribution([2.0, 1.0, 1.0])
        np.testing.assert_allclose(d.probs, [0.5, 0.25, 0.25])
        assert d.family == "empirical" and d.mean == pytest.approx(0.75)


class TestSynthesis:
    def test_ground_state(self):
        grid = default_grid(PEAKS, 9)
        trace = synthesize_spectrum(thermal_distribution(0.0), PEAKS, grid)
        i = int(np.argmax(trace.magnitude))
        assert trace.detuning[i] == pytest.approx(0.0, abs=1.0)
        assert trace.magnitude[i] == pytest.approx(1.0, rel=1e-12)

    def test_two_equal_peaks(self):
        peaks = PeakModel(spacing=50e6, linewidths=0.5e6)
        dist = empirical_distribution([0.5, 0.5, 0, 0, 0, 0])
        grid = default_grid(peaks, dist.n_max, points_per_width=8)
        m = synthesize_spectrum(dist, peaks, grid).magnitude
        idx, _ = find_peaks(m)
        assert len(idx) == 2
        assert m[idx[0]] == pytest.approx(m[idx[1]], rel=1e-6)

    def test_thermal_peak_ratios(self):
        grid = np.linspace(-(9.5) * 4.4e6, 0.5 * 4.4e6, 200_001)
        m = synthesize_spectrum(thermal_distribution(1.0), PEAKS, grid).magnitude
        idx, _ = find_peaks(m)
        heights = m[idx][::-1]  # order by Fock index
        np.testing.assert_allclose(heights[:3] / heights[0], [1.0, 0.5, 0.25], rtol=0.02)

    def test_too_coarse(self):
        grid = np.linspace(-9.5 * 4.4e6, 0.5 * 4.4e6, 100)
        with pytest.raises(GridTooCoarse):
            synthesize_spectrum(thermal_distribution(1.0), PEAKS, grid)

    def test_must_cover_peaks(self):
        grid = np.linspace(-3e6, 2.2e6, 2000)
        with pytest.raises(ValidationError):
            synthesize_spectrum(thermal_distribution(1.0), PEAKS, grid)

    def test_trace_validation(self):
        with pytest.raises(ValidationError):
            SpectrumTrace(np.arange(10.0), np.zeros(10))
        with pytest.raises(ValidationError):
            SpectrumTrace(np.r_[0.0, np.arange(20.0)], np.zeros(21))


class TestExtraction:
    @given(w=st.lists(st.floats(0.0, 1.0), min_size=10, max_size=10).filter(lambda v: sum(v) > 0.1),
           base=st.floats(-0.5, 0.5))
    def test_noiseless_round_trip(self, w, base):
        dist = empirical_distribution(w)
        peaks = PeakModel(spacing=4.4e6, linewidths=0.5e6, baseline=base)
        trace = synthesize_spectrum(dist, peaks, default_grid(peaks, 9))
        got = extract_peak_weights(trace, peaks, 9)
        np.testing.assert_allclose(got.weights, dist.probs, atol=1e-6)
        assert got.baseline == pytest.approx(base, abs=1e-6)

    def test_noisy_thermal(self):
        clean = synthesize_spectrum(thermal_distribution(0.5), PEAKS, default_grid(PEAKS, 9))
        got = extract_peak_weights(noisy(clean, 0.01), PEAKS, 9)
        # the plain weighted mean is biased upward by clipped noise on the
        # high-n peaks, so n_bar is recovered by fitting the family
        res = fit_population(got.weights, "thermal")
        assert res.params["n_bar"] == pytest.approx(0.5, rel=0.05)

    def test_zero_trace(self):
        grid = default_grid(PEAKS, 9)
        with pytest.raises(PeaksNotResolved):
            extract_peak_weights(SpectrumTrace(grid, np.zeros_like(grid)), PEAKS, 9)

    def test_unresolved(self):
        peaks = PeakModel(spacing=0.9e6, linewidths=0.5e6)
        grid = default_grid(peaks, 9)
        trace = SpectrumTrace(grid, np.ones_like(grid))
        with pytest.raises(PeaksNotResolved):
            extract_peak_weights(trace, peaks, 9)


class TestFitPopulation:
    def test_noiseless_thermal(self):
        trace = synthesize_spectrum(thermal_distribution(1.0), PEAKS, default_grid(PEAKS, 9))
        res = fit_population(trace, "thermal", PEAKS)
        assert res.converged
        assert res.params["n_bar"] == pytest.approx(1.0, abs=1e-6)

    def test_from_weights(self):
        dist = poisson_distribution(1.2)
        res = fit_population(dist.probs, "poisson")
        assert res.params["n_bar"] == pytest.approx(1.2, abs=1e-6)

    def test_noisy_poisson(self):
        clean = synthesize_spectrum(poisson_distribution(1.46), PEAKS, default_grid(PEAKS, 9))
        res = fit_population(noisy(clean, 0.01), "poisson", PEAKS)
        assert res.params["n_bar"] == pytest.approx(1.46, rel=0.05)
        assert res.covers("n_bar", 1.46, level=0.95)
        assert res.sigma["n_bar"] > 0

    def test_model_selection(self):
        clean = synthesize_spectrum(poisson_distribution(3.0, 12), PEAKS, default_grid(PEAKS, 12))
        trace = noisy(clean, 0.005)
        right = fit_population(trace, "poisson", PEAKS, n_max=12)
        wrong = fit_population(trace, "thermal", PEAKS, n_max=12)
        assert wrong.residual_norm > right.residual_norm

    def test_interval_shrinks_with_averaging(self):
        clean = synthesize_spectrum(thermal_distribution(0.8), PEAKS, default_grid(PEAKS, 9))
        widths = {}
        for n_avg in (1, 16):
            traces = [noisy(clean, 0.02, seed=SEED + s).magnitude for s in range(n_avg)]
            avg = SpectrumTrace(clean.detuning, np.mean(traces, axis=0))
            widths[n_avg] = fit_population(avg, "thermal", PEAKS).sigma["n_bar"]
        assert widths[1] / widths[16] == pytest.approx(4.0, rel=0.25)

    def test_invalid(self):
        trace = synthesize_spectrum(thermal_distribution(1.0), PEAKS, default_grid(PEAKS, 9))
        with pytest.raises(ValidationError):
            fit_population(trace, "bose", PEAKS)
        with pytest.raises(ValidationError):
            fit_population(trace, "thermal", PEAKS, init=0.0)
