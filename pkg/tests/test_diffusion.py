"""
Unit tests for the variance schedule, batch statistics and noise modes
"""

import numpy as np
import pytest
from scipy.special import ndtr

from src.errors import ContractError, DimensionError
from src.numeric.rng import RngStream, gaussian
from src.diffusion.noise import (
    BatchStats, NoiseMode, SIGMA_FLOOR, compute_batch_stats, diffuse_to_step, sample_noise, shape_noise,
)
from src.diffusion.schedule import build_linear_schedule


def folded_normal_moments(mu: float, sigma: float):
    """Mean and variance of |mu + sigma * Z|"""
    mean = sigma * np.sqrt(2.0 / np.pi) * np.exp(-mu ** 2 / (2.0 * sigma ** 2)) + mu * (1.0 - 2.0 * ndtr(-mu / sigma))
    return mean, mu ** 2 + sigma ** 2 - mean ** 2


class TestNoiseSchedule:
    """Linear β and cumulative ᾱ"""

    def test_two_step_schedule(self):
        sched = build_linear_schedule(2, 0.5, 0.5)
        assert np.allclose(sched.alpha_bar, [0.5, 0.25])

    def test_tiny_betas_keep_signal(self):
        sched = build_linear_schedule(10, 1e-12, 1e-12)
        assert sched.alpha_bar_at(10) == pytest.approx(1.0)

    def test_default_schedule_end(self):
        sched = build_linear_schedule()
        assert sched.num_steps == 1000
        assert sched.alpha_bar_at(1000) == pytest.approx(4.04e-5, rel=0.01)

    def test_alpha_bar_is_decreasing(self):
        sched = build_linear_schedule(50, 1e-3, 0.2)
        assert np.all(np.diff(sched.alpha_bar) < 0)
        assert sched.alpha_bar_at(0) == 1.0

    def test_step_out_of_range(self):
        with pytest.raises(ContractError):
            build_linear_schedule(5).alpha_bar_at(6)

    @pytest.mark.parametrize("start,end", [(0.0, 0.1), (0.2, 0.1), (0.1, 1.0)])
    def test_invalid_betas(self, start, end):
        with pytest.raises(ContractError):
            build_linear_schedule(10, start, end)


class TestBatchStats:
    """Per-coordinate population moments"""

    def test_example(self):
        stats = compute_batch_stats(np.array([[1.0, 0.0], [3.0, 0.0]]))
        assert np.array_equal(stats.mu, [2.0, 0.0])
        assert stats.sigma[0] == 1.0
        assert stats.sigma[1] == SIGMA_FLOOR

    def test_single_row(self):
        stats = compute_batch_stats(np.array([[4.0, -1.0]]))
        assert np.array_equal(stats.sigma, [SIGMA_FLOOR, SIGMA_FLOOR])

    def test_large_sample_moments(self):
        x = 5.0 + 2.0 * RngStream(0).standard_normal(100_000, 2)
        stats = compute_batch_stats(x)
        assert np.all(np.abs(stats.mu - 5.0) < 0.03)
        assert np.all(np.abs(stats.sigma - 2.0) < 0.03)

    def test_empty_batch(self):
        with pytest.raises(ContractError):
            compute_batch_stats(np.zeros((0, 3)))


class TestNoiseModes:
    """white, aniso_only and directional noise"""

    def test_directional_example(self):
        x0 = np.array([[1.0, -2.0]])
        stats = BatchStats(mu=np.zeros(2), sigma=np.ones(2))
        noise = shape_noise(NoiseMode.DIRECTIONAL, np.array([[-0.3, 0.4]]), x0, stats)
        assert np.allclose(noise, [[0.3, -0.4]])

    def test_zero_feature_counts_as_positive(self):
        stats = BatchStats(mu=np.zeros(1), sigma=np.ones(1))
        noise = shape_noise(NoiseMode.DIRECTIONAL, np.array([[-1.5]]), np.array([[0.0]]), stats)
        assert noise[0, 0] == 1.5

    def test_white_is_the_raw_draw(self):
        x0 = np.ones((3, 4))
        stats = compute_batch_stats(RngStream(2).standard_normal(5, 4))
        noise = sample_noise(NoiseMode.WHITE, x0, stats, RngStream(9))
        assert np.array_equal(noise, gaussian(RngStream(9), 3, 4))

    def test_modes_nest_on_one_draw(self):
        """directional = sgn(x0)·|aniso_only| and aniso_only = μ + σ·white"""
        rng = RngStream(4)
        x0 = rng.split(0).standard_normal(6, 3)
        eps = rng.split(1).standard_normal(6, 3)
        stats = BatchStats(mu=np.array([0.5, -1.0, 0.0]), sigma=np.array([2.0, 0.1, 1.0]))
        white = shape_noise(NoiseMode.WHITE, eps, x0, stats)
        aniso = shape_noise(NoiseMode.ANISO_ONLY, eps, x0, stats)
        directional = shape_noise(NoiseMode.DIRECTIONAL, eps, x0, stats)
        assert np.allclose(aniso, stats.mu + stats.sigma * white)
        assert np.allclose(directional, np.where(x0 >= 0, 1.0, -1.0) * np.abs(aniso))

    def test_aniso_variance(self):
        x0 = np.zeros((1_000_000, 2))
        stats = BatchStats(mu=np.array([1.0, -2.0]), sigma=np.array([0.5, 3.0]))
        noise = sample_noise(NoiseMode.ANISO_ONLY, x0, stats, RngStream(1))
        assert np.allclose(noise.var(axis=0), stats.sigma ** 2, rtol=0.01)
        assert np.allclose(noise.mean(axis=0), stats.mu, atol=0.01)

    @pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (1.0, 2.0), (-1.0, 0.5), (2.0, 1.5)])
    def test_directional_matches_folded_normal(self, mu, sigma):
        x0 = np.ones((1_000_000, 1))
        stats = BatchStats(mu=np.array([mu]), sigma=np.array([sigma]))
        noise = sample_noise(NoiseMode.DIRECTIONAL, x0, stats, RngStream(3))
        mean, var = folded_normal_moments(mu, sigma)
        assert noise.mean() == pytest.approx(mean, rel=0.01)
        assert noise.var() == pytest.approx(var, rel=0.01)

    def test_unknown_mode(self):
        with pytest.raises(ContractError, match="directional, aniso_only, white"):
            NoiseMode.parse("pink")

    def test_shape_mismatch(self):
        stats = BatchStats(mu=np.zeros(2), sigma=np.ones(2))
        with pytest.raises(DimensionError):
            shape_noise(NoiseMode.WHITE, np.zeros((2, 2)), np.zeros((3, 2)), stats)


class TestDiffuseToStep:
    """Forward process X_t"""

    def test_step_zero_is_identity(self):
        x0 = np.array([[1.0, -1.0]])
        out = diffuse_to_step(x0, 0, build_linear_schedule(10), NoiseMode.WHITE,
                              compute_batch_stats(x0), RngStream(0))
        assert np.array_equal(out, x0)
        assert out is not x0

    def test_step_out_of_range(self):
        x0 = np.ones((2, 2))
        with pytest.raises(ContractError):
            diffuse_to_step(x0, 11, build_linear_schedule(10), NoiseMode.WHITE,
                            compute_batch_stats(x0), RngStream(0))

    def test_directional_preserves_signs(self):
        """Every nonzero coordinate keeps its sign at every step"""
        sched = build_linear_schedule()
        root = RngStream(2024)
        for trial in range(10_000):
            stream = root.split(trial)
            x0 = stream.split(0).standard_normal(3, 4) * 3.0
            t = int(stream.split(1).integers(1, sched.num_steps + 1))
            x_t = diffuse_to_step(x0, t, sched, NoiseMode.DIRECTIONAL, compute_batch_stats(x0), stream.split(2))
            assert np.all(np.sign(x_t) == np.sign(x0))

    def test_fully_noised_limit(self):
        sched = build_linear_schedule(20, 0.9, 0.9)
        x0 = RngStream(5).standard_normal(4, 3)
        stats = compute_batch_stats(x0)
        x_t = diffuse_to_step(x0, 20, sched, NoiseMode.ANISO_ONLY, stats, RngStream(6))
        expected = sample_noise(NoiseMode.ANISO_ONLY, x0, stats, RngStream(6))
        assert np.allclose(x_t, expected, atol=1e-8)
