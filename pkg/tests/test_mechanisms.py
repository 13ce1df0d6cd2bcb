"""Selective-release samplers: clipping, support guarantees, determinism,
attempt accounting, and distributional sanity checks.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncdp.accountant import GaussianParams, LaplaceParams
from truncdp.distributions import Interval, TruncGaussian, TruncLaplace
from truncdp.errors import AttemptsExceeded, DegenerateMass, InvalidParams
from truncdp.mechanisms import (
    DEFAULT_MAX_ATTEMPTS,
    METHODS,
    ReleaseRecord,
    clip_output,
    gaussian_release,
    gaussian_release_many,
    laplace_release,
    laplace_release_many,
)

GP = GaussianParams(1.0, 1.0, Interval(-0.5, 1.5))
LP = LaplaceParams(1.0, 0.5, Interval(0.2, 0.8))


class TestClipOutput:
    def test_examples(self):
        assert clip_output(0.4, 1.0) == 0.4
        assert clip_output(-3.0, 1.0) == 0.0
        assert clip_output(7.0, 2.5) == 2.5
        assert clip_output(0.0, 1.0) == 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidParams):
            clip_output(0.5, 0.0)
        with pytest.raises(InvalidParams):
            clip_output(0.5, -1.0)
        with pytest.raises(InvalidParams):
            clip_output(math.nan, 1.0)
        with pytest.raises(InvalidParams):
            clip_output(math.inf, 1.0)

    @given(st.floats(-1e6, 1e6), st.floats(1e-3, 1e3))
    def test_idempotent_in_range_lipschitz(self, y, sens):
        c = clip_output(y, sens)
        assert 0.0 <= c <= sens
        assert clip_output(c, sens) == c
        # clipping is 1-Lipschitz
        c2 = clip_output(y + 0.125, sens)
        assert abs(c2 - c) <= 0.125 + 1e-12


class TestSupportAndDeterminism:
    @pytest.mark.parametrize("method", METHODS)
    def test_gaussian_values_in_interval(self, method):
        rng = np.random.default_rng(1)
        values, attempts = gaussian_release_many(0.5, GP, rng, 2000, method)
        assert values.shape == (2000,)
        assert np.all((values >= GP.interval.a) & (values <= GP.interval.b))
        assert np.all(attempts >= 1)

    @pytest.mark.parametrize("method", METHODS)
    def test_laplace_values_in_interval(self, method):
        rng = np.random.default_rng(2)
        values, _ = laplace_release_many(0.5, LP, rng, 2000, method)
        assert np.all((values >= LP.interval.a) & (values <= LP.interval.b))

    @pytest.mark.parametrize("method", METHODS)
    def test_same_seed_same_stream(self, method):
        a, _ = gaussian_release_many(0.3, GP, np.random.default_rng(99), 500, method)
        b, _ = gaussian_release_many(0.3, GP, np.random.default_rng(99), 500, method)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a, _ = laplace_release_many(0.5, LP, np.random.default_rng(1), 100)
        b, _ = laplace_release_many(0.5, LP, np.random.default_rng(2), 100)
        assert not np.array_equal(a, b)

    def test_scalar_wrappers(self):
        rec = gaussian_release(0.5, GP, np.random.default_rng(0))
        assert isinstance(rec, ReleaseRecord)
        assert rec.mechanism == "gaussian"
        assert GP.interval.a <= rec.released_value <= GP.interval.b
        assert rec.attempts == 1  # inverse-cdf draws exactly once
        rec = laplace_release(0.5, LP, np.random.default_rng(0))
        assert rec.mechanism == "laplace"
        assert LP.interval.a <= rec.released_value <= LP.interval.b

    def test_out_of_range_query_is_clipped(self):
        # y far below 0 clips to 0; the released law is centered there
        rng = np.random.default_rng(3)
        lo, _ = gaussian_release_many(-50.0, GP, rng, 4000)
        rng = np.random.default_rng(3)
        zero, _ = gaussian_release_many(0.0, GP, rng, 4000)
        np.testing.assert_array_equal(lo, zero)


class TestAttemptAccounting:
    def test_inverse_cdf_always_one(self):
        _, attempts = gaussian_release_many(0.5, GP, np.random.default_rng(0), 1000, "inverse-cdf")
        assert np.all(attempts == 1)

    def test_rejection_mean_attempts_tracks_inverse_mass(self):
        # interval [-1.96, 1.96] around the clipped output catches ~95% of
        # draws, so attempts average ~1/0.95
        p = GaussianParams(1.0, 1.0, Interval(-1.96, 1.96))
        target = TruncGaussian(0.0, 1.0, p.interval)
        mass = math.exp(target.log_mass)
        n = 20_000
        _, attempts = gaussian_release_many(0.0, p, np.random.default_rng(8), n, "rejection")
        se = math.sqrt((1.0 - mass) / mass**2 / n)  # geometric-law stderr
        assert abs(float(np.mean(attempts)) - 1.0 / mass) <= 3.0 * se

    def test_attempts_exceeded(self):
        p = GaussianParams(1.0, 1.0, Interval(6.0, 6.1))
        with pytest.raises(AttemptsExceeded) as exc:
            gaussian_release(0.5, p, np.random.default_rng(1), max_attempts=50, method="rejection")
        assert exc.value.attempts == 50
        assert "50 attempts" in str(exc.value)
        assert "interval mass" in str(exc.value)

    def test_inverse_cdf_immune_to_small_mass(self):
        # same sliver interval, but the quantile path never rejects
        p = GaussianParams(1.0, 1.0, Interval(6.0, 6.1))
        rec = gaussian_release(0.5, p, np.random.default_rng(1), max_attempts=1)
        assert rec.attempts == 1
        assert 6.0 <= rec.released_value <= 6.1


class TestDistributionalSanity:
    def test_gaussian_mean_near_untruncated_center(self):
        p = GaussianParams(1.0, 1.0, Interval(-30.0, 31.0))
        n = 50_000
        values, _ = gaussian_release_many(0.5, p, np.random.default_rng(4), n)
        assert abs(float(np.mean(values)) - 0.5) <= 3.0 / math.sqrt(n)

    def test_laplace_variance_near_untruncated(self):
        lam = 0.5
        p = LaplaceParams(1.0, lam, Interval(-40.0, 41.0))
        values, _ = laplace_release_many(0.5, p, np.random.default_rng(6), 200_000)
        assert float(np.var(values)) == pytest.approx(2.0 * lam * lam, rel=0.05)

    def test_tail_interval_quantiles(self):
        # released law must match the truncated target, not the parent
        p = GaussianParams(1.0, 1.0, Interval(3.0, 4.0))
        target = TruncGaussian(1.0, 1.0, p.interval)
        values, _ = gaussian_release_many(1.0, p, np.random.default_rng(7), 50_000)
        for q in (0.25, 0.5, 0.75):
            assert float(np.quantile(values, q)) == pytest.approx(
                target.inverse_cdf(q), abs=0.02
            )

    def test_methods_agree_in_distribution(self):
        n = 30_000
        inv, _ = laplace_release_many(0.5, LP, np.random.default_rng(21), n, "inverse-cdf")
        rej, _ = laplace_release_many(0.5, LP, np.random.default_rng(22), n, "rejection")
        target = TruncLaplace(0.5, LP.scale, LP.interval)
        for sample in (inv, rej):
            assert float(np.mean(sample)) == pytest.approx(
                float(np.mean(target.inverse_cdf(np.linspace(1e-6, 1 - 1e-6, 100_001)))),
                abs=0.005,
            )


class TestValidation:
    def test_unknown_method(self):
        with pytest.raises(InvalidParams):
            gaussian_release_many(0.5, GP, np.random.default_rng(0), 10, "metropolis")

    def test_bad_n(self):
        with pytest.raises(InvalidParams):
            gaussian_release_many(0.5, GP, np.random.default_rng(0), 0)
        with pytest.raises(InvalidParams):
            laplace_release_many(0.5, LP, np.random.default_rng(0), -3)

    def test_bad_max_attempts(self):
        with pytest.raises(InvalidParams):
            gaussian_release(0.5, GP, np.random.default_rng(0), max_attempts=0)

    def test_degenerate_interval_raises_up_front(self):
        p = GaussianParams(1.0, 1.0, Interval(40.0, 41.0))
        with pytest.raises(DegenerateMass):
            gaussian_release(0.5, p, np.random.default_rng(0))

    def test_default_budget_constant(self):
        assert DEFAULT_MAX_ATTEMPTS == 1_000_000
