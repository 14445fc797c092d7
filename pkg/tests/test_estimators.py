import math

import numpy as np
import pytest

from blockboot.empirical import block_averaged_cdf, order_stat_index
from blockboot.estimators import CiResult, cdf_deviation_prob, lower_confidence_bound, quantile_deviation_prob
from blockboot.resample import (
    BlockPlan,
    EmpiricalDistribution,
    ResamplePlan,
    bootstrap_quantile_distribution,
    cdf_statistic,
    quantile_statistic,
)
from blockboot.seeding import substream


def random_distribution(rng):
    size = int(rng.integers(1, 12))
    values = np.sort(rng.standard_normal(size))
    counts = rng.integers(1, 6, size=size)
    return EmpiricalDistribution(values=values, counts=counts, total=int(counts.sum()))


class TestDistributionQueries:
    def test_galois_pair_random_distributions(self):
        rng = substream(31)
        for _ in range(100):
            dist = random_distribution(rng)
            alpha = float(rng.uniform(0.01, 0.99))
            q = dist.quantile(alpha)
            assert dist.cdf(q) >= alpha
            for v in dist.values[dist.values < q]:
                assert dist.cdf(v) < alpha

    def test_quantile_is_order_statistic(self):
        rng = substream(32)
        values = rng.standard_normal(40)
        rp = ResamplePlan(BlockPlan(3, 5), 257, 11)
        dist = bootstrap_quantile_distribution(values, rp, 0.5)
        rng_seq = substream(11)
        raw = np.sort([quantile_statistic(values, rp.plan, 0.5, rng_seq) for _ in range(257)])
        for alpha in (0.05, 0.33, 0.5, 0.9, 0.975):
            k = order_stat_index(257, alpha)
            assert dist.quantile(alpha) == raw[k - 1]

    def test_cdf_monotone_unit_range(self):
        rng = substream(33)
        dist = random_distribution(rng)
        xs = np.sort(rng.standard_normal(50))
        cdf = dist.cdf(xs)
        assert np.all(np.diff(cdf) >= 0)
        assert np.all((cdf >= 0) & (cdf <= 1))
        alphas = np.linspace(0.05, 0.95, 10)
        qs = [dist.quantile(a) for a in alphas]
        assert np.all(np.diff(qs) >= 0)


class TestFastPaths:
    def test_quantile_deviation_prob_equals_distribution_cdf(self):
        rng = substream(34)
        for trial in range(10):
            n = int(rng.integers(15, 60))
            values = rng.standard_normal(n)
            b = int(rng.integers(1, 6))
            ell = int(rng.integers(1, 8))
            if ell > n:
                ell = n
            rp = ResamplePlan(BlockPlan(b, ell), 400, 1000 + trial)
            dist = bootstrap_quantile_distribution(values, rp, 0.5)
            for x in rng.standard_normal(5):
                assert quantile_deviation_prob(values, rp, 0.5, float(x)) == dist.cdf(float(x))

    def test_cdf_deviation_prob_equals_sequential_loop(self):
        rng = substream(35)
        values = rng.standard_normal(30)
        rp = ResamplePlan(BlockPlan(4, 3), 300, 77)
        x, y = 0.2, 0.4
        fast = cdf_deviation_prob(values, rp, x, y)
        rng_seq = substream(77)
        stats = [cdf_statistic(values, rp.plan, x, rng_seq) for _ in range(300)]
        assert fast == np.mean(np.asarray(stats) <= y)

    def test_cdf_deviation_prob_saturates(self):
        values = substream(36).standard_normal(40)
        rp = ResamplePlan(BlockPlan(5, 4), 100, 3)
        assert cdf_deviation_prob(values, rp, 0.0, 1e6) == 1.0
        assert cdf_deviation_prob(values, rp, 0.0, -1e6) == 0.0

    def test_cdf_deviation_prob_single_block_enumeration(self):
        values = substream(37).standard_normal(12)
        plan = BlockPlan(1, 4)
        x, y = 0.1, 0.3
        center = block_averaged_cdf(values, 4, x)
        atoms = np.array([2.0 * ((values[s : s + 4] <= x).mean() - center) for s in range(9)])
        exact = (atoms <= y).mean()
        rp = ResamplePlan(plan, 50_000, 13)
        got = cdf_deviation_prob(values, rp, x, y)
        assert abs(got - exact) <= 3 * math.sqrt(exact * (1 - exact) / 50_000) + 1e-12


class TestLowerConfidenceBound:
    def test_constant_series(self):
        result = lower_confidence_bound(np.full(20, 4.2), ResamplePlan(BlockPlan(4, 3), 200, 5), 0.5, 0.9)
        assert result.lower == 4.2

    def test_monotone_in_alpha(self):
        values = substream(38).standard_normal(50)
        rp = ResamplePlan(BlockPlan(4, 4), 400, 21)
        lowers = [lower_confidence_bound(values, rp, 0.5, a).lower for a in (0.5, 0.8, 0.9, 0.99)]
        assert np.all(np.diff(lowers) <= 0)

    def test_shift_equivariance(self):
        values = substream(39).standard_normal(40)
        rp = ResamplePlan(BlockPlan(3, 5), 300, 22)
        base = lower_confidence_bound(values, rp, 0.5, 0.9).lower
        for shift in (-3.0, 0.5, 11.0):
            shifted = lower_confidence_bound(values + shift, rp, 0.5, 0.9).lower
            assert shifted == pytest.approx(base + shift, abs=1e-9)

    def test_alpha_validation(self):
        values = substream(40).standard_normal(20)
        rp = ResamplePlan(BlockPlan(2, 3), 50, 1)
        with pytest.raises(ValueError):
            lower_confidence_bound(values, rp, 0.5, 1.0)
        with pytest.raises(ValueError):
            CiResult(lower=0.0, alpha=0.0, plan=BlockPlan(1, 1), n_boot=1)
