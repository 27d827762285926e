import math

import numpy as np
import pytest

from metacorr import (
    BootstrapConfig,
    InputError,
    SynthConfig,
    UndefinedCorrelationError,
    bootstrap_correlation_ci,
    derive_iteration_seed,
    generate_dataset,
    percentile_interval,
    ranking_stability_curve,
    restrict_to_common_docs,
    select_docs,
    select_systems,
    system_level_correlation,
    system_means,
    system_score_variance,
)
from metacorr.resample import (
    _fnv1a64,
    _mix64,
    bootstrap_correlation_samples,
    iteration_rng,
    stability_csv,
    stability_samples,
    variance_reduction,
)

from conftest import matrix


def interp_quantile(sorted_values, p):
    """Hand-rolled linear interpolation between order statistics."""
    h = (len(sorted_values) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(sorted_values) - 1)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


class TestSeeds:
    def test_deterministic(self):
        assert derive_iteration_seed(42, 0, "inputs") == derive_iteration_seed(42, 0, "inputs")

    def test_streams_differ(self):
        assert derive_iteration_seed(42, 0, "inputs") != derive_iteration_seed(42, 0, "systems")
        assert derive_iteration_seed(42, 0, "inputs") != derive_iteration_seed(43, 0, "inputs")

    def test_reference_vectors(self):
        # published SplitMix64 first output for state 0, and FNV-1a 64 test vectors
        assert _mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
        assert _fnv1a64(b"") == 0xCBF29CE484222325
        assert _fnv1a64(b"a") == 0xAF63DC4C8601EC8C

    def test_frozen_values(self):
        # pinned so any change to seed derivation (and so to every result) is caught
        assert [derive_iteration_seed(7, i, "inputs") for i in range(3)] == [
            5185349194993798756,
            17864929570019920450,
            1377190140909756126,
        ]
        assert derive_iteration_seed(0, 0, "") == 16539421115465412304

    def test_no_collisions_over_a_million_indices(self):
        seen = {derive_iteration_seed(42, i, "inputs") for i in range(1_000_000)}
        assert len(seen) == 1_000_000

    def test_rng_reproducible(self):
        a = iteration_rng(1, 2, "x").integers(0, 100, size=10)
        b = iteration_rng(1, 2, "x").integers(0, 100, size=10)
        assert a.tolist() == b.tolist()


class TestPercentile:
    def test_constant(self):
        assert percentile_interval([0.3] * 50, 0.95) == (0.3, 0.3)

    def test_one_to_hundred(self):
        samples = list(range(1, 101))
        lo, hi = percentile_interval(samples, 0.95)
        assert lo == pytest.approx(interp_quantile(samples, 0.025), abs=1e-12)
        assert hi == pytest.approx(interp_quantile(samples, 0.975), abs=1e-12)
        assert (lo, hi) == pytest.approx((3.475, 97.525), abs=1e-12)

    def test_containment(self):
        lo, hi = percentile_interval([0.0, 10.0], 0.5)
        assert 0.0 <= lo <= hi <= 10.0

    def test_errors(self):
        with pytest.raises(InputError):
            percentile_interval([], 0.95)
        with pytest.raises(InputError):
            percentile_interval([1.0], 1.0)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(method="boot-everything"),
            dict(iterations=0),
            dict(confidence_level=1.0),
            dict(confidence_level=0.0),
            dict(seed=-1),
            dict(seed=2**64),
            dict(scoring_mode="partial"),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            BootstrapConfig(**kwargs)


@pytest.fixture(scope="module")
def synthetic():
    return generate_dataset(SynthConfig(n_systems=8, m_test=400, m_jud=40, seed=3))


def oracle_samples(metric, human, cfg):
    """Separate resampler built on select_docs / select_systems and the public correlation."""
    metric_j = restrict_to_common_docs(metric, human)
    out = []
    for i in range(cfg.iterations):
        m = metric_j if cfg.scoring_mode == "judged-only" else metric
        h = human
        if cfg.method in ("boot-inputs", "boot-both"):
            if cfg.scoring_mode == "judged-only":
                cols = iteration_rng(cfg.seed, i, "inputs").integers(0, h.n_docs, size=h.n_docs)
                m, h = select_docs(m, cols), select_docs(h, cols)
            else:
                mc = iteration_rng(cfg.seed, i, "inputs/metric").integers(0, m.n_docs, size=m.n_docs)
                hc = iteration_rng(cfg.seed, i, "inputs/human").integers(0, h.n_docs, size=h.n_docs)
                m, h = select_docs(m, mc), select_docs(h, hc)
        if cfg.method in ("boot-systems", "boot-both"):
            rows = iteration_rng(cfg.seed, i, "systems").integers(0, m.n_systems, size=m.n_systems)
            m, h = select_systems(m, rows), select_systems(h, rows)
        try:
            out.append(system_level_correlation(m, h, "full-test").coefficient)
        except UndefinedCorrelationError:
            out.append(math.nan)
    return np.array(out)


class TestBootstrapCI:
    @pytest.mark.parametrize("method", ["boot-inputs", "boot-systems", "boot-both"])
    @pytest.mark.parametrize("mode", ["judged-only", "full-test"])
    def test_matches_oracle_resampler(self, synthetic, method, mode):
        metric, human = synthetic
        cfg = BootstrapConfig(method, 60, 99, 0.95, mode)
        got = bootstrap_correlation_samples(metric, human, cfg)
        np.testing.assert_array_equal(got, oracle_samples(metric, human, cfg))

    def test_systems_oracle_on_small_fixture(self):
        rng = np.random.default_rng(8)
        metric = matrix(np.round(rng.normal(size=(5, 10)), 1))
        human = matrix(np.round(rng.normal(size=(5, 10)), 1))
        cfg = BootstrapConfig("boot-systems", 300, 5, 0.95, "judged-only")
        got = bootstrap_correlation_samples(metric, human, cfg)
        expected = oracle_samples(metric, human, cfg)
        np.testing.assert_array_equal(got, expected)
        ci = bootstrap_correlation_ci(metric, human, cfg)
        assert ci.defined_iterations == int(np.sum(~np.isnan(expected)))

    def test_identical_matrices(self):
        rng = np.random.default_rng(1)
        m = matrix(rng.normal(size=(6, 25)))
        ci = bootstrap_correlation_ci(m, m, BootstrapConfig("boot-inputs", 200, 0, 0.95, "judged-only"))
        assert (ci.lower, ci.upper, ci.point_estimate) == (1.0, 1.0, 1.0)
        assert ci.defined_iterations == 200

    def test_deterministic(self, synthetic):
        metric, human = synthetic
        cfg = BootstrapConfig("boot-both", 100, 7, 0.9, "full-test")
        assert bootstrap_correlation_ci(metric, human, cfg) == bootstrap_correlation_ci(metric, human, cfg)

    def test_worker_count_invariant(self, synthetic):
        metric, human = synthetic
        cfg = BootstrapConfig("boot-inputs", 150, 7, 0.95, "full-test")
        a = bootstrap_correlation_samples(metric, human, cfg, workers=1)
        b = bootstrap_correlation_samples(metric, human, cfg, workers=4)
        np.testing.assert_array_equal(a, b)

    def test_bounds(self, synthetic):
        metric, human = synthetic
        for method in ("boot-inputs", "boot-systems", "boot-both"):
            ci = bootstrap_correlation_ci(metric, human, BootstrapConfig(method, 100, 1))
            assert -1.0 <= ci.lower <= ci.upper <= 1.0
            assert ci.point_estimate == system_level_correlation(metric, human, "judged-only").coefficient

    def test_undefined_iterations_dropped(self):
        # two systems with close scores: some resamples tie the metric means exactly
        metric = matrix([[1.0, 2.0, 3.0], [2.0, 2.0, 2.0]])
        human = matrix([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        ci = bootstrap_correlation_ci(metric, human, BootstrapConfig("boot-inputs", 300, 2))
        assert 0 < ci.defined_iterations < 300

    def test_all_undefined(self):
        m = matrix([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(UndefinedCorrelationError):
            bootstrap_correlation_ci(m, m, BootstrapConfig("boot-inputs", 20, 0))

    def test_full_test_narrower_monte_carlo(self):
        widths = {"judged-only": [], "full-test": []}
        for seed in range(20):
            metric, human = generate_dataset(SynthConfig(n_systems=10, m_test=2000, m_jud=50, seed=seed))
            for mode in widths:
                ci = bootstrap_correlation_ci(metric, human, BootstrapConfig("boot-inputs", 200, seed, 0.95, mode))
                widths[mode].append(ci.width)
        assert np.mean(widths["full-test"]) < np.mean(widths["judged-only"])


class TestVariance:
    def test_constant_matrix(self):
        m = matrix(np.full((4, 30), 2.5))
        report = system_score_variance(m, 10, 50, 0)
        assert set(report.per_system_variance.values()) == {0.0}

    def test_brute_force_resampler(self):
        rng = np.random.default_rng(2)
        m = matrix(rng.normal(size=(25, 100)))
        report = system_score_variance(m, 100, 200, 17)
        means = np.stack([
            system_means(select_docs(m, iteration_rng(17, i, "variance/M=100").integers(0, 100, size=100))).means
            for i in range(200)
        ])
        expected = means.var(axis=0, ddof=1)
        assert [report.per_system_variance[s] for s in m.system_ids] == expected.tolist()

    def test_reduction_matches_sigma2_over_m(self):
        rng = np.random.default_rng(4)
        m = matrix(rng.normal(size=(4, 11490)))
        small = system_score_variance(m, 100, 1000, 1)
        large = system_score_variance(m, 11490, 1000, 1)
        reduction = variance_reduction(small, large)
        assert 1 - 100 / 11490 == pytest.approx(0.9913, abs=1e-4)
        assert 0.985 <= reduction <= 0.996

    def test_variance_scaling(self):
        rng = np.random.default_rng(6)
        m = matrix(rng.normal(size=(3, 5000)))
        scaled = [system_score_variance(m, M, 1000, 2).mean_variance * M for M in (50, 100, 1000)]
        assert max(scaled) / min(scaled) < 1.2

    def test_invalid(self):
        m = matrix([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(InputError):
            system_score_variance(m, 0, 10, 0)
        with pytest.raises(InputError):
            system_score_variance(m, 5, 1, 0)


class TestStability:
    def test_system_only_dependence(self):
        m = matrix(np.repeat(np.arange(6, dtype=float)[:, None], 40, axis=1))
        for p in ranking_stability_curve(m, [1, 5, 40], 50, 3):
            assert (p.mean_tau, p.std_tau, p.defined) == (1.0, 0.0, 50)

    def test_deterministic(self):
        metric, _ = generate_dataset(SynthConfig(n_systems=6, m_test=200, m_jud=10, seed=1))
        a = ranking_stability_curve(metric, [5, 50], 100, 9)
        b = ranking_stability_curve(metric, [5, 50], 100, 9)
        assert a == b
        assert stability_csv(a) == stability_csv(b)
        assert stability_csv(a).splitlines()[0] == "M,mean_tau,std_tau,iterations,defined"

    def test_rises_with_m(self):
        small, large = [], []
        for seed in range(20):
            metric, _ = generate_dataset(SynthConfig(n_systems=8, m_test=1000, m_jud=10, seed=seed))
            p10, p1000 = ranking_stability_curve(metric, [10, 1000], 50, seed)
            small.append(p10.mean_tau)
            large.append(p1000.mean_tau)
        assert np.mean(small) <= np.mean(large)

    def test_swapped_draws_same_distribution(self):
        metric, _ = generate_dataset(SynthConfig(n_systems=8, m_test=500, m_jud=10, seed=5))
        taus = stability_samples(metric, 20, 400, 11)
        # the second sample drawn from the first stream and vice versa
        swapped = []
        for i in range(400):
            a = iteration_rng(11, i, "stability/b/M=20").integers(0, 500, size=20)
            b = iteration_rng(11, i, "stability/a/M=20").integers(0, 500, size=20)
            swapped.append(
                system_level_correlation(select_docs(metric, a), select_docs(metric, b), "full-test").coefficient
            )
        swapped = np.array(swapped)
        se = math.sqrt(taus.var(ddof=1) / 400 + swapped.var(ddof=1) / 400)
        assert abs(taus.mean() - swapped.mean()) < 2 * se

    def test_errors(self):
        m = matrix([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(InputError):
            ranking_stability_curve(m, [], 10, 0)
        with pytest.raises(InputError):
            ranking_stability_curve(m, [2], 1, 0)
        with pytest.raises(UndefinedCorrelationError):
            ranking_stability_curve(matrix(np.ones((3, 4))), [2], 10, 0)

    def test_worker_invariance(self):
        metric, _ = generate_dataset(SynthConfig(n_systems=6, m_test=300, m_jud=10, seed=2))
        assert ranking_stability_curve(metric, [10], 80, 4, workers=1) == ranking_stability_curve(
            metric, [10], 80, 4, workers=3
        )
