import math

import numpy as np
import pytest

from privboost import boosting as B
from privboost.exceptions import BadConfigError, WeakLearnerFailureError
from privboost.halfspace import LabeledSample, weak_learn_center
from privboost.data import GeneratorConfig, generate_margin_sample
from privboost.measures import (
    brute_force_kl_projection,
    kl_divergence,
    statistical_distance,
)
from privboost.rng import stream


def _axis_sample(n=4):
    # points on the first axis, labels matching sign, so z = e1 is exact
    signs = np.array([1.0, -1.0] * (n // 2))
    x = np.zeros((n, 2))
    x[:, 0] = signs
    return LabeledSample(x, signs)


# ---------------------------------------------------------------------------
# lazy-Bregman next measure
# ---------------------------------------------------------------------------

def test_next_measure_empty_hypotheses():
    sample = _axis_sample(4)
    measure, dist = B.lazy_bregman_next_measure(sample, [], 0.5, 0.1)
    np.testing.assert_array_equal(measure, [0.5] * 4)
    np.testing.assert_array_equal(dist, [0.25] * 4)


def test_next_measure_equal_losses_projects_back_to_uniform():
    # a hypothesis matching every label exactly has loss 1 everywhere, and
    # uniform decay is undone by the projection
    sample = _axis_sample(6)
    measure, dist = B.lazy_bregman_next_measure(sample, [np.array([1.0, 0.0])], 0.5, 0.1)
    np.testing.assert_allclose(measure, [0.5] * 6, atol=1e-12)
    np.testing.assert_allclose(dist, [1 / 6] * 6, atol=1e-12)


def test_next_measure_hand_computed():
    # n=2, kappa=1/2, lambda=ln 2, losses (1, 0) -> measure (1/3, 2/3)
    sample = LabeledSample(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    z = np.array([1.0])
    np.testing.assert_array_equal(B.example_losses(sample, z), [1.0, 0.0])
    measure, dist = B.lazy_bregman_next_measure(sample, [z], 0.5, math.log(2))
    np.testing.assert_allclose(measure, [1 / 3, 2 / 3], atol=1e-12)
    np.testing.assert_allclose(dist, [1 / 3, 2 / 3], atol=1e-12)
    # the capped-scaling output is also the KL-closest dense measure
    raw = 0.5 * np.exp(-math.log(2) * np.array([1.0, 0.0]))
    brute = brute_force_kl_projection(raw, 0.5, 0.02)
    assert kl_divergence(measure, raw) <= kl_divergence(brute, raw) + 5 * 0.02 * 2


def test_losses_stay_in_unit_interval(rng):
    sample, _ = generate_margin_sample(GeneratorConfig(d=8, n=50, tau=0.3, seed=5))
    for _ in range(100):
        z = rng.standard_normal(8) * float(rng.uniform(0.1, 20.0))
        losses = B.example_losses(sample, z)
        assert losses.min() >= 0.0 and losses.max() <= 1.0


# ---------------------------------------------------------------------------
# the boosting loop
# ---------------------------------------------------------------------------

def test_boost_single_round_returns_the_hypothesis():
    sample = _axis_sample()
    fixed = np.array([0.3, -0.4])
    out = B.boost(
        sample,
        B.BoostConfig(0.25, 0.1, 1),
        B.LazyBregmanMeasure(0.25, 0.1),
        lambda s, d, g: fixed,
        0,
    )
    np.testing.assert_array_equal(out.aggregate, fixed)
    assert out.hypotheses.shape == (1, 2)


def test_boost_averages_stub_hypotheses():
    sample = _axis_sample()
    fixed = np.array([1.0, 2.0])
    out = B.boost(
        sample,
        B.BoostConfig(0.25, 0.1, 3),
        B.LazyBregmanMeasure(0.25, 0.1),
        lambda s, d, g: fixed,
        0,
    )
    np.testing.assert_allclose(out.aggregate, fixed, atol=1e-15)

    seq = iter([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    out = B.boost(
        sample,
        B.BoostConfig(0.25, 0.1, 2),
        B.LazyBregmanMeasure(0.25, 0.1),
        lambda s, d, g: next(seq),
        0,
    )
    np.testing.assert_allclose(out.aggregate, [0.5, 0.5], atol=1e-15)


def test_boost_call_protocol():
    """Exactly T producer and learner calls; the producer sees only the
    hypotheses made so far."""
    sample = _axis_sample()
    seen_lengths = []

    def producer(s, hyps):
        seen_lengths.append(len(hyps))
        return B.lazy_bregman_next_measure(s, hyps, 0.25, 0.1)

    learner_calls = []

    def learner(s, dist, g):
        learner_calls.append(dist.copy())
        return np.array([1.0, 0.0])

    out = B.boost(sample, B.BoostConfig(0.25, 0.1, 5), producer, learner, 0)
    assert seen_lengths == [0, 1, 2, 3, 4]
    assert len(learner_calls) == 5
    assert out.rounds == 5


def test_boost_aggregate_matches_mean_exactly():
    sample, _ = generate_margin_sample(GeneratorConfig(d=6, n=40, tau=0.4, seed=3))
    out = B.boost(
        sample,
        B.BoostConfig(0.2, 0.05, 7),
        B.LazyBregmanMeasure(0.2, 0.05),
        lambda s, d, g: weak_learn_center(s, d) + 0.01 * g.standard_normal(s.d),
        11,
    )
    np.testing.assert_allclose(
        out.aggregate, out.hypotheses.mean(axis=0), rtol=0, atol=1e-12
    )


def test_boost_wraps_learner_failures():
    sample = _axis_sample()

    def broken(s, dist, g):
        raise RuntimeError("boom")

    with pytest.raises(WeakLearnerFailureError) as err:
        B.boost(sample, B.BoostConfig(0.25, 0.1, 3), B.LazyBregmanMeasure(0.25, 0.1), broken, 0)
    assert err.value.round_index == 0


def test_boost_checks_smoothness():
    sample = _axis_sample(8)  # cap is 1/(kappa n) = 0.5, a point mass breaks it

    def bad_producer(s, hyps):
        dist = np.zeros(s.n)
        dist[0] = 1.0
        return np.full(s.n, 0.25), dist

    with pytest.raises(AssertionError):
        B.boost(sample, B.BoostConfig(0.25, 0.1, 1), bad_producer, lambda s, d, g: np.zeros(2), 0)


def test_config_validation():
    with pytest.raises(BadConfigError):
        B.BoostConfig(0.0, 0.1, 5)
    with pytest.raises(BadConfigError):
        B.BoostConfig(0.5, 1.0, 5)
    with pytest.raises(BadConfigError):
        B.BoostConfig(0.5, 0.1, 0)


# ---------------------------------------------------------------------------
# determinism, cache consistency, smoothness, stability
# ---------------------------------------------------------------------------

def test_boost_is_reproducible_bit_for_bit():
    sample, _ = generate_margin_sample(GeneratorConfig(d=10, n=80, tau=0.3, seed=8))
    cfg = B.BoostConfig(0.1, 0.05, 20)

    def noisy(s, d, g):
        return weak_learn_center(s, d) + 0.05 * g.standard_normal(s.d)

    first = B.boost(sample, cfg, B.LazyBregmanMeasure(0.1, 0.05), noisy, 42)
    second = B.boost(sample, cfg, B.LazyBregmanMeasure(0.1, 0.05), noisy, 42)
    assert np.array_equal(first.hypotheses, second.hypotheses)


def test_cache_matches_from_scratch_recomputation():
    sample, _ = generate_margin_sample(GeneratorConfig(d=5, n=60, tau=0.3, seed=2))
    g = stream(17)
    hypotheses = [g.standard_normal(5) for _ in range(12)]
    producer = B.LazyBregmanMeasure(0.15, 0.08)
    for t in range(len(hypotheses) + 1):
        cached_measure, cached_dist = producer.produce(sample, hypotheses[:t])
        fresh_measure, fresh_dist = B.lazy_bregman_next_measure(
            sample, hypotheses[:t], 0.15, 0.08
        )
        assert np.array_equal(cached_measure, fresh_measure)
        assert np.array_equal(cached_dist, fresh_dist)


def test_cache_discards_stale_state():
    sample, _ = generate_margin_sample(GeneratorConfig(d=4, n=30, tau=0.3, seed=4))
    g = stream(18)
    a, b = g.standard_normal(4), g.standard_normal(4)
    producer = B.LazyBregmanMeasure(0.2, 0.1)
    producer.produce(sample, [a])
    stale = producer.produce(sample, [b])  # same length, different hypothesis
    fresh = B.lazy_bregman_next_measure(sample, [b], 0.2, 0.1)
    assert np.array_equal(stale[0], fresh[0])


def test_every_distribution_is_smooth(rng):
    for trial in range(20):
        n = int(rng.integers(10, 200))
        kappa = float(rng.uniform(0.05, 0.6))
        sample, _ = generate_margin_sample(
            GeneratorConfig(d=6, n=n, tau=0.4, seed=100 + trial)
        )
        hypotheses = [rng.standard_normal(6) for _ in range(int(rng.integers(0, 6)))]
        _, dist = B.lazy_bregman_next_measure(sample, hypotheses, kappa, 0.1)
        assert dist.max() <= 1.0 / (kappa * n) + 1e-12


def test_neighboring_samples_give_close_distributions(rng):
    """Neighboring-sample stability at small scale; the full campaign is in the
    acceptance suite."""
    for trial in range(40):
        n = int(rng.integers(10, 120))
        kappa = float(rng.uniform(0.05, 0.5))
        sample, _ = generate_margin_sample(
            GeneratorConfig(d=5, n=n, tau=0.3, seed=300 + trial)
        )
        x = sample.x.copy()
        y = sample.y.copy()
        i = int(rng.integers(n))
        v = rng.standard_normal(5)
        x[i] = v / (2 * np.linalg.norm(v))
        y[i] = -y[i]
        neighbor = LabeledSample(x, y)
        hypotheses = [rng.standard_normal(5) for _ in range(int(rng.integers(0, 5)))]
        _, d1 = B.lazy_bregman_next_measure(sample, hypotheses, kappa, 0.1)
        _, d2 = B.lazy_bregman_next_measure(neighbor, hypotheses, kappa, 0.1)
        assert statistical_distance(d1, d2) <= 1.0 / (kappa * n) + 1e-9


# ---------------------------------------------------------------------------
# margins
# ---------------------------------------------------------------------------

def test_margin_failure_fraction_examples():
    perfect = _axis_sample()
    out = B.boost(
        perfect,
        B.BoostConfig(0.25, 0.1, 1),
        B.LazyBregmanMeasure(0.25, 0.1),
        lambda s, d, g: np.array([1.0, 0.0]),
        0,
    )
    assert B.margin_failure_fraction(out, perfect, 0.5) == 0.0

    zero = B.BoostOutput(np.zeros((1, 2)), np.zeros(2))
    assert B.margin_failure_fraction(zero, perfect, 0.0) == 1.0
    assert B.margin_failure_fraction(zero, perfect, 0.9) == 1.0

    mixed = LabeledSample(np.array([[0.9], [0.2], [-0.1]]), np.array([1.0, 1.0, 1.0]))
    single = B.BoostOutput(np.array([[1.0]]), np.array([1.0]))
    assert B.margin_failure_fraction(single, mixed, 0.25) == pytest.approx(2 / 3)


def test_margin_round_bound_small():
    """Noiseless runs reach margin gamma on all but a kappa fraction after
    the round bound; 20-seed version lives in the acceptance suite."""
    kappa, tau = 0.1, 0.5
    gamma = tau / 4
    lam = gamma / 4
    rounds = math.ceil(16 * math.log(1 / kappa) / gamma**2)
    for seed in (0, 1):
        sample, _ = generate_margin_sample(
            GeneratorConfig(d=10, n=400, tau=tau, seed=seed)
        )
        out = B.boost(
            sample,
            B.BoostConfig(kappa, lam, rounds),
            B.LazyBregmanMeasure(kappa, lam),
            lambda s, d, g: weak_learn_center(s, d),
            seed,
        )
        assert B.margin_failure_fraction(out, sample, gamma) <= kappa


def test_aggregate_values_chunking_is_consistent():
    sample, _ = generate_margin_sample(GeneratorConfig(d=7, n=90, tau=0.3, seed=21))
    g = stream(33)
    hyps = np.array([g.standard_normal(7) for _ in range(10)])
    small = B.aggregate_values(sample, hyps, chunk=3)
    large = B.aggregate_values(sample, hyps, chunk=512)
    np.testing.assert_allclose(small, large, atol=1e-12)
