import numpy as np
import pytest

from ingarch_sieve import (
    ConstantLink,
    ParametricLink,
    SplineLink,
    build_sieve_config,
    contrast,
    contrast_batch,
    iterate_link,
    simulate,
)
from conftest import random_contractive_coeffs


def naive_contrast(link, counts):
    """Independent oracle: refold the link from scratch for every term."""
    counts = np.asarray(counts)
    n = counts.size - 1
    total = 0.0
    for i in range(n):
        lam = 0.0
        for y in counts[: i + 1]:
            lam = link.value(lam, int(y))
        total += (counts[i + 1] - lam) ** 2
    return total / n


def _random_links(rng, count=12):
    links = [ParametricLink(), ConstantLink(0.5, 2.0), ConstantLink(2.0, 2.0)]
    cfg = build_sieve_config(2.0, 500, grid_points=11, count_cap=4)
    while len(links) < count:
        links.append(SplineLink(cfg, rng.uniform(0.0, 2.0, size=(cfg.basis_count, 5))))
    return links


class TestIterateLink:
    def test_single_count_is_plain_evaluation(self, truth):
        assert iterate_link(truth, 0.4, [3]) == truth.value(0.4, 3)

    def test_constant_link_fixed_point(self):
        link = ConstantLink(0.8, 2.0)
        assert iterate_link(link, 1.7, [0, 2, 5, 1]) == 0.8

    def test_empty_sequence_rejected(self, truth):
        with pytest.raises(ValueError):
            iterate_link(truth, 0.0, [])

    def test_reference_decay(self, truth):
        # Folding from the two extreme starts contracts at the link's
        # intensity Lipschitz rate: the gap after t counts is below L^t * 2.
        rng = np.random.default_rng(17)
        lip = 0.615
        for t in range(1, 21):
            ys = rng.integers(0, 6, size=t)
            gap = abs(iterate_link(truth, 2.0, ys) - iterate_link(truth, 0.0, ys))
            assert gap <= lip**t * 2.0

    def test_decay_for_random_contractive_links(self, reference_sieve):
        rng = np.random.default_rng(18)
        cfg = reference_sieve
        for _ in range(50):
            coeffs = random_contractive_coeffs(rng, cfg, 0.62, 0.50)
            link = SplineLink(cfg, coeffs)
            start = rng.uniform(0.0, 2.0)
            t = int(rng.integers(1, 30))
            ys = rng.integers(0, 8, size=t)
            gap = abs(iterate_link(link, start, ys) - iterate_link(link, 0.0, ys))
            assert gap <= 0.62**t * start


class TestContrast:
    def test_constant_link_hand_value(self):
        # predictions are 0.5 for both terms: ((0 - .5)^2 + (2 - .5)^2) / 2
        value = contrast(ConstantLink(0.5, 2.0), [1, 0, 2]).value
        assert value == pytest.approx(1.25, abs=1e-15)

    def test_perfect_fit_is_zero(self, reference_sieve):
        link = SplineLink.constant(reference_sieve, 1.0)
        counts = np.ones(50, dtype=np.int64)
        assert contrast(link, counts).value == pytest.approx(0.0, abs=1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(19)
        links = _random_links(rng)
        for case in range(100):
            link = links[case % len(links)]
            n = int(rng.integers(2, 101))
            counts = rng.poisson(1.0, size=n)
            fast = contrast(link, counts).value
            assert fast == pytest.approx(naive_contrast(link, counts), abs=1e-12)

    def test_prediction_retention(self, truth):
        counts = simulate(truth, 40, burn_in=10, seed=20).counts
        result = contrast(truth, counts, keep_predictions=True)
        assert result.predicted.shape == (result.n_terms,)
        recomputed = np.mean((counts[1:] - result.predicted) ** 2)
        assert result.value == pytest.approx(recomputed, abs=1e-15)
        assert contrast(truth, counts).predicted is None

    def test_arity(self, truth):
        with pytest.raises(ValueError):
            contrast(truth, [1])

    def test_truth_approximately_minimizes(self, truth):
        # On data generated by the reference link, distant candidates should
        # essentially never beat it on the contrast.
        distant = [
            ConstantLink(0.1, 2.0),
            ConstantLink(1.4, 2.0),
            ParametricLink(intercept=0.9, count_coef=0.05),
        ]
        wins = 0
        for seed in range(100):
            counts = simulate(truth, 2000, burn_in=50, seed=300 + seed).counts
            phi_truth = contrast(truth, counts).value
            if all(phi_truth <= contrast(g, counts).value for g in distant):
                wins += 1
        assert wins >= 95


class TestContrastBatch:
    def test_bitwise_equal_to_scalar(self, reference_sieve):
        rng = np.random.default_rng(21)
        cfg = reference_sieve
        stack = rng.uniform(0.0, 2.0, size=(16, cfg.basis_count, 6))
        counts = rng.poisson(0.9, size=200)
        batch = contrast_batch(cfg, stack, counts)
        for b in range(16):
            scalar = contrast(SplineLink(cfg, stack[b]), counts).value
            assert batch[b] == scalar

    def test_shape_validation(self, reference_sieve):
        with pytest.raises(ValueError):
            contrast_batch(reference_sieve, np.zeros((2, 3, 4)), [1, 2, 3])
        with pytest.raises(ValueError):
            contrast_batch(reference_sieve, np.zeros((2, 12, 6)), [1])
