# in estimation/tests.py

import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from designs.core import bernoulli, mh, mnh, multinomial, renewal_with_rate, srs
from designs.draws import SampleDraw, design_pmf
from inclusion.joint import joint_matrix
from spread_sampling.exceptions import NonEstimableError, ParameterDomainError, UnsupportedError
from spread_sampling.streams import make_rng

from .estimators import (
    EstimateResult,
    PopulationData,
    confidence_interval,
    estimate,
    ht_mean,
    ht_total,
    ht_totals,
    normal_quantile,
    var_ht,
    var_syg,
    var_syg_rows,
)


def noisy_trend(N, seed=5):
    """y_k = k plus fixed noise."""
    return PopulationData(np.arange(1, N + 1) + make_rng(seed).normal(0, 0.5, N))


def design_moments(design, pop, estimator):
    """
    E(estimator) and the exact Var(HT total) over every sample of a circular
    design, weighting each subset by its probability.
    """
    joint = joint_matrix(design)
    samples = [
        (units, design_pmf(design, units))
        for units in itertools.combinations(range(1, design.N + 1), design.n)
    ]
    samples = [(units, p) for units, p in samples if p > 0]
    totals = [ht_total(units, pop, joint.pi) for units, _ in samples]
    expected_total = math.fsum(p * t for (_, p), t in zip(samples, totals))
    true_variance = math.fsum(p * (t - expected_total) ** 2 for (_, p), t in zip(samples, totals))
    expected_estimator = math.fsum(p * estimator(units, pop, joint.pi, joint) for units, p in samples)
    return expected_total, true_variance, expected_estimator


class PopulationDataTests(SimpleTestCase):
    """
    PopulationData validation and summaries.
    """

    def test_total_and_mean(self):
        pop = PopulationData([1, 2, 3, 4])
        self.assertEqual(pop.N, 4)
        self.assertEqual(pop.total, 10.0)
        self.assertEqual(pop.mean, 2.5)

    def test_values_must_be_finite(self):
        with self.assertRaises(ParameterDomainError):
            PopulationData([1.0, float("nan")])
        with self.assertRaises(ParameterDomainError):
            PopulationData([])


class PointEstimateTests(SimpleTestCase):
    """
    Horvitz-Thompson point estimates.
    """

    def test_census_gives_the_total(self):
        pop = PopulationData([3.0, 1.5, -2.0, 7.25])
        self.assertEqual(ht_total([1, 2, 3, 4], pop, np.ones(4)), pop.total)

    def test_unbiased_over_all_simple_random_samples(self):
        pop = PopulationData([1, 2, 3, 4])
        pi = np.full(4, 0.5)
        totals = [ht_total(s, pop, pi) for s in itertools.combinations(range(1, 5), 2)]
        self.assertEqual(len(totals), 6)
        self.assertAlmostEqual(sum(totals) / 6, 10.0, places=12)

    def test_constant_inclusion_probability_expands_the_sample_sum(self):
        pop = noisy_trend(20)
        units = [2, 7, 11, 19]
        expected = 20 / 4 * pop.y[np.array(units) - 1].sum()
        self.assertAlmostEqual(ht_total(units, pop, np.full(20, 4 / 20)), expected, places=10)

    def test_mean_is_total_over_N(self):
        pop = PopulationData([1, 2, 3, 4])
        self.assertAlmostEqual(ht_mean([1, 4], pop, np.full(4, 0.5)), 2.5, places=15)

    def test_sample_draws_are_accepted(self):
        pop = PopulationData([1, 2, 3, 4])
        sample = SampleDraw((2, 3), (2, 1, 3))
        self.assertAlmostEqual(ht_total(sample, pop, np.full(4, 0.5)), 10.0, places=15)

    def test_empty_sample(self):
        pop = PopulationData([1, 2, 3])
        self.assertEqual(ht_total([], pop, np.full(3, 0.2)), 0.0)
        self.assertEqual(var_ht([], pop, np.full(3, 0.2), np.full((3, 3), 0.04)), 0.0)

    def test_zero_inclusion_probability_on_a_sampled_unit(self):
        pop = PopulationData([1, 2, 3])
        with self.assertRaises(ParameterDomainError):
            ht_total([1, 2], pop, np.array([0.5, 0.0, 0.5]))

    def test_units_out_of_range(self):
        pop = PopulationData([1, 2, 3])
        with self.assertRaises(ParameterDomainError):
            ht_total([1, 4], pop, np.full(3, 0.5))


class VarianceEstimatorTests(SimpleTestCase):
    """
    HT and SYG variance estimators.
    """

    def test_bernoulli_design_keeps_only_the_diagonal(self):
        N, rate = 40, 0.25
        pop = noisy_trend(N)
        joint = joint_matrix(bernoulli(N, rate))
        units = [3, 4, 10, 22, 31, 40]
        y = pop.y[np.array(units) - 1]
        expected = math.fsum(y**2 * (1 - rate) / rate**2)
        self.assertAlmostEqual(var_ht(units, pop, joint.pi, joint), expected, places=8)

    def test_census_has_zero_variance(self):
        pop = noisy_trend(6)
        joint = joint_matrix(srs(6, 6))
        units = list(range(1, 7))
        self.assertAlmostEqual(var_ht(units, pop, joint.pi, joint), 0.0, places=12)
        self.assertAlmostEqual(var_syg(units, pop, joint.pi, joint), 0.0, places=12)

    def test_constant_expanded_values_give_zero_syg(self):
        pop = PopulationData(np.full(12, 3.0))
        joint = joint_matrix(mnh(12, 4, 5.0))
        self.assertEqual(var_syg([1, 5, 6, 11], pop, joint.pi, joint), 0.0)

    def test_full_matrix_and_joint_matrix_agree(self):
        pop = noisy_trend(10)
        joint = joint_matrix(mnh(10, 3, 2.0))
        full = np.array([[joint.joint(k, l) for l in range(1, 11)] for k in range(1, 11)])
        units = [2, 3, 9]
        self.assertAlmostEqual(
            var_syg(units, pop, joint.pi, full), var_syg(units, pop, joint.pi, joint), places=12
        )
        self.assertAlmostEqual(
            var_ht(units, pop, joint.pi, full), var_ht(units, pop, joint.pi, joint), places=10
        )

    def test_systematic_binomial_chain(self):
        # Rate 0.1 with the default nine trials draws every tenth unit.
        pop = noisy_trend(50)
        joint = joint_matrix(renewal_with_rate("binomial", 50, 0.1))
        units = [1, 11, 21, 31, 41]
        value = var_ht(units, pop, joint.pi, joint)
        self.assertTrue(math.isfinite(value))
        expanded = pop.y[np.array(units) - 1] / 0.1
        # Delta / pi_kl is 0.9 on the diagonal and 0.9 for every pair ten apart.
        self.assertAlmostEqual(value, 0.9 * math.fsum(expanded) ** 2, delta=1e-9 * value)

    def test_null_joint_probability_names_the_pair(self):
        pop = noisy_trend(10)
        joint = joint_matrix(mh(10, 2, 5))
        with self.assertRaises(NonEstimableError) as raised:
            var_syg([4, 5], pop, joint.pi, joint)
        self.assertEqual(raised.exception.pair, (4, 5))
        with self.assertRaises(NonEstimableError):
            var_ht([4, 5], pop, joint.pi, joint)

    def test_syg_is_non_negative_under_simple_random_sampling(self):
        pop = noisy_trend(8)
        joint = joint_matrix(srs(8, 3))
        for units in itertools.combinations(range(1, 9), 3):
            self.assertGreaterEqual(var_syg(units, pop, joint.pi, joint), 0.0)


class BatchEstimatorTests(SimpleTestCase):
    """
    Row-wise HT totals and SYG variances over many samples.
    """

    def test_rows_match_the_single_sample_estimators(self):
        # Arrange
        pop = noisy_trend(12)
        joint = joint_matrix(mnh(12, 4, 2.0))
        samples = np.array(list(itertools.combinations(range(1, 13), 4)))

        # Act
        totals = ht_totals(samples, pop, joint.pi)
        variances = var_syg_rows(samples, pop, joint)

        # Assert
        for row, units in enumerate(samples):
            self.assertAlmostEqual(totals[row], ht_total(units, pop, joint.pi), places=9)
            self.assertAlmostEqual(variances[row], var_syg(units, pop, joint.pi, joint), delta=1e-9)

    def test_rows_with_a_null_pair_are_nan(self):
        pop = noisy_trend(10)
        joint = joint_matrix(mh(10, 2, 5))
        variances = var_syg_rows([[1, 6], [4, 5]], pop, joint)
        self.assertTrue(math.isfinite(variances[0]))
        self.assertTrue(math.isnan(variances[1]))

    def test_single_unit_rows(self):
        pop = noisy_trend(5)
        joint = joint_matrix(srs(5, 1))
        np.testing.assert_array_equal(var_syg_rows([[2], [4]], pop, joint), [0.0, 0.0])

    def test_units_out_of_range(self):
        pop = noisy_trend(5)
        joint = joint_matrix(srs(5, 2))
        with self.assertRaises(ParameterDomainError):
            ht_totals([[1, 6]], pop, joint.pi)
        with self.assertRaises(ParameterDomainError):
            var_syg_rows([1, 2], pop, joint)


class EnumerationUnbiasednessTests(SimpleTestCase):
    """
    Design expectations computed over every sample.
    """

    def test_simple_random_sampling_six_three(self):
        pop = noisy_trend(6)
        for estimator in (var_ht, var_syg):
            with self.subTest(estimator=estimator.__name__):
                total, variance, expected = design_moments(srs(6, 3), pop, estimator)
                self.assertAlmostEqual(total, pop.total, places=10)
                self.assertAlmostEqual(expected, variance, places=10)

    def test_spread_design_twelve_four(self):
        pop = noisy_trend(12)
        total, variance, expected = design_moments(mnh(12, 4, 5.0), pop, var_syg)
        self.assertAlmostEqual(total, pop.total, places=9)
        self.assertAlmostEqual(expected, variance, places=9)

    def test_nine_three_designs(self):
        pop = noisy_trend(9)
        for design in (srs(9, 3), mnh(9, 3, 2.0), multinomial(9, 3)):
            for estimator in (var_syg, var_ht):
                with self.subTest(design=design.label, estimator=estimator.__name__):
                    total, variance, expected = design_moments(design, pop, estimator)
                    self.assertAlmostEqual(total, pop.total, places=9)
                    self.assertAlmostEqual(expected, variance, places=9)


class ConfidenceIntervalTests(SimpleTestCase):
    """
    Normal-theory intervals.
    """

    def test_zero_variance_is_degenerate(self):
        self.assertEqual(confidence_interval(4.0, 0.0), (4.0, 4.0))

    def test_ninety_five_percent(self):
        low, high = confidence_interval(10.0, 1.0, 0.95)
        self.assertAlmostEqual(low, 8.040, places=3)
        self.assertAlmostEqual(high, 11.960, places=3)

    def test_quantiles(self):
        self.assertAlmostEqual(normal_quantile(0.95), 1.959964, places=6)
        self.assertAlmostEqual(normal_quantile(0.5), 0.674490, places=6)

    def test_negative_variance_omits_the_interval(self):
        with self.assertLogs("estimation.estimators", level="WARNING"):
            self.assertIsNone(confidence_interval(1.0, -0.5))

    def test_level_out_of_range(self):
        for level in (0.0, 1.0, 1.5):
            with self.assertRaises(ParameterDomainError):
                confidence_interval(1.0, 1.0, level)


class EstimateTests(SimpleTestCase):
    """
    estimate() on designs of every kind.
    """

    def test_mean_of_a_circular_sample(self):
        # Arrange
        pop = noisy_trend(12)
        joint = joint_matrix(srs(12, 4))
        units = [1, 4, 7, 10]

        # Act
        result = estimate(units, pop, joint, target="mean")

        # Assert
        total = estimate(units, pop, joint)
        self.assertAlmostEqual(result.point, total.point / 12, places=12)
        self.assertAlmostEqual(result.variance, total.variance / 144, places=12)
        self.assertEqual(result.method, "syg")
        self.assertTrue(result.covers(result.point))

    def test_ht_method_on_a_renewal_sample(self):
        pop = noisy_trend(30)
        joint = joint_matrix(bernoulli(30, 0.2))
        result = estimate([2, 9, 14, 20, 27], pop, joint, method="ht")
        self.assertEqual(result.to_dict()["method"], "HT")
        self.assertGreater(result.variance, 0)

    def test_syg_needs_a_fixed_size_design(self):
        pop = noisy_trend(30)
        joint = joint_matrix(bernoulli(30, 0.2))
        with self.assertRaises(UnsupportedError):
            estimate([2, 9], pop, joint, method="syg")

    def test_population_size_must_match(self):
        with self.assertRaises(ParameterDomainError):
            estimate([1, 2], noisy_trend(9), joint_matrix(srs(10, 2)))

    def test_unknown_target_and_method(self):
        pop = noisy_trend(10)
        joint = joint_matrix(srs(10, 2))
        with self.assertRaises(ParameterDomainError):
            estimate([1, 2], pop, joint, target="median")
        with self.assertRaises(ParameterDomainError):
            estimate([1, 2], pop, joint, method="jackknife")

    def test_result_without_interval(self):
        result = EstimateResult(1.0, -0.2)
        self.assertIsNone(result.ci)
        self.assertFalse(result.covers(1.0))
        self.assertIsNone(result.to_dict()["ci"])
