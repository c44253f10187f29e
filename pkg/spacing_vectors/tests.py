# in spacing_vectors/tests.py

import math

import numpy as np
from django.test import SimpleTestCase, tag

from dists.distributions import Binomial, Degenerate, Hypergeometric, NegHypergeometric
from spread_sampling.exceptions import ParameterDomainError
from spread_sampling.streams import make_rng

from .vectors import (
    Multinomial,
    MultivariateHypergeometric,
    MultivariateNegHypergeometric,
    compositions,
    marginal,
    pmf_vector,
    sample_vector,
    sample_vectors,
    spacing_variance,
    sum_distribution,
)


def small_families(m, n):
    """One member of each family for total m and dimension n."""
    return [
        MultivariateNegHypergeometric(m, n, 1.0),
        MultivariateNegHypergeometric(m, n, 0.5),
        MultivariateNegHypergeometric(m, n, 3.0),
        Multinomial(m, n),
        MultivariateHypergeometric(m, n, -(-m // n) + 1),
    ]


class VectorPmfTests(SimpleTestCase):
    """
    Point values, normalisation and symmetry of the spacing laws.
    """

    def test_uniform_compositions_for_unit_r(self):
        # N = 9, n = 3: every composition of 6 into 3 parts has mass 1 / C(8, 2).
        dist = MultivariateNegHypergeometric(6, 3, 1)
        for x in [(6, 0, 0), (2, 2, 2), (1, 0, 5)]:
            self.assertAlmostEqual(pmf_vector(dist, x), 1 / math.comb(8, 2), places=14)

    def test_empty_multinomial(self):
        self.assertAlmostEqual(pmf_vector(Multinomial(0, 3), (0, 0, 0)), 1.0, places=15)

    def test_multivariate_hypergeometric_point_value(self):
        dist = MultivariateHypergeometric(m=3, n=3, r=2)
        self.assertAlmostEqual(pmf_vector(dist, (2, 1, 0)), 0.1, places=14)
        self.assertEqual(pmf_vector(dist, (3, 0, 0)), 0.0)

    def test_sums_to_one_over_compositions(self):
        for m in range(0, 9):
            for n in range(1, 5):
                for dist in small_families(m, n):
                    with self.subTest(dist=str(dist)):
                        total = math.fsum(pmf_vector(dist, x) for x in compositions(m, n))
                        self.assertAlmostEqual(total, 1.0, delta=1e-10)

    def test_exchangeable(self):
        rng = make_rng(5)
        for dist in small_families(8, 4):
            for x in list(compositions(8, 4))[::7]:
                permuted = rng.permutation(x)
                with self.subTest(dist=str(dist), x=x):
                    self.assertAlmostEqual(
                        pmf_vector(dist, x), pmf_vector(dist, permuted), delta=1e-14
                    )

    def test_large_r_approaches_multinomial(self):
        near = MultivariateNegHypergeometric(6, 3, 1e6)
        limit = Multinomial(6, 3)
        for x in compositions(6, 3):
            self.assertAlmostEqual(pmf_vector(near, x), pmf_vector(limit, x), delta=1e-4)

    def test_invalid_vectors(self):
        dist = Multinomial(4, 3)
        for x in [(4, 0), (2, 2, 1), (5, -1, 0), (1.5, 1.5, 1)]:
            with self.subTest(x=x):
                with self.assertRaises(ParameterDomainError):
                    pmf_vector(dist, x)

    def test_invalid_parameters(self):
        with self.assertRaises(ParameterDomainError):
            MultivariateNegHypergeometric(4, 2, 0.0)
        with self.assertRaises(ParameterDomainError):
            MultivariateHypergeometric(4, 2, 1.5)
        with self.assertRaises(ParameterDomainError):
            MultivariateHypergeometric(7, 2, 3)
        with self.assertRaises(ParameterDomainError):
            Multinomial(3, 0)


class SumDistributionTests(SimpleTestCase):
    """
    Laws of the partial sums of components.
    """

    def test_marginals(self):
        self.assertEqual(marginal(MultivariateNegHypergeometric(7, 3, 1)), NegHypergeometric(7, 1, 3))
        self.assertAlmostEqual(marginal(MultivariateNegHypergeometric(7, 3, 1)).mean_var().mean, 7 / 3)
        self.assertEqual(marginal(Multinomial(6, 3)), Binomial(6, 1 / 3))
        self.assertEqual(marginal(MultivariateHypergeometric(6, 3, 4)), Hypergeometric(6, 4, 12))

    def test_hypergeometric_marginal_variance(self):
        m, r, R = 6, 4, 12
        share = r / R
        expected = m * share * (1 - share) * (R - m) / (R - 1)
        variance = marginal(MultivariateHypergeometric(m, 3, r)).mean_var().variance
        self.assertAlmostEqual(variance, expected, places=12)

    def test_full_sum_is_degenerate(self):
        self.assertEqual(sum_distribution(MultivariateNegHypergeometric(5, 4, 2.0), 4), Degenerate(5))

    def test_index_out_of_range(self):
        for j in (0, 5):
            with self.assertRaises(ParameterDomainError):
                sum_distribution(Multinomial(5, 4), j)

    def test_partial_sums_match_enumeration(self):
        m, n = 6, 4
        for dist in small_families(m, n):
            for j in range(1, n + 1):
                # Arrange: marginalise the joint PMF onto the sum of the first j components.
                expected = np.zeros(m + 1)
                for x in compositions(m, n):
                    expected[sum(x[:j])] += pmf_vector(dist, x)

                # Act
                law = sum_distribution(dist, j)

                # Assert
                with self.subTest(dist=str(dist), j=j):
                    np.testing.assert_allclose(law.pmf(np.arange(m + 1)), expected, atol=1e-12)


class VectorSamplingTests(SimpleTestCase):
    """
    Conditional and batched samplers.
    """

    def test_components_sum_to_total(self):
        rng = make_rng(3)
        for dist in small_families(11, 4):
            for method in ("conditional", "direct"):
                with self.subTest(dist=str(dist), method=method):
                    for _ in range(50):
                        x = sample_vector(dist, rng, method)
                        self.assertEqual(x.shape, (4,))
                        self.assertEqual(int(x.sum()), 11)
                        self.assertTrue(np.all(x >= 0))
                    batch = sample_vectors(dist, rng, 100)
                    self.assertTrue(np.all(batch.sum(axis=1) == 11))

    def test_single_point_support(self):
        dist = MultivariateHypergeometric(6, 3, 2)
        rng = make_rng(8)
        for method in ("conditional", "direct"):
            np.testing.assert_array_equal(sample_vector(dist, rng, method), [2, 2, 2])

    def test_unknown_method(self):
        with self.assertRaises(ParameterDomainError):
            sample_vector(Multinomial(3, 2), make_rng(1), "rejection")

    def test_uniform_compositions_are_equally_frequent(self):
        # Arrange
        dist = MultivariateNegHypergeometric(6, 3, 1)
        index = {x: i for i, x in enumerate(compositions(6, 3))}
        reps = 200_000

        # Act
        draws = sample_vectors(dist, make_rng(21), reps)
        codes = [index[tuple(row)] for row in draws.tolist()]
        counts = np.bincount(codes, minlength=len(index))

        # Assert
        p = 1 / 28
        z = (counts / reps - p) / math.sqrt(p * (1 - p) / reps)
        self.assertLess(np.max(np.abs(z)), 4.5)

    def test_conditional_sampler_frequencies(self):
        dist = MultivariateNegHypergeometric(4, 3, 2.0)
        comps = list(compositions(4, 3))
        index = {x: i for i, x in enumerate(comps)}
        rng = make_rng(22)
        reps = 40_000

        counts = np.zeros(len(comps))
        for _ in range(reps):
            counts[index[tuple(sample_vector(dist, rng).tolist())]] += 1

        p = np.array([pmf_vector(dist, x) for x in comps])
        z = (counts / reps - p) / np.sqrt(p * (1 - p) / reps)
        self.assertLess(np.max(np.abs(z)), 4.5)

    def test_multinomial_spacing_variance(self):
        # N = 200, n = 50: variance (N - n) / n * (1 - 1 / n) = 2.94.
        dist = Multinomial(150, 50)
        draws = sample_vectors(dist, make_rng(9), 20_000)
        self.assertAlmostEqual(spacing_variance(dist), 2.94, places=12)
        self.assertAlmostEqual(draws.var(), 2.94, delta=0.05)

    @tag("slow")
    def test_spacing_variance_table(self):
        reps = 1_000_000
        cases = [
            MultivariateNegHypergeometric(30, 10, 0.5),
            MultivariateNegHypergeometric(30, 10, 5.0),
            MultivariateNegHypergeometric(150, 50, 10.0),
            Multinomial(30, 10),
            Multinomial(12, 6),
            Multinomial(150, 50),
            MultivariateHypergeometric(30, 10, 4),
            MultivariateHypergeometric(30, 10, 6),
            MultivariateHypergeometric(150, 50, 4),
        ]
        for position, dist in enumerate(cases):
            with self.subTest(dist=str(dist)):
                # One component per draw keeps the draws independent.
                first = sample_vectors(dist, make_rng(31, position), reps)[:, 0].astype(float)
                centred = (first - first.mean()) ** 2
                standard_error = centred.std() / math.sqrt(reps)
                self.assertAlmostEqual(
                    centred.mean(), spacing_variance(dist), delta=3.5 * standard_error + 1e-12
                )
