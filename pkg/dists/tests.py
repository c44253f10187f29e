# in dists/tests.py

import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy import special

from spread_sampling.exceptions import ParameterDomainError, UnsupportedError
from spread_sampling.streams import make_rng

from .distributions import (
    Bernoulli,
    Binomial,
    Degenerate,
    ForwardOf,
    Geometric,
    Hypergeometric,
    NegBinomial,
    NegHypergeometric,
    Poisson,
    Uniform,
    cdf,
    faulhaber_moment,
    forward,
    mean_var,
    pmf,
    sample,
    truncation_point,
)
from .forms import dist_from_spec, dist_to_spec

CATALOGUE = [
    Bernoulli(0.3),
    Binomial(12, 0.35),
    Geometric(0.2),
    NegBinomial(2.5, 0.3),
    NegBinomial(0.5, 0.05),
    Poisson(3.5),
    Poisson(60.0),
    Hypergeometric(5, 7, 15),
    NegHypergeometric(10, 2.5, 7.0),
    Uniform(6),
    Degenerate(4),
]


class PmfTests(SimpleTestCase):
    """
    Point values of the PMFs and normalisation of every family.
    """

    def test_geometric_point_value(self):
        self.assertAlmostEqual(pmf(Geometric(0.5), 1), 0.25, places=15)

    def test_degenerate_is_a_point_mass(self):
        self.assertEqual(pmf(Degenerate(3), 3), 1.0)
        self.assertEqual(pmf(Degenerate(3), 2), 0.0)

    def test_negative_binomial_is_sum_of_two_geometrics(self):
        # Arrange: convolve the Geometric(0.4) table with itself.
        xs = np.arange(201)
        geometric = Geometric(0.4).pmf(xs)
        convolved = np.convolve(geometric, geometric)[: len(xs)]

        # Act
        values = NegBinomial(2, 0.4).pmf(xs)

        # Assert
        np.testing.assert_allclose(values, convolved, rtol=1e-10, atol=1e-15)

    def test_zero_outside_support(self):
        self.assertEqual(pmf(Binomial(4, 0.3), 5), 0.0)
        self.assertEqual(pmf(Hypergeometric(5, 7, 8), 3), 0.0)
        self.assertEqual(pmf(Uniform(2), -1), 0.0)

    def test_every_family_sums_to_one(self):
        for dist in CATALOGUE:
            with self.subTest(dist=str(dist)):
                xs = np.arange(truncation_point(dist) + 1)
                self.assertAlmostEqual(math.fsum(dist.pmf(xs)), 1.0, delta=1e-10)

    def test_forward_laws_sum_to_one(self):
        for inner in (Binomial(6, 0.5), NegBinomial(2.0, 0.3), Poisson(4.0), Bernoulli(0.7)):
            dist = forward(inner)
            with self.subTest(dist=str(dist)):
                xs = np.arange(truncation_point(dist) + 1)
                self.assertAlmostEqual(math.fsum(dist.pmf(xs)), 1.0, delta=1e-10)

    def test_cdf_and_truncation_point(self):
        self.assertAlmostEqual(cdf(Poisson(2.0), 0), math.exp(-2.0), places=12)
        self.assertAlmostEqual(cdf(Binomial(3, 0.5), 1), 0.5, places=12)
        # 0.5 ** 10 is the first tail below 1e-3.
        self.assertEqual(truncation_point(Geometric(0.5), 1e-3), 9)
        self.assertEqual(truncation_point(Binomial(7, 0.2)), 7)


class MomentTests(SimpleTestCase):
    """
    Closed-form moments against direct summation.
    """

    def test_negative_binomial_closed_form(self):
        moments = mean_var(NegBinomial(3.0, 0.25))
        self.assertAlmostEqual(moments.mean, 3.0 * 0.75 / 0.25)
        self.assertAlmostEqual(moments.variance, 3.0 * 0.75 / 0.25**2)

    def test_uniform_on_a_single_point(self):
        moments = mean_var(Uniform(0))
        self.assertEqual((moments.mean, moments.variance), (0.0, 0.0))

    def test_closed_forms_match_summation(self):
        for dist in CATALOGUE:
            with self.subTest(dist=str(dist)):
                moments = mean_var(dist)
                first = dist.expect(lambda xs: xs)
                second = dist.expect(lambda xs: xs**2)
                self.assertAlmostEqual(moments.mean, first, delta=1e-8 * max(1.0, first))
                self.assertAlmostEqual(
                    moments.variance, second - first**2, delta=1e-8 * max(1.0, second)
                )

    def test_forward_binomial_mean_by_summation(self):
        dist = ForwardOf(Binomial(4, 0.3))
        xs = np.arange(5)
        direct = math.fsum(xs * dist.pmf(xs))
        self.assertAlmostEqual(mean_var(dist).mean, direct, places=12)


class ForwardTests(SimpleTestCase):
    """
    Forward transforms and their Faulhaber moments.
    """

    def test_geometric_is_its_own_forward_transform(self):
        self.assertEqual(forward(Geometric(0.3)), Geometric(0.3))

        xs = np.arange(201)
        np.testing.assert_allclose(
            ForwardOf(Geometric(0.3)).pmf(xs), Geometric(0.3).pmf(xs), rtol=1e-10, atol=1e-12
        )

    def test_degenerate_maps_to_uniform(self):
        self.assertEqual(forward(Degenerate(4)), Uniform(4))

    def test_forward_binomial_incomplete_beta_form(self):
        n, p = 9, 0.35
        dist = forward(Binomial(n, p))
        for x in range(1, n + 1):
            with self.subTest(x=x):
                expected = special.betainc(x, n - x + 1, p) / (n * p + 1)
                self.assertAlmostEqual(pmf(dist, x), expected, places=12)
                tail = math.fsum(Binomial(n, p).pmf(np.arange(x, n + 1)))
                self.assertAlmostEqual(pmf(dist, x), tail / (n * p + 1), places=12)

    def test_forward_bernoulli_closed_form(self):
        p = 0.4
        dist = forward(Bernoulli(p))
        self.assertAlmostEqual(pmf(dist, 0), 1 / (p + 1))
        self.assertAlmostEqual(pmf(dist, 1), p / (p + 1))

    def test_forward_negative_binomial_closed_form(self):
        r, p = 2.5, 0.3
        dist = forward(NegBinomial(r, p))
        for x in (1, 4, 17):
            expected = p * special.betainc(x, r, 1 - p) / (r * (1 - p) + p)
            self.assertAlmostEqual(pmf(dist, x), expected, places=12)

    def test_forward_of_laws_without_closed_tails(self):
        for inner in (Hypergeometric(4, 6, 11), NegHypergeometric(3, 4, 10), ForwardOf(Hypergeometric(4, 6, 11))):
            with self.subTest(inner=str(inner)):
                dist = forward(inner)
                xs = np.arange(truncation_point(dist, 1e-16) + 1)
                weights = dist.pmf(xs)
                self.assertTrue(np.all(np.isfinite(weights)))
                self.assertAlmostEqual(math.fsum(weights), 1.0, places=10)

        # Pr(X_F = 1) = Pr(X >= 1) / (1 + E X).
        inner = Hypergeometric(4, 6, 11)
        tail = 1 - pmf(inner, 0)
        self.assertAlmostEqual(pmf(forward(inner), 1), tail / (1 + 4 * 6 / 11), places=12)

    def test_faulhaber_moments(self):
        self.assertEqual(faulhaber_moment(Degenerate(0), 1), 0.0)
        self.assertAlmostEqual(faulhaber_moment(Geometric(0.4), 1), 0.6 / 0.4, places=9)

        xs = np.arange(401)
        direct = math.fsum(xs**2 * ForwardOf(Poisson(2.0)).pmf(xs))
        self.assertAlmostEqual(faulhaber_moment(Poisson(2.0), 2), direct, places=9)

    def test_faulhaber_moments_match_forward_summation(self):
        for inner in (NegBinomial(2.0, 0.3), Binomial(10, 0.6), Hypergeometric(4, 6, 11)):
            xs = np.arange(truncation_point(ForwardOf(inner), 1e-16) + 1)
            weights = ForwardOf(inner).pmf(xs)
            for order in (1, 2):
                with self.subTest(inner=str(inner), order=order):
                    direct = math.fsum(xs**order * weights)
                    self.assertAlmostEqual(faulhaber_moment(inner, order), direct, delta=1e-9 * max(1.0, direct))

    def test_unsupported_order(self):
        with self.assertRaises(UnsupportedError):
            faulhaber_moment(Poisson(1.0), 3)


class SamplingTests(SimpleTestCase):
    """
    Seeded draws.
    """

    def test_degenerate_draws(self):
        rng = make_rng(1)
        self.assertEqual(sample(Degenerate(5), rng), 5)
        self.assertTrue(np.all(sample(Degenerate(5), rng, size=10) == 5))

    def test_same_seed_same_draws(self):
        first = sample(NegBinomial(2.0, 0.3), make_rng(11, 4), size=50)
        second = sample(NegBinomial(2.0, 0.3), make_rng(11, 4), size=50)
        np.testing.assert_array_equal(first, second)

    def test_geometric_empirical_mean(self):
        draws = sample(Geometric(0.5), make_rng(2024), size=1_000_000)
        self.assertAlmostEqual(draws.mean(), 1.0, delta=0.01)

    @tag("slow")
    def test_forward_binomial_frequencies(self):
        # Arrange
        dist = ForwardOf(Binomial(6, 0.5))
        reps = 1_000_000

        # Act
        draws = sample(dist, make_rng(77), size=reps)
        counts = np.bincount(draws, minlength=7)

        # Assert: every cell within 4 binomial standard deviations.
        expected = dist.pmf(np.arange(7))
        z = (counts / reps - expected) / np.sqrt(expected * (1 - expected) / reps)
        self.assertLess(np.max(np.abs(z)), 4.0)


class ParameterDomainTests(SimpleTestCase):
    """
    Constructors reject parameters outside their domain.
    """

    def test_invalid_parameters(self):
        invalid = [
            lambda: Geometric(0.0),
            lambda: Bernoulli(1.5),
            lambda: Binomial(2.5, 0.3),
            lambda: NegBinomial(-1.0, 0.5),
            lambda: Poisson(0.0),
            lambda: Hypergeometric(5, 2, 3),
            lambda: NegHypergeometric(4, 3.0, 3.0),
            lambda: Uniform(-1),
        ]
        for build in invalid:
            with self.subTest(build=build):
                with self.assertRaises(ParameterDomainError):
                    build()


class DistSpecTests(SimpleTestCase):
    """
    JSON distribution specs parsed through DiscreteDistForm.
    """

    def test_parse_and_emit(self):
        spec = {"family": "neg_binomial", "r": 2.0, "p": 0.4}
        dist = dist_from_spec(spec)
        self.assertEqual(dist, NegBinomial(2.0, 0.4))
        self.assertEqual(dist_to_spec(dist), spec)

    def test_poisson_uses_lambda_key(self):
        dist = dist_from_spec({"family": "poisson", "lambda": 3.0})
        self.assertEqual(dist, Poisson(3.0))
        self.assertEqual(dist_to_spec(dist), {"family": "poisson", "lambda": 3.0})

    def test_nested_forward_spec(self):
        spec = {"family": "forward", "of": {"family": "binomial", "n": 4, "p": 0.3}}
        dist = dist_from_spec(spec)
        self.assertEqual(dist, ForwardOf(Binomial(4, 0.3)))
        self.assertEqual(dist_to_spec(dist), spec)

    def test_rejected_specs(self):
        rejected = [
            {"family": "zeta", "s": 2.0},
            {"family": "geometric"},
            {"family": "geometric", "p": 0.5, "q": 0.5},
            {"family": "geometric", "p": 0.0},
            {"family": "binomial", "n": 2.5, "p": 0.5},
            ["geometric", 0.5],
        ]
        for spec in rejected:
            with self.subTest(spec=spec):
                with self.assertRaises(ParameterDomainError):
                    dist_from_spec(spec)
