# in oracle/tests.py

import math

import numpy as np
from django.test import SimpleTestCase, override_settings, tag

from designs.core import (
    EquilibriumRenewalDesign,
    RenewalDesign,
    bernoulli,
    mh,
    mnh,
    multinomial,
    srs,
    systematic,
)
from dists.distributions import Bernoulli, NegBinomial, Poisson
from inclusion.fixed_size import pi_joint_fixed
from spread_sampling.exceptions import GuardExceededError, ParameterDomainError, UnsupportedError
from spread_sampling.streams import make_rng

from .enumeration import colex_subsets, enumerate_circular, enumerate_design, enumerate_renewal
from .verify import frequency_check, verify_design


def small_circular_designs(N, n):
    designs = [srs(N, n), mnh(N, n, 0.5), mnh(N, n, 2.0), multinomial(N, n)]
    smallest = math.ceil((N - n) / n)
    designs += [mh(N, n, r) for r in range(smallest, smallest + 3)]
    return designs


class ColexTests(SimpleTestCase):
    """
    Subset iteration order.
    """

    def test_order_for_four_choose_two(self):
        self.assertEqual(
            list(colex_subsets(4, 2)),
            [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)],
        )

    def test_counts(self):
        for N, n in ((6, 3), (9, 1), (7, 7)):
            subsets = list(colex_subsets(N, n))
            self.assertEqual(len(subsets), math.comb(N, n))
            self.assertEqual(len(set(subsets)), len(subsets))

    def test_impossible_size(self):
        self.assertEqual(list(colex_subsets(3, 4)), [])


class CircularEnumerationTests(SimpleTestCase):
    """
    Exhaustive enumeration of circular designs.
    """

    def test_simple_random_sampling_five_two(self):
        enumeration = enumerate_circular(srs(5, 2))
        self.assertEqual(len(enumeration.entries), 10)
        for _, probability in enumeration.entries:
            self.assertAlmostEqual(probability, 0.1, places=14)
        self.assertAlmostEqual(enumeration.probability((2, 5)), 0.1, places=14)

    def test_systematic_limit_of_the_hypergeometric_design(self):
        # n r = 3 = N - n: the spacings are all 1, only systematic samples remain.
        enumeration = enumerate_circular(mh(6, 3, 1))
        self.assertEqual(sorted(units for units, _ in enumeration.entries), [(1, 3, 5), (2, 4, 6)])
        self.assertAlmostEqual(enumeration.probability((1, 3, 5)), 0.5, places=15)
        self.assertEqual(enumeration.probability((1, 2, 3)), 0.0)

    def test_multinomial_total_mass(self):
        enumeration = enumerate_circular(multinomial(6, 2))
        self.assertAlmostEqual(enumeration.total_mass, 1.0, places=12)
        self.assertEqual(enumeration.evaluated, 15)

    def test_enumeration_matches_the_inclusion_formulas(self):
        for N in (6, 8, 9):
            for n in (2, 3):
                for design in small_circular_designs(N, n):
                    with self.subTest(design=design.label, N=N, n=n):
                        enumeration = enumerate_circular(design)
                        self.assertAlmostEqual(enumeration.total_mass, 1.0, delta=1e-10)
                        np.testing.assert_allclose(enumeration.pi, n / N, rtol=0, atol=1e-10)
                        for l in range(2, N + 1):
                            self.assertAlmostEqual(
                                enumeration.pikl[0, l - 1],
                                pi_joint_fixed(design.spacings, N, n, l - 1),
                                delta=1e-9,
                            )

    def test_joints_depend_on_the_gap_only(self):
        for design in (mnh(8, 3, 0.5), mh(9, 3, 2), multinomial(7, 3)):
            with self.subTest(design=design.label):
                self.assertLessEqual(max(enumerate_circular(design).gap_profile()), 1e-12)

    def test_matrix_is_symmetric_with_pi_on_the_diagonal(self):
        enumeration = enumerate_circular(mnh(7, 3, 3.0))
        np.testing.assert_allclose(enumeration.pikl, enumeration.pikl.T, atol=1e-15)
        np.testing.assert_allclose(np.diag(enumeration.pikl), enumeration.pi)

    @override_settings(SAMPLING={"ENUMERATION_GUARD": 100})
    def test_guard(self):
        with self.assertRaises(GuardExceededError) as raised:
            enumerate_circular(srs(10, 3))
        self.assertIn("120", str(raised.exception))

    def test_renewal_designs_are_refused(self):
        with self.assertRaises(UnsupportedError):
            enumerate_circular(bernoulli(5, 0.5))


class RenewalEnumerationTests(SimpleTestCase):
    """
    Exact inclusion probabilities of renewal chains.
    """

    def test_coin_flip_chain(self):
        enumeration = enumerate_renewal(RenewalDesign(Bernoulli(0.5), 4))
        np.testing.assert_allclose(enumeration.pi, [0.5, 0.75, 0.625, 0.6875], atol=1e-12)
        self.assertAlmostEqual(enumeration.total_mass, 1.0, places=12)
        self.assertEqual(enumeration.entries, [])

    def test_coin_flip_chain_listed(self):
        enumeration = enumerate_renewal(RenewalDesign(Bernoulli(0.5), 4), list_subsets=True)
        np.testing.assert_allclose(enumeration.pi, [0.5, 0.75, 0.625, 0.6875], atol=1e-12)
        # Jumps 1, 1, 2 and then anything: {1, 2, 4}.
        self.assertAlmostEqual(enumeration.probability((1, 2, 4)), 1 / 8, places=15)
        self.assertEqual(enumeration.probability(()), 0.0)

    def test_coin_flip_equilibrium(self):
        enumeration = enumerate_renewal(EquilibriumRenewalDesign(Bernoulli(0.5), 8), list_subsets=True)
        np.testing.assert_allclose(enumeration.pi, 2 / 3, atol=1e-12)

    def test_bernoulli_sampling_joints(self):
        enumeration = enumerate_renewal(bernoulli(8, 0.4), list_subsets=True)
        off_diagonal = enumeration.pikl[~np.eye(8, dtype=bool)]
        np.testing.assert_allclose(off_diagonal, 0.16, atol=1e-12)
        self.assertAlmostEqual(enumeration.probability(()), 0.6**8, places=14)

    def test_listing_matches_the_decomposition(self):
        designs = [
            RenewalDesign(NegBinomial(1.5, 0.4), 10),
            EquilibriumRenewalDesign(Poisson(1.2), 9),
            systematic(12, 3),
        ]
        for design in designs:
            with self.subTest(design=design.label):
                listed = enumerate_renewal(design, list_subsets=True)
                exact = enumerate_renewal(design)
                self.assertAlmostEqual(listed.total_mass, 1.0, delta=1e-10)
                self.assertAlmostEqual(exact.total_mass, 1.0, delta=1e-10)
                np.testing.assert_allclose(listed.pi, exact.pi, atol=1e-10)
                np.testing.assert_allclose(listed.pikl, exact.pikl, atol=1e-9)

    def test_systematic_chain_lists_its_starts(self):
        enumeration = enumerate_renewal(systematic(9, 3), list_subsets=True)
        self.assertEqual(
            sorted(units for units, _ in enumeration.entries),
            [(1, 4, 7), (2, 5, 8), (3, 6, 9)],
        )

    def test_listing_guard(self):
        with self.assertRaises(GuardExceededError):
            enumerate_renewal(bernoulli(17, 0.5), list_subsets=True)

    def test_dispatch(self):
        self.assertEqual(len(enumerate_design(srs(5, 2)).entries), 10)
        self.assertEqual(enumerate_design(bernoulli(5, 0.5)).entries, [])
        with self.assertRaises(UnsupportedError):
            enumerate_renewal(srs(5, 2))


class FrequencyCheckTests(SimpleTestCase):
    """
    Monte Carlo frequencies against exact probabilities.
    """

    def test_simple_random_sampling(self):
        report = frequency_check(srs(6, 2), 100_000, make_rng(21))
        self.assertLess(report.max_z_inclusion, 4.5)
        self.assertLess(report.max_z_subsets, 4.5)
        self.assertEqual(report.distinct_samples, 15)
        self.assertEqual(report.unexpected_samples, 0)

    def test_systematic_design_has_r_samples(self):
        report = frequency_check(systematic(12, 3), 10_000, make_rng(22))
        self.assertEqual(report.distinct_samples, 3)
        self.assertEqual(report.unexpected_samples, 0)

    def test_large_designs_skip_subset_frequencies(self):
        with override_settings(SAMPLING={"ENUMERATION_GUARD": 10}):
            report = frequency_check(srs(10, 3), 10_000, make_rng(23))
        self.assertIsNone(report.max_z_subsets)
        self.assertIsNotNone(report.to_dict()["max_z_inclusion"])

    def test_minimum_replicates(self):
        with self.assertRaises(ParameterDomainError):
            frequency_check(srs(6, 2), 500, make_rng(24))

    @tag("slow")
    def test_spread_design_subsets(self):
        report = frequency_check(mnh(8, 3, 5.0), 1_000_000, make_rng(25))
        self.assertLess(report.max_z_subsets, 4.5)
        self.assertEqual(report.distinct_samples, 56)

    @tag("slow")
    def test_simple_random_sampling_million(self):
        report = frequency_check(srs(6, 2), 1_000_000, make_rng(26))
        self.assertLess(report.max_z_inclusion, 4)
        self.assertLess(report.max_z_subsets, 4.5)

    @tag("slow")
    def test_renewal_chain_subsets(self):
        report = frequency_check(RenewalDesign(Bernoulli(0.5), 6), 100_000, make_rng(27))
        self.assertLess(report.max_z_inclusion, 4.5)
        self.assertLess(report.max_z_subsets, 4.5)
        self.assertEqual(report.unexpected_samples, 0)


class VerifyDesignTests(SimpleTestCase):
    """
    verify_design reports.
    """

    def test_spread_design_passes(self):
        report = verify_design(mnh(8, 3, 2.0))
        self.assertTrue(report.passed, report.to_dict())
        self.assertAlmostEqual(report.total_mass, 1.0, delta=1e-10)
        names = [check.name for check in report.checks]
        for name in ("total_mass", "first_order", "joint", "rowsums", "companions", "closed_vs_generic"):
            self.assertIn(name, names)

    def test_renewal_designs_pass(self):
        for design in (bernoulli(20, 0.3), RenewalDesign(Bernoulli(0.5), 10), systematic(30, 4)):
            with self.subTest(design=design.label):
                report = verify_design(design)
                self.assertTrue(report.passed, report.to_dict())

    def test_large_design_skips_enumeration(self):
        report = verify_design(srs(60, 10))
        self.assertTrue(report.passed)
        self.assertIsNone(report.total_mass)
        self.assertIn("skipped", report.checks[0].detail)

    @override_settings(SAMPLING={"ROWSUM_TOLERANCE": -1.0})
    def test_failed_check_is_reported(self):
        report = verify_design(srs(6, 2))
        self.assertFalse(report.passed)
        failed = [check for check in report.checks if not check.passed]
        self.assertEqual([check.name for check in failed], ["rowsums"])
        self.assertFalse(report.to_dict()["passed"])

    @override_settings(SAMPLING={"FLATNESS_TOLERANCE": -1.0})
    def test_flatness_failure_stops_renewal_checks(self):
        report = verify_design(bernoulli(10, 0.5))
        self.assertEqual([check.name for check in report.checks], ["flatness"])
        self.assertFalse(report.passed)
