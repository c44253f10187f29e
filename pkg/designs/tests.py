# in designs/tests.py

import itertools
import json
import math

import numpy as np
from django.test import SimpleTestCase, tag

from dists.distributions import Bernoulli, Binomial, Degenerate, Geometric, Hypergeometric, NegBinomial, Poisson
from spacing_vectors.vectors import MultivariateNegHypergeometric
from spread_sampling.exceptions import ParameterDomainError, UnsupportedError
from spread_sampling.streams import make_rng

from .core import (
    CircularDesign,
    EquilibriumRenewalDesign,
    RenewalDesign,
    bernoulli,
    jump_for_rate,
    mh,
    min_spacing_variance,
    mnh,
    multinomial,
    renewal_with_rate,
    spacing_variance,
    srs,
    systematic,
    systematic_fixed,
)
from .draws import SampleDraw, design_pmf, draw, draw_circular, draw_equilibrium, draw_renewal
from .forms import design_from_spec, design_to_spec


def inclusion_frequencies(design, reps, seed, method="direct"):
    """Monte Carlo estimate of the first-order inclusion probabilities of units 1..N."""
    rng = make_rng(seed)
    counts = np.zeros(design.N + 1)
    for _ in range(reps):
        counts[list(draw(design, rng, method=method).units)] += 1
    return counts[1:] / reps


def max_z(frequencies, probabilities, reps):
    probabilities = np.asarray(probabilities, dtype=float)
    sd = np.sqrt(probabilities * (1 - probabilities) / reps)
    return float(np.max(np.abs(frequencies - probabilities) / sd))


class RenewalDrawTests(SimpleTestCase):
    """
    Simple and equilibrium renewal chains.
    """

    def test_unit_jumps_select_everything(self):
        sample = draw_renewal(RenewalDesign(Degenerate(0), 7), make_rng(1))
        self.assertEqual(sample.units, (1, 2, 3, 4, 5, 6, 7))
        self.assertEqual(sample.spacings, (1, 1, 1, 1, 1, 1, 1))

    def test_units_and_spacings_agree(self):
        design = RenewalDesign(NegBinomial(2.0, 0.2), 400)
        rng = make_rng(2)
        for _ in range(50):
            sample = draw_renewal(design, rng)
            self.assertEqual(list(sample.units), list(np.cumsum(sample.spacings)))
            self.assertTrue(all(1 <= u <= 400 for u in sample.units))

    def test_first_jump_beyond_population_gives_empty_sample(self):
        sample = draw_renewal(RenewalDesign(Degenerate(9), 5), make_rng(3))
        self.assertEqual(sample.size, 0)
        self.assertEqual(sample.spacings, ())

    def test_coin_flip_jumps(self):
        # Jumps of 1 or 2 with probability 1/2 each.
        design = RenewalDesign(Bernoulli(0.5), 4)
        reps = 50_000
        frequencies = inclusion_frequencies(design, reps, 4)
        self.assertLess(max_z(frequencies, [1 / 2, 3 / 4, 5 / 8, 11 / 16], reps), 4.5)

    def test_geometric_jumps_give_bernoulli_sampling(self):
        design = RenewalDesign(Geometric(0.3), 100)
        reps = 20_000
        frequencies = inclusion_frequencies(design, reps, 5)
        self.assertLess(max_z(frequencies, np.full(100, 0.3), reps), 4.5)

    def test_equilibrium_start_flattens_coin_flip_chain(self):
        design = EquilibriumRenewalDesign(Bernoulli(0.5), 3)
        reps = 50_000
        frequencies = inclusion_frequencies(design, reps, 6)
        self.assertLess(max_z(frequencies, np.full(3, 2 / 3), reps), 4.5)

    def test_systematic_samples(self):
        design = systematic(20, 4)
        rng = make_rng(7)
        starts = set()
        for _ in range(200):
            sample = draw_equilibrium(design, rng)
            start = sample.units[0]
            starts.add(start)
            self.assertEqual(sample.units, tuple(range(start, 21, 4)))
        self.assertEqual(starts, {1, 2, 3, 4})

    def test_equilibrium_start_with_hypergeometric_jumps(self):
        # Jumps 1 + Hypergeometric(4, 6, 11) lie in 1..5.
        design = EquilibriumRenewalDesign(Hypergeometric(4, 6, 11), 20)
        rng = make_rng(1)
        for _ in range(50):
            units = draw(design, rng).units
            self.assertTrue(all(1 <= unit <= 20 for unit in units))
            self.assertTrue(all(1 <= later - earlier <= 5 for earlier, later in zip(units, units[1:])))

    def test_same_seed_same_sample(self):
        design = bernoulli(500, 0.1)
        first = draw(design, make_rng(10, 1, 2), seed=(10, 1, 2))
        second = draw(design, make_rng(10, 1, 2), seed=(10, 1, 2))
        self.assertEqual(first, second)
        self.assertEqual(first.to_dict()["seed"], [10, 1, 2])

    @tag("slow")
    def test_equilibrium_inclusion_is_flat_for_every_family(self):
        rate, N, reps = 1 / 6, 60, 100_000
        for family, r in [("neg_binomial", 0.5), ("neg_binomial", 2.0), ("poisson", None), ("binomial", None)]:
            design = renewal_with_rate(family, N, rate, r)
            with self.subTest(design=design.label):
                frequencies = inclusion_frequencies(design, reps, 11)
                self.assertLess(max_z(frequencies, np.full(N, rate), reps), 4.5)

    @tag("slow")
    def test_coin_flip_jumps_million_draws(self):
        design = RenewalDesign(Bernoulli(0.5), 4)
        reps = 1_000_000
        frequencies = inclusion_frequencies(design, reps, 12)
        self.assertLess(max_z(frequencies, [1 / 2, 3 / 4, 5 / 8, 11 / 16], reps), 4.5)


class CircularDrawTests(SimpleTestCase):
    """
    Fixed-size circular designs.
    """

    def test_exact_size(self):
        design = multinomial(50, 10)
        rng = make_rng(13)
        for method in ("conditional", "direct"):
            for _ in range(200):
                sample = draw_circular(design, rng, method=method)
                self.assertEqual(sample.size, 10)
                self.assertTrue(1 <= sample.units[0] and sample.units[-1] <= 50)
                self.assertEqual(sum(sample.spacings[1:]), 50)

    def test_census(self):
        sample = draw(mnh(6, 6, 2.0), make_rng(14))
        self.assertEqual(sample.units, (1, 2, 3, 4, 5, 6))

    def test_integer_hypergeometric_shape_gives_systematic_samples(self):
        design = mh(12, 3, 3)
        rng = make_rng(15)
        for _ in range(100):
            units = draw(design, rng).units
            self.assertEqual(np.diff(units).tolist(), [4, 4])
        self.assertEqual(systematic_fixed(12, 3), design)

    def test_srs_subsets_equally_likely(self):
        # Arrange
        design = srs(6, 2)
        subsets = list(itertools.combinations(range(1, 7), 2))
        index = {s: i for i, s in enumerate(subsets)}
        rng = make_rng(16)
        reps = 60_000

        # Act
        counts = np.zeros(len(subsets))
        for _ in range(reps):
            counts[index[draw(design, rng, method="direct").units]] += 1

        # Assert
        self.assertLess(max_z(counts / reps, np.full(len(subsets), 1 / 15), reps), 4.5)

    @tag("slow")
    def test_subset_frequencies_match_design_pmf(self):
        design = mnh(8, 3, 5.0)
        subsets = list(itertools.combinations(range(1, 9), 3))
        index = {s: i for i, s in enumerate(subsets)}
        rng = make_rng(17)
        reps = 1_000_000

        counts = np.zeros(len(subsets))
        for _ in range(reps):
            counts[index[draw(design, rng, method="direct").units]] += 1

        probabilities = [design_pmf(design, s) for s in subsets]
        self.assertLess(max_z(counts / reps, probabilities, reps), 4.5)


class DesignPmfTests(SimpleTestCase):
    """
    Exact subset probabilities of circular designs.
    """

    def test_srs_is_uniform(self):
        design = srs(8, 3)
        for s in [(1, 2, 3), (1, 4, 8), (2, 5, 7)]:
            self.assertAlmostEqual(design_pmf(design, s), 1 / 56, places=14)

    def test_census_has_one_sample(self):
        self.assertAlmostEqual(design_pmf(multinomial(5, 5), (1, 2, 3, 4, 5)), 1.0, places=14)

    def test_sums_to_one_over_all_subsets(self):
        for N in range(2, 11):
            for n in range(1, N + 1):
                m = N - n
                shape = -(-m // n)
                designs = [
                    mnh(N, n, 0.5),
                    mnh(N, n, 2.0),
                    mnh(N, n, 7.5),
                    multinomial(N, n),
                    mh(N, n, shape),
                    mh(N, n, shape + 1),
                    mh(N, n, shape + 4),
                ]
                for design in designs:
                    with self.subTest(N=N, n=n, design=design.label):
                        total = math.fsum(
                            design_pmf(design, s)
                            for s in itertools.combinations(range(1, N + 1), n)
                        )
                        self.assertAlmostEqual(total, 1.0, delta=1e-10)

    def test_invalid_samples(self):
        design = srs(8, 3)
        for units in [(1, 2), (3, 2, 1), (0, 4, 5), (1, 4, 9), (2, 2, 5)]:
            with self.subTest(units=units):
                with self.assertRaises(ParameterDomainError):
                    design_pmf(design, units)
        with self.assertRaises(UnsupportedError):
            design_pmf(bernoulli(8, 0.5), (1, 2))


class FactoryTests(SimpleTestCase):
    """
    Factories, rates and spacing variances.
    """

    def test_rates(self):
        self.assertAlmostEqual(bernoulli(100, 0.3).rate, 0.3)
        self.assertAlmostEqual(systematic(100, 4).rate, 0.25)
        self.assertAlmostEqual(srs(200, 50).rate, 0.25)
        for family, r in [("geometric", None), ("neg_binomial", 0.5), ("neg_binomial", 8), ("poisson", None), ("binomial", None), ("binomial", 40), ("degenerate", None)]:
            with self.subTest(family=family, r=r):
                design = renewal_with_rate(family, 300, 1 / 30, r)
                self.assertAlmostEqual(design.rate, 1 / 30, places=12)

    def test_binomial_needs_enough_trials(self):
        self.assertEqual(jump_for_rate("binomial", 0.25).n, 3)
        with self.assertRaises(ParameterDomainError):
            jump_for_rate("binomial", 0.25, 2)

    def test_rejected_rates(self):
        with self.assertRaises(ParameterDomainError):
            bernoulli(10, 0.0)
        with self.assertRaises(ParameterDomainError):
            jump_for_rate("degenerate", 0.3)
        with self.assertRaises(ParameterDomainError):
            jump_for_rate("hypergeometric", 0.3)
        with self.assertRaises(ParameterDomainError):
            systematic_fixed(10, 3)
        with self.assertRaises(ParameterDomainError):
            CircularDesign(MultivariateNegHypergeometric(5, 3, 1.0), 10, 3)

    def test_renewal_spacing_variances(self):
        rate = 1 / 30
        for r in (0.5, 1.0, 2.0, 8.0):
            with self.subTest(family="neg_binomial", r=r):
                design = renewal_with_rate("neg_binomial", 300, rate, r)
                expected = (1 - rate) * (r * rate + 1 - rate) / (r * rate**2)
                self.assertAlmostEqual(spacing_variance(design), expected, delta=1e-9 * expected)
        self.assertAlmostEqual(spacing_variance(renewal_with_rate("poisson", 300, rate)), (1 - rate) / rate)
        trials = 40
        binomial_variance = (1 - rate) / rate * (1 - (1 - rate) / (trials * rate))
        self.assertAlmostEqual(spacing_variance(renewal_with_rate("binomial", 300, rate, trials)), binomial_variance)
        self.assertEqual(spacing_variance(systematic(300, 30)), 0.0)

    def test_geometric_spacing_variance(self):
        self.assertAlmostEqual(spacing_variance(bernoulli(100, 0.25)), 0.75 / 0.25**2)

    def test_fixed_size_spacing_variances(self):
        N, n = 200, 50
        m = N - n
        self.assertAlmostEqual(spacing_variance(multinomial(N, n)), 2.94)
        self.assertAlmostEqual(
            spacing_variance(mnh(N, n, 5.0)), m / n * (1 - 1 / n) * (5 * n + m) / (5 * n + 1)
        )
        self.assertAlmostEqual(
            spacing_variance(mh(N, n, 4)), m / n * (1 - 1 / n) * (4 * n - m) / (4 * n - 1)
        )
        self.assertEqual(spacing_variance(systematic_fixed(N, n)), 0.0)

    def test_minimum_spacing_variance(self):
        self.assertAlmostEqual(min_spacing_variance(1 / 2.5), 0.25)
        self.assertAlmostEqual(min_spacing_variance(0.25), 0.0)
        # A binomial jump with the fewest trials never beats the bound.
        for rate in (0.3, 0.07, 1 / 2.5):
            self.assertGreaterEqual(
                spacing_variance(renewal_with_rate("binomial", 100, rate)) + 1e-12,
                min_spacing_variance(rate),
            )

    def test_labels(self):
        self.assertEqual(srs(200, 50).label, "MNH r=1 (SRS)")
        self.assertEqual(mnh(200, 50, 0.5).label, "MNH r=0.5")
        self.assertEqual(multinomial(200, 50).label, "MULT")
        self.assertEqual(mh(200, 50, 6).label, "MH r=6")

    @tag("slow")
    def test_sampled_spacing_variances(self):
        reps = 1_000_000
        cases = [
            renewal_with_rate("neg_binomial", 300, 1 / 10, 0.5),
            renewal_with_rate("neg_binomial", 300, 1 / 30, 2.0),
            renewal_with_rate("neg_binomial", 300, 1 / 30, 8.0),
            renewal_with_rate("poisson", 300, 1 / 10),
            renewal_with_rate("poisson", 300, 1 / 30),
            renewal_with_rate("poisson", 300, 1 / 4),
            renewal_with_rate("binomial", 300, 0.3),
            renewal_with_rate("binomial", 300, 1 / 30, 40),
            renewal_with_rate("binomial", 300, 1 / 4, 10),
        ]
        for position, design in enumerate(cases):
            with self.subTest(design=design.label):
                jumps = 1 + design.jump.sample(make_rng(40, position), reps).astype(float)
                centred = (jumps - jumps.mean()) ** 2
                standard_error = centred.std() / math.sqrt(reps)
                self.assertAlmostEqual(centred.mean(), spacing_variance(design), delta=3.5 * standard_error)


class DesignSpecTests(SimpleTestCase):
    """
    JSON design specs.
    """

    def test_round_trip(self):
        designs = [
            srs(200, 50),
            mnh(200, 50, 5.0),
            multinomial(50, 10),
            mh(200, 50, 6),
            bernoulli(100, 0.3),
            systematic(90, 3),
            renewal_with_rate("neg_binomial", 300, 1 / 30, 2.0),
            renewal_with_rate("poisson", 300, 1 / 30, equilibrium=False),
            renewal_with_rate("binomial", 300, 1 / 30),
        ]
        for design in designs:
            with self.subTest(design=design.label):
                spec = design_to_spec(design)
                self.assertEqual(design_from_spec(spec), design)
                self.assertEqual(design_from_spec(json.dumps(spec)), design)

    def test_circular_spec(self):
        design = design_from_spec('{"kind":"circular","N":200,"n":50,"spacings":{"family":"mnh","r":5.0}}')
        self.assertEqual(design, mnh(200, 50, 5.0))

    def test_jump_parameters_derived_from_rate(self):
        spec = {"kind": "equilibrium", "N": 300, "rate": 1 / 30, "jump": {"family": "neg_binomial", "r": 2}}
        design = design_from_spec(spec)
        self.assertIsInstance(design, EquilibriumRenewalDesign)
        self.assertIsInstance(design.jump, NegBinomial)
        self.assertAlmostEqual(design.rate, 1 / 30, places=12)

        poisson = design_from_spec({"kind": "renewal", "N": 50, "rate": 0.2, "jump": {"family": "poisson"}})
        self.assertIsInstance(poisson, RenewalDesign)
        self.assertIsInstance(poisson.jump, Poisson)
        self.assertAlmostEqual(poisson.jump.lam, 4.0, places=12)

        fixed = design_from_spec({"kind": "equilibrium", "N": 50, "rate": 0.2, "jump": {"family": "degenerate"}})
        self.assertEqual(fixed, systematic(50, 5))

        trials = design_from_spec({"kind": "equilibrium", "N": 50, "rate": 0.2, "jump": {"family": "binomial", "n": 8}})
        self.assertIsInstance(trials.jump, Binomial)
        self.assertEqual(trials.jump.n, 8)
        self.assertAlmostEqual(trials.jump.p, 0.5, places=12)

    def test_rejected_specs(self):
        rejected = [
            "{not json",
            "[1, 2]",
            {"kind": "circular", "N": 10, "n": 12, "spacings": {"family": "mnom"}},
            {"kind": "circular", "N": 10, "n": 2, "spacings": {"family": "mnh"}},
            {"kind": "circular", "N": 10, "n": 2, "spacings": {"family": "mh", "r": 1}},
            {"kind": "circular", "N": 10, "n": 2, "spacings": {"family": "dirichlet"}},
            {"kind": "circular", "N": 10, "n": 2, "rate": 0.2, "spacings": {"family": "mnom"}},
            {"kind": "renewal", "N": 10, "jump": {"family": "poisson"}},
            {"kind": "renewal", "N": 10, "rate": 0.5, "jump": {"family": "geometric", "p": 0.3}},
            {"kind": "equilibrium", "N": 0, "rate": 0.5, "jump": {"family": "geometric"}},
            {"kind": "stratified", "N": 10},
        ]
        for spec in rejected:
            with self.subTest(spec=spec):
                with self.assertRaises(ParameterDomainError):
                    design_from_spec(spec)


class SampleDrawTests(SimpleTestCase):
    """
    SampleDraw validation.
    """

    def test_units_must_increase(self):
        with self.assertRaises(ParameterDomainError):
            SampleDraw((3, 2))
        with self.assertRaises(ParameterDomainError):
            SampleDraw((0, 2))
        self.assertEqual(SampleDraw([1, 4]).to_dict(), {"units": [1, 4], "spacings": [], "seed": None})
