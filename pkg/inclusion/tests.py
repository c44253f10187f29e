# in inclusion/tests.py

import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from designs.core import (
    EquilibriumRenewalDesign,
    RenewalDesign,
    bernoulli,
    jump_for_rate,
    mh,
    mnh,
    multinomial,
    renewal_with_rate,
    srs,
    systematic,
    systematic_fixed,
)
from dists.distributions import (
    Bernoulli,
    Binomial,
    Degenerate,
    Geometric,
    Hypergeometric,
    NegBinomial,
    Poisson,
    Uniform,
)
from spread_sampling.exceptions import ConsistencyError, ParameterDomainError
from spread_sampling.streams import make_rng

from .fixed_size import (
    fixed_conditional,
    matrix_A,
    matrix_A_rowsums,
    pi_first_circular,
    pi_joint_fixed,
    pi_joint_fixed_curve,
    spacing_sum_table,
)
from .joint import JointProbMatrix, delta, joint_matrix
from .renewal import (
    convolution_table,
    convolve,
    jump_pmf,
    pi_first_equilibrium,
    pi_first_renewal,
    pi_joint_renewal,
    pi_joint_renewal_curve,
    renewal_conditional,
    renewal_sequence,
)


def random_jump_pmf(rng, support):
    """A random law of J on {1, ..., support} as an array indexed by J (f[0] = 0)."""
    f = np.zeros(support + 1)
    f[1:] = rng.dirichlet(np.ones(support))
    return f


def flat_rate_jumps(rate):
    """The renewal jump families with mean 1 / rate."""
    return {
        "nb r=0.5": jump_for_rate("neg_binomial", rate, 0.5),
        "nb r=1": jump_for_rate("neg_binomial", rate, 1),
        "nb r=2": jump_for_rate("neg_binomial", rate, 2),
        "nb r=8": jump_for_rate("neg_binomial", rate, 8),
        "poisson": jump_for_rate("poisson", rate),
        "binomial": jump_for_rate("binomial", rate),
        "binomial r=45": jump_for_rate("binomial", rate, 45),
    }


def circular_designs(N, n):
    """Every circular family admissible for (N, n)."""
    designs = [srs(N, n), mnh(N, n, 0.5), mnh(N, n, 2.0), multinomial(N, n)]
    smallest = math.ceil((N - n) / n)
    designs += [mh(N, n, r) for r in (smallest, smallest + 2)]
    return designs


class ConvolutionTests(SimpleTestCase):
    """
    Iterated convolutions of the jump law.
    """

    def test_first_row_is_the_jump_law(self):
        jump = NegBinomial(2.0, 0.4)
        table = convolve(jump, 3, 20)
        np.testing.assert_allclose(table[1][1:], jump.pmf(np.arange(20)), atol=1e-15)
        self.assertEqual(table[1][0], 0.0)

    def test_rows_vanish_below_their_index_and_sum_to_at_most_one(self):
        table = convolve(Poisson(1.5), 6, 25)
        for j in range(1, 7):
            self.assertTrue(np.all(table[j][:j] == 0))
            self.assertLessEqual(table[j].sum(), 1 + 1e-12)

    def test_rows_are_successive_convolutions(self):
        table = convolve(Geometric(0.3), 5, 40)
        for j in range(1, 5):
            expected = np.convolve(table[j], table[1])[:41]
            np.testing.assert_allclose(table[j + 1], expected, atol=1e-12)

    def test_deterministic_jumps(self):
        # J = 3: j jumps sum to exactly 3j.
        table = convolve(Degenerate(2), 5, 20)
        for j in range(1, 6):
            for k in range(21):
                self.assertEqual(table[j][k], 1.0 if k == 3 * j else 0.0)

    def test_shifted_geometric_convolution(self):
        p = 0.2
        table = convolve(Geometric(p), 5, 30)
        for j in range(1, 6):
            for x in range(j, 31):
                expected = math.comb(x - 1, x - j) * (1 - p) ** (x - j) * p**j
                self.assertAlmostEqual(table[j][x], expected, places=13)

    def test_more_jumps_than_columns_is_zero_filled(self):
        table = convolve(Bernoulli(0.5), 8, 4)
        self.assertEqual(table.j_max, 8)
        self.assertEqual(table.k_max, 4)
        self.assertTrue(np.all(table.values[5:] == 0))

    def test_renewal_sequence_matches_the_table(self):
        jump = NegBinomial(0.7, 0.25)
        f = jump_pmf(jump, 60)
        u = renewal_sequence(f, 60)
        self.assertEqual(u[0], 1.0)
        np.testing.assert_allclose(u[1:], convolution_table(f, 60).renewal_sums()[1:], atol=1e-13)

    def test_partial_sum_identity_on_random_laws(self):
        # Partial sums of f^{(j+1)*} equal those of f^{j*} weighted by the jump CDF.
        rng = make_rng(11)
        for _ in range(20):
            f = random_jump_pmf(rng, int(rng.integers(2, 12)))
            f = np.pad(f, (0, 31 - len(f)))
            F = np.cumsum(f)
            table = convolution_table(f, 6)
            for j in range(1, 6):
                for k in range(1, 31):
                    left = table[j + 1][1 : k + 1].sum()
                    right = sum(table[j][t] * F[k - t] for t in range(1, k + 1))
                    self.assertAlmostEqual(left, right, places=12)


class FirstOrderRenewalTests(SimpleTestCase):
    """
    First-order inclusion probabilities of simple and equilibrium chains.
    """

    def test_coin_flip_chain(self):
        # Jumps of 1 or 2 with probability 1/2 each.
        pi = pi_first_renewal(Bernoulli(0.5), 4)
        np.testing.assert_allclose(pi, [0.5, 0.75, 0.625, 0.6875], rtol=0, atol=1e-12)

    def test_jumps_of_two_select_even_units(self):
        pi = pi_first_renewal(Degenerate(1), 10)
        self.assertEqual(list(pi), [0.0, 1.0] * 5)

    def test_coin_flip_equilibrium_is_flat(self):
        pi = pi_first_equilibrium(Bernoulli(0.5), 12)
        np.testing.assert_allclose(pi, 2 / 3, atol=1e-12)

    def test_systematic_equilibrium_is_flat(self):
        for r in (1, 3, 7):
            pi = pi_first_equilibrium(Degenerate(r - 1), 40)
            np.testing.assert_allclose(pi, 1 / r, atol=1e-12)

    def test_rate_families_are_flat_at_one_thirtieth(self):
        for name, jump in flat_rate_jumps(1 / 30).items():
            with self.subTest(jump=name):
                pi = pi_first_equilibrium(jump, 300)
                np.testing.assert_allclose(pi, 1 / 30, rtol=0, atol=1e-9)

    def test_flatness_identity_on_random_laws(self):
        rng = make_rng(12)
        for _ in range(20):
            f = random_jump_pmf(rng, int(rng.integers(2, 15)))
            mu = float(np.dot(np.arange(len(f)), f))
            K = 100
            # f0(k) = Pr(J >= k) / E(J) for k >= 1.
            survival = 1 - np.concatenate([[0.0], np.cumsum(f)])[:-1]
            f0 = np.zeros(K + 1)
            top = min(len(survival), K + 1)
            f0[1:top] = survival[1:top] / mu
            u = renewal_sequence(f, K)
            pi = np.convolve(f0, u)[1 : K + 1]
            np.testing.assert_allclose(pi, 1 / mu, rtol=0, atol=1e-10)

    @override_settings(SAMPLING={"FLATNESS_TOLERANCE": -1.0})
    def test_flatness_violation_is_a_consistency_error(self):
        with self.assertRaises(ConsistencyError) as raised:
            pi_first_equilibrium(Geometric(0.5), 5)
        self.assertEqual(raised.exception.exit_status, 2)


class JointRenewalTests(SimpleTestCase):
    """
    Joint inclusion probabilities of equilibrium chains.
    """

    def test_geometric_jumps_give_independent_inclusions(self):
        for rate in (0.3, 1 / 30):
            curve = pi_joint_renewal_curve(Geometric(rate), rate, 200)
            np.testing.assert_allclose(curve, rate**2, rtol=0, atol=1e-12)

    def test_systematic_joints(self):
        r = 4
        curve = pi_joint_renewal_curve(Degenerate(r - 1), 1 / r, 20)
        for gap, value in enumerate(curve, start=1):
            self.assertEqual(value, 1 / r if gap % r == 0 else 0.0)

    def test_closed_forms_match_convolution_sums(self):
        for rate in (1 / 10, 1 / 30):
            for name, jump in flat_rate_jumps(rate).items():
                with self.subTest(rate=rate, jump=name):
                    closed = pi_joint_renewal_curve(jump, rate, 150, "closed")
                    generic = pi_joint_renewal_curve(jump, rate, 150, "generic")
                    np.testing.assert_allclose(closed, generic, rtol=0, atol=1e-10)

    def test_negative_binomial_shape_eight(self):
        rate = 1 / 30
        jump = jump_for_rate("neg_binomial", rate, 8)
        closed = pi_joint_renewal_curve(jump, rate, 120, "closed")
        generic = pi_joint_renewal_curve(jump, rate, 120, "generic")
        np.testing.assert_allclose(closed, generic, rtol=0, atol=1e-10)
        # Spread chains avoid close neighbours.
        self.assertLess(closed[0], rate**2)

    def test_binomial_closed_form_uses_the_trials_of_all_jumps(self):
        jump = Binomial(3, 0.4)
        u = renewal_conditional(jump, 12)
        # Two jumps reach gap 5 through Bin(6, 0.4) = 3.
        two_jumps = math.comb(6, 3) * 0.4**3 * 0.6**3
        three_jumps = math.comb(9, 2) * 0.4**2 * 0.6**7
        four_jumps = math.comb(12, 1) * 0.4 * 0.6**11
        five_jumps = 0.6**15
        self.assertAlmostEqual(u[5], two_jumps + three_jumps + four_jumps + five_jumps, places=13)

    def test_binomial_jumps_that_always_succeed(self):
        # The default trials give p = 1 when 1 / rate is an integer: systematic chains.
        for rate in (1 / 10, 1 / 30):
            jump = jump_for_rate("binomial", rate)
            with self.subTest(rate=rate):
                self.assertAlmostEqual(jump.p, 1.0, places=12)
                closed = renewal_conditional(jump, 100, "closed")
                generic = renewal_conditional(jump, 100, "generic")
                self.assertFalse(np.any(np.isnan(closed)))
                np.testing.assert_allclose(closed, generic, rtol=0, atol=1e-12)
                period = round(1 / rate)
                for gap in range(1, 101):
                    self.assertAlmostEqual(closed[gap], 1.0 if gap % period == 0 else 0.0, places=12)

        matrix = joint_matrix(renewal_with_rate("binomial", 50, 0.1))
        np.testing.assert_allclose(matrix.pi, 0.1, atol=1e-9)
        self.assertAlmostEqual(matrix.joint(1, 11), 0.1, places=12)
        self.assertEqual(matrix.joint(1, 12), 0.0)

    def test_families_without_closed_form_use_convolutions(self):
        for jump in (Uniform(4), Hypergeometric(6, 3, 8)):
            closed = renewal_conditional(jump, 40, "closed")
            generic = renewal_conditional(jump, 40, "generic")
            np.testing.assert_allclose(closed, generic, atol=1e-15)

    def test_single_pair(self):
        jump = Poisson(4.0)
        value = pi_joint_renewal(jump, 0.2, 3, 10)
        self.assertAlmostEqual(value, pi_joint_renewal_curve(jump, 0.2, 7)[6], places=15)

    def test_pairs_must_be_ordered(self):
        with self.assertRaises(ParameterDomainError):
            pi_joint_renewal(Geometric(0.5), 0.5, 4, 4)
        with self.assertRaises(ParameterDomainError):
            pi_joint_renewal(Geometric(0.5), 0.5, 5, 2)

    def test_unknown_method(self):
        with self.assertRaises(ParameterDomainError):
            renewal_conditional(Geometric(0.5), 5, "fast")


class JointFixedSizeTests(SimpleTestCase):
    """
    Joint inclusion probabilities of circular fixed-size designs.
    """

    def test_simple_random_sampling(self):
        N, n = 10, 2
        design = srs(N, n)
        for gap in range(1, N):
            self.assertAlmostEqual(pi_joint_fixed(design.spacings, N, n, gap), 1 / 45, places=15)

    def test_simple_random_sampling_generic_route(self):
        for N, n in ((10, 2), (12, 5), (30, 7)):
            design = srs(N, n)
            curve = pi_joint_fixed_curve(design.spacings, N, n, "generic")
            np.testing.assert_allclose(curve, n * (n - 1) / (N * (N - 1)), rtol=0, atol=1e-12)

    def test_hypergeometric_null_joint(self):
        design = mh(10, 2, 5)
        self.assertEqual(pi_joint_fixed(design.spacings, 10, 2, 1), 0.0)

    def test_systematic_joints(self):
        design = systematic_fixed(12, 4)
        curve = pi_joint_fixed_curve(design.spacings, 12, 4)
        for gap, value in enumerate(curve, start=1):
            self.assertAlmostEqual(value, 4 / 12 if gap % 3 == 0 else 0.0, places=14)

    def test_beta_form_matches_generic_sum(self):
        design = mnh(500, 6, 2.0)
        closed = pi_joint_fixed_curve(design.spacings, 500, 6, "closed")
        generic = pi_joint_fixed_curve(design.spacings, 500, 6, "generic")
        np.testing.assert_allclose(closed, generic, rtol=0, atol=1e-9)

    def test_closed_forms_match_generic_sums(self):
        for N, n in ((9, 3), (20, 4), (40, 8)):
            for design in circular_designs(N, n):
                with self.subTest(design=design.label, N=N, n=n):
                    closed = fixed_conditional(design.spacings, "closed")
                    generic = fixed_conditional(design.spacings, "generic")
                    np.testing.assert_allclose(closed, generic, rtol=0, atol=1e-9)

    def test_each_unit_has_n_minus_one_companions(self):
        for N, n in ((8, 3), (25, 5), (60, 12)):
            for design in circular_designs(N, n):
                with self.subTest(design=design.label, N=N, n=n):
                    c = fixed_conditional(design.spacings)
                    self.assertAlmostEqual(math.fsum(c[1:]), n - 1, places=9)

    def test_joint_of_the_multinomial_design(self):
        # Gap 1 needs one spacing equal to 1 - 1 = 0.
        N, n = 9, 3
        design = multinomial(N, n)
        expected = n / N * (1 - 1 / n) ** (N - n)
        self.assertAlmostEqual(pi_joint_fixed(design.spacings, N, n, 1), expected, places=14)

    def test_gap_out_of_range(self):
        design = srs(10, 3)
        for gap in (0, 10):
            with self.assertRaises(ParameterDomainError):
                pi_joint_fixed(design.spacings, 10, 3, gap)

    def test_dimensions_must_agree(self):
        design = srs(10, 3)
        with self.assertRaises(ParameterDomainError):
            pi_joint_fixed(design.spacings, 11, 3, 1)

    def test_single_unit_sample(self):
        c = fixed_conditional(mnh(7, 1, 2.0).spacings)
        self.assertEqual(list(c), [1.0] + [0.0] * 6)


class MatrixATests(SimpleTestCase):
    """
    The linear system linking the start law to the inclusion probabilities.
    """

    def test_rows_sum_to_sample_size(self):
        cases = [(srs(8, 3), 3), (systematic_fixed(6, 3), 3), (multinomial(9, 3), 3)]
        for design, n in cases:
            with self.subTest(design=design.label):
                sums = matrix_A_rowsums(spacing_sum_table(design.spacings), design.N, n)
                np.testing.assert_allclose(sums, n, rtol=0, atol=1e-10)

    def test_rows_sum_to_sample_size_for_small_populations(self):
        for N in range(2, 11):
            for n in range(1, N + 1):
                for design in circular_designs(N, n):
                    with self.subTest(design=design.label, N=N, n=n):
                        matrix_A_rowsums(spacing_sum_table(design.spacings), N, n)

    def test_diagonal_and_symmetry_of_the_gap_structure(self):
        design = mnh(7, 3, 0.5)
        A = matrix_A(spacing_sum_table(design.spacings), 7, 3)
        np.testing.assert_array_equal(np.diag(A), np.ones(7))
        # a_kt depends on k - t modulo N only.
        for k in range(7):
            np.testing.assert_allclose(np.roll(A[0], k), A[k], atol=1e-15)

    def test_uniform_start_gives_n_over_N(self):
        design = mh(12, 4, 3)
        np.testing.assert_allclose(pi_first_circular(design.spacings), 4 / 12, atol=1e-12)

    def test_start_at_unit_one(self):
        # Starting at unit 1, unit k is selected with probability a_k1.
        design = mnh(6, 2, 1.0)
        f0 = np.zeros(6)
        f0[0] = 1.0
        pi = pi_first_circular(design.spacings, f0)
        self.assertEqual(pi[0], 1.0)
        np.testing.assert_allclose(pi[1:], 1 / 5, atol=1e-14)

    def test_invalid_start_law(self):
        design = srs(6, 2)
        with self.assertRaises(ParameterDomainError):
            pi_first_circular(design.spacings, np.full(6, 0.5))

    def test_table_shape_is_checked(self):
        with self.assertRaises(ParameterDomainError):
            matrix_A(np.zeros((3, 3)), 6, 2)

    @override_settings(SAMPLING={"ROWSUM_TOLERANCE": -1.0})
    def test_row_sum_violation_is_a_consistency_error(self):
        design = srs(6, 2)
        with self.assertRaises(ConsistencyError):
            matrix_A_rowsums(spacing_sum_table(design.spacings), 6, 2)


class DeltaTests(SimpleTestCase):
    """
    Delta_kl = pi_kl - pi_k pi_l.
    """

    def test_simple_random_sampling_is_negative(self):
        N, n = 10, 4
        value = delta(n / N, n / N, n * (n - 1) / (N * (N - 1)))
        self.assertAlmostEqual(value, n * (n - 1) / (N * (N - 1)) - (n / N) ** 2, places=15)
        self.assertLess(value, 0)

    def test_certain_unit(self):
        self.assertEqual(delta(1.0, 1.0, 1.0), 0.0)

    def test_diagonal(self):
        self.assertAlmostEqual(delta(0.3, 0.3, 0.3), 0.3 * 0.7, places=15)

    def test_bernoulli_off_diagonal_is_zero(self):
        matrix = joint_matrix(bernoulli(30, 0.25))
        for k, l in ((1, 2), (4, 19), (7, 30)):
            self.assertAlmostEqual(matrix.delta(k, l), 0.0, places=14)


class JointProbMatrixTests(SimpleTestCase):
    """
    JointProbMatrix built from every design kind.
    """

    def test_simple_renewal_chain(self):
        # Arrange
        design = RenewalDesign(Bernoulli(0.5), 4)

        # Act
        matrix = joint_matrix(design)

        # Assert
        np.testing.assert_allclose(matrix.pi, [0.5, 0.75, 0.625, 0.6875], atol=1e-12)
        # Units 1 and 2 are both selected only by a first jump of 1 followed by 1.
        self.assertAlmostEqual(matrix.joint(1, 2), 0.25, places=15)
        self.assertAlmostEqual(matrix.joint(2, 1), 0.25, places=15)
        self.assertFalse(matrix.circular)

    def test_equilibrium_chain(self):
        design = EquilibriumRenewalDesign(Poisson(2.0), 50)
        matrix = joint_matrix(design)
        np.testing.assert_allclose(matrix.pi, 1 / 3, atol=1e-9)
        self.assertAlmostEqual(
            matrix.joint(10, 17), pi_joint_renewal(Poisson(2.0), 1 / 3, 10, 17), places=9
        )

    def test_equilibrium_chain_with_hypergeometric_jumps(self):
        jump = Hypergeometric(4, 6, 11)
        matrix = joint_matrix(EquilibriumRenewalDesign(jump, 40))
        rate = 1 / (1 + 4 * 6 / 11)
        np.testing.assert_allclose(matrix.pi, rate, atol=1e-9)
        np.testing.assert_allclose(pi_first_equilibrium(jump, 40), rate, atol=1e-9)
        self.assertAlmostEqual(matrix.joint(3, 9), pi_joint_renewal(jump, rate, 3, 9), places=12)

    def test_circular_design(self):
        N, n = 12, 4
        matrix = joint_matrix(mnh(N, n, 3.0))
        self.assertTrue(matrix.circular)
        np.testing.assert_allclose(matrix.pi, n / N)
        for k in range(1, N + 1):
            companions = math.fsum(matrix.joint(k, l) for l in range(1, N + 1) if l != k)
            self.assertAlmostEqual(companions, (n - 1) * n / N, places=9)

    def test_circular_joints_depend_on_the_gap_modulo_N(self):
        N = 10
        matrix = joint_matrix(mh(N, 3, 3))
        for gap in range(1, N):
            for k in range(2, N + 1):
                self.assertAlmostEqual(matrix.pikl(gap, k), matrix.pikl(gap), places=14)

    def test_joints_are_bounded_by_marginals(self):
        for design in (mnh(15, 5, 0.5), systematic(20, 3), EquilibriumRenewalDesign(NegBinomial(2.0, 0.4), 20)):
            matrix = joint_matrix(design)
            for k in range(1, design.N + 1):
                for l in range(k + 1, design.N + 1):
                    value = matrix.joint(k, l)
                    self.assertGreaterEqual(value, 0.0)
                    self.assertLessEqual(value, min(matrix.pi[k - 1], matrix.pi[l - 1]) + 1e-12)

    def test_submatrix(self):
        matrix = joint_matrix(srs(10, 3))
        pi_s, pikl_s = matrix.submatrix([2, 5, 9])
        np.testing.assert_allclose(pi_s, 0.3)
        np.testing.assert_allclose(np.diag(pikl_s), 0.3)
        np.testing.assert_allclose(pikl_s, pikl_s.T)
        self.assertAlmostEqual(pikl_s[0, 2], 6 / 90, places=15)

    def test_curve_rows(self):
        matrix = joint_matrix(srs(10, 2))
        rows = matrix.curve()
        self.assertEqual([row[0] for row in rows], list(range(1, 10)))
        for _, joint, value in rows:
            self.assertAlmostEqual(joint, 1 / 45, places=15)
            self.assertAlmostEqual(value, 1 / 45 - 0.04, places=15)

    def test_null_gaps_are_reported(self):
        matrix = joint_matrix(mh(10, 2, 5))
        self.assertIn(1, matrix.null_gaps())
        with self.assertLogs("inclusion.joint", level="WARNING"):
            joint_matrix(mh(10, 2, 5))

    def test_unit_out_of_range(self):
        matrix = JointProbMatrix(np.full(3, 0.5), np.array([1.0, 0.5, 0.5]))
        with self.assertRaises(ParameterDomainError):
            matrix.joint(0, 2)
        with self.assertRaises(ParameterDomainError):
            matrix.submatrix([1, 4])

    def test_generic_route_gives_the_same_matrix(self):
        design = mnh(20, 5, 4.0)
        closed = joint_matrix(design, "closed")
        generic = joint_matrix(design, "generic")
        np.testing.assert_allclose(closed.conditional, generic.conditional, atol=1e-12)

    def test_beta_function_form_survives_large_arguments(self):
        # Shapes around 10^3 overflow a direct gamma evaluation.
        design = mnh(3000, 4, 400.0)
        c = fixed_conditional(design.spacings)
        self.assertTrue(np.all(np.isfinite(c)))
        self.assertAlmostEqual(math.fsum(c[1:]), 3, places=8)
