# in simlab/tests.py

import json
import math

import numpy as np
from django.contrib.auth import get_user_model
from django.test import SimpleTestCase, TestCase, tag
from django.urls import reverse

from designs.core import bernoulli, mh, multinomial, spacing_variance, srs
from designs.forms import design_to_spec
from spread_sampling.exceptions import ParameterDomainError
from spread_sampling.streams import make_rng

from .forms import study_config_from_spec
from .models import DesignResult, StudyRun
from .population import gen_population
from .study import REPLICATE_BLOCK, StudyConfig, reference_designs, run_study, save_report


def specs(*designs):
    return [design_to_spec(design) for design in designs]


class GenPopulationTests(SimpleTestCase):
    """
    The trended AR(1) population.
    """

    def test_tiny_noise_leaves_the_trend(self):
        # Arrange
        cfg = StudyConfig(seed=1, N=50, n=5, noise_sd=1e-9)

        # Act
        pop = gen_population(cfg, make_rng(1, 0))

        # Assert
        np.testing.assert_allclose(pop.y, np.arange(1, 51), atol=1e-7)

    def test_noise_autocorrelation(self):
        cfg = StudyConfig(seed=2, N=100_000, n=1)
        z = gen_population(cfg, make_rng(2, 0)).y - np.arange(1, 100_001)
        lag_one = np.corrcoef(z[:-1], z[1:])[0, 1]
        self.assertAlmostEqual(lag_one, 0.6, delta=0.02)
        # Stationary standard deviation 0.3 / sqrt(1 - 0.36).
        self.assertAlmostEqual(float(np.std(z)), 0.375, delta=0.01)

    def test_mean_of_the_reference_population(self):
        pop = gen_population(StudyConfig(seed=3), make_rng(3, 0))
        self.assertEqual(pop.N, 200)
        self.assertAlmostEqual(pop.mean, 100.5, delta=0.3)

    def test_same_stream_same_population(self):
        cfg = StudyConfig(seed=4, N=30, n=3)
        first = gen_population(cfg, make_rng(4, 0)).y
        second = gen_population(cfg, make_rng(4, 0)).y
        np.testing.assert_array_equal(first, second)


class StudyConfigTests(SimpleTestCase):
    """
    Validation of study parameters.
    """

    def test_defaults(self):
        cfg = StudyConfig(seed=1)
        self.assertEqual((cfg.N, cfg.n, cfg.reps), (200, 50, 20_000))
        self.assertEqual((cfg.ar_coefficient, cfg.noise_sd, cfg.ci_level), (0.6, 0.3, 0.95))
        self.assertEqual(len(cfg.to_dict()["designs"]), 10)

    def test_invalid_values(self):
        invalid = [
            {"seed": None},
            {"seed": 1.5},
            {"seed": 1, "N": 10, "n": 11},
            {"seed": 1, "reps": 0},
            {"seed": 1, "ar_coefficient": 1.0},
            {"seed": 1, "noise_sd": 0.0},
            {"seed": 1, "ci_level": 1.0},
        ]
        for values in invalid:
            with self.subTest(values=values):
                with self.assertRaises(ParameterDomainError):
                    StudyConfig(**values)

    def test_design_population_mismatch(self):
        cfg = StudyConfig(seed=1, N=30, n=5, designs=specs(srs(20, 5)))
        with self.assertRaises(ParameterDomainError):
            cfg.design_values()

    def test_config_from_json(self):
        cfg = study_config_from_spec(
            '{"seed": 9, "N": 30, "n": 5, "reps": 50, '
            '"designs": [{"kind": "circular", "N": 30, "n": 5, "spacings": {"family": "mnom"}}]}'
        )
        self.assertEqual(cfg.seed, 9)
        self.assertEqual(cfg.reps, 50)
        self.assertEqual(cfg.design_values()[0].label, "MULT")

    def test_config_from_spec_errors(self):
        bad = [
            "{not json",
            "[1, 2]",
            {"N": 30},
            {"seed": 1, "colour": "red"},
            {"seed": 1, "N": 30, "n": 5, "designs": []},
            {"seed": 1, "N": 30, "n": 5, "designs": [{"kind": "circular"}]},
            {"seed": 1, "N": 30, "n": 5, "designs": specs(srs(20, 5))},
        ]
        for spec in bad:
            with self.subTest(spec=spec):
                with self.assertRaises(ParameterDomainError):
                    study_config_from_spec(spec)


class ReferenceDesignTests(SimpleTestCase):
    """
    The ten designs of the reference study.
    """

    def test_designs(self):
        designs = reference_designs()
        self.assertEqual(len(designs), 10)
        self.assertEqual(designs[1].label, "MNH r=1 (SRS)")
        self.assertEqual(designs[5].label, "MULT")
        self.assertTrue(all(design.N == 200 and design.n == 50 for design in designs))

    def test_spacing_variance_decreases(self):
        variances = [spacing_variance(design) for design in reference_designs()]
        for before, after in zip(variances, variances[1:]):
            self.assertGreater(before, after)


class RunStudyTests(SimpleTestCase):
    """
    Small studies with known answers.
    """

    def test_same_seed_same_report(self):
        # Arrange
        cfg = StudyConfig(seed=11, N=30, n=5, reps=200, designs=specs(srs(30, 5), mh(30, 5, 6)))

        # Act
        first, second = run_study(cfg), run_study(cfg)

        # Assert
        # Undefined metrics are NaN, which never compares equal to itself.
        self.assertEqual(json.dumps(first.to_dict()), json.dumps(second.to_dict()))
        self.assertEqual(first.to_rows()[0], ["design", "BR", "SE", "REVAR", "CV", "coverage", "reps", "excluded"])
        self.assertEqual(len(first.to_rows()), 3)

    def test_census(self):
        report = run_study(StudyConfig(seed=12, N=10, n=10, reps=50, designs=specs(srs(10, 10))))
        summary = report.results[0]
        self.assertEqual(summary.se, 0.0)
        self.assertEqual(summary.br, 0.0)
        self.assertEqual(summary.coverage, 100.0)
        self.assertEqual(summary.reps, 50)

    def test_census_intervals_are_kept(self):
        report = run_study(StudyConfig(seed=16, N=8, n=8, reps=20, designs=specs(srs(8, 8))))
        summary = report.results[0]
        self.assertEqual(summary.se, 0.0)
        self.assertLess(summary.revar, 1e-6)
        self.assertEqual(summary.omitted_intervals, 0)
        self.assertEqual(summary.coverage, 100.0)

    def test_replicates_span_several_blocks(self):
        reps = REPLICATE_BLOCK + 7
        cfg = StudyConfig(seed=17, N=12, n=3, reps=reps, designs=specs(srs(12, 3)))
        summary = run_study(cfg).results[0]
        self.assertEqual(summary.reps, reps)
        self.assertEqual(summary.excluded, 0)
        self.assertEqual(json.dumps(run_study(cfg).to_dict()), json.dumps(run_study(cfg).to_dict()))

    def test_simple_random_sampling_matches_its_variance(self):
        # Arrange
        N, n, reps = 30, 5, 2000
        cfg = StudyConfig(seed=13, N=N, n=n, reps=reps, designs=specs(srs(N, n)))
        y = gen_population(cfg, make_rng(13, 0)).y
        expected = math.sqrt((1 - n / N) * np.var(y, ddof=1) / n)

        # Act
        summary = run_study(cfg).results[0]

        # Assert
        self.assertAlmostEqual(summary.se / expected, 1.0, delta=4.5 * math.sqrt(2 / reps))
        self.assertAlmostEqual(summary.revar / expected, 1.0, delta=0.05)
        self.assertEqual(summary.excluded, 0)
        self.assertFalse(summary.flagged)

    def test_designs_with_null_joints_are_flagged(self):
        summary = run_study(StudyConfig(seed=14, N=10, n=2, reps=100, designs=specs(mh(10, 2, 5)))).results[0]
        self.assertTrue(summary.flagged)
        self.assertEqual(summary.excluded, 0)
        self.assertEqual(summary.reps, 100)

    def test_renewal_design(self):
        summary = run_study(StudyConfig(seed=15, N=30, n=5, reps=300, designs=specs(bernoulli(30, 0.2)))).results[0]
        self.assertEqual(summary.reps, 300)
        self.assertGreater(summary.se, 0)
        self.assertLess(abs(summary.br), 100 * 4.5 / math.sqrt(300))


class SaveReportTests(TestCase):
    """
    Storing study reports.
    """

    def test_report_is_stored(self):
        # Arrange
        report = run_study(StudyConfig(seed=21, N=20, n=4, reps=30, designs=specs(srs(20, 4), multinomial(20, 4))))

        # Act
        run = save_report(report)

        # Assert
        self.assertEqual(StudyRun.objects.count(), 1)
        self.assertEqual(run.seed, 21)
        self.assertEqual((run.population_size, run.sample_size, run.reps), (20, 4, 30))
        self.assertAlmostEqual(run.population_mean, report.population_mean)
        labels = list(run.results.values_list("label", flat=True))
        self.assertEqual(labels, ["MNH r=1 (SRS)", "MULT"])
        self.assertEqual(DesignResult.objects.get(run=run, position=1).spec["spacings"], design_to_spec(multinomial(20, 4))["spacings"])

    def test_undefined_metrics_are_stored_as_null(self):
        report = run_study(StudyConfig(seed=22, N=10, n=2, reps=5, designs=specs(srs(10, 2))))
        summary = report.results[0]
        broken = type(report)(
            report.seed,
            report.population_mean,
            report.config,
            [type(summary)(summary.label, summary.spec, *[float("nan")] * 5, 0)],
        )
        run = save_report(broken)
        result = run.results.get()
        self.assertIsNone(result.br)
        self.assertIsNone(result.coverage)
        self.assertEqual(result.reps, 0)


@tag("slow")
class ReferenceStudyTests(SimpleTestCase):
    """
    The reference study at full size: N = 200, n = 50, 20000 replicates.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.report = run_study(StudyConfig(seed=20240501))
        cls.by_label = {summary.label: summary for summary in cls.report.results}

    def test_bias_ratio_is_noise(self):
        # The HT estimator is unbiased, BR only carries Monte Carlo error of sd 100 / sqrt(reps).
        for summary in self.report.results:
            self.assertLess(abs(summary.br), 100 * 4.5 / math.sqrt(summary.reps), summary.label)

    def test_standard_error_decreases_with_spread(self):
        ses = [summary.se for summary in self.report.results]
        for before, after in zip(ses, ses[1:]):
            noise = 2 * (before + after) / math.sqrt(2 * self.report.results[0].reps)
            self.assertLessEqual(after, before + noise)

    def test_coverage(self):
        self.assertTrue(92 <= self.by_label["MULT"].coverage <= 95)
        self.assertLess(self.by_label["MH r=4"].coverage, 60)
        self.assertLess(self.by_label["MH r=6"].coverage, 90)

    def test_variance_estimates_track_the_standard_error(self):
        for summary in self.report.results:
            if summary.label == "MH r=4":
                continue
            with self.subTest(design=summary.label):
                self.assertTrue(0.97 <= summary.revar / summary.se <= 1.03)


class StudyAdminTests(TestCase):
    """
    Browsing stored studies in the admin.
    """

    def setUp(self):
        admin_user = get_user_model().objects.create_superuser("admin", "admin@example.com", "secret-pass-123")
        self.client.force_login(admin_user)
        self.run = save_report(run_study(StudyConfig(seed=41, N=12, n=3, reps=20, designs=specs(srs(12, 3)))))

    def test_run_list(self):
        response = self.client.get(reverse("admin:simlab_studyrun_changelist"))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, "41")

    def test_run_detail_shows_its_results(self):
        response = self.client.get(reverse("admin:simlab_studyrun_change", args=[self.run.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, "MNH r=1 (SRS)")

    def test_result_search(self):
        response = self.client.get(reverse("admin:simlab_designresult_changelist"), {"q": "SRS"})
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, "MNH r=1 (SRS)")
