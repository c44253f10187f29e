# in cli/tests.py

import csv
import io
import json
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from designs.core import bernoulli, mnh, srs
from designs.forms import design_from_spec, design_to_spec
from simlab.models import StudyRun
from spread_sampling.exceptions import ParameterDomainError

from .output import CommandOutput, format_value, render
from .runner import CliConfig, run

MULT_50_10 = '{"kind": "circular", "N": 50, "n": 10, "spacings": {"family": "mnom"}}'


def spec_text(design):
    return json.dumps(design_to_spec(design))


def command(name, **options):
    """Runs a command and returns its standard output."""
    out = io.StringIO()
    call_command(name, stdout=out, stderr=io.StringIO(), **options)
    return out.getvalue()


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


class OutputTests(SimpleTestCase):
    """
    CSV and JSON rendering.
    """

    def test_numbers_use_fifteen_significant_digits(self):
        self.assertEqual(format_value(1 / 3), "0.333333333333333")
        self.assertEqual(format_value(2.0), "2")
        self.assertEqual(format_value(7), "7")
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value(True), "true")

    def test_csv_and_json(self):
        result = CommandOutput([["gap", "pi_joint"], [1, 0.25]], {"pi": [0.5]})
        self.assertEqual(render(result, "csv"), "gap,pi_joint\n1,0.25\n")
        self.assertEqual(json.loads(render(result, "json")), {"pi": [0.5]})

    def test_unknown_format(self):
        with self.assertRaises(ParameterDomainError):
            render(CommandOutput(), "xml")


class SampleCommandTests(SimpleTestCase):
    """
    manage.py sample
    """

    def test_multinomial_sample(self):
        # Act
        rows = csv_rows(command("sample", design=MULT_50_10, seed=1))

        # Assert
        self.assertEqual(rows[0], ["draw", "unit"])
        units = [int(unit) for _, unit in rows[1:]]
        self.assertEqual(len(units), 10)
        self.assertEqual(units, sorted(units))
        self.assertTrue(all(1 <= unit <= 50 for unit in units))

    def test_same_seed_same_output(self):
        first = command("sample", design=MULT_50_10, seed=5, count=3)
        second = command("sample", design=MULT_50_10, seed=5, count=3)
        self.assertEqual(first, second)
        self.assertNotEqual(first, command("sample", design=MULT_50_10, seed=6, count=3))

    def test_json_design_round_trips(self):
        design = mnh(40, 8, 5.0)
        document = json.loads(command("sample", design=spec_text(design), seed=2, format="json"))
        self.assertEqual(design_from_spec(document["design"]), design)
        self.assertEqual(document["draws"][0]["seed"], [2, 0])
        self.assertEqual(len(document["draws"][0]["units"]), 8)

    def test_design_file_and_output_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            spec_path = Path(tmp) / "design.json"
            out_path = Path(tmp) / "sample.csv"
            spec_path.write_text(MULT_50_10)

            stdout = command("sample", design=str(spec_path), seed=3, output=str(out_path))

            self.assertEqual(stdout, "")
            self.assertEqual(len(csv_rows(out_path.read_text())), 11)

    def test_seed_is_required(self):
        with self.assertRaises(CommandError):
            command("sample", design=MULT_50_10)

    def test_domain_error(self):
        bad = '{"kind": "equilibrium", "N": 20, "jump": {"family": "geometric", "p": 2}}'
        with self.assertRaises(CommandError) as raised:
            command("sample", design=bad, seed=1)
        self.assertTrue(str(raised.exception).startswith("domain_error:"))
        self.assertEqual(raised.exception.returncode, 1)
        self.assertNotIn("\n", str(raised.exception))

    def test_malformed_json(self):
        with self.assertRaises(CommandError) as raised:
            command("sample", design='{"kind": ', seed=1)
        self.assertIn("malformed JSON", str(raised.exception))


class InclusionCommandTests(SimpleTestCase):
    """
    manage.py inclusion
    """

    def test_simple_random_sampling_joint_column(self):
        # Act
        rows = csv_rows(command("inclusion", design=spec_text(srs(10, 2))))

        # Assert
        self.assertEqual(rows[0], ["gap", "pi_joint", "delta"])
        self.assertEqual([int(row[0]) for row in rows[1:]], list(range(1, 10)))
        for row in rows[1:]:
            self.assertAlmostEqual(float(row[1]), 1 / 45, places=14)
            self.assertAlmostEqual(float(row[2]), 1 / 45 - 0.04, places=14)

    def test_first_order(self):
        rows = csv_rows(command("inclusion", design=spec_text(bernoulli(12, 0.25)), first_order=True))
        self.assertEqual(rows[0], ["unit", "pi"])
        self.assertEqual(len(rows), 13)
        for row in rows[1:]:
            self.assertAlmostEqual(float(row[1]), 0.25, places=12)

    def test_json_lists_null_gaps(self):
        spec = '{"kind": "circular", "N": 10, "n": 2, "spacings": {"family": "mh", "r": 5}}'
        document = json.loads(command("inclusion", design=spec, format="json"))
        self.assertIn(1, document["null_gaps"])
        self.assertEqual(document["joint"][0]["pi_joint"], 0.0)


class PmfCommandTests(SimpleTestCase):
    """
    manage.py pmf
    """

    def test_distribution_table(self):
        rows = csv_rows(command("pmf", dist='{"family": "bernoulli", "p": 0.5}'))
        self.assertEqual(rows, [["x", "pmf", "cdf"], ["0", "0.5", "0.5"], ["1", "0.5", "1"]])

    def test_upto(self):
        document = json.loads(command("pmf", dist='{"family": "poisson", "lambda": 2}', upto=4, format="json"))
        self.assertEqual(document["x"], [0, 1, 2, 3, 4])
        self.assertAlmostEqual(document["pmf"][0], 0.1353352832366127, places=14)

    def test_circular_sample_probability(self):
        rows = csv_rows(command("pmf", design=spec_text(srs(5, 2)), units="2,5"))
        self.assertEqual(rows[1][0], "2 5")
        self.assertAlmostEqual(float(rows[1][1]), 0.1, places=14)

    def test_renewal_sample_probability(self):
        document = json.loads(
            command("pmf", design=spec_text(bernoulli(4, 0.5)), units="1,3", format="json")
        )
        self.assertAlmostEqual(document["probability"], 1 / 16, places=14)

    def test_needs_exactly_one_source(self):
        with self.assertRaises(CommandError):
            command("pmf")
        with self.assertRaises(CommandError):
            command("pmf", design=spec_text(srs(5, 2)))


class EstimateCommandTests(SimpleTestCase):
    """
    manage.py estimate
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.population = Path(self.tmp.name) / "population.csv"
        self.population.write_text("y\n" + "".join(f"{k}\n" for k in range(1, 11)))
        self.sample = Path(self.tmp.name) / "sample.csv"
        self.sample.write_text("unit\n5\n1\n")

    def test_simple_random_sampling_estimate(self):
        # Act
        document = json.loads(
            command(
                "estimate",
                design=spec_text(srs(10, 2)),
                sample=str(self.sample),
                population=str(self.population),
            )
        )

        # Assert
        # y = (1, 5) with pi = 1/5: 30; both variance forms give 320.
        self.assertAlmostEqual(document["point"], 30.0, places=12)
        self.assertAlmostEqual(document["variance_syg"], 320.0, places=9)
        self.assertAlmostEqual(document["variance_ht"], 320.0, places=9)
        self.assertAlmostEqual(document["ci"]["high"] - 30.0, 1.959963984540054 * 320**0.5, places=9)

    def test_mean_target(self):
        document = json.loads(
            command(
                "estimate",
                design=spec_text(srs(10, 2)),
                sample=str(self.sample),
                population=str(self.population),
                target="mean",
            )
        )
        self.assertAlmostEqual(document["point"], 3.0, places=12)
        self.assertAlmostEqual(document["variance_syg"], 3.2, places=9)

    def test_renewal_design_has_no_syg_variance(self):
        document = json.loads(
            command(
                "estimate",
                design=spec_text(bernoulli(10, 0.2)),
                sample=str(self.sample),
                population=str(self.population),
            )
        )
        self.assertIsNone(document["variance_syg"])
        self.assertIsNotNone(document["variance_ht"])

    def test_population_size_mismatch(self):
        with self.assertRaises(CommandError) as raised:
            command(
                "estimate",
                design=spec_text(srs(12, 2)),
                sample=str(self.sample),
                population=str(self.population),
            )
        self.assertIn("domain_error", str(raised.exception))


class VerifyCommandTests(SimpleTestCase):
    """
    manage.py verify
    """

    def test_spread_design_passes(self):
        document = json.loads(command("verify", design=spec_text(mnh(8, 3, 2.0))))
        self.assertTrue(document["passed"])
        self.assertAlmostEqual(document["total_mass"], 1.0, delta=1e-10)

    def test_frequencies(self):
        document = json.loads(command("verify", design=spec_text(srs(6, 2)), reps=20_000, seed=4))
        self.assertLess(document["frequencies"]["max_z_inclusion"], 4.5)

    @override_settings(SAMPLING={"ROWSUM_TOLERANCE": -1.0})
    def test_failure_exits_with_status_two(self):
        out = io.StringIO()
        with self.assertRaises(CommandError) as raised:
            call_command("verify", design=spec_text(srs(6, 2)), format="csv", stdout=out)
        self.assertEqual(raised.exception.returncode, 2)
        self.assertTrue(str(raised.exception).startswith("consistency_error:"))
        rows = csv_rows(out.getvalue())
        self.assertIn(["rowsums", "false"], [row[:2] for row in rows])


class SimulateCommandTests(TestCase):
    """
    manage.py simulate
    """

    def config(self, **extra):
        spec = {"seed": 31, "N": 20, "n": 4, "reps": 40, "designs": [design_to_spec(srs(20, 4))]}
        spec.update(extra)
        return json.dumps(spec)

    def test_csv_report(self):
        rows = csv_rows(command("simulate", config=self.config()))
        self.assertEqual(rows[0], ["design", "BR", "SE", "REVAR", "CV", "coverage", "reps", "excluded"])
        self.assertEqual(rows[1][0], "MNH r=1 (SRS)")
        self.assertEqual(rows[1][6], "40")

    def test_overrides_and_save(self):
        document = json.loads(command("simulate", config=self.config(), seed=32, reps=10, format="json", save=True))
        self.assertEqual(document["seed"], 32)
        self.assertEqual(document["results"][0]["reps"], 10)
        run = StudyRun.objects.get()
        self.assertEqual((run.seed, run.reps), (32, 10))
        self.assertEqual(run.results.count(), 1)

    def test_identical_invocations_give_identical_output(self):
        self.assertEqual(command("simulate", config=self.config()), command("simulate", config=self.config()))

    def test_missing_seed(self):
        spec = json.loads(self.config())
        del spec["seed"]
        with self.assertRaises(CommandError) as raised:
            command("simulate", config=json.dumps(spec))
        self.assertIn("seed", str(raised.exception))


class RunnerTests(SimpleTestCase):
    """
    run(CliConfig) exit statuses.
    """

    def test_success(self):
        out, err = io.StringIO(), io.StringIO()
        status = run(CliConfig("sample", design=MULT_50_10, seed=1), stdout=out, stderr=err)
        self.assertEqual(status, 0)
        self.assertEqual(len(csv_rows(out.getvalue())), 11)

    def test_domain_error_is_one_line_with_status_one(self):
        err = io.StringIO()
        bad = '{"kind": "circular", "N": 5, "n": 7, "spacings": {"family": "mnom"}}'
        status = run(CliConfig("inclusion", design=bad), stdout=io.StringIO(), stderr=err)
        self.assertEqual(status, 1)
        self.assertTrue(err.getvalue().startswith("domain_error:"))
        self.assertEqual(err.getvalue().count("\n"), 1)

    @override_settings(SAMPLING={"ROWSUM_TOLERANCE": -1.0})
    def test_consistency_failure_has_status_two(self):
        status = run(CliConfig("verify", design=spec_text(srs(6, 2))), stdout=io.StringIO(), stderr=io.StringIO())
        self.assertEqual(status, 2)

    def test_invalid_configs(self):
        with self.assertRaises(ParameterDomainError):
            CliConfig("plot")
        with self.assertRaises(ParameterDomainError):
            CliConfig("sample", design=MULT_50_10)
        with self.assertRaises(ParameterDomainError):
            CliConfig("inclusion", design=MULT_50_10, format="xml")

    def test_options_are_forwarded(self):
        out = io.StringIO()
        status = run(
            CliConfig("inclusion", design=spec_text(srs(10, 2)), options={"first_order": True}),
            stdout=out,
            stderr=io.StringIO(),
        )
        self.assertEqual(status, 0)
        self.assertEqual(csv_rows(out.getvalue())[0], ["unit", "pi"])
