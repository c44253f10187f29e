from oracle.verify import frequency_check, verify_design
from spread_sampling.exceptions import ConsistencyError, ParameterDomainError
from spread_sampling.streams import make_rng

from cli.base import SamplingCommand
from cli.output import CommandOutput


class Command(SamplingCommand):
    help = (
        "Runs the exact cross-checks of a design (enumeration, identities, closed "
        "forms against generic sums). Exits with status 2 when a check fails."
    )
    default_format = "json"

    def add_command_arguments(self, parser):
        self.add_design_argument(parser)
        parser.add_argument("--method", choices=("closed", "generic"), default="closed")
        parser.add_argument("--reps", type=int, help="Also compare frequencies over this many draws (needs --seed).")
        parser.add_argument("--seed", type=int)

    def produce(self, design, method, reps=None, seed=None, **options):
        design = self.load_design(design)
        report = verify_design(design, method)
        document = report.to_dict()
        if reps is not None:
            if seed is None:
                raise ParameterDomainError("frequency checks need --seed")
            document["frequencies"] = frequency_check(design, reps, make_rng(seed)).to_dict()

        rows = [["check", "passed", "max_deviation", "tolerance", "detail"]]
        rows += [[c.name, c.passed, c.max_deviation, c.tolerance, c.detail] for c in report.checks]
        self.report = report
        return CommandOutput(rows, document)

    def after_output(self, result, **options):
        if not self.report.passed:
            failed = ",".join(c.name for c in self.report.checks if not c.passed)
            raise ConsistencyError(f"verification failed design={self.report.label} checks={failed}")
