import logging

from designs.forms import design_to_spec
from estimation.estimators import PopulationData, estimate
from inclusion.joint import joint_matrix

from cli.base import SamplingCommand
from cli.output import CommandOutput, read_column

logger = logging.getLogger(__name__)


class Command(SamplingCommand):
    help = (
        "Horvitz-Thompson estimate of the population total (or mean) from a sample CSV "
        "(column 'unit') and a population CSV (column 'y'). The interval uses the SYG "
        "variance for fixed-size designs and the HT variance otherwise."
    )
    default_format = "json"

    def add_command_arguments(self, parser):
        self.add_design_argument(parser)
        parser.add_argument("--sample", required=True, help="CSV file with a 'unit' column.")
        parser.add_argument("--population", required=True, help="CSV file with a 'y' column, one row per unit.")
        parser.add_argument("--target", choices=("total", "mean"), default="total")
        parser.add_argument("--level", type=float, default=0.95)

    def produce(self, design, sample, population, target, level, **options):
        design = self.load_design(design)
        units = sorted(read_column(sample, "unit", int))
        pop = PopulationData(read_column(population, "y", float))
        joint = joint_matrix(design)

        ht = estimate(units, pop, joint, level, target, method="ht")
        syg = estimate(units, pop, joint, level, target, method="syg") if joint.fixed_size else None
        result = syg if syg is not None else ht
        logger.info("estimate design=%r units=%d target=%s point=%.6g", design.label, len(units), target, result.point)

        document = {
            "design": design_to_spec(design),
            "target": target,
            "point": result.point,
            "variance_syg": None if syg is None else syg.variance,
            "variance_ht": ht.variance,
            "ci": None if result.ci is None else {"level": level, "low": result.ci_low, "high": result.ci_high},
        }
        rows = [
            ["point", "variance_syg", "variance_ht", "ci_low", "ci_high"],
            [result.point, document["variance_syg"], ht.variance, result.ci_low, result.ci_high],
        ]
        return CommandOutput(rows, document)
