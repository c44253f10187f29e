from designs.forms import design_to_spec
from inclusion.joint import joint_matrix

from cli.base import SamplingCommand
from cli.output import CommandOutput


class Command(SamplingCommand):
    help = (
        "Prints the joint inclusion probabilities pi_{k,k+gap} of a design with "
        "Delta = pi_kl - pi_k pi_l, or its first-order probabilities with --first-order."
    )

    def add_command_arguments(self, parser):
        self.add_design_argument(parser)
        parser.add_argument("--method", choices=("closed", "generic"), default="closed")
        parser.add_argument("--unit", type=int, default=1, help="Reference unit k of the joint curve.")
        parser.add_argument("--first-order", action="store_true", help="Print pi_k for every unit instead.")

    def produce(self, design, method, unit, first_order, **options):
        design = self.load_design(design)
        joint = joint_matrix(design, method)
        pi = [float(p) for p in joint.pi]
        curve = joint.curve(unit)

        if first_order:
            rows = [["unit", "pi"]] + [[k, p] for k, p in enumerate(pi, start=1)]
        else:
            rows = [["gap", "pi_joint", "delta"]] + [list(row) for row in curve]
        document = {
            "design": design_to_spec(design),
            "method": method,
            "unit": unit,
            "pi": pi,
            "joint": [{"gap": gap, "pi_joint": value, "delta": d} for gap, value, d in curve],
            "null_gaps": joint.null_gaps(),
        }
        return CommandOutput(rows, document)
