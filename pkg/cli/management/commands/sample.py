import logging

from designs.draws import draw
from designs.forms import design_to_spec
from spread_sampling.exceptions import ParameterDomainError
from spread_sampling.streams import make_rng, provenance

from cli.base import SamplingCommand
from cli.output import CommandOutput

logger = logging.getLogger(__name__)


class Command(SamplingCommand):
    help = "Draws samples from a design. Draw i uses the stream (seed, i)."

    def add_command_arguments(self, parser):
        self.add_design_argument(parser)
        parser.add_argument("--seed", type=int, required=True)
        parser.add_argument("--count", type=int, default=1, help="Number of samples to draw.")
        parser.add_argument("--method", choices=("conditional", "direct"), default="conditional")

    def produce(self, design, seed, count, method, **options):
        if seed < 0:
            raise ParameterDomainError(f"seed must be non-negative, got {seed}")
        if count < 1:
            raise ParameterDomainError(f"count must be at least 1, got {count}")
        design = self.load_design(design)
        draws = [
            draw(design, make_rng(seed, index), provenance(seed, index), method=method)
            for index in range(count)
        ]
        logger.info("sampled design=%r count=%d seed=%d", design.label, count, seed)

        rows = [["draw", "unit"]]
        rows += [[index, unit] for index, sample in enumerate(draws) for unit in sample.units]
        document = {
            "design": design_to_spec(design),
            "seed": seed,
            "draws": [sample.to_dict() for sample in draws],
        }
        return CommandOutput(rows, document)
