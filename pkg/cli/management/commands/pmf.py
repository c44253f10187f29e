import numpy as np

from designs.core import CircularDesign
from designs.draws import check_units, design_pmf
from designs.forms import design_to_spec
from dists.forms import dist_from_spec
from oracle.enumeration import enumerate_renewal
from spread_sampling.exceptions import ParameterDomainError

from cli.base import SamplingCommand
from cli.output import CommandOutput, load_json_argument, parse_units


class Command(SamplingCommand):
    help = (
        "Evaluates a distribution PMF (--dist, rows x, pmf, cdf) or the probability "
        "of one sample under a design (--design with --units)."
    )

    def add_command_arguments(self, parser):
        parser.add_argument("--dist", help="Distribution spec as inline JSON or the path of a JSON file.")
        self.add_design_argument(parser, required=False)
        parser.add_argument("--units", help="Comma-separated 1-based units of the sample, e.g. 2,5,9.")
        parser.add_argument("--upto", type=int, help="Last x to tabulate; default is the truncation point.")

    def produce(self, dist=None, design=None, units=None, upto=None, **options):
        if (dist is None) == (design is None):
            raise ParameterDomainError("give exactly one of --dist and --design")
        if dist is not None:
            return self._dist_table(dist, upto)
        if units is None:
            raise ParameterDomainError("--design needs --units")
        return self._sample_probability(design, units)

    def _dist_table(self, spec, upto):
        law = dist_from_spec(load_json_argument(spec, "distribution spec"))
        last = law.truncation_point() if upto is None else upto
        if last < 0:
            raise ParameterDomainError(f"--upto must be non-negative, got {upto}")
        xs = np.arange(last + 1)
        pmf, cdf = law.pmf(xs), law.cdf(xs)
        rows = [["x", "pmf", "cdf"]] + [[int(x), float(p), float(c)] for x, p, c in zip(xs, pmf, cdf)]
        document = {
            "dist": law.to_spec(),
            "x": xs.tolist(),
            "pmf": pmf.tolist(),
            "cdf": cdf.tolist(),
        }
        return CommandOutput(rows, document)

    def _sample_probability(self, spec, text):
        design = self.load_design(spec)
        units = parse_units(text)
        if isinstance(design, CircularDesign):
            probability = float(design_pmf(design, units))
        else:
            units = check_units(design.N, units) if units else []
            probability = enumerate_renewal(design, list_subsets=True).probability(units)
        label = " ".join(str(u) for u in units)
        document = {"design": design_to_spec(design), "units": units, "probability": probability}
        return CommandOutput([["units", "probability"], [label, probability]], document)
