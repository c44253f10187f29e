import logging

from django.core.management.base import BaseCommand, CommandError

from designs.forms import design_from_spec
from spread_sampling.exceptions import SamplingError

from .output import FORMATS, load_json_argument, write_result

logger = logging.getLogger(__name__)


class SamplingCommand(BaseCommand):
    """
    Shared plumbing of the sampling commands: --format and --output options,
    SamplingError to CommandError with a one-line "kind: detail" message and
    the error's exit status.

    Subclasses implement ``add_command_arguments`` and ``produce``, which
    returns a CommandOutput.
    """

    default_format = "csv"

    def add_arguments(self, parser):
        self.add_command_arguments(parser)
        parser.add_argument("--format", choices=FORMATS, default=self.default_format)
        parser.add_argument("--output", help="File to write instead of standard output.")

    def add_command_arguments(self, parser):
        pass

    def add_design_argument(self, parser, required=True):
        parser.add_argument(
            "--design",
            required=required,
            help="Design spec as inline JSON or the path of a JSON file.",
        )

    def load_design(self, value):
        return design_from_spec(load_json_argument(value, "design spec"))

    def produce(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            result = self.produce(**options)
            write_result(result, options["format"], options.get("output"), self.stdout)
            self.after_output(result, **options)
        except SamplingError as exc:
            logger.debug("command failed kind=%s", exc.kind)
            raise CommandError(exc.one_line(), returncode=exc.exit_status)

    def after_output(self, result, **options):
        pass
