import logging

from simlab.forms import study_config_from_spec
from simlab.study import run_study, save_report

from cli.base import SamplingCommand
from cli.output import CommandOutput, load_json_argument

logger = logging.getLogger(__name__)


class Command(SamplingCommand):
    help = (
        "Runs a simulation study from a JSON config (inline or a file) and prints "
        "the per-design summary. --seed and --reps override the config."
    )

    def add_command_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Study config as inline JSON or the path of a JSON file.")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--reps", type=int)
        parser.add_argument("--save", action="store_true", help="Store the report in the database.")

    def produce(self, config, seed=None, reps=None, save=False, **options):
        spec = load_json_argument(config, "study config")
        if isinstance(spec, dict):
            spec = dict(spec)
            if seed is not None:
                spec["seed"] = seed
            if reps is not None:
                spec["reps"] = reps
        cfg = study_config_from_spec(spec)
        report = run_study(cfg)
        if save:
            run = save_report(report)
            logger.info("study stored run=%d", run.pk)
        return CommandOutput(report.to_rows(), report.to_dict())
