"""
Programmatic entry point to the sampling commands.

``run(CliConfig(...))`` behaves like ``manage.py <subcommand> ...``: it
returns the exit status and writes the one-line diagnostic of a failure to
the error stream.
"""
import sys
from dataclasses import dataclass, field

from django.core.management import call_command
from django.core.management.base import CommandError

from spread_sampling.exceptions import ParameterDomainError

from .output import FORMATS

SUBCOMMANDS = ("sample", "inclusion", "pmf", "estimate", "verify", "simulate")


@dataclass(frozen=True)
class CliConfig:
    """
    One command invocation.

    ``design`` is inline JSON or a file path (the study config for simulate);
    ``options`` holds the remaining command options by name.
    """

    subcommand: str
    design: str = None
    seed: int = None
    format: str = None
    output: str = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ParameterDomainError(
                f"unknown subcommand {self.subcommand!r}, expected one of {', '.join(SUBCOMMANDS)}"
            )
        # simulate may take its seed from the study config instead.
        if self.subcommand == "sample" and self.seed is None and "seed" not in self.options:
            raise ParameterDomainError("sample needs a seed")
        if self.format is not None and self.format not in FORMATS:
            raise ParameterDomainError(f"unknown output format {self.format!r}, expected one of {', '.join(FORMATS)}")

    def command_options(self):
        options = dict(self.options)
        if self.design is not None:
            options["config" if self.subcommand == "simulate" else "design"] = self.design
        for name in ("seed", "format", "output"):
            value = getattr(self, name)
            if value is not None:
                options[name] = value
        return options


def run(cfg, stdout=None, stderr=None):
    """Dispatches ``cfg`` to its command; 0 on success, the command's exit status otherwise."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        call_command(cfg.subcommand, stdout=stdout, stderr=stderr, **cfg.command_options())
    except CommandError as exc:
        stderr.write(f"{exc}\n")
        return exc.returncode
    return 0
