"""
Exception hierarchy shared by every app of the project.

Each exception carries the process exit status the command-line surface
reports for it, and a short machine-readable ``kind`` used as the prefix of
the one-line diagnostic written by the management commands.
"""


class SamplingError(Exception):
    """Base class for all domain errors raised by the sampling library."""

    kind = "sampling_error"
    exit_status = 1

    def one_line(self):
        """Returns the diagnostic line, e.g. ``domain_error: p must lie in (0, 1]``."""
        detail = " ".join(str(self).split())
        return f"{self.kind}: {detail}"


class ParameterDomainError(SamplingError, ValueError):
    """A distribution, design or estimator received parameters outside their domain."""

    kind = "domain_error"


class UnsupportedError(SamplingError):
    """The requested operation is not defined for these inputs (e.g. infinite mean)."""

    kind = "unsupported"


class NonEstimableError(SamplingError):
    """
    A variance estimator met a sampled pair with a null joint inclusion probability.

    Attributes:
    - pair: the offending pair of 1-based unit indexes.
    """

    kind = "non_estimable"

    def __init__(self, pair, message=None):
        self.pair = tuple(int(u) for u in pair)
        super().__init__(
            message or f"joint inclusion probability of units {self.pair} is zero"
        )


class GuardExceededError(SamplingError):
    """An exhaustive enumeration was refused because the subset space is too large."""

    kind = "guard_exceeded"


class ConsistencyError(SamplingError):
    """A numerical identity that must hold exactly (up to tolerance) was violated."""

    kind = "consistency_error"
    exit_status = 2
