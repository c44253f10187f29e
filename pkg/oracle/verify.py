import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from designs.core import CircularDesign, EquilibriumRenewalDesign
from designs.draws import draw, draw_circular_batch
from designs.forms import design_to_spec
from inclusion.fixed_size import fixed_conditional, matrix_A_rowsums, spacing_sum_table
from inclusion.joint import joint_matrix
from inclusion.renewal import pi_first_equilibrium, renewal_conditional
from spread_sampling.conf import sampling_setting
from spread_sampling.exceptions import ConsistencyError, GuardExceededError, ParameterDomainError

from .enumeration import enumerate_circular, enumerate_renewal

logger = logging.getLogger(__name__)

MIN_REPS = 10_000
JOINT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FrequencyReport:
    """
    Empirical frequencies against exact probabilities.

    max_z_* are the largest |frequency - p| / sqrt(p (1 - p) / reps); the
    subset figures are None when the design was too large to enumerate.
    """

    reps: int
    max_z_inclusion: float
    max_z_subsets: float = None
    distinct_samples: int = 0
    unexpected_samples: int = 0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    design: dict
    label: str
    checks: list = field(default_factory=list)
    total_mass: float = None

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def to_dict(self):
        return {
            "design": self.design,
            "label": self.label,
            "passed": self.passed,
            "total_mass": self.total_mass,
            "checks": [asdict(check) for check in self.checks],
        }


def _max_z(frequencies, probabilities, reps):
    frequencies = np.asarray(frequencies, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    sd = np.sqrt(probabilities * (1 - probabilities) / reps)
    certain = sd == 0
    z = np.where(certain, 0.0, np.abs(frequencies - probabilities) / np.where(certain, 1.0, sd))
    # A certain event (p = 0 or 1) that frequencies contradict is infinitely unlikely.
    z = np.where(certain & (frequencies != probabilities), np.inf, z)
    return float(np.max(z)) if z.size else 0.0


def _draw_rows(design, reps, rng):
    if isinstance(design, CircularDesign):
        return [tuple(row) for row in draw_circular_batch(design, rng, reps).tolist()]
    return [draw(design, rng).units for _ in range(reps)]


def _exact_subsets(design):
    try:
        if isinstance(design, CircularDesign):
            return enumerate_circular(design)
        return enumerate_renewal(design, list_subsets=True)
    except GuardExceededError as exc:
        logger.info("subset frequencies skipped design=%r reason=%s", design.label, exc)
        return None


def frequency_check(design, reps, rng):
    """
    Draws ``reps`` samples and compares subset and inclusion frequencies with
    their exact values. Thresholds are left to the caller.
    """
    if reps < MIN_REPS:
        raise ParameterDomainError(f"frequency checks need at least {MIN_REPS} replicates, got {reps}")
    rows = _draw_rows(design, reps, rng)

    counts = np.zeros(design.N + 1)
    for units in rows:
        counts[list(units)] += 1
    pi = joint_matrix(design).pi
    max_z_inclusion = _max_z(counts[1:] / reps, pi, reps)

    observed = {}
    for units in rows:
        observed[units] = observed.get(units, 0) + 1

    exact = _exact_subsets(design)
    max_z_subsets = None
    unexpected = 0
    if exact is not None:
        keys = [units for units, _ in exact.entries]
        probabilities = [p for _, p in exact.entries]
        frequencies = [observed.get(units, 0) / reps for units in keys]
        max_z_subsets = _max_z(frequencies, probabilities, reps)
        unexpected = sum(1 for units in observed if exact.probability(units) == 0)

    report = FrequencyReport(reps, max_z_inclusion, max_z_subsets, len(observed), unexpected)
    logger.info(
        "frequency check design=%r reps=%d max_z_inclusion=%.3f distinct=%d",
        design.label, reps, max_z_inclusion, len(observed),
    )
    return report


def _deviation_check(name, values, target, tolerance, detail=""):
    deviation = float(np.max(np.abs(np.asarray(values) - target))) if np.size(values) else 0.0
    return Check(name, deviation <= tolerance, deviation, tolerance, detail)


def _consistency_check(name, compute, tolerance):
    try:
        compute()
    except ConsistencyError as exc:
        return Check(name, False, math.inf, tolerance, str(exc))
    return Check(name, True, 0.0, tolerance)


def _circular_checks(design, method):
    N, n = design.N, design.n
    checks = []
    pmf_tolerance = sampling_setting("PMF_TOLERANCE")
    total_mass = None
    try:
        enumeration = enumerate_circular(design)
    except GuardExceededError as exc:
        checks.append(Check("enumeration", True, 0.0, 0.0, f"skipped: {exc}"))
    else:
        total_mass = enumeration.total_mass
        full = joint_matrix(design, method).submatrix(np.arange(1, N + 1))[1]
        checks += [
            _deviation_check("total_mass", total_mass, 1.0, pmf_tolerance),
            _deviation_check("first_order", enumeration.pi, n / N, pmf_tolerance),
            _deviation_check("joint", enumeration.pikl, full, JOINT_TOLERANCE),
            _deviation_check("joint_depends_on_gap", enumeration.gap_profile(), 0.0, 1e-12),
        ]

    tolerance = sampling_setting("ROWSUM_TOLERANCE")
    checks.append(
        _consistency_check(
            "rowsums",
            lambda: matrix_A_rowsums(spacing_sum_table(design.spacings), N, n),
            tolerance,
        )
    )
    closed = fixed_conditional(design.spacings, "closed")
    generic = fixed_conditional(design.spacings, "generic")
    checks += [
        _deviation_check("companions", math.fsum(closed[1:]), n - 1, JOINT_TOLERANCE),
        _deviation_check("closed_vs_generic", closed, generic, JOINT_TOLERANCE),
    ]
    return checks, total_mass


def _renewal_checks(design):
    N = design.N
    checks = []
    pmf_tolerance = sampling_setting("PMF_TOLERANCE")
    if isinstance(design, EquilibriumRenewalDesign):
        checks.append(
            _consistency_check(
                "flatness",
                lambda: pi_first_equilibrium(design.jump, N),
                sampling_setting("FLATNESS_TOLERANCE"),
            )
        )
        if not checks[-1].passed:
            return checks, None

    enumeration = enumerate_renewal(design)
    total_mass = enumeration.total_mass
    checks.append(_deviation_check("total_mass", total_mass, 1.0, pmf_tolerance))

    if N <= sampling_setting("RENEWAL_ENUMERATION_MAX_N"):
        listed = enumerate_renewal(design, list_subsets=True)
        checks += [
            _deviation_check("listed_total_mass", listed.total_mass, 1.0, pmf_tolerance),
            _deviation_check("first_order", listed.pi, enumeration.pi, pmf_tolerance),
            _deviation_check("joint", listed.pikl, enumeration.pikl, JOINT_TOLERANCE),
        ]

    closed = renewal_conditional(design.jump, N - 1, "closed")
    generic = renewal_conditional(design.jump, N - 1, "generic")
    checks.append(_deviation_check("closed_vs_generic", closed, generic, JOINT_TOLERANCE))
    return checks, total_mass


def verify_design(design, method="closed"):
    """
    Runs every exact cross-check that applies to the design. ``method``
    selects the route of the circular joint probabilities compared with the
    enumeration.
    """
    if isinstance(design, CircularDesign):
        checks, total_mass = _circular_checks(design, method)
    else:
        checks, total_mass = _renewal_checks(design)
    report = VerificationReport(design_to_spec(design), design.label, checks, total_mass)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning("verification failed design=%r checks=%s", design.label, ",".join(failed))
    else:
        logger.info("verification passed design=%r checks=%d", design.label, len(checks))
    return report
