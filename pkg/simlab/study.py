"""
Replicated simulation studies on a trended, autocorrelated population.

Every replicate draws from its own stream make_rng(seed, 1 + design index,
replicate index) and results are reduced in replicate order, so a report is
bit-identical for a given configuration whatever the execution order. Samples
of fixed-size designs are estimated REPLICATE_BLOCK rows at a time.
"""
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from django.db import transaction

from designs.core import mh, mnh, multinomial, srs
from designs.draws import draw, draw_circular_batch
from designs.forms import design_from_spec, design_to_spec
from estimation.estimators import ht_total, ht_totals, normal_quantile, var_ht, var_syg_rows
from inclusion.joint import joint_matrix
from spread_sampling.exceptions import NonEstimableError, ParameterDomainError
from spread_sampling.streams import DESIGN_STREAM_OFFSET, POPULATION_STREAM, make_rng

from .models import DesignResult, StudyRun
from .population import gen_population

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("design", "BR", "SE", "REVAR", "CV", "coverage", "reps", "excluded")

REFERENCE_MNH_SHAPES = (0.5, 1.0, 5.0, 10.0, 50.0)
REFERENCE_MH_SHAPES = (50, 10, 6, 4)
REPLICATE_BLOCK = 1000


def reference_designs(N=200, n=50):
    """
    The ten fixed-size designs of the reference study, ordered by decreasing
    spacing variance: MNH r in (0.5, 1, 5, 10, 50), MULT, MH r in (50, 10, 6, 4).
    """
    return (
        [mnh(N, n, r) for r in REFERENCE_MNH_SHAPES]
        + [multinomial(N, n)]
        + [mh(N, n, r) for r in REFERENCE_MH_SHAPES]
    )


@dataclass(frozen=True)
class StudyConfig:
    """
    Parameters of a study.

    ``designs`` holds design specs (dicts); None stands for reference_designs(N, n).
    """

    seed: int
    N: int = 200
    n: int = 50
    reps: int = 20_000
    designs: list = None
    ar_coefficient: float = 0.6
    noise_sd: float = 0.3
    ci_level: float = 0.95

    def __post_init__(self):
        if self.seed is None or isinstance(self.seed, bool) or int(self.seed) != self.seed:
            raise ParameterDomainError(f"a study needs an integer seed, got {self.seed!r}")
        if self.N < 1 or not 1 <= self.n <= self.N:
            raise ParameterDomainError(f"a study needs 1 <= n <= N, got N={self.N} n={self.n}")
        if self.reps < 1:
            raise ParameterDomainError(f"reps must be at least 1, got {self.reps}")
        if not 0 <= self.ar_coefficient < 1:
            raise ParameterDomainError(f"ar_coefficient must lie in [0, 1), got {self.ar_coefficient}")
        if not self.noise_sd > 0:
            raise ParameterDomainError(f"noise_sd must be positive, got {self.noise_sd}")
        if not 0 < self.ci_level < 1:
            raise ParameterDomainError(f"ci_level must lie in (0, 1), got {self.ci_level}")

    def design_values(self):
        if self.designs is None:
            return reference_designs(self.N, self.n)
        designs = [design_from_spec(spec) for spec in self.designs]
        for design in designs:
            if design.N != self.N:
                raise ParameterDomainError(f"design {design.label} has N={design.N}, the study has N={self.N}")
        return designs

    def to_dict(self):
        values = asdict(self)
        if self.designs is None:
            values["designs"] = [design_to_spec(d) for d in reference_designs(self.N, self.n)]
        return values


@dataclass(frozen=True)
class DesignSummary:
    """
    Monte Carlo summary of one design (estimating the population mean).

    - br: 100 * mean(error) / se, 0 when se = 0.
    - se: standard deviation of the estimates.
    - revar: square root of the mean variance estimate.
    - cv: standard deviation of the variance estimates over se^2.
    - coverage: percentage of intervals containing the population mean.
    """

    label: str
    spec: dict
    br: float
    se: float
    revar: float
    cv: float
    coverage: float
    reps: int
    excluded: int = 0
    flagged: bool = False
    omitted_intervals: int = 0

    def to_row(self):
        return [self.label, self.br, self.se, self.revar, self.cv, self.coverage, self.reps, self.excluded]


@dataclass(frozen=True)
class StudyReport:
    seed: int
    population_mean: float
    config: dict
    results: list = field(default_factory=list)

    def to_rows(self):
        return [list(CSV_COLUMNS)] + [summary.to_row() for summary in self.results]

    def to_dict(self):
        return {
            "seed": self.seed,
            "population_mean": self.population_mean,
            "config": self.config,
            "results": [asdict(summary) for summary in self.results],
        }


def _summarise(design, estimates, variances, covered, mean, excluded, flagged, omitted):
    estimates = np.asarray(estimates, dtype=float)
    variances = np.asarray(variances, dtype=float)
    used = len(estimates)
    if used == 0:
        nan = float("nan")
        return DesignSummary(design.label, design_to_spec(design), nan, nan, nan, nan, nan, 0, excluded, flagged, omitted)

    se = float(np.std(estimates, ddof=1)) if used > 1 else 0.0
    # Rounding noise of a constant estimator, e.g. a census.
    if se <= 1e-12 * max(1.0, abs(mean)):
        se = 0.0
    bias = math.fsum(estimates - mean) / used
    br = 100 * bias / se if se > 0 else 0.0
    mean_variance = math.fsum(variances) / used
    revar = math.sqrt(mean_variance) if mean_variance >= 0 else float("nan")
    sd_variance = float(np.std(variances, ddof=1)) if used > 1 else 0.0
    cv = sd_variance / se**2 if se > 0 else 0.0
    coverage = 100 * covered / used
    return DesignSummary(
        design.label, design_to_spec(design), br, se, revar, cv, coverage, used, excluded, flagged, omitted
    )


def _replicate_rng(cfg, index, rep):
    return make_rng(cfg.seed, DESIGN_STREAM_OFFSET + index, rep)


def _circular_replicates(design, index, pop, joint, cfg):
    """Point and SYG variance estimates of the mean, NaN variance for excluded replicates."""
    points, variances = [], []
    for first in range(0, cfg.reps, REPLICATE_BLOCK):
        reps = range(first, min(first + REPLICATE_BLOCK, cfg.reps))
        samples = np.vstack([draw_circular_batch(design, _replicate_rng(cfg, index, rep), 1) for rep in reps])
        points.append(ht_totals(samples, pop, joint.pi) / pop.N)
        variances.append(var_syg_rows(samples, pop, joint) / pop.N**2)
    return np.concatenate(points), np.concatenate(variances)


def _renewal_replicates(design, index, pop, joint, cfg):
    points = np.empty(cfg.reps)
    variances = np.empty(cfg.reps)
    for rep in range(cfg.reps):
        sample = draw(design, _replicate_rng(cfg, index, rep))
        try:
            points[rep] = ht_total(sample, pop, joint.pi) / pop.N
            variances[rep] = var_ht(sample, pop, joint.pi, joint) / pop.N**2
        except NonEstimableError as exc:
            points[rep] = variances[rep] = np.nan
            logger.debug("replicate excluded design=%r rep=%d pair=%s", design.label, rep, exc.pair)
    return points, variances


def run_design(design, index, pop, cfg):
    """Runs the replicates of one design and summarises them."""
    joint = joint_matrix(design)
    flagged = bool(joint.null_gaps())
    replicates = _circular_replicates if design.fixed_size else _renewal_replicates
    points, variances = replicates(design, index, pop, joint, cfg)
    mean = pop.mean

    kept = ~np.isnan(variances)
    excluded = int(cfg.reps - np.count_nonzero(kept))
    points, variances = points[kept], variances[kept]
    # Rounding noise around a null variance, e.g. a census.
    variances[(variances < 0) & (variances >= -1e-12 * max(1.0, mean**2))] = 0.0
    omitted = int(np.count_nonzero(variances < 0))
    usable = variances >= 0
    half = normal_quantile(cfg.ci_level) * np.sqrt(variances[usable])
    slack = 1e-9 * max(1.0, abs(mean))
    covered = int(np.count_nonzero(np.abs(points[usable] - mean) <= half + slack))

    if excluded:
        logger.warning("design=%r reps=%d excluded=%d", design.label, cfg.reps, excluded)
    if omitted:
        logger.warning("design=%r negative_variance_estimates=%d", design.label, omitted)
    summary = _summarise(design, points, variances, covered, mean, excluded, flagged, omitted)
    logger.info(
        "design=%r reps=%d excluded=%d br=%.3f se=%.4f coverage=%.2f",
        design.label, cfg.reps, excluded, summary.br, summary.se, summary.coverage,
    )
    return summary


def run_study(cfg):
    """Generates the population once and runs every design on it."""
    pop = gen_population(cfg, make_rng(cfg.seed, POPULATION_STREAM))
    designs = cfg.design_values()
    results = [run_design(design, index, pop, cfg) for index, design in enumerate(designs)]
    return StudyReport(int(cfg.seed), pop.mean, cfg.to_dict(), results)


@transaction.atomic
def save_report(report):
    """Stores a StudyReport as a StudyRun with one DesignResult per design."""
    config = report.config
    run = StudyRun.objects.create(
        seed=report.seed,
        population_size=config["N"],
        sample_size=config["n"],
        reps=config["reps"],
        rho=config["ar_coefficient"],
        noise_sd=config["noise_sd"],
        ci_level=config["ci_level"],
        population_mean=report.population_mean,
        config=config,
    )

    def finite(value):
        return value if math.isfinite(value) else None

    DesignResult.objects.bulk_create(
        DesignResult(
            run=run,
            position=position,
            label=summary.label,
            spec=summary.spec,
            br=finite(summary.br),
            se=finite(summary.se),
            revar=finite(summary.revar),
            cv=finite(summary.cv),
            coverage=finite(summary.coverage),
            reps=summary.reps,
            excluded=summary.excluded,
            flagged=summary.flagged,
        )
        for position, summary in enumerate(report.results)
    )
    logger.info("saved study run=%d designs=%d", run.pk, len(report.results))
    return run
