"""
Horvitz-Thompson estimation of a population total or mean.

Samples are SampleDraw values or plain sequences of 1-based unit indexes.
Joint probabilities come either from a JointProbMatrix or from an N x N
array (e.g. an exhaustive enumeration); the diagonal is always read as pi_k.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from spread_sampling.exceptions import NonEstimableError, ParameterDomainError, UnsupportedError

logger = logging.getLogger(__name__)

TARGETS = ("total", "mean")
VARIANCE_METHODS = ("syg", "ht")


@dataclass(frozen=True)
class PopulationData:
    """Values y_1, ..., y_N of the variable of interest."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise ParameterDomainError(f"population values must be a non-empty vector, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ParameterDomainError("population values must be finite")
        object.__setattr__(self, "y", y)

    @property
    def N(self):
        return len(self.y)

    @property
    def total(self):
        return math.fsum(self.y)

    @property
    def mean(self):
        return self.total / self.N


@dataclass(frozen=True)
class EstimateResult:
    """
    Point estimate, variance estimate and normal confidence interval.

    ci_low and ci_high are None when the variance estimate is negative.
    """

    point: float
    variance: float
    ci_low: float = None
    ci_high: float = None
    method: str = "syg"
    target: str = "total"
    level: float = 0.95

    @property
    def ci(self):
        if self.ci_low is None:
            return None
        return (self.ci_low, self.ci_high)

    def covers(self, value):
        return self.ci is not None and self.ci_low <= value <= self.ci_high

    def to_dict(self):
        return {
            "target": self.target,
            "method": self.method.upper(),
            "point": self.point,
            "variance": self.variance,
            "ci": None if self.ci is None else list(self.ci),
            "level": self.level,
        }


def _units(sample):
    units = getattr(sample, "units", sample)
    return np.asarray(list(units), dtype=np.int64)


def _sampled(sample, pop, pi):
    """(units, y_s, pi_s) with the domain checks shared by every estimator."""
    units = _units(sample)
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (pop.N,):
        raise ParameterDomainError(f"pi must hold {pop.N} values, got shape {pi.shape}")
    if units.size and (units.min() < 1 or units.max() > pop.N):
        raise ParameterDomainError(f"sampled units must lie in 1..{pop.N}")
    pi_s = pi[units - 1]
    null = np.flatnonzero(pi_s <= 0)
    if null.size:
        raise ParameterDomainError(f"unit {units[null[0]]} was sampled but has inclusion probability {pi_s[null[0]]}")
    return units, pop.y[units - 1], pi_s


def _joint_submatrix(pikl, units, pi_s):
    """pi_kl over the sampled pairs, pi_k on the diagonal; null pairs raise."""
    if hasattr(pikl, "submatrix"):
        pikl_s = pikl.submatrix(units)[1]
    else:
        pikl_s = np.array(np.asarray(pikl, dtype=float)[np.ix_(units - 1, units - 1)])
    np.fill_diagonal(pikl_s, pi_s)
    null = np.argwhere(pikl_s <= 0)
    if null.size:
        i, j = null[0]
        raise NonEstimableError((units[i], units[j]))
    return pikl_s


def ht_total(sample, pop, pi):
    """sum_{k in S} y_k / pi_k."""
    _, y_s, pi_s = _sampled(sample, pop, pi)
    return math.fsum(y_s / pi_s)


def ht_mean(sample, pop, pi):
    return ht_total(sample, pop, pi) / pop.N


def var_ht(sample, pop, pi, pikl):
    """
    sum_{k, l in S} y_k y_l / (pi_k pi_l) * Delta_kl / pi_kl, with pi_kk = pi_k.

    Valid for random-size designs as well.
    """
    units, y_s, pi_s = _sampled(sample, pop, pi)
    if units.size == 0:
        return 0.0
    pikl_s = _joint_submatrix(pikl, units, pi_s)
    expanded = y_s / pi_s
    delta = pikl_s - np.outer(pi_s, pi_s)
    return math.fsum((np.outer(expanded, expanded) * delta / pikl_s).ravel())


def var_syg(sample, pop, pi, pikl):
    """
    -1/2 sum_{k != l in S} (y_k / pi_k - y_l / pi_l)^2 Delta_kl / pi_kl, for fixed-size designs.
    """
    units, y_s, pi_s = _sampled(sample, pop, pi)
    if units.size < 2:
        return 0.0
    pikl_s = _joint_submatrix(pikl, units, pi_s)
    expanded = y_s / pi_s
    i, j = np.triu_indices(len(units), k=1)
    delta = pikl_s[i, j] - pi_s[i] * pi_s[j]
    return -math.fsum((expanded[i] - expanded[j]) ** 2 * delta / pikl_s[i, j])


def _sampled_rows(samples, pop, pi):
    """(units, y_s, pi_s) for equal-size rows of sorted 1-based units."""
    units = np.asarray(samples, dtype=np.int64)
    pi = np.asarray(pi, dtype=float)
    if units.ndim != 2:
        raise ParameterDomainError(f"samples must be a 2-d array of units, got shape {units.shape}")
    if pi.shape != (pop.N,):
        raise ParameterDomainError(f"pi must hold {pop.N} values, got shape {pi.shape}")
    if units.size and (units.min() < 1 or units.max() > pop.N):
        raise ParameterDomainError(f"sampled units must lie in 1..{pop.N}")
    pi_s = pi[units - 1]
    if np.any(pi_s <= 0):
        raise ParameterDomainError("a sampled unit has a null inclusion probability")
    return units, pop.y[units - 1], pi_s


def ht_totals(samples, pop, pi):
    """ht_total of every row of ``samples``."""
    _, y_s, pi_s = _sampled_rows(samples, pop, pi)
    return np.sum(y_s / pi_s, axis=1)


def var_syg_rows(samples, pop, joint):
    """
    var_syg of every row of ``samples`` (sorted units of a fixed-size design).

    Rows holding a pair with pi_kl = 0 give NaN.
    """
    units, y_s, pi_s = _sampled_rows(samples, pop, joint.pi)
    if units.shape[1] < 2:
        return np.zeros(units.shape[0])
    expanded = y_s / pi_s
    i, j = np.triu_indices(units.shape[1], k=1)
    lo, hi = units[:, i], units[:, j]
    pikl = joint.pi[lo - 1] * joint.conditional[hi - lo]
    delta = pikl - pi_s[:, i] * pi_s[:, j]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = -np.sum((expanded[:, i] - expanded[:, j]) ** 2 * delta / pikl, axis=1)
    return np.where(np.all(pikl > 0, axis=1), values, np.nan)


def normal_quantile(level):
    if not 0 < level < 1:
        raise ParameterDomainError(f"confidence level must lie in (0, 1), got {level!r}")
    return float(stats.norm.ppf((1 + level) / 2))


def confidence_interval(point, variance, level=0.95):
    """point -/+ z sqrt(variance); None (with a warning) for a negative variance."""
    z = normal_quantile(level)
    if variance < 0:
        logger.warning("negative variance estimate variance=%.6g, confidence interval omitted", variance)
        return None
    half = z * math.sqrt(variance)
    return (point - half, point + half)


def estimate(sample, pop, joint, level=0.95, target="total", method="syg"):
    """
    Estimates the population total or mean from a sample and the design's
    JointProbMatrix. The SYG variance needs a fixed-size design.
    """
    if target not in TARGETS:
        raise ParameterDomainError(f"unknown target {target!r}, expected one of {', '.join(TARGETS)}")
    if method not in VARIANCE_METHODS:
        raise ParameterDomainError(f"unknown variance method {method!r}, expected one of {', '.join(VARIANCE_METHODS)}")
    if method == "syg" and not joint.fixed_size:
        raise UnsupportedError("the SYG variance estimator needs a fixed-size design; use method 'ht'")
    if joint.N != pop.N:
        raise ParameterDomainError(f"design has N={joint.N} but the population holds {pop.N} values")

    point = ht_total(sample, pop, joint.pi)
    variance = (var_syg if method == "syg" else var_ht)(sample, pop, joint.pi, joint)
    if target == "mean":
        point, variance = point / pop.N, variance / pop.N**2

    interval = confidence_interval(point, variance, level)
    low, high = interval if interval is not None else (None, None)
    return EstimateResult(point, variance, low, high, method, target, level)
