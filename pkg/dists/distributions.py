"""
Univariate discrete distributions on the non-negative integers.

Every family is an immutable dataclass validated on construction. The
module-level functions at the bottom of the file (pmf, cdf, mean_var,
forward, faulhaber_moment, sample, ...) are the public operations and
dispatch to the family methods.

PMFs are evaluated in log-space with log-gamma terms. Survival functions use
the regularized incomplete beta and gamma functions, which is also what makes
the forward transforms cheap: Pr(X_F = k) = Pr(X >= k) / E(X + 1).
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np
from scipy import special

from spread_sampling.conf import sampling_setting
from spread_sampling.exceptions import ParameterDomainError, UnsupportedError

from .special import faulhaber, log_binom, log_rising, safe_exp

logger = logging.getLogger(__name__)

# Moment sums weight the tail by polynomials of degree up to three, so they
# are truncated much further out than PMF tables.
MOMENT_TAIL = 1e-20


@dataclass(frozen=True)
class Moments:
    """
    Mean and variance of a distribution.

    Fields:
    - mean: E(X).
    - variance: var(X), never negative (rounding noise below 1e-9 is clipped).
    """

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            if self.variance > -1e-9 * max(1.0, self.mean**2):
                object.__setattr__(self, "variance", 0.0)
            else:
                raise ParameterDomainError(f"negative variance {self.variance!r}")


def _as_integer(name, value, minimum=0):
    if isinstance(value, bool) or not float(value).is_integer():
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ParameterDomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def _as_probability(name, value, open_low=False):
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    if not (low_ok and value <= 1):
        interval = "(0, 1]" if open_low else "[0, 1]"
        raise ParameterDomainError(f"{name} must lie in {interval}, got {value!r}")
    return value


def _as_positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ParameterDomainError(f"{name} must be a positive real, got {value!r}")
    return value


class DiscreteDist(ABC):
    """
    Base class of the univariate families.

    Subclasses declare their parameters as dataclass fields, set ``family``
    (the JSON tag) and implement ``validate``, ``upper_support``,
    ``_logpmf``, ``mean_var`` and ``sample``. Families with a closed-form
    tail override ``survival``.
    """

    family = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        pass

    def _set(self, name, value):
        object.__setattr__(self, name, value)

    @property
    @abstractmethod
    def upper_support(self):
        """Largest value with positive mass, or math.inf."""

    @property
    def lower_support(self):
        return 0

    @property
    def is_finite(self):
        return not math.isinf(self.upper_support)

    @abstractmethod
    def _logpmf(self, x):
        """Log-PMF on float values already known to lie in the support range."""

    @abstractmethod
    def mean_var(self):
        """Closed-form Moments."""

    @abstractmethod
    def sample(self, rng, size=None):
        """Draws from the law with a numpy Generator."""

    def params(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_spec(self):
        return {"family": self.family, **self.params()}

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.family}({args})"

    def logpmf(self, x):
        x = np.asarray(x)
        inside = (x >= self.lower_support) & (x <= self.upper_support) & (np.floor(x) == x)
        safe_x = np.where(inside, x, self.lower_support).astype(float)
        return np.where(inside, self._logpmf(safe_x), -np.inf)

    def pmf(self, x):
        return safe_exp(self.logpmf(x))

    def cdf(self, x):
        return np.clip(1.0 - self.survival(np.asarray(x) + 1), 0.0, 1.0)

    def survival(self, k):
        """Pr(X >= k), computed from a cumulative PMF table when no closed form exists."""
        k = np.asarray(k)
        top = int(np.max(k)) - 1 if k.size else -1
        if top < 0:
            return np.ones(k.shape)
        if self.is_finite:
            top = min(top, int(self.upper_support))
        below = np.cumsum(self.pmf(np.arange(top + 1)))
        # Forward laws evaluate this at float points.
        index = np.clip(k - 1, 0, top).astype(np.int64)
        result = np.where(k <= 0, 1.0, 1.0 - below[index])
        return np.clip(result, 0.0, 1.0)

    def truncation_point(self, tail=None):
        """
        Smallest x with Pr(X > x) < tail; the support maximum for finite laws.
        """
        if self.is_finite:
            return int(self.upper_support)
        tail = sampling_setting("TAIL_MASS") if tail is None else tail
        top = 64
        while float(self.survival(top + 1)) >= tail:
            top *= 2
        xs = np.arange(top + 1)
        point = int(np.argmax(self.survival(xs + 1) < tail))
        logger.debug("truncation dist=%s tail=%g point=%d", self, tail, point)
        return point

    def expect(self, func, tail=MOMENT_TAIL):
        """E[func(X)] by summation over the (truncated) support."""
        xs = np.arange(self.truncation_point(tail) + 1)
        return math.fsum(np.asarray(func(xs), dtype=float) * self.pmf(xs))

    def _draw_by_inversion(self, rng, size):
        table = _inversion_table(self)
        u = rng.random(size) * table[-1]
        draws = np.searchsorted(table, u, side="right")
        return int(draws) if size is None else draws.astype(np.int64)


@lru_cache(maxsize=256)
def _inversion_table(dist):
    xs = np.arange(dist.truncation_point() + 1)
    return np.cumsum(dist.pmf(xs))


def _shape(value, size):
    return int(value) if size is None else np.asarray(value, dtype=np.int64)


@dataclass(frozen=True)
class Bernoulli(DiscreteDist):
    p: float
    family = "bernoulli"

    def validate(self):
        self._set("p", _as_probability("p", self.p))

    @property
    def upper_support(self):
        return 1

    def _logpmf(self, x):
        return special.xlogy(x, self.p) + special.xlog1py(1 - x, -self.p)

    def survival(self, k):
        k = np.asarray(k)
        return np.where(k <= 0, 1.0, np.where(k == 1, self.p, 0.0))

    def mean_var(self):
        return Moments(self.p, self.p * (1 - self.p))

    def sample(self, rng, size=None):
        return _shape(rng.binomial(1, self.p, size), size)


@dataclass(frozen=True)
class Binomial(DiscreteDist):
    n: int
    p: float
    family = "binomial"

    def validate(self):
        self._set("n", _as_integer("n", self.n))
        self._set("p", _as_probability("p", self.p))

    @property
    def upper_support(self):
        return self.n

    def _logpmf(self, x):
        return log_binom(self.n, x) + special.xlogy(x, self.p) + special.xlog1py(self.n - x, -self.p)

    def survival(self, k):
        # Pr(X >= k) = I_p(k, n - k + 1) for 1 <= k <= n.
        k = np.asarray(k)
        inner = np.clip(k, 1, max(self.n, 1)).astype(float)
        tail = special.betainc(inner, self.n - inner + 1, self.p)
        return np.where(k <= 0, 1.0, np.where(k > self.n, 0.0, tail))

    def mean_var(self):
        return Moments(self.n * self.p, self.n * self.p * (1 - self.p))

    def sample(self, rng, size=None):
        return _shape(rng.binomial(self.n, self.p, size), size)


@dataclass(frozen=True)
class Geometric(DiscreteDist):
    """Number of failures before the first success: p (1 - p)^x."""

    p: float
    family = "geometric"

    def validate(self):
        self._set("p", _as_probability("p", self.p, open_low=True))

    @property
    def upper_support(self):
        return 0 if self.p == 1 else math.inf

    def _logpmf(self, x):
        return math.log(self.p) + special.xlog1py(x, -self.p)

    def survival(self, k):
        k = np.asarray(k)
        return np.power(1 - self.p, np.maximum(k, 0))

    def mean_var(self):
        q = 1 - self.p
        return Moments(q / self.p, q / self.p**2)

    def sample(self, rng, size=None):
        return _shape(rng.geometric(self.p, size) - 1, size)


@dataclass(frozen=True)
class NegBinomial(DiscreteDist):
    """Gamma(r + x) / (x! Gamma(r)) p^r (1 - p)^x, real r > 0."""

    r: float
    p: float
    family = "neg_binomial"

    def validate(self):
        self._set("r", _as_positive("r", self.r))
        self._set("p", _as_probability("p", self.p, open_low=True))

    @property
    def upper_support(self):
        return 0 if self.p == 1 else math.inf

    def _logpmf(self, x):
        return log_rising(self.r, x) + self.r * math.log(self.p) + special.xlog1py(x, -self.p)

    def survival(self, k):
        # Pr(X >= k) = I_{1-p}(k, r) for k >= 1.
        k = np.asarray(k)
        inner = np.maximum(k, 1).astype(float)
        return np.where(k <= 0, 1.0, special.betainc(inner, self.r, 1 - self.p))

    def mean_var(self):
        q = 1 - self.p
        return Moments(self.r * q / self.p, self.r * q / self.p**2)

    def sample(self, rng, size=None):
        return _shape(rng.negative_binomial(self.r, self.p, size), size)


@dataclass(frozen=True)
class Poisson(DiscreteDist):
    lam: float
    family = "poisson"

    def validate(self):
        self._set("lam", _as_positive("lambda", self.lam))

    @property
    def upper_support(self):
        return math.inf

    def _logpmf(self, x):
        return special.xlogy(x, self.lam) - self.lam - special.gammaln(x + 1)

    def survival(self, k):
        # Pr(X >= k) = gamma(k, lambda) / (k - 1)!, the regularized lower gamma.
        k = np.asarray(k)
        inner = np.maximum(k, 1).astype(float)
        return np.where(k <= 0, 1.0, special.gammainc(inner, self.lam))

    def mean_var(self):
        return Moments(self.lam, self.lam)

    def sample(self, rng, size=None):
        return _shape(rng.poisson(self.lam, size), size)

    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class Hypergeometric(DiscreteDist):
    """Successes among m draws without replacement from R items of which r are successes."""

    m: int
    r: int
    R: int
    family = "hypergeometric"

    def validate(self):
        self._set("m", _as_integer("m", self.m))
        self._set("r", _as_integer("r", self.r))
        self._set("R", _as_integer("R", self.R))
        if self.m > self.R or self.r > self.R:
            raise ParameterDomainError(f"hypergeometric needs m, r <= R, got m={self.m} r={self.r} R={self.R}")

    @property
    def lower_support(self):
        return max(0, self.m + self.r - self.R)

    @property
    def upper_support(self):
        return min(self.m, self.r)

    def _logpmf(self, x):
        return log_binom(self.r, x) + log_binom(self.R - self.r, self.m - x) - log_binom(self.R, self.m)

    def mean_var(self):
        if self.R <= 1:
            return Moments(self.m * self.r / max(self.R, 1), 0.0)
        share = self.r / self.R
        return Moments(
            self.m * share,
            self.m * share * (1 - share) * (self.R - self.m) / (self.R - 1),
        )

    def sample(self, rng, size=None):
        if self.m == 0 or self.r == 0:
            return _shape(np.zeros(size, dtype=np.int64) if size is not None else 0, size)
        if self.r == self.R:
            return _shape(np.full(size, self.m) if size is not None else self.m, size)
        return _shape(rng.hypergeometric(self.r, self.R - self.r, self.m, size), size)


@dataclass(frozen=True)
class NegHypergeometric(DiscreteDist):
    """
    Marginal of the multivariate negative hypergeometric law (beta-binomial).

    Real parameters r > 0 and R - r > 0; support {0, ..., m}.
    """

    m: int
    r: float
    R: float
    family = "neg_hypergeometric"

    def validate(self):
        self._set("m", _as_integer("m", self.m))
        self._set("r", _as_positive("r", self.r))
        self._set("R", float(self.R))
        if not self.R - self.r > 0:
            raise ParameterDomainError(f"negative hypergeometric needs R > r, got r={self.r} R={self.R}")

    @property
    def upper_support(self):
        return self.m

    def _logpmf(self, x):
        rest = self.R - self.r
        return (
            log_rising(self.r, x)
            + log_rising(rest, self.m - x)
            - log_rising(self.R, self.m)
        )

    def mean_var(self):
        share = self.r / self.R
        return Moments(
            self.m * share,
            self.m * share * (1 - share) * (self.R + self.m) / (self.R + 1),
        )

    def sample(self, rng, size=None):
        # Inversion on the log-PMF; r is real so no urn scheme applies.
        return self._draw_by_inversion(rng, size)


@dataclass(frozen=True)
class Uniform(DiscreteDist):
    """Uniform law on {0, ..., a}."""

    a: int
    family = "uniform"

    def validate(self):
        self._set("a", _as_integer("a", self.a))

    @property
    def upper_support(self):
        return self.a

    def _logpmf(self, x):
        return np.full(np.shape(x), -math.log(self.a + 1))

    def survival(self, k):
        k = np.asarray(k)
        return np.clip((self.a + 1 - np.maximum(k, 0)) / (self.a + 1), 0.0, 1.0)

    def mean_var(self):
        return Moments(self.a / 2, ((self.a + 1) ** 2 - 1) / 12)

    def sample(self, rng, size=None):
        return _shape(rng.integers(0, self.a + 1, size), size)


@dataclass(frozen=True)
class Degenerate(DiscreteDist):
    """Point mass at c; the spacing law of systematic designs."""

    c: int
    family = "degenerate"

    def validate(self):
        self._set("c", _as_integer("c", self.c))

    @property
    def lower_support(self):
        return self.c

    @property
    def upper_support(self):
        return self.c

    def _logpmf(self, x):
        return np.zeros(np.shape(x))

    def survival(self, k):
        return np.where(np.asarray(k) <= self.c, 1.0, 0.0)

    def mean_var(self):
        return Moments(float(self.c), 0.0)

    def sample(self, rng, size=None):
        return _shape(np.full(size, self.c) if size is not None else self.c, size)


@dataclass(frozen=True)
class ForwardOf(DiscreteDist):
    """
    Forward transform X_F of ``inner``: Pr(X_F = k) = Pr(X >= k) / E(X + 1).

    With the closed-form survival functions of the inner families this gives
    the Forward Bernoulli, Binomial (incomplete beta), Negative Binomial
    (incomplete beta) and Poisson (incomplete gamma) laws directly.
    """

    inner: DiscreteDist
    family = "forward"

    def validate(self):
        if not isinstance(self.inner, DiscreteDist):
            raise ParameterDomainError(f"forward transform needs a distribution, got {self.inner!r}")
        if not math.isfinite(self.inner.mean_var().mean):
            raise UnsupportedError(f"forward transform of {self.inner} needs a finite mean")

    @property
    def upper_support(self):
        return self.inner.upper_support

    def _logpmf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.inner.survival(x)) - math.log1p(self.inner.mean_var().mean)

    def mean_var(self):
        first = faulhaber_moment(self.inner, 1)
        second = faulhaber_moment(self.inner, 2)
        return Moments(first, second - first**2)

    def sample(self, rng, size=None):
        return self._draw_by_inversion(rng, size)

    def to_spec(self):
        return {"family": self.family, "of": self.inner.to_spec()}

    def __str__(self):
        return f"forward({self.inner})"


FAMILIES = {
    cls.family: cls
    for cls in (
        Bernoulli,
        Binomial,
        Geometric,
        NegBinomial,
        Poisson,
        Hypergeometric,
        NegHypergeometric,
        Uniform,
        Degenerate,
        ForwardOf,
    )
}


# ==============================================================================
# Public operations
# ==============================================================================


def _scalar_or_array(values, x):
    return float(values) if np.ndim(x) == 0 else values


def pmf(d, x):
    """Pr(X = x); 0 outside the support."""
    return _scalar_or_array(d.pmf(x), x)


def logpmf(d, x):
    return _scalar_or_array(d.logpmf(x), x)


def cdf(d, x):
    """Pr(X <= x)."""
    return _scalar_or_array(d.cdf(x), x)


def survival(d, k):
    """Pr(X >= k)."""
    return _scalar_or_array(d.survival(k), k)


def mean_var(d):
    return d.mean_var()


def truncation_point(d, tail=None):
    return d.truncation_point(tail)


def forward(d):
    """
    Returns the forward transform of ``d``.

    The geometric law is its own forward transform and the point mass at
    r - 1 maps to the uniform law on {0, ..., r - 1}; every other law is
    wrapped in ForwardOf.
    """
    if isinstance(d, Geometric):
        return d
    if isinstance(d, Degenerate):
        return Uniform(d.c)
    return ForwardOf(d)


def faulhaber_moment(d, order):
    """
    E(X_F^m) = E[F_m(X)] / E(X + 1) for the forward transform X_F of ``d``.
    """
    if order not in (1, 2):
        raise UnsupportedError(f"Faulhaber moments are implemented for orders 1 and 2, got {order}")
    mean = d.mean_var().mean
    if not math.isfinite(mean):
        raise UnsupportedError(f"{d} has no finite mean")
    return d.expect(lambda xs: faulhaber(xs, order)) / (1 + mean)


def sample(d, rng, size=None):
    return d.sample(rng, size)
