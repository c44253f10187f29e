"""
Exchangeable integer vectors of dimension n summing to m.

They are the laws of the shifted circular spacings J - 1_n of fixed-size
designs: multivariate negative hypergeometric (MNH), multinomial with equal
cell probabilities (MNom) and multivariate hypergeometric (MH). Only the
exchangeable parametrisations (one shared r) are supported.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields

import numpy as np
from scipy import special

from dists.distributions import Binomial, Degenerate, Hypergeometric, NegHypergeometric
from dists.special import log_binom, log_rising
from spread_sampling.exceptions import ParameterDomainError

logger = logging.getLogger(__name__)


def _as_integer(name, value, minimum):
    if isinstance(value, bool) or not float(value).is_integer():
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ParameterDomainError(f"{name} must be >= {minimum}, got {value}")
    return value


class SpacingVectorDist(ABC):
    """
    Base class of the exchangeable spacing laws.

    Fields shared by every family:
    - m: total of the components (N - n for a design).
    - n: dimension (the sample size).
    """

    family = ""

    def __post_init__(self):
        object.__setattr__(self, "m", _as_integer("m", self.m, 0))
        object.__setattr__(self, "n", _as_integer("n", self.n, 1))
        self.validate()

    def validate(self):
        pass

    @abstractmethod
    def _log_pmf(self, x):
        """Log-PMF of validated compositions along the last axis of ``x``."""

    @abstractmethod
    def marginal(self):
        """Law of one component."""

    @abstractmethod
    def _sum_law(self, j):
        """Law of the sum of j < n components."""

    @abstractmethod
    def _conditional(self, remaining, left):
        """Law of the next component given ``remaining`` total over ``left`` components."""

    @abstractmethod
    def sample_vectors(self, rng, size):
        """Batched draws through numpy generators; shape (size, n)."""

    @abstractmethod
    def table_variance(self):
        """Closed-form variance of one shifted spacing J_k = 1 + X_k."""

    def params(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("m", "n")}

    def to_spec(self):
        return {"family": self.family, **self.params()}

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.family}(m={self.m}, n={self.n}{', ' if args else ''}{args})"

    def check_vector(self, x):
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ParameterDomainError(f"{self.family} vector must have length {self.n}, got shape {x.shape}")
        if np.any(x < 0) or np.any(np.floor(x) != x):
            raise ParameterDomainError(f"{self.family} vector must hold non-negative integers, got {x.tolist()}")
        if int(x.sum()) != self.m:
            raise ParameterDomainError(f"{self.family} vector must sum to {self.m}, got {int(x.sum())}")
        return x.astype(np.int64)

    def log_pmf_vector(self, x):
        return float(self._log_pmf(self.check_vector(x)))

    def log_pmf_vectors(self, xs):
        """Log-PMF of every row of ``xs``, an integer array of shape (size, n)."""
        xs = np.asarray(xs)
        if xs.ndim != 2 or xs.shape[1] != self.n:
            raise ParameterDomainError(f"{self.family} vectors must have shape (size, {self.n}), got {xs.shape}")
        if np.any(xs < 0) or np.any(xs.sum(axis=1) != self.m):
            raise ParameterDomainError(f"{self.family} vectors must hold non-negative integers summing to {self.m}")
        return np.asarray(self._log_pmf(xs.astype(np.int64)), dtype=float) * np.ones(len(xs))

    def pmf_vector(self, x):
        value = self.log_pmf_vector(x)
        return 0.0 if math.isinf(value) else math.exp(value)

    def sum_distribution(self, j):
        """Law of the sum of any j components, 1 <= j <= n."""
        if not 1 <= j <= self.n:
            raise ParameterDomainError(f"sum of j components needs 1 <= j <= {self.n}, got {j}")
        if j == self.n:
            return Degenerate(self.m)
        return self._sum_law(j)

    def sample_vector(self, rng, method="conditional"):
        """
        One draw of the spacing vector.

        ``conditional`` draws component i from its exact law given the
        remaining total and takes the remainder as the last component;
        ``direct`` uses the batched numpy representation.
        """
        if method == "direct":
            return self.sample_vectors(rng, 1)[0]
        if method != "conditional":
            raise ParameterDomainError(f"unknown sampling method {method!r}")
        vector = np.empty(self.n, dtype=np.int64)
        remaining = self.m
        for i in range(self.n - 1):
            draw = self._conditional(remaining, self.n - i).sample(rng) if remaining else 0
            vector[i] = draw
            remaining -= draw
        vector[-1] = remaining
        return vector


@dataclass(frozen=True)
class MultivariateNegHypergeometric(SpacingVectorDist):
    """MNH(m, r 1_n); r = 1 gives the uniform law on compositions (simple random sampling)."""

    m: int
    n: int
    r: float
    family = "mnh"

    def validate(self):
        r = float(self.r)
        if not (r > 0 and math.isfinite(r)):
            raise ParameterDomainError(f"mnh needs r > 0, got {self.r!r}")
        object.__setattr__(self, "r", r)

    def _log_pmf(self, x):
        return np.sum(log_rising(self.r, x), axis=-1) - log_rising(self.n * self.r, self.m)

    def marginal(self):
        return self.sum_distribution(1)

    def _sum_law(self, j):
        return NegHypergeometric(self.m, j * self.r, self.n * self.r)

    def _conditional(self, remaining, left):
        if left == 1:
            return Degenerate(remaining)
        return NegHypergeometric(remaining, self.r, left * self.r)

    def sample_vectors(self, rng, size):
        # Polya representation: Dirichlet(r 1_n) cell probabilities, then multinomial counts.
        cells = rng.dirichlet(np.full(self.n, self.r), size)
        return rng.multinomial(self.m, cells).astype(np.int64)

    def table_variance(self):
        m, n, r = self.m, self.n, self.r
        return m / n * (1 - 1 / n) * (r * n + m) / (r * n + 1)


@dataclass(frozen=True)
class Multinomial(SpacingVectorDist):
    """Multinomial with m trials and n equiprobable cells; the r -> infinity limit of MNH."""

    m: int
    n: int
    family = "mnom"

    def _log_pmf(self, x):
        return (
            special.gammaln(self.m + 1)
            - np.sum(special.gammaln(x + 1.0), axis=-1)
            - self.m * math.log(self.n)
        )

    def marginal(self):
        return self.sum_distribution(1)

    def _sum_law(self, j):
        return Binomial(self.m, j / self.n)

    def _conditional(self, remaining, left):
        return Binomial(remaining, 1 / left)

    def sample_vectors(self, rng, size):
        return rng.multinomial(self.m, np.full(self.n, 1 / self.n), size).astype(np.int64)

    def table_variance(self):
        return self.m / self.n * (1 - 1 / self.n)


@dataclass(frozen=True)
class MultivariateHypergeometric(SpacingVectorDist):
    """MH(m, r 1_n) with integer r and n r >= m; n r == m gives a single point."""

    m: int
    n: int
    r: int
    family = "mh"

    def validate(self):
        if isinstance(self.r, bool) or not float(self.r).is_integer():
            raise ParameterDomainError(
                f"mh needs an integer r (it enters binomial coefficients), got {self.r!r}"
            )
        object.__setattr__(self, "r", _as_integer("r", self.r, 0))
        if self.n * self.r < self.m:
            raise ParameterDomainError(
                f"mh needs n*r >= m for a non-empty support, got n={self.n} r={self.r} m={self.m}"
            )

    def _log_pmf(self, x):
        return np.sum(log_binom(self.r, x), axis=-1) - log_binom(self.n * self.r, self.m)

    def marginal(self):
        return self.sum_distribution(1)

    def _sum_law(self, j):
        return Hypergeometric(self.m, j * self.r, self.n * self.r)

    def _conditional(self, remaining, left):
        return Hypergeometric(remaining, self.r, left * self.r)

    def sample_vectors(self, rng, size):
        if self.m == 0:
            return np.zeros((size, self.n), dtype=np.int64)
        colors = np.full(self.n, self.r, dtype=np.int64)
        return rng.multivariate_hypergeometric(colors, self.m, size).astype(np.int64)

    def table_variance(self):
        m, n, r = self.m, self.n, self.r
        if r * n <= 1:
            return 0.0
        return m / n * (1 - 1 / n) * (r * n - m) / (r * n - 1)


SPACING_FAMILIES = {
    cls.family: cls
    for cls in (MultivariateNegHypergeometric, Multinomial, MultivariateHypergeometric)
}


def compositions(m, n):
    """Yields every vector of n non-negative integers summing to m (lexicographic)."""
    if n == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in compositions(m - first, n - 1):
            yield (first, *rest)


# ==============================================================================
# Public operations
# ==============================================================================


def pmf_vector(d, x):
    return d.pmf_vector(x)


def sample_vector(d, rng, method="conditional"):
    return d.sample_vector(rng, method)


def sample_vectors(d, rng, size):
    return d.sample_vectors(rng, size)


def marginal(d):
    return d.marginal()


def sum_distribution(d, j):
    return d.sum_distribution(j)


def spacing_variance(d):
    """Variance of one spacing J_k = 1 + X_k from the closed-form table."""
    return d.table_variance()
