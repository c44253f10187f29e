"""
Sampling design values and their factories.

Three design kinds share the population U = {1, ..., N}:
- RenewalDesign: units are the partial sums J1, J1 + J2, ... of i.i.d.
  positive jumps that land in U (random sample size).
- EquilibriumRenewalDesign: the same chain started from a delay J0 drawn
  from the forward transform of the jump law, so every unit has inclusion
  probability equal to the rate.
- CircularDesign: fixed size n, exchangeable circular spacings summing to N
  and a uniform random start.

``jump`` always holds the law of J - 1 on the non-negative integers.
"""
import logging
import math
from dataclasses import dataclass

from dists.distributions import (
    Binomial,
    Degenerate,
    DiscreteDist,
    Geometric,
    NegBinomial,
    Poisson,
)
from spacing_vectors.vectors import (
    Multinomial,
    MultivariateHypergeometric,
    MultivariateNegHypergeometric,
    SpacingVectorDist,
)
from spread_sampling.exceptions import ParameterDomainError, UnsupportedError

logger = logging.getLogger(__name__)


def _population_size(N):
    if isinstance(N, bool) or not float(N).is_integer() or int(N) < 1:
        raise ParameterDomainError(f"population size N must be a positive integer, got {N!r}")
    return int(N)


def _as_rate(rate):
    rate = float(rate)
    if not 0 < rate <= 1:
        raise ParameterDomainError(f"sampling rate must lie in (0, 1], got {rate!r}")
    return rate


class Design:
    """Common surface of the design kinds: ``kind``, ``N``, ``rate`` and ``label``."""

    kind = ""
    fixed_size = False

    @property
    def rate(self):
        raise NotImplementedError


@dataclass(frozen=True)
class RenewalDesign(Design):
    jump: DiscreteDist
    N: int
    kind = "renewal"

    def __post_init__(self):
        if not isinstance(self.jump, DiscreteDist):
            raise ParameterDomainError(f"jump must be a distribution, got {self.jump!r}")
        mean = self.jump.mean_var().mean
        if not math.isfinite(mean):
            raise UnsupportedError(f"jump law {self.jump} has no finite mean")
        object.__setattr__(self, "N", _population_size(self.N))

    @property
    def rate(self):
        return 1 / (1 + self.jump.mean_var().mean)

    @property
    def label(self):
        return f"{self.kind} {self.jump}"


@dataclass(frozen=True)
class EquilibriumRenewalDesign(RenewalDesign):
    kind = "equilibrium"


@dataclass(frozen=True)
class CircularDesign(Design):
    spacings: SpacingVectorDist
    N: int
    n: int
    kind = "circular"
    fixed_size = True

    def __post_init__(self):
        N = _population_size(self.N)
        if isinstance(self.n, bool) or not float(self.n).is_integer() or not 1 <= self.n <= N:
            raise ParameterDomainError(f"circular design needs 1 <= n <= N, got n={self.n!r} N={N}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "n", int(self.n))
        if not isinstance(self.spacings, SpacingVectorDist):
            raise ParameterDomainError(f"spacings must be a spacing vector law, got {self.spacings!r}")
        if (self.spacings.m, self.spacings.n) != (N - self.n, self.n):
            raise ParameterDomainError(
                f"spacings must have dimension {self.n} and total {N - self.n}, "
                f"got dimension {self.spacings.n} and total {self.spacings.m}"
            )

    @property
    def rate(self):
        return self.n / self.N

    @property
    def label(self):
        s = self.spacings
        if s.family == "mnh":
            return f"MNH r={s.r:g}" + (" (SRS)" if s.r == 1 else "")
        if s.family == "mnom":
            return "MULT"
        return f"MH r={s.r}"


# ==============================================================================
# Factories
# ==============================================================================


def bernoulli(N, rate):
    """Bernoulli sampling: geometric jumps with an equilibrium start."""
    return EquilibriumRenewalDesign(Geometric(_as_rate(rate)), N)


def systematic(N, r):
    """Systematic sampling with step r and a uniform random start in {1, ..., r}."""
    if isinstance(r, bool) or not float(r).is_integer() or r < 1:
        raise ParameterDomainError(f"systematic step must be a positive integer, got {r!r}")
    return EquilibriumRenewalDesign(Degenerate(int(r) - 1), N)


def jump_for_rate(family, rate, r=None):
    """
    Returns the law of J - 1 in ``family`` whose jumps have mean 1 / rate.

    ``r`` is the shape of the negative binomial or the number of trials of
    the binomial; the binomial default is the smallest admissible value,
    ceil((1 - rate) / rate).
    """
    rate = _as_rate(rate)
    excess = (1 - rate) / rate
    if family == "geometric":
        return Geometric(rate)
    if family == "neg_binomial":
        if r is None:
            raise ParameterDomainError("neg_binomial jumps need a shape r")
        r = float(r)
        if not r > 0:
            raise ParameterDomainError(f"neg_binomial shape r must be positive, got {r!r}")
        return NegBinomial(r, r * rate / (r * rate + 1 - rate))
    if family == "poisson":
        if rate == 1:
            raise ParameterDomainError("poisson jumps need a rate below 1")
        return Poisson(excess)
    if family == "binomial":
        if rate == 1:
            raise ParameterDomainError("binomial jumps need a rate below 1")
        trials = max(1, math.ceil(excess - 1e-9)) if r is None else r
        if isinstance(trials, bool) or not float(trials).is_integer():
            raise ParameterDomainError(f"binomial jumps need an integer number of trials, got {trials!r}")
        trials = int(trials)
        if trials < excess - 1e-9:
            raise ParameterDomainError(
                f"binomial jumps with rate {rate:g} need at least {math.ceil(excess - 1e-9)} trials, got {trials}"
            )
        return Binomial(trials, min(1.0, excess / trials))
    if family == "degenerate":
        step = round(1 / rate)
        if abs(step * rate - 1) > 1e-9:
            raise ParameterDomainError(f"systematic jumps need 1/rate to be an integer, got rate {rate!r}")
        return Degenerate(step - 1)
    raise ParameterDomainError(f"no rate parametrisation for jump family {family!r}")


def renewal_with_rate(family, N, rate, r=None, equilibrium=True):
    jump = jump_for_rate(family, rate, r)
    logger.debug("renewal design family=%s rate=%g jump=%s equilibrium=%s", family, rate, jump, equilibrium)
    cls = EquilibriumRenewalDesign if equilibrium else RenewalDesign
    return cls(jump, N)


def mnh(N, n, r):
    return CircularDesign(MultivariateNegHypergeometric(N - n, n, r), N, n)


def srs(N, n):
    """Simple random sampling without replacement: MNH spacings with r = 1."""
    return mnh(N, n, 1.0)


def multinomial(N, n):
    return CircularDesign(Multinomial(N - n, n), N, n)


def mh(N, n, r):
    return CircularDesign(MultivariateHypergeometric(N - n, n, r), N, n)


def systematic_fixed(N, n):
    """Fixed-size systematic design; needs (N - n) / n to be an integer."""
    if N % n:
        raise ParameterDomainError(f"fixed-size systematic design needs n to divide N, got N={N} n={n}")
    return mh(N, n, (N - n) // n)


# ==============================================================================
# Spacing variances
# ==============================================================================


def spacing_variance(design):
    """var(J) of one spacing; the lower it is, the more spread the samples."""
    if isinstance(design, CircularDesign):
        return design.spacings.table_variance()
    return design.jump.mean_var().variance


def min_spacing_variance(rate):
    """Smallest variance of a positive integer jump with mean 1 / rate."""
    mu = 1 / _as_rate(rate)
    return (math.ceil(mu) - mu) * (mu - math.floor(mu))
