"""
Inclusion probabilities of renewal chain designs.

With f the law of a jump J on {1, 2, ...} and f^{j*} its j-fold convolution,
a simple renewal chain selects unit k with probability
u(k) = sum_{j=1}^{k} f^{j*}(k), and the joint probability of k < l is
pi_k u(l - k). The equilibrium chain has pi_k = 1 / E(J) for every k.

Every function takes ``jump``, the law of J - 1, and shifts it internally.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from dists.distributions import (
    Bernoulli,
    Binomial,
    Degenerate,
    Geometric,
    NegBinomial,
    Poisson,
    forward,
)
from dists.special import log_binom, log_rising, safe_exp
from spread_sampling.conf import sampling_setting
from spread_sampling.exceptions import ConsistencyError, ParameterDomainError

logger = logging.getLogger(__name__)

METHODS = ("closed", "generic")


def jump_pmf(jump, k_max):
    """Array f with f[k] = Pr(J = k) for k = 0..k_max (f[0] = 0)."""
    f = np.zeros(k_max + 1)
    if k_max >= 1:
        f[1:] = jump.pmf(np.arange(k_max))
    return f


@dataclass(frozen=True)
class ConvolutionTable:
    """
    values[j, k] = f^{j*}(k), the probability that j i.i.d. jumps sum to k.

    Row 0 is the point mass at 0; rows j >= 1 vanish for k < j. Columns stop
    at k_max, so a row sums to at most 1.
    """

    values: np.ndarray

    @property
    def j_max(self):
        return self.values.shape[0] - 1

    @property
    def k_max(self):
        return self.values.shape[1] - 1

    def __getitem__(self, index):
        return self.values[index]

    def renewal_sums(self):
        """u(k) = sum_{j>=1} f^{j*}(k) for k = 0..k_max (u(0) = 0 here)."""
        return self.values[1:].sum(axis=0)


def convolution_table(f, j_max):
    """Iterated discrete convolutions of the jump table ``f`` (f[0] must be 0)."""
    f = np.asarray(f, dtype=float)
    k_max = len(f) - 1
    values = np.zeros((j_max + 1, k_max + 1))
    values[0, 0] = 1.0
    for j in range(1, j_max + 1):
        values[j] = np.convolve(values[j - 1], f)[: k_max + 1]
    return ConvolutionTable(values)


def convolve(jump, j_max, k_max):
    """Convolution table of the jump J = 1 + X with X ~ ``jump``."""
    return convolution_table(jump_pmf(jump, k_max), j_max)


def renewal_sequence(f, k_max):
    """
    u(0) = 1 and u(k) = sum_{t=1}^{k} f(t) u(k - t), the renewal recursion.

    For k >= 1, u(k) = sum_j f^{j*}(k) without building the convolution table.
    """
    f = np.asarray(f, dtype=float)
    if len(f) < k_max + 1:
        f = np.pad(f, (0, k_max + 1 - len(f)))
    u = np.zeros(k_max + 1)
    u[0] = 1.0
    for k in range(1, k_max + 1):
        u[k] = np.dot(f[1 : k + 1], u[k - 1 :: -1])
    return u


# ==============================================================================
# Closed forms of sum_j f^{j*}(g)
# ==============================================================================


def _closed_terms(jump, gap):
    """log f^{j*}(gap) for j = 1..gap, or None when the family has no closed form."""
    j = np.arange(1, gap + 1, dtype=float)
    x = gap - j
    if isinstance(jump, (NegBinomial, Geometric)):
        # The sum of j shifted NB(r, p) jumps is j + NB(j r, p).
        r = jump.r if isinstance(jump, NegBinomial) else 1.0
        return log_rising(j * r, x) + j * r * math.log(jump.p) + special.xlog1py(x, -jump.p)
    if isinstance(jump, Poisson):
        lam = j * jump.lam
        return -lam + special.xlogy(x, lam) - special.gammaln(x + 1)
    if isinstance(jump, (Binomial, Bernoulli)):
        trials = jump.n if isinstance(jump, Binomial) else 1
        # j + Bin(j r, p): the exponent of (1 - p) is j r - (gap - j).
        inside = x <= j * trials
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = log_binom(j * trials, x) + special.xlogy(x, jump.p) + special.xlog1py(j * trials - x, -jump.p)
        # Past j r trials; at p = 1 these read -inf + inf.
        return np.where(inside, terms, -np.inf)
    return None


def renewal_conditional(jump, max_gap, method="closed"):
    """
    Pr(k + g in S | k in S) = sum_{j=1}^{g} f^{j*}(g) for g = 0..max_gap (1 at g = 0).

    ``closed`` sums the closed-form convolution laws of the negative binomial,
    Poisson, binomial and systematic families; other families, and
    ``generic``, sum the convolution table.
    """
    if method not in METHODS:
        raise ParameterDomainError(f"unknown method {method!r}, expected one of {', '.join(METHODS)}")
    u = np.zeros(max_gap + 1)
    u[0] = 1.0
    if max_gap == 0:
        return u

    if method == "closed" and isinstance(jump, Degenerate):
        gaps = np.arange(1, max_gap + 1)
        u[1:] = (gaps % (jump.c + 1) == 0).astype(float)
        return u

    if method == "closed" and _closed_terms(jump, 1) is not None:
        for gap in range(1, max_gap + 1):
            u[gap] = math.fsum(safe_exp(_closed_terms(jump, gap)))
        return u

    if method == "closed":
        logger.debug("no closed form jump=%s, using convolution sums", jump)
    table = convolve(jump, max_gap, max_gap)
    u[1:] = table.renewal_sums()[1:]
    return u


# ==============================================================================
# Public operations
# ==============================================================================


def pi_first_renewal(jump, N):
    """pi_k = sum_{j=1}^{k} f^{j*}(k) for k = 1..N (index 0 holds unit 1)."""
    return convolve(jump, N, N).renewal_sums()[1:]


def pi_first_equilibrium(jump, N):
    """
    pi_k = f0(k) + sum_{t=1}^{k} f0(k - t) sum_{j=1}^{t} f^{j*}(t), with f0 the
    law of J0 = 1 + X_F.

    Raises ConsistencyError when the result is not flat at 1 / E(J).
    """
    f0 = jump_pmf(forward(jump), N)
    u = np.concatenate([[1.0], pi_first_renewal(jump, N)])
    pi = np.convolve(f0, u)[1 : N + 1]

    rate = 1 / (1 + jump.mean_var().mean)
    deviation = float(np.max(np.abs(pi - rate))) if N else 0.0
    tolerance = sampling_setting("FLATNESS_TOLERANCE")
    if deviation > tolerance:
        raise ConsistencyError(
            f"equilibrium inclusion probabilities of {jump} deviate from {rate:.12g} by {deviation:.3g} "
            f"(tolerance {tolerance:g})"
        )
    logger.debug("flatness jump=%s N=%d max_deviation=%.3g", jump, N, deviation)
    return pi


def pi_joint_renewal(jump, rate, k, l, method="closed"):
    """pi_kl = rate * sum_{j=1}^{l-k} f^{j*}(l - k) for units k < l."""
    if not k < l:
        raise ParameterDomainError(f"joint probability needs k < l, got k={k} l={l}")
    gap = int(l) - int(k)
    return rate * renewal_conditional(jump, gap, method)[gap]


def pi_joint_renewal_curve(jump, rate, max_gap, method="closed"):
    """pi_{k,k+g} for g = 1..max_gap."""
    return rate * renewal_conditional(jump, max_gap, method)[1:]
