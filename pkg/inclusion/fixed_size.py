"""
Inclusion probabilities of fixed-size designs with exchangeable circular spacings.

f_j(x) is the probability that j successive spacings sum to x, i.e. the law
of j + K_j with K_j = sum_distribution(spacings, j). Given k in S, unit
k + g (mod N) is selected with probability c(g) = sum_{j=1}^{g} f_j(g), so
with a uniform start pi_kl = (n / N) c(l - k mod N).
"""
import logging
import math

import numpy as np
from scipy import special

from dists.special import log_binom, safe_exp
from spread_sampling.conf import sampling_setting
from spread_sampling.exceptions import ConsistencyError, ParameterDomainError, UnsupportedError

from .renewal import METHODS

logger = logging.getLogger(__name__)


def _check_dimensions(spacings, N, n):
    if (spacings.m, spacings.n) != (N - n, n):
        raise ParameterDomainError(
            f"{spacings} does not describe a design with N={N} and n={n}"
        )


def spacing_sum_table(spacings):
    """
    Array f of shape (n + 1, N + 1) with f[j, x] = f_j(x), for 1 <= j <= n and
    0 <= x <= N; row 0 is unused. f[n, N] = 1 since all spacings sum to N.
    """
    n = spacings.n
    N = spacings.m + n
    table = np.zeros((n + 1, N + 1))
    xs = np.arange(N + 1)
    for j in range(1, n + 1):
        table[j] = spacings.sum_distribution(j).pmf(xs - j)
    return table


def _closed_terms(spacings, gap):
    """log f_j(gap) over the j in 1..min(gap, n - 1) with gap - j <= N - n."""
    n, m = spacings.n, spacings.m
    j = np.arange(max(1, gap - m), min(gap, n - 1) + 1, dtype=float)
    x = gap - j
    if spacings.family == "mnh":
        r = spacings.r
        # C(N-n, g-j) B(g + j(r-1), N + n(r-1) - g - j(r-1)) / B(jr, nr - jr)
        return (
            log_binom(m, x)
            + special.betaln(x + j * r, m - x + (n - j) * r)
            - special.betaln(j * r, (n - j) * r)
        )
    if spacings.family == "mnom":
        share = j / n
        return log_binom(m, x) + special.xlogy(x, share) + special.xlog1py(m - x, -share)
    if spacings.family == "mh":
        r = spacings.r
        return log_binom(j * r, x) + log_binom((n - j) * r, m - x) - log_binom(n * r, m)
    raise UnsupportedError(f"no closed form for {spacings.family} spacings")


def fixed_conditional(spacings, method="closed"):
    """
    c(g) = Pr(k + g mod N in S | k in S) for g = 0..N-1, with c(0) = 1.

    ``closed`` uses the per-family forms (a constant (n-1)/(N-1) for simple
    random sampling); ``generic`` sums the sum_distribution PMFs.
    """
    if method not in METHODS:
        raise ParameterDomainError(f"unknown method {method!r}, expected one of {', '.join(METHODS)}")
    n = spacings.n
    N = spacings.m + n
    c = np.zeros(N)
    c[0] = 1.0
    if n == 1 or N == 1:
        return c

    if method == "closed" and spacings.family == "mnh" and spacings.r == 1:
        c[1:] = (n - 1) / (N - 1)
        return c

    if method == "closed":
        for gap in range(1, N):
            c[gap] = math.fsum(safe_exp(_closed_terms(spacings, gap)))
        return c

    table = spacing_sum_table(spacings)
    # f_n(g) = 0 for g < N, so row n never contributes.
    c[1:] = table[1:n, 1:N].sum(axis=0)
    return c


def pi_joint_fixed(spacings, N, n, gap, method="closed"):
    """pi_kl = (n / N) sum_{j=1}^{gap} f_j(gap) for l - k = gap (mod N)."""
    _check_dimensions(spacings, N, n)
    if not 1 <= gap <= N - 1:
        raise ParameterDomainError(f"gap must lie in 1..{N - 1}, got {gap}")
    return n / N * fixed_conditional(spacings, method)[gap]


def pi_joint_fixed_curve(spacings, N, n, method="closed"):
    """pi_{k,k+g} for g = 1..N-1."""
    _check_dimensions(spacings, N, n)
    return n / N * fixed_conditional(spacings, method)[1:]


def matrix_A(f_table, N, n):
    """
    The N x N matrix with a_kt = 1 if t = k, and otherwise
    sum_{j=1}^{d} f_j(d) with d = k - t (mod N); pi = A f0 for a start law f0.
    """
    f_table = np.asarray(f_table, dtype=float)
    if f_table.shape != (n + 1, N + 1):
        raise ParameterDomainError(f"f_j table must have shape {(n + 1, N + 1)}, got {f_table.shape}")
    # Row j vanishes below x = j, so the column sum is sum_{j <= d} f_j(d).
    conditional = f_table[1:].sum(axis=0)
    units = np.arange(1, N + 1)
    d = (units[:, None] - units[None, :]) % N
    return np.where(d == 0, 1.0, conditional[d])


def matrix_A_rowsums(f_table, N, n):
    """
    Row sums of A; all of them equal n.

    Raises ConsistencyError when a row sum deviates from n by more than the
    ROWSUM_TOLERANCE setting.
    """
    sums = matrix_A(f_table, N, n).sum(axis=1)
    deviation = float(np.max(np.abs(sums - n)))
    tolerance = sampling_setting("ROWSUM_TOLERANCE")
    if deviation > tolerance:
        raise ConsistencyError(
            f"rows of A sum to {n} up to {deviation:.3g}, above tolerance {tolerance:g}"
        )
    logger.debug("matrix A N=%d n=%d max_rowsum_deviation=%.3g", N, n, deviation)
    return sums


def pi_first_circular(spacings, f0=None):
    """pi = A f0; a uniform f0 (the default) gives n / N for every unit."""
    n = spacings.n
    N = spacings.m + n
    f0 = np.full(N, 1 / N) if f0 is None else np.asarray(f0, dtype=float)
    if f0.shape != (N,) or np.any(f0 < 0) or not math.isclose(f0.sum(), 1.0, abs_tol=1e-12):
        raise ParameterDomainError(f"start law must be a probability vector of length {N}")
    return matrix_A(spacing_sum_table(spacings), N, n) @ f0
