"""
Log-space combinatorics shared by the univariate and multivariate laws.

Binomial coefficients overflow for populations in the thousands, so every
PMF in the project is assembled from log-gamma terms and exponentiated once.
"""
import numpy as np
from scipy import special


def log_binom(n, k):
    """log C(n, k), with -inf wherever the coefficient is zero (k < 0 or k > n)."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (n >= 0) & (k >= 0) & (k <= n)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return np.where(valid, values, -np.inf)


def log_rising(r, x):
    """log of Gamma(r + x) / (Gamma(r) x!), the negative-binomial coefficient for real r > 0."""
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    valid = x >= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        values = special.gammaln(r + x) - special.gammaln(r) - special.gammaln(x + 1)
    return np.where(valid, values, -np.inf)


def faulhaber(x, order):
    """F_m(x) = sum_{k=0}^{x} k^m for m in {1, 2}."""
    x = np.asarray(x, dtype=float)
    if order == 1:
        return x * (x + 1) / 2
    if order == 2:
        return x * (x + 1) * (2 * x + 1) / 6
    raise ValueError(f"Faulhaber polynomial of order {order} is not implemented")


def safe_exp(log_values):
    """Exponentiates log-probabilities, mapping -inf to an exact 0."""
    log_values = np.asarray(log_values, dtype=float)
    with np.errstate(under="ignore"):
        return np.where(np.isneginf(log_values), 0.0, np.exp(log_values))
