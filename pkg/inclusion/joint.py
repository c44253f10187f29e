import logging
from dataclasses import dataclass

import numpy as np

from designs.core import CircularDesign, EquilibriumRenewalDesign, RenewalDesign
from spread_sampling.exceptions import ParameterDomainError, UnsupportedError

from .fixed_size import fixed_conditional
from .renewal import pi_first_equilibrium, pi_first_renewal, renewal_conditional

logger = logging.getLogger(__name__)


def delta(pi_k, pi_l, pi_kl):
    """
    Delta_kl = pi_kl - pi_k pi_l.

    On the diagonal pass pi_kl = pi_k, which gives pi_k (1 - pi_k).
    """
    return pi_kl - pi_k * pi_l


@dataclass(frozen=True)
class JointProbMatrix:
    """
    First- and second-order inclusion probabilities of a design.

    Fields:
    - pi: pi_k for k = 1..N (array index k - 1).
    - conditional: Pr(k + g in S | k in S) for g = 0..N-1 (1 at g = 0).
      For circular designs the gap is taken modulo N.
    - circular: whether ``conditional`` wraps around the population.

    For k < l, pi_kl = pi_k conditional[l - k]; the full N x N matrix is never
    stored.
    """

    pi: np.ndarray
    conditional: np.ndarray
    circular: bool = False

    @property
    def N(self):
        return len(self.pi)

    @property
    def fixed_size(self):
        # Only the circular designs have a fixed sample size.
        return self.circular

    def _check_unit(self, k):
        if not 1 <= k <= self.N:
            raise ParameterDomainError(f"unit index must lie in 1..{self.N}, got {k}")

    def joint(self, k, l):
        """pi_kl for 1-based units; pi_kk = pi_k."""
        self._check_unit(k)
        self._check_unit(l)
        lo, hi = min(k, l), max(k, l)
        return float(self.pi[lo - 1] * self.conditional[hi - lo])

    def pikl(self, gap, k=1):
        """pi_{k,k+gap}; circular gaps wrap modulo N."""
        if self.circular:
            return self.joint(k, (k - 1 + gap) % self.N + 1)
        return self.joint(k, k + gap)

    def delta(self, k, l):
        return delta(self.pi[k - 1], self.pi[l - 1], self.joint(k, l))

    def submatrix(self, units):
        """
        (pi_s, pikl_s) for the 1-based ``units``: pi_s[i] = pi of units[i] and
        pikl_s[i, j] = pi of the pair, with pi_k on the diagonal.
        """
        units = np.asarray(units, dtype=np.int64)
        if units.size and (units.min() < 1 or units.max() > self.N):
            raise ParameterDomainError(f"unit indexes must lie in 1..{self.N}")
        pi_s = self.pi[units - 1]
        lo = np.minimum(units[:, None], units[None, :])
        hi = np.maximum(units[:, None], units[None, :])
        pikl_s = self.pi[lo - 1] * self.conditional[hi - lo]
        return pi_s, pikl_s

    def curve(self, k=1):
        """Rows (gap, pi_{k,k+gap}, Delta) for every gap reachable from unit k."""
        self._check_unit(k)
        last = self.N - 1 if self.circular else self.N - k
        rows = []
        for gap in range(1, last + 1):
            l = (k - 1 + gap) % self.N + 1 if self.circular else k + gap
            joint = self.joint(k, l)
            rows.append((gap, joint, delta(float(self.pi[k - 1]), float(self.pi[l - 1]), joint)))
        return rows

    def null_gaps(self):
        """Gaps g >= 1 with a zero conditional probability."""
        return [int(g) for g in np.flatnonzero(self.conditional[1:] == 0) + 1]


def joint_matrix(design, method="closed"):
    """Builds the JointProbMatrix of any design kind."""
    N = design.N
    if isinstance(design, CircularDesign):
        pi = np.full(N, design.n / N)
        conditional = fixed_conditional(design.spacings, method)
        matrix = JointProbMatrix(pi, conditional, circular=True)
    elif isinstance(design, EquilibriumRenewalDesign):
        pi = pi_first_equilibrium(design.jump, N)
        matrix = JointProbMatrix(pi, renewal_conditional(design.jump, N - 1, method))
    elif isinstance(design, RenewalDesign):
        pi = pi_first_renewal(design.jump, N)
        matrix = JointProbMatrix(pi, renewal_conditional(design.jump, N - 1, method))
    else:
        raise UnsupportedError(f"no inclusion probabilities for {design!r}")

    null = matrix.null_gaps()
    if null:
        logger.warning("design=%r null_joint_gaps=%d first_null_gap=%d", design.label, len(null), null[0])
    return matrix
