"""
Exhaustive enumeration of small designs.

Circular designs are enumerated subset by subset; renewal designs either
through the renewal decomposition of pi_k and pi_kl or, for small N, by
listing every chain that stays in U together with its probability.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from designs.core import CircularDesign, EquilibriumRenewalDesign, RenewalDesign
from designs.draws import design_log_pmfs
from dists.distributions import forward
from dists.special import safe_exp
from inclusion.joint import joint_matrix
from spread_sampling.conf import sampling_setting
from spread_sampling.exceptions import GuardExceededError, UnsupportedError

logger = logging.getLogger(__name__)

BATCH = 1 << 15


@dataclass(frozen=True)
class DesignEnumeration:
    """
    Exact first- and second-order inclusion probabilities of a design.

    Fields:
    - entries: (subset, probability) for every subset with positive mass, or
      an empty list when subsets were not listed.
    - pi: pi_k for k = 1..N.
    - pikl: N x N matrix of pi_kl with pi_k on the diagonal.
    - total_mass: sum of the probabilities of all outcomes.
    - evaluated: number of subsets whose probability was computed.
    """

    entries: list
    pi: np.ndarray
    pikl: np.ndarray
    total_mass: float
    evaluated: int = 0
    index: dict = field(default=None, repr=False, compare=False)

    @property
    def N(self):
        return len(self.pi)

    def probability(self, units):
        if self.index is None:
            object.__setattr__(self, "index", dict(self.entries))
        return self.index.get(tuple(int(u) for u in units), 0.0)

    def gap_profile(self):
        """For each gap g = 1..N-1, the spread of pi_{k, k+g mod N} over k."""
        N = self.N
        units = np.arange(N)
        return [
            float(np.ptp(self.pikl[units, (units + gap) % N]))
            for gap in range(1, N)
        ]


def colex_subsets(N, n):
    """Yields the n-subsets of {1, ..., N} in colexicographic order."""
    if n == 0 or n > N:
        return
    c = list(range(1, n + 1)) + [N + 1]
    while True:
        yield tuple(c[:n])
        i = 0
        while i < n and c[i] + 1 == c[i + 1]:
            i += 1
        if i == n:
            return
        c[i] += 1
        c[:i] = range(1, i + 1)


def _accumulate(pi, pikl, subsets, probs):
    n = subsets.shape[1]
    index = subsets - 1
    np.add.at(pi, index, probs[:, None])
    for a in range(n):
        for b in range(a + 1, n):
            np.add.at(pikl, (index[:, a], index[:, b]), probs)


def _finish(pikl, pi):
    pikl = pikl + pikl.T
    np.fill_diagonal(pikl, pi)
    return pikl


def enumerate_circular(design):
    """Evaluates the design PMF on every n-subset of {1, ..., N}."""
    if not isinstance(design, CircularDesign):
        raise UnsupportedError("enumerate_circular needs a circular design")
    N, n = design.N, design.n
    count = math.comb(N, n)
    guard = sampling_setting("ENUMERATION_GUARD")
    if count > guard:
        raise GuardExceededError(f"C({N}, {n}) = {count} subsets exceed the enumeration guard {guard}")

    pi = np.zeros(N)
    pikl = np.zeros((N, N))
    entries = []
    masses = []
    subsets = colex_subsets(N, n)
    while True:
        batch = np.array(list(itertools.islice(subsets, BATCH)), dtype=np.int64).reshape(-1, n)
        if not len(batch):
            break
        probs = safe_exp(design_log_pmfs(design, batch))
        positive = probs > 0
        batch, probs = batch[positive], probs[positive]
        _accumulate(pi, pikl, batch, probs)
        entries.extend(zip(map(tuple, batch.tolist()), probs.tolist()))
        masses.extend(probs.tolist())

    total = math.fsum(masses)
    logger.debug("enumerated design=%r subsets=%d positive=%d total_mass=%.15g", design.label, count, len(entries), total)
    return DesignEnumeration(entries, pi, _finish(pikl, pi), total, count)


def _first_law(design):
    return forward(design.jump) if isinstance(design, EquilibriumRenewalDesign) else design.jump


def _listed_chains(design):
    """Every subset reachable by the chain, with first-unit law x jump PMFs x survival past N."""
    N = design.N
    first = _first_law(design).pmf(np.arange(N))
    step = design.jump.pmf(np.arange(N))
    # Pr(J >= N - k + 1), the chain leaves U after unit k.
    leave = design.jump.survival(N - np.arange(N + 1))
    entries = []
    empty = float(_first_law(design).survival(N))
    if empty > 0:
        entries.append(((), empty))
    stack = [((k,), float(first[k - 1])) for k in range(N, 0, -1) if first[k - 1] > 0]
    while stack:
        units, prob = stack.pop()
        last = units[-1]
        end = prob * float(leave[last])
        if end > 0:
            entries.append((units, end))
        for t in range(N - last, 0, -1):
            if step[t - 1] > 0:
                stack.append(((*units, last + t), prob * float(step[t - 1])))
    return entries


def enumerate_renewal(design, list_subsets=False):
    """
    Exact pi and pi_kl of a renewal design.

    Without ``list_subsets`` they come from the renewal decomposition and
    total_mass = Pr(empty sample) + sum_k pi_k Pr(J >= N - k + 1). With it
    (N up to RENEWAL_ENUMERATION_MAX_N) every chain is listed and the
    probabilities are summed subset by subset.
    """
    if not isinstance(design, RenewalDesign):
        raise UnsupportedError("enumerate_renewal needs a renewal design")
    N = design.N

    if not list_subsets:
        joint = joint_matrix(design)
        pi = np.asarray(joint.pi, dtype=float)
        pikl = joint.submatrix(np.arange(1, N + 1))[1]
        leave = design.jump.survival(N - np.arange(1, N + 1))
        total = math.fsum([float(_first_law(design).survival(N)), *(pi * leave)])
        return DesignEnumeration([], pi, pikl, total)

    limit = sampling_setting("RENEWAL_ENUMERATION_MAX_N")
    if N > limit:
        raise GuardExceededError(f"listing renewal samples needs N <= {limit}, got N={N}")
    entries = _listed_chains(design)
    pi = np.zeros(N)
    pikl = np.zeros((N, N))
    for units, prob in entries:
        if not units:
            continue
        index = np.asarray(units) - 1
        pi[index] += prob
        if len(units) > 1:
            a, b = np.triu_indices(len(units), k=1)
            pikl[index[a], index[b]] += prob
    total = math.fsum(prob for _, prob in entries)
    logger.debug("listed renewal design=%r subsets=%d total_mass=%.15g", design.label, len(entries), total)
    return DesignEnumeration(entries, pi, _finish(pikl, pi), total, len(entries))


def enumerate_design(design, list_subsets=False):
    if isinstance(design, CircularDesign):
        return enumerate_circular(design)
    return enumerate_renewal(design, list_subsets)
