"""
Drawing samples from designs and evaluating circular design PMFs.

Unit indexes are 1-based. Every draw takes a caller-owned numpy Generator;
``seed`` is only recorded on the SampleDraw for provenance.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from dists.distributions import forward
from spread_sampling.exceptions import ParameterDomainError, UnsupportedError

from .core import CircularDesign, EquilibriumRenewalDesign, RenewalDesign

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleDraw:
    """
    One realised sample.

    Fields:
    - units: strictly increasing unit indexes in {1, ..., N}.
    - spacings: the realised jumps, starting with the first selected index.
      Circular draws hold (J0, J1, ..., Jn); renewal draws hold the jumps up
      to the last selected unit and are empty for an empty sample.
    - seed: stream provenance ([seed, *keys]) or None.
    """

    units: tuple
    spacings: tuple = ()
    seed: tuple = field(default=None, compare=False)

    def __post_init__(self):
        units = tuple(int(u) for u in self.units)
        if any(b <= a for a, b in zip(units, units[1:])):
            raise ParameterDomainError(f"sample units must be strictly increasing, got {list(units)}")
        if units and units[0] < 1:
            raise ParameterDomainError(f"sample units are 1-based, got {units[0]}")
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "spacings", tuple(int(j) for j in self.spacings))
        if self.seed is not None:
            object.__setattr__(self, "seed", tuple(int(s) for s in self.seed))

    @property
    def size(self):
        return len(self.units)

    def to_dict(self):
        return {
            "units": list(self.units),
            "spacings": list(self.spacings),
            "seed": None if self.seed is None else list(self.seed),
        }


def _chain(design, first, rng, seed):
    """Extends a renewal chain started at ``first`` until it leaves {1, ..., N}."""
    N = design.N
    if first > N:
        return SampleDraw((), (), seed)

    units = [first]
    spacings = [first]
    position = first
    mean_jump = 1 + design.jump.mean_var().mean
    while True:
        batch = int(math.ceil((N - position + 1) / mean_jump)) + 8
        steps = 1 + np.asarray(design.jump.sample(rng, batch), dtype=np.int64)
        path = position + np.cumsum(steps)
        # Jumps are positive, so the units inside U form a prefix of the path.
        count = int(np.count_nonzero(path <= N))
        units.extend(path[:count].tolist())
        spacings.extend(steps[:count].tolist())
        if count < batch:
            break
        position = int(path[-1])
    return SampleDraw(units, spacings, seed)


def draw_renewal(design, rng, seed=None):
    """Simple renewal chain: J1 = 1 + X is the first selected index."""
    first = 1 + int(design.jump.sample(rng))
    return _chain(design, first, rng, seed)


def draw_equilibrium(design, rng, seed=None):
    """
    Equilibrium renewal chain: the first index J0 = 1 + X_F with X_F drawn
    from the forward transform of the jump law on its whole support. A J0
    beyond N gives an empty sample.
    """
    first = 1 + int(forward(design.jump).sample(rng))
    return _chain(design, first, rng, seed)


def draw_circular(design, rng, seed=None, method="conditional"):
    """
    Fixed-size circular draw: J0 uniform on {1, ..., N}, spacings 1 + X with
    X from the spacing law, units J0 + J1 + ... + Jj reduced modulo N with
    residue 0 read as unit N.
    """
    N = design.N
    start = int(rng.integers(1, N + 1))
    jumps = 1 + np.asarray(design.spacings.sample_vector(rng, method), dtype=np.int64)
    positions = start + np.cumsum(jumps)
    units = np.sort((positions - 1) % N + 1)
    return SampleDraw(units.tolist(), (start, *jumps.tolist()), seed)


def draw(design, rng, seed=None, method="conditional"):
    """Dispatches on the design kind."""
    if isinstance(design, CircularDesign):
        return draw_circular(design, rng, seed, method)
    if isinstance(design, EquilibriumRenewalDesign):
        return draw_equilibrium(design, rng, seed)
    if isinstance(design, RenewalDesign):
        return draw_renewal(design, rng, seed)
    raise UnsupportedError(f"cannot draw from {design!r}")


def circular_spacings(N, units):
    """Shifted circular spacings (x2 - x1 - 1, ..., N + x1 - xn - 1) of sorted units."""
    x = np.asarray(units, dtype=np.int64)
    gaps = np.diff(x) - 1
    return np.append(gaps, N + x[0] - x[-1] - 1)


def check_units(N, units, size=None):
    """Validates a sorted list of distinct 1-based indexes (and its size when given)."""
    units = [int(u) for u in units]
    if size is not None and len(units) != size:
        raise ParameterDomainError(f"sample must hold {size} units, got {len(units)}")
    if not units or units[0] < 1 or units[-1] > N:
        raise ParameterDomainError(f"units must lie in 1..{N}, got {units}")
    if any(b <= a for a, b in zip(units, units[1:])):
        raise ParameterDomainError(f"units must be sorted and distinct, got {units}")
    return units


def design_pmf(design, units):
    """
    P(s) = (n / N) Pr(J - 1 = circular spacings of s) for a circular design.

    Every rotation of s is reached from exactly one of its n units, hence the
    factor n / N.
    """
    if not isinstance(design, CircularDesign):
        raise UnsupportedError("design_pmf is defined for circular designs; use the renewal enumeration instead")
    units = check_units(design.N, units, design.n)
    vector = circular_spacings(design.N, units)
    return design.n / design.N * design.spacings.pmf_vector(vector)


def draw_circular_batch(design, rng, size):
    """``size`` circular draws at once; rows of 1-based sorted units, shape (size, n)."""
    N = design.N
    starts = rng.integers(1, N + 1, size)
    jumps = 1 + design.spacings.sample_vectors(rng, size)
    positions = starts[:, None] + np.cumsum(jumps, axis=1)
    return np.sort((positions - 1) % N + 1, axis=1)


def design_log_pmfs(design, subsets):
    """log P(s) for every row of ``subsets`` (sorted 1-based units of a circular design)."""
    subsets = np.asarray(subsets, dtype=np.int64)
    gaps = np.diff(subsets, axis=1) - 1
    wrap = design.N + subsets[:, :1] - subsets[:, -1:] - 1
    vectors = np.concatenate([gaps, wrap], axis=1)
    return math.log(design.n / design.N) + design.spacings.log_pmf_vectors(vectors)
