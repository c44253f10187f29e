"""
Seeded random streams.

Every stream is a ``numpy.random.Generator`` built from a ``SeedSequence``
whose spawn key encodes where the stream is used, so that replicates can be
drawn in any order and still give bit-identical results.
"""
import numpy as np

POPULATION_STREAM = 0
DESIGN_STREAM_OFFSET = 1


def make_rng(seed, *keys):
    """
    Returns a Generator for ``seed`` and the counter path ``keys``.

    ``make_rng(7)`` and ``make_rng(7, 3, 12)`` are independent streams; the
    same arguments always give the same stream.
    """
    if seed is None:
        raise ValueError("a seed is required; wall-clock seeding is not supported")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))


def provenance(seed, *keys):
    """Returns the JSON-friendly description of a stream, stored on every draw."""
    return [int(seed), *[int(k) for k in keys]]
