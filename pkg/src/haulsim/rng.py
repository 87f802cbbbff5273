"""Deterministic per-entity random substreams.

Every stochastic consumer (each road's jam sampler, each truck's and
shovel's hazard sampler, the dispatch policy) draws from its own
``random.Random`` seeded from (run seed, entity tag).  Adding or removing
one entity therefore never perturbs the draws of any other, and runs are
reproducible across processes: string seeding in CPython hashes the seed
with SHA-512, independent of PYTHONHASHSEED.
"""

import random


def substream(seed: int, *tags: str) -> random.Random:
    """Return an independent RNG for (seed, tags).

    The same (seed, tags) always yields the same stream.
    """
    key = str(seed) + "".join(":" + t for t in tags)
    return random.Random(key)
