"""Seed-derived random generators.

One root seed plus an integer path identifies every stream in the package,
so parallel workers draw from independent generators and results never
depend on scheduling order.
"""

from __future__ import annotations

import numpy as np


def derive_rng(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by ``path`` under ``root_seed``.

    Same (root_seed, path) always yields the same stream; distinct paths
    yield statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(k) for k in path))
    return np.random.default_rng(ss)


def fresh_seed() -> int:
    """Draw a root seed from OS entropy (used when the caller gave none)."""
    return int(np.random.SeedSequence().entropy % (2**63))
