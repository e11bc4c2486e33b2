"""Seeded random streams.

Every sampler draws from numpy's Philox4x64 counter generator keyed by the
user seed; the top counter word selects the stream, so sample ``k`` of a run
can be regenerated on its own.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(stream)]))
