"""Deterministic random streams.

All randomness flows through counter-based Philox generators keyed by a
master seed plus a structured stream key (typically a trial index, possibly
with a stage tag).  Streams are independent of thread count by
construction: stream identity depends only on the key, never on scheduling.
"""

from __future__ import annotations

import numpy as np

_STAGE_TAGS = {"trial": 0, "faces": 1, "interior": 2, "path": 3, "config": 4}


def _normalize(part) -> int:
    if isinstance(part, str):
        try:
            return _STAGE_TAGS[part]
        except KeyError:
            raise ValueError(f"unknown stream tag {part!r}") from None
    return int(part)


def trial_generator(*key) -> np.random.Generator:
    """Philox generator for the stream identified by ``key``.

    ``key`` is (master_seed, index, ...) with optional string stage tags;
    e.g. ``trial_generator(seed, "faces", attempt)``.
    """
    entropy = tuple(_normalize(p) for p in key)
    ss = np.random.SeedSequence(entropy)
    return np.random.Generator(np.random.Philox(seed=ss))
