"""Fleet scaling by replicating observed truck profiles."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..domain import TruckProfile

FACTOR_RANGE = (0.95, 1.05)


def copy_id(base: str, copy: int) -> str:
    """Copy 0 keeps the original id; later copies get a ``#n`` suffix."""
    return base if copy == 0 else f"{base}#{copy}"


def replicate_fleet(profiles: Sequence[TruckProfile], copies: int,
                    factor_range: Tuple[float, float] = FACTOR_RANGE, seed: int = 0) -> List[TruckProfile]:
    """Duplicate every profile ``copies`` times with a random consumption factor.

    Each copy's consumption is multiplied by its own uniform draw from
    ``factor_range``. Stops, positions and diesel emissions are copied
    unchanged. Draws are taken profile by profile, copy by copy, from one
    generator seeded with ``seed``, so the output depends only on the
    inputs.
    """
    if copies < 1:
        raise ValueError(f"copies must be at least 1, got {copies}")
    lo, hi = map(float, factor_range)
    if lo > hi or lo < 0:
        raise ValueError(f"invalid factor range {factor_range}")
    rng = np.random.default_rng(seed)
    factors = rng.uniform(lo, hi, size=(len(profiles), copies))
    out = []
    for p, row in zip(profiles, factors):
        for c, f in enumerate(row):
            out.append(TruckProfile(copy_id(p.id, c), p.stop_fraction, p.consumption * f,
                                    p.diesel_emission, p.position))
    return out
