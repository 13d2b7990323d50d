"""Great-circle distances on a spherical Earth."""

from __future__ import annotations

import numpy as np

EARTH_RADIUS_MILES = 3958.7613
FEET_PER_MILE = 5280.0


def haversine_miles(lon1, lat1, lon2, lat2):
    """Great-circle distance in miles; accepts scalars or broadcastable arrays (degrees)."""
    lon1, lat1, lon2, lat2 = map(np.radians, (lon1, lat1, lon2, lat2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    d = 2.0 * EARTH_RADIUS_MILES * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    if np.ndim(d) == 0:
        return float(d)
    return d


def feet_to_miles(feet: float) -> float:
    return feet / FEET_PER_MILE
