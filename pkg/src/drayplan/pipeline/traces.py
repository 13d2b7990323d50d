"""GPS traces to per-step truck profiles.

A trace is split into segments between consecutive samples. Segment speed
is the great-circle distance over the time delta (no map matching). A
qualified stop is a maximal run of segments slower than the threshold that
lasts at least the minimum duration. :func:`downsample` then spreads every
segment over the time grid by interval overlap, assuming constant speed
within the segment, so the total distance and the total stopped time are
preserved exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..domain import TimeGrid, TruckProfile
from ..geo import haversine_miles

log = logging.getLogger(__name__)

KWH_PER_MILE = 2.0
STOP_SPEED_MPH = 0.1
STOP_MINUTES = 30.0
# kg CO2 per mile of a diesel drayage truck (about 10.2 kg per gallon at 6 mpg)
DIESEL_KG_PER_MILE = 1.7


def _to_seconds(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, str):
            out.append(datetime.fromisoformat(v).timestamp())
        elif isinstance(v, datetime):
            out.append(v.timestamp())
        else:
            out.append(float(v))
    return np.asarray(out, dtype=float)


@dataclass(frozen=True, eq=False)
class RawTrace:
    """Timestamps (seconds) and lon/lat samples of one truck."""

    truck_id: str
    time: np.ndarray
    lon: np.ndarray
    lat: np.ndarray

    def __post_init__(self):
        t = _to_seconds(self.time) if not isinstance(self.time, np.ndarray) or self.time.dtype.kind in "OU" \
            else np.asarray(self.time, dtype=float)
        lon = np.asarray(self.lon, dtype=float)
        lat = np.asarray(self.lat, dtype=float)
        if not (t.shape == lon.shape == lat.shape) or t.ndim != 1:
            raise ValueError(f"trace {self.truck_id}: time, lon and lat must be 1-D and equally long")
        if t.size and np.any(np.diff(t) <= 0):
            k = int(np.flatnonzero(np.diff(t) <= 0)[0])
            raise ValueError(f"trace {self.truck_id}: timestamps not strictly increasing at sample {k + 1}")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "lon", lon)
        object.__setattr__(self, "lat", lat)

    @property
    def duration_minutes(self) -> float:
        return float(self.time[-1] - self.time[0]) / 60.0 if self.time.size else 0.0

    def segment_miles(self) -> np.ndarray:
        if self.time.size < 2:
            return np.zeros(0)
        return np.asarray(haversine_miles(self.lon[:-1], self.lat[:-1], self.lon[1:], self.lat[1:]), dtype=float)


@dataclass(frozen=True, eq=False)
class LabeledTrace:
    """A trace with one stop/trip label per segment.

    ``segment_stop[k]`` refers to the interval between samples ``k`` and
    ``k + 1``. ``sample_stop[k]`` is true when sample ``k`` touches a
    qualified-stop segment.
    """

    trace: RawTrace
    segment_miles: np.ndarray
    segment_stop: np.ndarray
    gap: np.ndarray

    @property
    def sample_stop(self) -> np.ndarray:
        out = np.zeros(self.trace.time.size, dtype=bool)
        out[:-1] |= self.segment_stop
        out[1:] |= self.segment_stop
        return out

    @property
    def total_miles(self) -> float:
        return float(self.segment_miles.sum())

    @property
    def stop_minutes(self) -> float:
        dt = np.diff(self.trace.time) / 60.0
        return float(dt[self.segment_stop].sum())

    def stops(self) -> list:
        """``(start_s, end_s, lon, lat)`` of every qualified stop, in time order."""
        out = []
        for a, b in _runs(self.segment_stop):
            t = self.trace.time
            out.append((float(t[a]), float(t[b]), float(self.trace.lon[a]), float(self.trace.lat[a])))
        return out

    def longest_stop(self) -> Optional[Tuple[float, float]]:
        """Location of the longest qualified stop (the presumed depot), or None."""
        stops = self.stops()
        if not stops:
            return None
        best = max(stops, key=lambda s: (s[1] - s[0], -s[0]))
        return best[2], best[3]


def _runs(mask: np.ndarray):
    """Half-open ``(start, end)`` sample ranges of the true runs in a segment mask."""
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2], edges[1::2]))


def classify_stops(trace: RawTrace, speed_thresh: float = STOP_SPEED_MPH, min_duration: float = STOP_MINUTES,
                   max_gap_minutes: Optional[float] = None) -> LabeledTrace:
    """Label each segment as qualified stop or trip.

    Parameters
    ----------
    speed_thresh
        mph; a segment is stationary when its speed is strictly below it.
    min_duration
        minutes; shorter stationary runs stay trip.
    max_gap_minutes
        Segments longer than this are sampling gaps and count as stationary
        whatever their apparent speed. ``None`` disables gap handling.
    """
    miles = trace.segment_miles()
    dt_h = np.diff(trace.time) / 3600.0
    gap = np.zeros(miles.size, dtype=bool)
    if max_gap_minutes is not None:
        gap = dt_h * 60.0 > max_gap_minutes
    if trace.duration_minutes < min_duration:
        return LabeledTrace(trace, miles, np.zeros(miles.size, dtype=bool), gap)
    slow = (miles / dt_h < speed_thresh) | gap
    stop = np.zeros(miles.size, dtype=bool)
    for a, b in _runs(slow):
        if dt_h[a:b].sum() * 60.0 >= min_duration - 1e-9:
            stop[a:b] = True
    return LabeledTrace(trace, miles, stop, gap)


def _overlap(a0: float, a1: float, edges: np.ndarray) -> np.ndarray:
    """Length of ``[a0, a1]`` inside every bin ``[edges[k], edges[k + 1]]``."""
    return np.clip(np.minimum(edges[1:], a1) - np.maximum(edges[:-1], a0), 0.0, None)


def downsample(labeled: LabeledTrace, grid: TimeGrid, start: Union[float, str, datetime] = None,
               kwh_per_mile: float = KWH_PER_MILE, diesel_kg_per_mile: float = DIESEL_KG_PER_MILE) -> TruckProfile:
    """Aggregate a labeled trace onto ``grid`` starting at ``start`` (seconds or ISO time).

    ``start`` defaults to the first sample. Distance outside the grid window
    is dropped; a trace covering the whole window keeps its total distance
    and stopped time. Segments longer than one step are sampling gaps: they
    are treated as stationary, their distance is booked in the last step
    the gap overlaps, and a warning is logged.
    """
    tr = labeled.trace
    t0 = float(tr.time[0]) if start is None else float(_to_seconds([start])[0])
    step_s = grid.step_hours * 3600.0
    edges = t0 + step_s * np.arange(grid.step_count + 1)
    stop_s = np.zeros(grid.step_count)
    miles = np.zeros(grid.step_count)
    n_gaps = 0
    for k in range(labeled.segment_miles.size):
        a, b = tr.time[k], tr.time[k + 1]
        ov = _overlap(a, b, edges)
        dur = b - a
        is_gap = labeled.gap[k] or dur > step_s + 1e-9
        if is_gap:
            n_gaps += 1
            # book the distance in the last step the gap overlaps, so a gap that
            # ends a hair past the window (float summation) is not lost
            inside = np.flatnonzero(ov > 0)
            if inside.size:
                miles[inside[-1]] += labeled.segment_miles[k]
            stop_s += ov if labeled.segment_stop[k] or labeled.gap[k] else 0.0
            continue
        miles += labeled.segment_miles[k] * ov / dur
        if labeled.segment_stop[k]:
            stop_s += ov
    if n_gaps:
        log.warning("truck %s: %d sampling gap(s) longer than one step filled as stationary", tr.truck_id, n_gaps)
    mid = 0.5 * (edges[:-1] + edges[1:])
    position = np.column_stack([np.interp(mid, tr.time, tr.lon), np.interp(mid, tr.time, tr.lat)])
    stop_fraction = np.clip(stop_s / step_s, 0.0, 1.0)
    return TruckProfile(
        tr.truck_id,
        stop_fraction,
        miles * kwh_per_mile,
        float(miles.sum() * diesel_kg_per_mile),
        position,
    )


def profile_miles(profile: TruckProfile, kwh_per_mile: float = KWH_PER_MILE) -> float:
    return float(profile.consumption.sum() / kwh_per_mile)
