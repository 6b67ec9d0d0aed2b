"""Geodesic and planar geometry primitives.

Distances are haversine great circles on a sphere of mean radius
6371.0088 km; one-way latency divides by the signal speed in fiber
(200,000 km/s, roughly 2c/3, overridable). Zone membership is planar
even-odd point-in-polygon on lon/lat degrees with the boundary counting
as inside; polygons crossing the antimeridian must be pre-split in the
source data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import NoBoundary

if TYPE_CHECKING:
    from .grid_model import WasgRegion

EARTH_RADIUS_KM = 6371.0088
FIBER_KM_PER_SEC = 200_000.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat!r} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon!r} outside [-180, 180]")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in kilometers.

    Exactly 0 for identical points, with lon -180 and 180 identified.
    """
    if a.lat == b.lat and (a.lon == b.lon or abs(a.lon - b.lon) == 360.0):
        return 0.0
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    # Clamp guards asin against rounding slightly above 1 near antipodes.
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def latency_ms(a: GeoPoint, b: GeoPoint, fiber_km_per_sec: float = FIBER_KM_PER_SEC) -> float:
    """One-way propagation delay in milliseconds along a straight fiber path."""
    return haversine_km(a, b) / fiber_km_per_sec * 1000.0


def pairwise_latency_ms(
    rows: Sequence[GeoPoint],
    cols: Sequence[GeoPoint],
    fiber_km_per_sec: float = FIBER_KM_PER_SEC,
) -> np.ndarray:
    """len(rows) x len(cols) matrix of one-way latencies in milliseconds."""
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)))
    rlat = np.radians([p.lat for p in rows])[:, None]
    rlon = np.radians([p.lon for p in rows])[:, None]
    clat = np.radians([p.lat for p in cols])[None, :]
    clon = np.radians([p.lon for p in cols])[None, :]
    h = np.sin((clat - rlat) / 2.0) ** 2 + np.cos(rlat) * np.cos(clat) * np.sin((clon - rlon) / 2.0) ** 2
    km = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))
    return km / fiber_km_per_sec * 1000.0


def _on_segment(x: float, y: float, x1: float, y1: float, x2: float, y2: float) -> bool:
    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    if cross != 0.0:
        return False
    return min(x1, x2) <= x <= max(x1, x2) and min(y1, y2) <= y <= max(y1, y2)


def _ring_edges(ring):
    for i in range(len(ring) - 1):
        yield ring[i], ring[i + 1]


def _point_in_polygon(x: float, y: float, polygon) -> bool:
    """Even-odd containment across all rings; boundary points count as inside."""
    for ring in polygon:
        for (x1, y1), (x2, y2) in _ring_edges(ring):
            if _on_segment(x, y, x1, y1, x2, y2):
                return True
    inside = False
    for ring in polygon:
        for (x1, y1), (x2, y2) in _ring_edges(ring):
            if (y1 > y) != (y2 > y):
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if xi > x:
                    inside = not inside
    return inside


def point_in_region(p: GeoPoint, region: "WasgRegion") -> bool:
    """True iff the point lies inside or on the boundary of any region polygon.

    Raises:
        NoBoundary: if the region carries no polygons.
    """
    if not region.boundary:
        raise NoBoundary(f"region {region.id!r} has no boundary polygons")
    return any(_point_in_polygon(p.lon, p.lat, polygon) for polygon in region.boundary)


def band_overlap(region: "WasgRegion", threshold_deg: float) -> bool:
    """True iff any part of the region boundary reaches poleward of the threshold.

    Tangency counts: a vertex exactly at +-threshold_deg is an overlap. Both
    the north and south bands are tested, matching a storm belt that is
    symmetric about the equator.

    Raises:
        NoBoundary: if the region carries no polygons.
        ValueError: if the threshold is outside (0, 90).
    """
    if not 0.0 < threshold_deg < 90.0:
        raise ValueError(f"threshold_deg {threshold_deg!r} outside (0, 90)")
    if not region.boundary:
        raise NoBoundary(f"region {region.id!r} has no boundary polygons")
    t = threshold_deg
    for polygon in region.boundary:
        for ring in polygon:
            for _, lat in ring:
                if lat >= t or lat <= -t:
                    return True
            # Edges straddling either band parallel count as overlap too.
            for (_, y1), (_, y2) in _ring_edges(ring):
                if min(y1, y2) <= t <= max(y1, y2) or min(y1, y2) <= -t <= max(y1, y2):
                    return True
    return False
