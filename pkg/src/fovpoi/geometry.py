"""Planar geodetic primitives, the FoV type and FoV bounding rectangles.

All distances use a local equirectangular projection with a fixed
111,320 m per degree of latitude. Longitude offsets are scaled by the
cosine of the mid latitude of the two points involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

M_PER_DEG_LAT = 111_320.0

# Relative inflation applied to FoV bounding rectangles so that rounding in
# the distance/bearing evaluation can never put a nonzero contribution
# outside the rectangle.
_MBR_INFLATE = 1e-9


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates: ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True)
class Mbr:
    """Upright (axis-aligned) rectangle in degrees, closed on all sides."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if not (self.lat_min <= self.lat_max and self.lon_min <= self.lon_max):
            raise ValueError(f"inverted rectangle: {self}")

    def contains(self, q: GeoPoint) -> bool:
        return (self.lat_min <= q.lat <= self.lat_max
                and self.lon_min <= q.lon <= self.lon_max)

    def intersection(self, other: Mbr) -> Mbr | None:
        if not mbr_intersects(self, other):
            return None
        return Mbr(max(self.lat_min, other.lat_min), min(self.lat_max, other.lat_max),
                   max(self.lon_min, other.lon_min), min(self.lon_max, other.lon_max))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lat_min, self.lat_max, self.lon_min, self.lon_max)


@dataclass(frozen=True)
class FoV:
    """One tagged scene: camera point ``p``, azimuth ``theta`` (degrees
    clockwise from north), visible distance ``r`` in meters and visible
    angle ``alpha`` in degrees. ``mbr`` is derived and cached."""

    video_id: str
    t: int
    p: GeoPoint
    theta: float
    r: float
    alpha: float
    mbr: Mbr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.theta) and 0.0 <= self.theta < 360.0):
            raise ValueError(f"theta out of [0, 360): {self.theta}")
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError(f"r must be > 0: {self.r}")
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha <= 360.0):
            raise ValueError(f"alpha out of (0, 360]: {self.alpha}")
        box = fov_mbr(self.p, self.theta, self.r, self.alpha)
        if box.lat_min < -90.0 or box.lat_max > 90.0:
            raise ValueError("FoV extends past a pole")
        if box.lon_min < -180.0 or box.lon_max > 180.0:
            raise ValueError("FoV crosses the antimeridian")
        object.__setattr__(self, "mbr", box)

    @property
    def circular(self) -> bool:
        return self.alpha == 360.0


def _offsets(a: GeoPoint, b: GeoPoint) -> tuple[float, float]:
    dy = (b.lat - a.lat) * M_PER_DEG_LAT
    mid = 0.5 * (a.lat + b.lat)
    dx = (b.lon - a.lon) * M_PER_DEG_LAT * math.cos(math.radians(mid))
    return dx, dy


def geo_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Distance in meters on the local equirectangular plane."""
    dx, dy = _offsets(a, b)
    return math.sqrt(dx * dx + dy * dy)


def bearing(src: GeoPoint, dst: GeoPoint) -> float:
    """Bearing from ``src`` to ``dst`` in [0, 360), 0 = north, clockwise.

    Coincident points give 0.
    """
    dx, dy = _offsets(src, dst)
    if dx == 0.0 and dy == 0.0:
        return 0.0
    b = math.degrees(math.atan2(dx, dy)) % 360.0
    return 0.0 if b >= 360.0 else b


def angular_difference(theta: float, b: float) -> float:
    d = abs(theta - b)
    return min(d, 360.0 - d)


def distance_array(lat0, lon0, lat, lon):
    """Vectorized :func:`geo_distance` from (lat0, lon0) to arrays of points."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    dy = (lat - lat0) * M_PER_DEG_LAT
    dx = (lon - lon0) * M_PER_DEG_LAT * np.cos(np.radians(0.5 * (lat + lat0)))
    return np.hypot(dx, dy)


def _span_contains(theta: float, alpha: float, b: float) -> bool:
    return angular_difference(theta, b) <= 0.5 * alpha


def fov_mbr(p: GeoPoint, theta: float, r: float, alpha: float) -> Mbr:
    """Upright bounding rectangle of the pie-shaped FoV region.

    Extremes are taken over the apex, both arc endpoints and every cardinal
    bearing inside the angular span. The longitude extent uses the smallest
    longitude scale found over the latitude band the region covers, which
    keeps the rectangle a superset of the region under mid-latitude
    distance scaling.
    """
    if r == 0.0:
        return Mbr(p.lat, p.lat, p.lon, p.lon)
    if alpha >= 360.0:
        xs = [-r, r]
        ys = [-r, r]
    else:
        xs, ys = [0.0], [0.0]
        for b in (theta - 0.5 * alpha, theta + 0.5 * alpha):
            rad = math.radians(b)
            xs.append(r * math.sin(rad))
            ys.append(r * math.cos(rad))
        for b, (cx, cy) in ((0.0, (0.0, r)), (90.0, (r, 0.0)),
                            (180.0, (0.0, -r)), (270.0, (-r, 0.0))):
            if _span_contains(theta, alpha, b):
                xs.append(cx)
                ys.append(cy)
    grow = 1.0 + _MBR_INFLATE
    x_min, x_max = min(xs) * grow, max(xs) * grow
    y_min, y_max = min(ys) * grow, max(ys) * grow

    lat_min = p.lat + y_min / M_PER_DEG_LAT
    lat_max = p.lat + y_max / M_PER_DEG_LAT
    # mid latitudes between p and any point of the region
    m_lo = math.radians(0.5 * (p.lat + lat_min))
    m_hi = math.radians(0.5 * (p.lat + lat_max))
    c_lo, c_hi = math.cos(m_lo), math.cos(m_hi)
    c_min = min(c_lo, c_hi)
    c_max = 1.0 if m_lo <= 0.0 <= m_hi else max(c_lo, c_hi)

    def to_deg(x: float, outward: bool) -> float:
        # outward: pick the scale that pushes x farther from p
        c = c_min if outward else c_max
        return x / (M_PER_DEG_LAT * c)

    lon_min = p.lon + to_deg(x_min, outward=x_min < 0.0)
    lon_max = p.lon + to_deg(x_max, outward=x_max > 0.0)
    return Mbr(lat_min, lat_max, lon_min, lon_max)


def mbr_intersects(a: Mbr, b: Mbr) -> bool:
    return (a.lat_min <= b.lat_max and b.lat_min <= a.lat_max
            and a.lon_min <= b.lon_max and b.lon_min <= a.lon_max)


def mbr_intersects_array(boxes: np.ndarray, box: Mbr) -> np.ndarray:
    """Vectorized :func:`mbr_intersects` over rows ``lat_min, lat_max, lon_min, lon_max``."""
    lat_min, lat_max, lon_min, lon_max = box.as_tuple()
    return ((boxes[:, 0] <= lat_max) & (boxes[:, 1] >= lat_min)
            & (boxes[:, 2] <= lon_max) & (boxes[:, 3] >= lon_min))


def square_around(center: GeoPoint, half_width: float) -> Mbr:
    """Upright square of ``half_width`` meters centered on ``center``."""
    dlat = half_width / M_PER_DEG_LAT
    dlon = half_width / (M_PER_DEG_LAT * math.cos(math.radians(center.lat)))
    return Mbr(center.lat - dlat, center.lat + dlat, center.lon - dlon, center.lon + dlon)
