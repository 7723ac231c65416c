"""Local tangent-plane geometry on a spherical Earth.

Everything here works on the equirectangular approximation around an anchor
point, which is accurate enough for macrocell-scale distances (tens of km).
Bearings are compass bearings: clockwise from true north, 0 = north, 90 = east.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
MAX_SEPARATION_M = 100_000.0


class OutOfRangeError(ValueError):
    """Raised when two points are too far apart for the local projection."""


def wrap_lon(lon_deg: float) -> float:
    """Normalize a longitude to [-180, 180)."""
    lon = (lon_deg + 180.0) % 360.0 - 180.0
    # float modulo can land exactly on the excluded endpoint
    return -180.0 if lon >= 180.0 else lon


def wrap_180(angle_deg):
    """Wrap an angle (scalar or array) to [-180, 180)."""
    return (np.asarray(angle_deg) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        lat = float(self.lat_deg)
        lon = float(self.lon_deg)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValueError(f"non-finite coordinates ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        object.__setattr__(self, "lat_deg", lat)
        object.__setattr__(self, "lon_deg", wrap_lon(lon))


@dataclass(frozen=True)
class LocalVector:
    """East/north offset in meters from ``anchor``."""

    east_m: float
    north_m: float
    anchor: GeoPoint

    @property
    def norm(self) -> float:
        return math.hypot(self.east_m, self.north_m)


def local_offsets(anchor: GeoPoint, lat_deg, lon_deg):
    """East/north offsets without the range check (scalar or array)."""
    dlat = np.radians(np.asarray(lat_deg, dtype=float) - anchor.lat_deg)
    dlon = np.radians(wrap_180(np.asarray(lon_deg, dtype=float) - anchor.lon_deg))
    east = EARTH_RADIUS_M * dlon * math.cos(math.radians(anchor.lat_deg))
    north = EARTH_RADIUS_M * dlat
    return east, north


def project(anchor: GeoPoint, point: GeoPoint) -> LocalVector:
    """Project ``point`` onto the tangent plane at ``anchor``.

    Raises:
        OutOfRangeError: if the points are more than 100 km apart.
    """
    east, north = local_offsets(anchor, point.lat_deg, point.lon_deg)
    east, north = float(east), float(north)
    if math.hypot(east, north) > MAX_SEPARATION_M:
        raise OutOfRangeError(
            f"{point} is more than {MAX_SEPARATION_M:.0f} m from anchor {anchor}"
        )
    return LocalVector(east, north, anchor)


def project_many(anchor: GeoPoint, lat_deg, lon_deg) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`project` over coordinate arrays; returns (east, north)."""
    east, north = local_offsets(anchor, lat_deg, lon_deg)
    east = np.atleast_1d(east)
    north = np.atleast_1d(north)
    if east.size and np.max(np.hypot(east, north)) > MAX_SEPARATION_M:
        raise OutOfRangeError(f"points more than {MAX_SEPARATION_M:.0f} m from anchor {anchor}")
    return east, north


def unproject(vec: LocalVector) -> GeoPoint:
    """Inverse of :func:`project`."""
    anchor = vec.anchor
    lat = anchor.lat_deg + math.degrees(vec.north_m / EARTH_RADIUS_M)
    lon = anchor.lon_deg + math.degrees(
        vec.east_m / (EARTH_RADIUS_M * math.cos(math.radians(anchor.lat_deg)))
    )
    return GeoPoint(lat, lon)


def bearing_of(east, north):
    """Compass bearing in [0, 360) of an east/north offset (scalar or array)."""
    b = np.degrees(np.arctan2(east, north)) % 360.0
    # -tiny % 360 rounds to 360.0
    return np.where(b >= 360.0, 0.0, b)


def range_bearing(anchor: GeoPoint, point: GeoPoint) -> tuple[float, float]:
    """Return (range_m, bearing_deg) of ``point`` as seen from ``anchor``.

    Coincident points give (0.0, 0.0).
    """
    vec = project(anchor, point)
    r = vec.norm
    if r == 0.0:
        return 0.0, 0.0
    return r, float(bearing_of(vec.east_m, vec.north_m))


def destination(anchor: GeoPoint, range_m: float, bearing_deg: float) -> GeoPoint:
    """Point at ``range_m`` along compass ``bearing_deg`` from ``anchor`` (planar)."""
    b = math.radians(bearing_deg)
    return unproject(LocalVector(range_m * math.sin(b), range_m * math.cos(b), anchor))
