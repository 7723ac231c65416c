"""Region of plausible locations (RPL) for a serving sector.

The RPL boundary at compass azimuth ``phi`` is::

    r(phi) = c * mean_m * (G(phi) / G_max) ** (1 / n)

where ``mean_m`` is the mean distance from the serving BS to the ``M`` closest
same-network BSs inside the sector's HPBW window, ``G`` is the fitted antenna
pattern and ``n`` the path loss exponent used for the shape. When the antenna
height is known, each radius is clipped to the radio horizon.

The boundary is sampled on a uniform azimuth grid starting at 0 deg (north);
containment interpolates linearly between adjacent grid radii.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import antenna
from .geo import (
    MAX_SEPARATION_M,
    GeoPoint,
    bearing_of,
    destination,
    local_offsets,
    project_many,
    wrap_180,
)
from .propagation import radio_horizon

log = logging.getLogger(__name__)

CO_LOCATED_M = 1.0
# relative slack so a point sitting exactly on the boundary (e.g. the one that
# defines c_star) is not rejected by float rounding
BOUNDARY_RTOL = 1e-12


class InsufficientInfrastructureError(ValueError):
    """No non-co-located site exists to size the RPL."""


class InfeasibleError(ValueError):
    """No searched parameter combination covers every assigned point."""


@dataclass(frozen=True)
class Sector:
    network_id: str
    sector_id: str
    site: GeoPoint
    azimuth_deg: float
    hpbw_deg: float
    height_m: float | None = None
    freq_hz: float | None = None
    fb_db: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValueError(f"azimuth {self.azimuth_deg} outside [0, 360)")
        if not 0.0 < self.hpbw_deg < 360.0:
            raise ValueError(f"HPBW {self.hpbw_deg} outside (0, 360)")
        for name in ("height_m", "freq_hz"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive when given, got {v}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.network_id, self.sector_id)

    def pattern(self) -> antenna.AntennaPattern:
        return antenna.pattern_for(self.hpbw_deg, self.azimuth_deg, self.fb_db)


@dataclass(frozen=True)
class Site:
    network_id: str
    point: GeoPoint


def sites_from_sectors(sectors: Iterable[Sector]) -> list[Site]:
    """Collapse sectors into base-station sites, one per network and location.

    Sectors within 1 m of an already-collected site of the same network are
    treated as belonging to that BS.
    """
    out: list[Site] = []
    by_net: dict[str, list[GeoPoint]] = {}
    for s in sectors:
        kept = by_net.setdefault(s.network_id, [])
        if kept:
            east, north = local_offsets(s.site, [p.lat_deg for p in kept], [p.lon_deg for p in kept])
            if np.min(np.hypot(east, north)) <= CO_LOCATED_M:
                continue
        kept.append(s.site)
        out.append(Site(s.network_id, s.site))
    return out


@dataclass(frozen=True)
class RplParams:
    n: float = 4.0
    m_neighbors: int = 3
    c: float = 1.0
    grid_size: int = 720

    def __post_init__(self):
        if not self.n >= 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.m_neighbors >= 1:
            raise ValueError(f"M must be >= 1, got {self.m_neighbors}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not self.grid_size >= 360:
            raise ValueError(f"grid_size must be >= 360, got {self.grid_size}")


class NeighborDistance(NamedTuple):
    mean_m: float
    used: int
    fallback: bool


def _site_polar(origin: GeoPoint, sites: Sequence[Site]) -> tuple[np.ndarray, np.ndarray]:
    east, north = local_offsets(
        origin, [s.point.lat_deg for s in sites], [s.point.lon_deg for s in sites]
    )
    r = np.atleast_1d(np.hypot(east, north))
    b = np.atleast_1d(bearing_of(east, north))
    # sites beyond projection range are never among the M nearest at macrocell scale
    ok = r <= MAX_SEPARATION_M
    return r[ok], b[ok]


def mean_neighbor_distance(sector: Sector, sites: Sequence[Site], m: int) -> NeighborDistance:
    """Mean distance to the ``m`` nearest same-network BSs inside the HPBW window.

    If fewer than ``m`` sites fall in the window, whichever exist are used. If
    none do, the ``m`` nearest sites in any direction are used and ``fallback``
    is set.

    Raises:
        InsufficientInfrastructureError: the network has no other site at all.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    same = [s for s in sites if s.network_id == sector.network_id]
    r, b = _site_polar(sector.site, same)
    keep = r > CO_LOCATED_M
    r, b = r[keep], b[keep]
    if r.size == 0:
        raise InsufficientInfrastructureError(
            f"no other {sector.network_id!r} site to size RPL of sector {sector.sector_id!r}"
        )
    in_window = np.abs(wrap_180(b - sector.azimuth_deg)) <= sector.hpbw_deg / 2.0
    fallback = not in_window.any()
    pool = np.sort(r if fallback else r[in_window])[:m]
    if fallback:
        log.info("sector %s/%s: no BS inside HPBW, using nearest in any direction",
                 sector.network_id, sector.sector_id)
    return NeighborDistance(float(np.mean(pool)), int(pool.size), fallback)


def unit_shape(pattern: antenna.AntennaPattern, n: float, grid_size: int) -> np.ndarray:
    """Normalized boundary ``(G / G_max) ** (1/n)`` on the azimuth grid."""
    g = antenna.gain(pattern, antenna.grid_azimuths(grid_size))
    return (g / g.max()) ** (1.0 / n)


def interp_radius(radii: np.ndarray, bearing_deg) -> np.ndarray:
    """Linearly interpolate grid radii at compass bearings (periodic)."""
    size = radii.shape[0]
    pos = np.asarray(bearing_deg, dtype=float) % 360.0 * (size / 360.0)
    k0 = np.floor(pos)
    frac = pos - k0
    k0 = k0.astype(int) % size
    return radii[k0] * (1.0 - frac) + radii[(k0 + 1) % size] * frac


@dataclass(frozen=True, eq=False)
class Rpl:
    sector: Sector
    params: RplParams
    mean_dist_m: float
    neighbor_count_used: int
    fallback_used: bool
    radii_m: np.ndarray = field(repr=False)
    horizon_clipped: bool
    pattern: antenna.AntennaPattern

    @property
    def azimuths_deg(self) -> np.ndarray:
        return antenna.grid_azimuths(self.params.grid_size)


def build_rpl(
    sector: Sector,
    sites: Sequence[Site],
    params: RplParams = RplParams(),
    neighbors: NeighborDistance | None = None,
) -> Rpl:
    """Construct the RPL of ``sector``.

    ``neighbors`` may be passed to reuse an already-computed mean distance for
    the same sector and ``params.m_neighbors``.
    """
    if neighbors is None:
        neighbors = mean_neighbor_distance(sector, sites, params.m_neighbors)
    pattern = sector.pattern()
    radii = params.c * neighbors.mean_m * unit_shape(pattern, params.n, params.grid_size)
    clipped = False
    if sector.height_m is not None:
        r_h = radio_horizon(sector.height_m)
        clipped = bool(np.any(radii > r_h))
        radii = np.minimum(radii, r_h)
    radii.setflags(write=False)
    return Rpl(
        sector=sector,
        params=params,
        mean_dist_m=neighbors.mean_m,
        neighbor_count_used=neighbors.used,
        fallback_used=neighbors.fallback,
        radii_m=radii,
        horizon_clipped=clipped,
        pattern=pattern,
    )


def polar_coords(origin: GeoPoint, points: Sequence[GeoPoint]) -> tuple[np.ndarray, np.ndarray]:
    """Ranges and compass bearings of ``points`` from ``origin``."""
    east, north = project_many(origin, [p.lat_deg for p in points], [p.lon_deg for p in points])
    return np.hypot(east, north), bearing_of(east, north)


def contains_polar(rpl: Rpl, r_m: np.ndarray, bearing_deg: np.ndarray) -> np.ndarray:
    limit = interp_radius(rpl.radii_m, bearing_deg)
    return (np.asarray(r_m) <= limit * (1.0 + BOUNDARY_RTOL)) | (np.asarray(r_m) == 0.0)


def contains(rpl: Rpl, point: GeoPoint) -> bool:
    """Whether ``point`` lies inside the RPL (the BS location always does)."""
    r, b = polar_coords(rpl.sector.site, [point])
    return bool(contains_polar(rpl, r, b)[0])


def contains_many(rpl: Rpl, points: Sequence[GeoPoint]) -> np.ndarray:
    if not points:
        return np.zeros(0, dtype=bool)
    r, b = polar_coords(rpl.sector.site, points)
    return contains_polar(rpl, r, b)


def area(rpl: Rpl) -> float:
    """Polar quadrature ``0.5 * sum(r_k^2) * dphi`` in square meters."""
    return area_of_radii(rpl.radii_m)


def area_of_radii(radii: np.ndarray) -> float:
    radii = np.asarray(radii, dtype=float)
    return float(0.5 * np.sum(radii**2) * (2.0 * math.pi / radii.shape[0]))


class MinC(NamedTuple):
    c_star: float
    feasible: bool
    binding_index: int


def min_c_polar(
    sector: Sector,
    neighbors: NeighborDistance,
    r_m: np.ndarray,
    bearing_deg: np.ndarray,
    n: float,
    grid_size: int = 720,
) -> MinC:
    if len(r_m) == 0:
        raise ValueError("need at least one assigned point")
    # the same interpolated boundary contains() uses, so c_star is exactly
    # the smallest c with zero error rather than an approximation of it
    unit = neighbors.mean_m * interp_radius(unit_shape(sector.pattern(), n, grid_size), bearing_deg)
    ratio = np.asarray(r_m) / unit
    k = int(np.argmax(ratio))
    feasible = True
    if sector.height_m is not None:
        feasible = bool(np.all(np.asarray(r_m) <= radio_horizon(sector.height_m)))
    return MinC(float(ratio[k]), feasible, k)


def min_c_for_zero_error(
    sector: Sector,
    sites: Sequence[Site],
    points: Sequence[GeoPoint],
    n: float,
    m: int,
    grid_size: int = 720,
) -> MinC:
    """Smallest ``c`` placing every point inside the RPL.

    The unclipped boundary is linear in ``c``, so this is the maximum over
    points of range divided by the ``c = 1`` boundary radius at that bearing.
    ``feasible`` is False when some point lies beyond the radio horizon, since
    clipping then keeps it outside for every ``c``.
    """
    if not points:
        raise ValueError("need at least one assigned point")
    neighbors = mean_neighbor_distance(sector, sites, m)
    r, b = polar_coords(sector.site, points)
    return min_c_polar(sector, neighbors, r, b, n, grid_size)


@dataclass(frozen=True)
class ComboResult:
    n: float
    m: int
    c_star: float
    area_m2: float
    feasible: bool
    mean_dist_m: float
    fallback_used: bool


@dataclass(frozen=True)
class OptimalRpl:
    params: RplParams
    area_m2: float
    combos: tuple[ComboResult, ...]

    @property
    def best(self) -> ComboResult:
        return next(c for c in self.combos if c.n == self.params.n and c.m == self.params.m_neighbors)


def optimal_polar(
    sector: Sector,
    sites: Sequence[Site],
    r_m: np.ndarray,
    bearing_deg: np.ndarray,
    n_grid: Sequence[float] = (2, 3, 4),
    m_grid: Sequence[int] = (1, 2, 3),
    grid_size: int = 720,
) -> OptimalRpl:
    if not n_grid or not m_grid:
        raise ValueError("n_grid and m_grid must be nonempty")
    neighbor_cache = {m: mean_neighbor_distance(sector, sites, m) for m in m_grid}
    combos = []
    for n in n_grid:
        for m in m_grid:
            nb = neighbor_cache[m]
            mc = min_c_polar(sector, nb, r_m, bearing_deg, n, grid_size)
            rpl = build_rpl(sector, sites, RplParams(n, m, mc.c_star, grid_size), neighbors=nb)
            combos.append(ComboResult(n, m, mc.c_star, area(rpl), mc.feasible, nb.mean_m, nb.fallback))

    best = None
    # ties (equal area to 1e-12) go to smaller n, then smaller M, then grid order
    order = sorted(range(len(combos)), key=lambda i: (combos[i].n, combos[i].m, i))
    for i in order:
        cand = combos[i]
        if not cand.feasible:
            continue
        if best is None or cand.area_m2 < best.area_m2 * (1.0 - 1e-12):
            best = cand
    if best is None:
        raise InfeasibleError(
            f"sector {sector.network_id}/{sector.sector_id}: no (n, M) combination covers all points"
        )
    return OptimalRpl(RplParams(best.n, best.m, best.c_star, grid_size), best.area_m2, tuple(combos))


def optimal_rpl(
    sector: Sector,
    sites: Sequence[Site],
    points: Sequence[GeoPoint],
    n_grid: Sequence[float] = (2, 3, 4),
    m_grid: Sequence[int] = (1, 2, 3),
    grid_size: int = 720,
) -> OptimalRpl:
    """Smallest-area zero-error RPL over the (n, M) grid, each at its c_star.

    Raises:
        InfeasibleError: every combination is infeasible (points past the horizon).
    """
    if not points:
        raise ValueError("need at least one assigned point")
    r, b = polar_coords(sector.site, points)
    return optimal_polar(sector, sites, r, b, n_grid, m_grid, grid_size)


def boundary_ring(rpl: Rpl) -> list[list[float]]:
    """Closed counterclockwise lon/lat ring of the sampled boundary."""
    pts = [
        destination(rpl.sector.site, float(r), float(phi))
        for r, phi in zip(rpl.radii_m, rpl.azimuths_deg)
    ]
    # compass azimuth increases clockwise; reverse for a CCW exterior ring
    ring = [[p.lon_deg, p.lat_deg] for p in reversed(pts)]
    ring.append(ring[0])
    return ring


def to_feature(rpl: Rpl) -> dict:
    """GeoJSON Feature (Polygon) for the RPL."""
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [boundary_ring(rpl)]},
        "properties": {
            "network_id": rpl.sector.network_id,
            "sector_id": rpl.sector.sector_id,
            "n": rpl.params.n,
            "m": rpl.params.m_neighbors,
            "c": rpl.params.c,
            "mean_dist_m": rpl.mean_dist_m,
            "area_m2": area(rpl),
            "horizon_clipped": rpl.horizon_clipped,
            "fallback_used": rpl.fallback_used,
        },
    }
