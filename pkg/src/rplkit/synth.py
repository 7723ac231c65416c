"""Seeded synthetic networks and drive-test observations.

Sites are scattered over a square region, each carrying equally spaced
sectors. A drive route is sampled at fixed spacing and every sector's RSRP is
computed from the Friis budget with breakpoint path loss and the same
azimuthal pattern family the RPL uses, plus optional Gaussian shadowing in dB.

Per-sample noise comes from a generator seeded by (seed, sample index), with
one draw per sector index, so results do not depend on evaluation order.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import antenna
from .geo import GeoPoint, LocalVector, local_offsets, unproject
from .ingest import Observation
from .propagation import LinkBudget, PathLossParams, r_max, received_power, wavelength, watts_to_dbm
from .rpl import Sector


class ConfigError(ValueError):
    pass


class LayoutError(RuntimeError):
    """Rejection sampling could not place the requested number of sites."""


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    network_id: str = "SYN"
    center_lat: float = 28.55
    center_lon: float = -81.58
    region_km: float = 10.0
    n_sites: int = 12
    sectors_per_site: int = 3
    hpbw_deg: float = 66.0
    fb_db: float | None = None
    freq_hz: float = 700e6
    h_bs_m: float = 30.0
    h_ms_m: float = 1.0
    p_t_w: float = 0.1
    g_r: float = 1.0
    p_rmin_w: float = 1e-17
    n_true: float = 4.0
    shadowing_sigma_db: float = 0.0
    route: tuple[GeoPoint, ...] = ()
    scan_spacing_m: float = 50.0
    detection_floor_dbm: float = -140.0
    publish_height: bool = True
    start_epoch_s: float = 1_700_000_000.0
    scan_interval_s: float = 1.0
    # robustness experiments: generate with a pattern other than the fitted one
    gen_q: float | None = None
    gen_p: float | None = None

    def __post_init__(self):
        positive = ("region_km", "freq_hz", "h_bs_m", "h_ms_m", "p_t_w", "g_r", "p_rmin_w",
                    "scan_spacing_m", "scan_interval_s")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_sites < 2:
            raise ConfigError("n_sites must be >= 2")
        if self.sectors_per_site < 1:
            raise ConfigError("sectors_per_site must be >= 1")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if self.n_true < 2:
            raise ConfigError("n_true must be >= 2")

    @property
    def center(self) -> GeoPoint:
        return GeoPoint(self.center_lat, self.center_lon)

    @property
    def min_separation_m(self) -> float:
        return 0.3 * self.region_km * 1000.0 / math.sqrt(self.n_sites)

    def effective_route(self) -> tuple[GeoPoint, ...]:
        return self.route or default_route(self)


def default_route(config: ScenarioConfig, passes: int = 5) -> tuple[GeoPoint, ...]:
    """Lawnmower route over the central 60% of the region."""
    half = 0.3 * config.region_km * 1000.0
    pts = []
    for i, north in enumerate(np.linspace(-half, half, passes)):
        xs = (-half, half) if i % 2 == 0 else (half, -half)
        for east in xs:
            pts.append(unproject(LocalVector(float(east), float(north), config.center)))
    return tuple(pts)


def _parse_route(text: str) -> tuple[GeoPoint, ...]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        lat, lon = (float(v) for v in chunk.split(","))
        pts.append(GeoPoint(lat, lon))
    return tuple(pts)


def parse_config(text: str) -> ScenarioConfig:
    """Read ``key = value`` lines (``#`` starts a comment).

    ``route`` is a ``lat,lon; lat,lon; ...`` polyline. Unset keys keep their
    defaults.
    """
    types = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    return ScenarioConfig(**values)


_INT_KEYS = {"seed", "n_sites", "sectors_per_site"}
_OPT_FLOAT_KEYS = {"fb_db", "gen_q", "gen_p"}


def _coerce(key: str, value: str):
    if key == "route":
        return _parse_route(value)
    if key == "network_id":
        return value
    if key == "publish_height":
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"not a boolean: {value!r}")
        return value.lower() in ("true", "1", "yes")
    if key in _INT_KEYS:
        return int(value)
    if key in _OPT_FLOAT_KEYS and value.lower() in ("", "none"):
        return None
    return float(value)


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def generate_network(config: ScenarioConfig, max_attempts: int | None = None) -> list[Sector]:
    """Place sites with a minimum-separation rule and attach sectors.

    Raises:
        LayoutError: if the sites cannot be placed within ``max_attempts`` draws.
    """
    rng = np.random.default_rng([config.seed, 0])
    half = config.region_km * 500.0
    min_sep = config.min_separation_m
    max_attempts = max_attempts or 1000 * config.n_sites
    placed: list[tuple[float, float]] = []
    attempts = 0
    while len(placed) < config.n_sites:
        if attempts >= max_attempts:
            raise LayoutError(
                f"placed {len(placed)}/{config.n_sites} sites after {attempts} draws; layout too dense"
            )
        attempts += 1
        e, n = rng.uniform(-half, half, size=2)
        if all(math.hypot(e - pe, n - pn) >= min_sep for pe, pn in placed):
            placed.append((float(e), float(n)))

    sectors = []
    step = 360.0 / config.sectors_per_site
    for i, (e, n) in enumerate(placed):
        site = unproject(LocalVector(e, n, config.center))
        base = float(rng.uniform(0.0, 360.0))
        for k in range(config.sectors_per_site):
            sectors.append(Sector(
                network_id=config.network_id,
                sector_id=f"S{i:03d}-{k}",
                site=site,
                azimuth_deg=(base + k * step) % 360.0,
                hpbw_deg=config.hpbw_deg,
                height_m=config.h_bs_m if config.publish_height else None,
                freq_hz=config.freq_hz,
                fb_db=config.fb_db,
            ))
    return sectors


def route_samples(config: ScenarioConfig) -> list[GeoPoint]:
    """Points every ``scan_spacing_m`` along the route polyline, from its start."""
    route = config.effective_route()
    east, north = local_offsets(config.center, [p.lat_deg for p in route], [p.lon_deg for p in route])
    east, north = np.atleast_1d(east), np.atleast_1d(north)
    if len(route) == 1:
        return [route[0]]
    seg = np.hypot(np.diff(east), np.diff(north))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.arange(0.0, cum[-1] + 1e-9, config.scan_spacing_m)
    se = np.interp(s, cum, east)
    sn = np.interp(s, cum, north)
    return [unproject(LocalVector(float(a), float(b), config.center)) for a, b in zip(se, sn)]


def generating_pattern(sector: Sector, config: ScenarioConfig) -> antenna.AntennaPattern:
    if config.gen_q is None and config.gen_p is None:
        return sector.pattern()
    fitted = sector.pattern()
    return antenna.AntennaPattern(
        q=fitted.q if config.gen_q is None else config.gen_q,
        p=fitted.p if config.gen_p is None else config.gen_p,
        phi0_deg=sector.azimuth_deg,
    )


def rsrp_dbm(sector: Sector, point: GeoPoint, config: ScenarioConfig,
             pattern: antenna.AntennaPattern | None = None) -> float:
    """Noise-free RSRP at ``point``; range is the slant distance between antennas."""
    pattern = pattern or generating_pattern(sector, config)
    east, north = local_offsets(sector.site, point.lat_deg, point.lon_deg)
    horiz = math.hypot(float(east), float(north))
    bearing = math.degrees(math.atan2(float(east), float(north))) % 360.0
    slant = math.hypot(horiz, config.h_bs_m - config.h_ms_m) or 1e-3
    budget = LinkBudget(config.p_t_w, max(antenna.gain(pattern, bearing), 1e-300), config.g_r, config.p_rmin_w)
    params = PathLossParams(config.n_true, wavelength(config.freq_hz), config.h_bs_m, config.h_ms_m)
    return watts_to_dbm(received_power(budget, slant, params))


def generate_observations(sectors: Sequence[Sector], config: ScenarioConfig) -> list[Observation]:
    """One observation per (route sample, sector) at or above the detection floor."""
    patterns = [generating_pattern(s, config) for s in sectors]
    out = []
    for i, pt in enumerate(route_samples(config)):
        noise = np.random.default_rng([config.seed, 1, i]).normal(0.0, 1.0, size=len(sectors))
        t = config.start_epoch_s + i * config.scan_interval_s
        for j, (sector, pattern) in enumerate(zip(sectors, patterns)):
            value = rsrp_dbm(sector, pt, config, pattern) + config.shadowing_sigma_db * float(noise[j])
            if value < config.detection_floor_dbm:
                continue
            out.append(Observation(
                scan_id=str(i),
                timestamp=t,
                location=pt,
                network_id=sector.network_id,
                sector_id=sector.sector_id,
                rsrp_dbm=value,
            ))
    return out


def coverage_radius(config: ScenarioConfig) -> float:
    """Boresight range at which a sector's signal falls to the MS sensitivity."""
    budget = LinkBudget(config.p_t_w, 1.0, config.g_r, config.p_rmin_w)
    params = PathLossParams(config.n_true, wavelength(config.freq_hz), config.h_bs_m, config.h_ms_m)
    return r_max(budget, params)
