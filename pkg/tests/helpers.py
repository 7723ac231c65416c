"""Shared builders for small hand-laid-out networks."""

import numpy as np

from rplkit.geo import GeoPoint, destination
from rplkit.rpl import Sector, Site, sites_from_sectors

ORIGIN = GeoPoint(28.565, -81.586)


def sector(azimuth=0.0, hpbw=66.0, site=ORIGIN, network="A", sid="s0", **kw):
    return Sector(network, sid, site, azimuth, hpbw, **kw)


def ring_sites(specs, network="A", origin=ORIGIN):
    """Sites at (range_m, bearing_deg) around ``origin``, plus ``origin`` itself."""
    sites = [Site(network, origin)]
    sites += [Site(network, destination(origin, r, b)) for r, b in specs]
    return sites


def random_network(rng, n_sites=10, extent_m=8000.0, network="A", hpbw=66.0, height=None):
    """Serving sector at ORIGIN with boresight random, plus scattered neighbor sites."""
    serving = sector(float(rng.uniform(0, 360)), hpbw, network=network, height_m=height)
    others = []
    for i in range(n_sites):
        r = float(rng.uniform(500.0, extent_m))
        b = float(rng.uniform(0.0, 360.0))
        others.append(Sector(network, f"n{i}", destination(ORIGIN, r, b), 0.0, hpbw))
    return serving, sites_from_sectors([serving] + others)


def random_points(rng, count, max_r):
    r = max_r * np.sqrt(rng.uniform(0, 1, count))
    b = rng.uniform(0, 360, count)
    return [destination(ORIGIN, float(a), float(c)) for a, c in zip(r, b)]
