"""Parametric azimuthal sector-antenna pattern.

The pattern is a ``cos^q`` main lobe plus a small linear backlobe term::

    G(phi) = cos^q((pi/2) sin(d/2)) + p |sin(d/2)|,   d = phi - phi0

with ``d`` wrapped to [-180, 180). ``q`` controls the half-power beamwidth and
``p`` the front-to-back ratio (``G(phi0 + 180) == p`` while ``G(phi0) == 1``).
Operators usually report HPBW and sometimes F/B, so both inversions are
provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geo import wrap_180

DEFAULT_P = 0.003
Q_BRACKET = (1e-3, 1e4)


class PatternError(ValueError):
    """The pattern has no half-power crossing, or a target cannot be solved for."""


@dataclass(frozen=True)
class AntennaPattern:
    q: float
    p: float = DEFAULT_P
    phi0_deg: float = 0.0

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"q must be > 0, got {self.q}")
        if not 0.0 <= self.p < 0.5:
            raise ValueError(f"p must be in [0, 0.5), got {self.p}")
        object.__setattr__(self, "phi0_deg", float(self.phi0_deg) % 360.0)


def _gain_offset(q: float, p: float, offset_deg):
    s = np.abs(np.sin(np.radians(offset_deg) / 2.0))
    # cos(pi/2 * s) written as sin(pi/2 * (1 - s)) so it is exactly 0 at s = 1
    base = np.maximum(np.sin(0.5 * np.pi * (1.0 - s)), 0.0)
    return base**q + p * s


def gain(pattern: AntennaPattern, phi_deg):
    """Linear gain toward compass azimuth ``phi_deg`` (scalar or array)."""
    g = _gain_offset(pattern.q, pattern.p, wrap_180(np.asarray(phi_deg, dtype=float) - pattern.phi0_deg))
    return float(g) if np.ndim(g) == 0 else g


def _scalar_gain(q: float, p: float, offset_deg: float) -> float:
    s = abs(math.sin(math.radians(offset_deg) / 2.0))
    return max(math.sin(0.5 * math.pi * (1.0 - s)), 0.0) ** q + p * s


def _half_power_offset(q: float, p: float) -> float:
    lo, hi = 0.0, 180.0
    if not (_scalar_gain(q, p, lo) >= 0.5 > _scalar_gain(q, p, hi)):
        raise PatternError(f"no half-power crossing for q={q}, p={p}")
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if _scalar_gain(q, p, mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hpbw_of(pattern: AntennaPattern) -> float:
    """Full half-power beamwidth in degrees.

    The one-sided crossing of G = 0.5 is bracketed on [0, 180] and bisected;
    the pattern is symmetric about boresight so the width is twice that.
    """
    return 2.0 * _half_power_offset(pattern.q, pattern.p)


@lru_cache(maxsize=1024)
def solve_q(hpbw_deg: float, p: float = DEFAULT_P) -> float:
    """Exponent ``q`` giving the requested HPBW at backlobe coefficient ``p``.

    HPBW decreases strictly with ``q``, so bisection in log(q) over
    ``Q_BRACKET`` converges to the unique solution.

    Raises:
        PatternError: if ``hpbw_deg`` is not reachable inside the bracket.
    """
    if not 1.0 <= hpbw_deg <= 359.0:
        raise PatternError(f"HPBW {hpbw_deg} outside [1, 359] degrees")
    lo, hi = math.log(Q_BRACKET[0]), math.log(Q_BRACKET[1])
    w_lo = 2.0 * _half_power_offset(math.exp(lo), p)
    w_hi = 2.0 * _half_power_offset(math.exp(hi), p)
    if not w_hi <= hpbw_deg <= w_lo:
        raise PatternError(
            f"HPBW {hpbw_deg} not achievable (range {w_hi:.4f}..{w_lo:.4f}) for p={p}"
        )
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        w = 2.0 * _half_power_offset(math.exp(mid), p)
        if abs(w - hpbw_deg) < 1e-8:
            return math.exp(mid)
        if w > hpbw_deg:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def solve_p(fb_db: float) -> float:
    """Backlobe coefficient for a front-to-back ratio in dB (``p = 10^(-F/B / 10)``)."""
    if not fb_db > 3.0:
        raise ValueError(f"F/B must exceed 3 dB, got {fb_db}")
    return 10.0 ** (-fb_db / 10.0)


def front_to_back_db(pattern: AntennaPattern) -> float:
    """Boresight over back-azimuth gain, in dB; infinite when ``p == 0``."""
    back = gain(pattern, pattern.phi0_deg + 180.0)
    if back == 0.0:
        return math.inf
    return 10.0 * math.log10(gain(pattern, pattern.phi0_deg) / back)


def grid_azimuths(grid_size: int) -> np.ndarray:
    """Uniform compass azimuths ``k * 360 / grid_size`` for k = 0..grid_size-1."""
    return np.arange(grid_size) * (360.0 / grid_size)


def gain_max(pattern: AntennaPattern, grid_size: int = 720) -> tuple[float, float]:
    """Maximum gain over the RPL azimuth grid and the azimuth where it occurs."""
    if grid_size < 360:
        raise ValueError(f"grid_size must be >= 360, got {grid_size}")
    phi = grid_azimuths(grid_size)
    g = gain(pattern, phi)
    k = int(np.argmax(g))
    return float(g[k]), float(phi[k])


def pattern_for(hpbw_deg: float, phi0_deg: float, fb_db: float | None = None) -> AntennaPattern:
    """Fit a pattern to operator-reported HPBW and (optional) F/B."""
    p = DEFAULT_P if fb_db is None else solve_p(fb_db)
    return AntennaPattern(q=solve_q(float(hpbw_deg), p), p=p, phi0_deg=phi0_deg)
