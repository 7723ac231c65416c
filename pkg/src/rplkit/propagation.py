"""Breakpoint power-law propagation and the Friis link budget.

All arithmetic is linear (watts, linear gains); convert to dB at the edges.
Inside the breakpoint distance the exponent is fixed at 2 (free space); the
configured exponent applies only beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0
HORIZON_COEFF_M = 4120.0


def wavelength(freq_hz: float) -> float:
    return SPEED_OF_LIGHT / freq_hz


@dataclass(frozen=True)
class PathLossParams:
    n: float
    lambda_m: float
    h_bs_m: float
    h_ms_m: float = 1.0

    def __post_init__(self):
        if not self.n >= 2:
            raise ValueError(f"path loss exponent must be >= 2, got {self.n}")
        if not (self.lambda_m > 0 and self.h_bs_m > 0 and self.h_ms_m > 0):
            raise ValueError("wavelength and antenna heights must be positive")


@dataclass(frozen=True)
class LinkBudget:
    p_t_w: float
    g_t: float
    g_r: float
    p_rmin_w: float

    def __post_init__(self):
        for name in ("p_t_w", "g_t", "g_r", "p_rmin_w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def breakpoint_distance(params: PathLossParams) -> float:
    """``r_b = (4 pi / lambda) h_bs h_ms``."""
    return 4.0 * math.pi / params.lambda_m * params.h_bs_m * params.h_ms_m


def path_gain(r_m: float, params: PathLossParams) -> float:
    """Inverse path loss ``L^-1(r)``; continuous at the breakpoint."""
    if not r_m > 0:
        raise ValueError(f"range must be positive, got {r_m}")
    r_b = breakpoint_distance(params)
    n_eff = 2.0 if r_m <= r_b else params.n
    return (params.lambda_m / (4.0 * math.pi * r_b)) ** 2 * (r_b / r_m) ** n_eff


def received_power(budget: LinkBudget, r_m: float, params: PathLossParams) -> float:
    """Friis received power in watts."""
    return budget.p_t_w * budget.g_t * path_gain(r_m, params) * budget.g_r


def r_max(budget: LinkBudget, params: PathLossParams) -> float:
    """Range at which received power falls to the MS sensitivity.

    If the beyond-breakpoint solution lands inside the breakpoint the MS never
    leaves free space, so the n = 2 solution is returned instead.
    """
    ratio = budget.p_t_w * budget.g_t * budget.g_r / budget.p_rmin_w
    k = params.lambda_m / (4.0 * math.pi)
    r_b = breakpoint_distance(params)
    n = params.n
    r = k ** (2.0 / n) * ratio ** (1.0 / n) * r_b ** (1.0 - 2.0 / n)
    if r <= r_b:
        r = k * math.sqrt(ratio)
    return r


def radio_horizon(h_bs_m: float) -> float:
    """Approximate radio horizon ``4120 m * sqrt(h_bs / 1 m)``."""
    if not h_bs_m > 0:
        raise ValueError(f"antenna height must be positive, got {h_bs_m}")
    return HORIZON_COEFF_M * math.sqrt(h_bs_m)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)
