"""Best-server evaluation of RPLs: error rates, areas and the (n, M) sweep.

For each sector, the locations where it is best server are tested against its
RPL at fixed parameters (defaults n=4, M=3, c=1). Each (n, M) grid
combination is also solved for the smallest zero-error ``c``; the smallest of
those areas is the reference for the area ratio.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ingest import Assignment
from .rpl import (
    ComboResult,
    InfeasibleError,
    RplParams,
    Sector,
    Site,
    area,
    build_rpl,
    contains_polar,
    mean_neighbor_distance,
    min_c_polar,
    optimal_polar,
    polar_coords,
)

log = logging.getLogger(__name__)

DEFAULT_N_GRID = (2, 3, 4)
DEFAULT_M_GRID = (1, 2, 3)


class EmptySectorError(ValueError):
    """The sector has no assigned measurement records."""


@dataclass(frozen=True)
class SectorEvaluation:
    network_id: str
    sector_id: str
    params: RplParams
    n_records: int
    n_outside: int
    error_rate: float
    area_m2: float
    c_star: float
    feasible: bool
    mean_dist_m: float
    fallback_used: bool
    horizon_clipped: bool
    optimal_params: RplParams | None
    optimal_area_m2: float | None
    area_ratio: float
    combos: tuple[ComboResult, ...] = ()
    inside: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def key(self) -> tuple[str, str]:
        return (self.network_id, self.sector_id)


def assigned_to(sector: Sector, assignments: Iterable[Assignment]) -> list[Assignment]:
    return [
        a for a in assignments
        if a.network_id == sector.network_id and a.best_sector_id == sector.sector_id
    ]


def evaluate_sector(
    sector: Sector,
    sites: Sequence[Site],
    assignments: Sequence[Assignment],
    params: RplParams = RplParams(),
    n_grid: Sequence[float] = DEFAULT_N_GRID,
    m_grid: Sequence[int] = DEFAULT_M_GRID,
) -> SectorEvaluation:
    """Evaluate one sector's RPL against its best-server locations.

    Assignments belonging to other sectors are ignored.

    Raises:
        EmptySectorError: no assignment names this sector.
    """
    mine = assigned_to(sector, assignments)
    if not mine:
        raise EmptySectorError(f"sector {sector.network_id}/{sector.sector_id} has no assigned records")
    r, b = polar_coords(sector.site, [a.location for a in mine])

    neighbors = mean_neighbor_distance(sector, sites, params.m_neighbors)
    rpl = build_rpl(sector, sites, params, neighbors=neighbors)
    inside = contains_polar(rpl, r, b)
    n_outside = int(np.count_nonzero(~inside))
    fixed_area = area(rpl)
    mc = min_c_polar(sector, neighbors, r, b, params.n, params.grid_size)

    try:
        opt = optimal_polar(sector, sites, r, b, n_grid, m_grid, params.grid_size)
        opt_params, opt_area, combos = opt.params, opt.area_m2, opt.combos
        ratio = fixed_area / opt_area
    except InfeasibleError as exc:
        log.warning("%s", exc)
        opt_params, opt_area, ratio = None, None, math.nan
        combos = ()

    return SectorEvaluation(
        network_id=sector.network_id,
        sector_id=sector.sector_id,
        params=params,
        n_records=len(mine),
        n_outside=n_outside,
        error_rate=n_outside / len(mine),
        area_m2=fixed_area,
        c_star=mc.c_star,
        feasible=mc.feasible,
        mean_dist_m=neighbors.mean_m,
        fallback_used=neighbors.fallback,
        horizon_clipped=rpl.horizon_clipped,
        optimal_params=opt_params,
        optimal_area_m2=opt_area,
        area_ratio=ratio,
        combos=combos,
        inside=inside,
    )


@dataclass(frozen=True)
class Totals:
    n_records: int
    n_outside: int

    @property
    def error_rate(self) -> float:
        return self.n_outside / self.n_records if self.n_records else math.nan


@dataclass
class SweepReport:
    evaluations: list[SectorEvaluation]
    per_network: dict[str, Totals]
    overall: Totals
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def global_c(self) -> float:
        """Smallest single c giving every evaluated sector zero error."""
        return max(e.c_star for e in self.evaluations)

    @property
    def infeasible(self) -> list[tuple[str, str]]:
        return [e.key for e in self.evaluations if e.optimal_params is None or not e.feasible]


def aggregate(evaluations: Sequence[SectorEvaluation]) -> SweepReport:
    """Pool outside/total counts per network and overall."""
    if not evaluations:
        raise ValueError("nothing to aggregate")
    evals = sorted(evaluations, key=lambda e: e.key)
    per_net: dict[str, Totals] = {}
    for e in evals:
        t = per_net.get(e.network_id, Totals(0, 0))
        per_net[e.network_id] = Totals(t.n_records + e.n_records, t.n_outside + e.n_outside)
    overall = Totals(sum(t.n_records for t in per_net.values()), sum(t.n_outside for t in per_net.values()))
    return SweepReport(evals, per_net, overall)


def sweep(
    sectors: Sequence[Sector],
    sites: Sequence[Site],
    assignments: Sequence[Assignment],
    n_grid: Sequence[float] = DEFAULT_N_GRID,
    m_grid: Sequence[int] = DEFAULT_M_GRID,
    params: RplParams = RplParams(),
) -> SweepReport:
    """Evaluate every sector with records and aggregate.

    Sectors with no assigned records are skipped and listed in ``skipped``.
    """
    if not n_grid or not m_grid:
        raise ValueError("n_grid and m_grid must be nonempty")
    evals, skipped = [], []
    for sector in sorted(sectors, key=lambda s: s.key):
        try:
            evals.append(evaluate_sector(sector, sites, assignments, params, n_grid, m_grid))
        except EmptySectorError:
            skipped.append(sector.key)
    if not evals:
        raise EmptySectorError("no sector has assigned records")
    report = aggregate(evals)
    report.skipped = skipped
    return report


# -- serialization ----------------------------------------------------------

SUMMARY_COLUMNS = (
    "network_id", "sector_id", "n", "m", "c", "grid_size", "n_records", "n_outside",
    "error_rate", "area_m2", "c_star", "feasible", "mean_dist_m", "fallback_used",
    "horizon_clipped", "opt_n", "opt_m", "opt_c", "optimal_area_m2", "area_ratio",
)
COMBO_COLUMNS = (
    "network_id", "sector_id", "n", "m", "c_star", "area_m2", "feasible",
    "mean_dist_m", "fallback_used", "is_optimal",
)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def summary_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for e in report.evaluations:
        o = e.optimal_params
        w.writerow([
            e.network_id, e.sector_id, _num(e.params.n), e.params.m_neighbors, _num(e.params.c),
            e.params.grid_size, e.n_records, e.n_outside, _num(e.error_rate), _num(e.area_m2),
            _num(e.c_star), _num(e.feasible), _num(e.mean_dist_m), _num(e.fallback_used),
            _num(e.horizon_clipped),
            _num(o.n) if o else "", o.m_neighbors if o else "", _num(o.c) if o else "",
            _num(e.optimal_area_m2), _num(e.area_ratio),
        ])
    return buf.getvalue()


def combos_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMBO_COLUMNS)
    for e in report.evaluations:
        o = e.optimal_params
        for c in e.combos:
            best = o is not None and c.n == o.n and c.m == o.m_neighbors
            w.writerow([
                e.network_id, e.sector_id, _num(c.n), c.m, _num(c.c_star), _num(c.area_m2),
                _num(c.feasible), _num(c.mean_dist_m), _num(c.fallback_used), _num(best),
            ])
    return buf.getvalue()


def tradeoff_csv(report: SweepReport) -> str:
    """Per-sector (area_ratio, error_rate) pairs at the fixed parameters."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("network_id", "sector_id", "area_ratio", "error_rate"))
    for e in report.evaluations:
        w.writerow([e.network_id, e.sector_id, _num(e.area_ratio), _num(e.error_rate)])
    return buf.getvalue()


def render_text(report: SweepReport) -> str:
    """Compact human-readable report."""
    lines = []
    if report.evaluations:
        p = report.evaluations[0].params
        lines.append(f"RPL evaluation  n={p.n:g}  M={p.m_neighbors}  c={p.c:g}  grid={p.grid_size}")
    lines.append("")
    lines.append(f"{'network':<10}{'sector':<12}{'records':>8}{'outside':>8}{'error %':>9}"
                 f"{'c_star':>8}{'area km2':>10}{'ratio':>7}  optimum")
    for e in report.evaluations:
        o = e.optimal_params
        opt = f"n={o.n:g} M={o.m_neighbors} c={o.c:.3f}" if o else "infeasible"
        flags = "".join([" [fallback]" if e.fallback_used else "", " [clipped]" if e.horizon_clipped else ""])
        lines.append(
            f"{e.network_id:<10}{e.sector_id:<12}{e.n_records:>8}{e.n_outside:>8}"
            f"{100 * e.error_rate:>9.2f}{e.c_star:>8.3f}{e.area_m2 / 1e6:>10.3f}"
            f"{e.area_ratio:>7.2f}  {opt}{flags}"
        )
    lines.append("")
    for net, t in sorted(report.per_network.items()):
        lines.append(f"network {net}: {t.n_outside}/{t.n_records} outside ({100 * t.error_rate:.2f}%)")
    o = report.overall
    lines.append(f"aggregate: {o.n_outside}/{o.n_records} outside ({100 * o.error_rate:.2f}%)")
    lines.append(f"global c for zero error: {report.global_c:.4f}")
    if report.skipped:
        lines.append("skipped (no records): " + ", ".join(f"{n}/{s}" for n, s in report.skipped))
    return "\n".join(lines) + "\n"
