"""Infrastructure/measurement CSV ingestion and best-server association.

Both tables are UTF-8, comma-separated, with a mandatory header row. Row-level
problems are reported as :class:`Diagnostic` entries carrying the file line
number and do not stop parsing; only header problems raise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Container, Generic, Iterable, TextIO, TypeVar

from .geo import GeoPoint
from .rpl import Sector

INFRA_COLUMNS = (
    "network_id", "sector_id", "lat_deg", "lon_deg", "azimuth_deg", "hpbw_deg",
    "height_m", "freq_hz", "fb_db",
)
INFRA_OPTIONAL = ("height_m", "freq_hz", "fb_db")
MEAS_COLUMNS = ("scan_id", "timestamp", "lat_deg", "lon_deg", "network_id", "sector_id", "rsrp_dbm")
RSRP_RANGE_DBM = (-160.0, -20.0)

T = TypeVar("T")


class IngestError(ValueError):
    """Unrecoverable problem with a table header."""


@dataclass(frozen=True)
class Diagnostic:
    row: int
    message: str
    level: str = "error"

    def __str__(self) -> str:
        return f"row {self.row}: {self.level}: {self.message}"


@dataclass
class ParseResult(Generic[T]):
    records: list[T] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "warning"]


@dataclass(frozen=True)
class Observation:
    scan_id: str
    timestamp: float
    location: GeoPoint
    network_id: str
    sector_id: str
    rsrp_dbm: float
    # False when the sector is absent from the infrastructure table in use
    known: bool = True


@dataclass(frozen=True)
class Assignment:
    scan_id: str
    timestamp: float
    location: GeoPoint
    network_id: str
    best_sector_id: str
    best_rsrp_dbm: float
    margin_db: float
    known: bool = True


def _reader(stream: TextIO, required: Iterable[str]) -> csv.DictReader:
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if header is None:
        raise IngestError("missing header row")
    header = [h.strip() for h in header]
    reader.fieldnames = header
    missing = [c for c in required if c not in header]
    if missing:
        raise IngestError(f"missing mandatory column(s): {', '.join(missing)}")
    dupes = sorted({h for h in header if header.count(h) > 1})
    if dupes:
        raise IngestError(f"duplicate column(s): {', '.join(dupes)}")
    return reader


def _float(row: dict, name: str, optional: bool = False) -> float | None:
    raw = (row.get(name) or "").strip()
    if raw == "":
        if optional:
            return None
        raise ValueError(f"{name} is blank")
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name}={raw!r} is not a number") from None
    if not math.isfinite(value):
        raise ValueError(f"{name}={raw!r} is not finite")
    return value


def _label(row: dict, name: str) -> str:
    value = (row.get(name) or "").strip()
    if not value:
        raise ValueError(f"{name} is blank")
    return value


def parse_infrastructure(stream: TextIO) -> ParseResult[Sector]:
    """Parse a sector table.

    Rows with bad values or a duplicate (network_id, sector_id) key are
    skipped with an error diagnostic; the first occurrence of a key wins.
    """
    required = [c for c in INFRA_COLUMNS if c not in INFRA_OPTIONAL]
    reader = _reader(stream, required)
    result: ParseResult[Sector] = ParseResult()
    first_row: dict[tuple[str, str], int] = {}
    for row in reader:
        line = reader.line_num
        try:
            net, sid = _label(row, "network_id"), _label(row, "sector_id")
            lat, lon = _float(row, "lat_deg"), _float(row, "lon_deg")
            az, hpbw = _float(row, "azimuth_deg"), _float(row, "hpbw_deg")
            if not 0.0 <= az < 360.0:
                raise ValueError(f"azimuth_deg={az} outside [0, 360)")
            if not 0.0 < hpbw < 360.0:
                raise ValueError(f"hpbw_deg={hpbw} outside (0, 360)")
            fb = _float(row, "fb_db", optional=True)
            if fb is not None and not fb > 3.0:
                raise ValueError(f"fb_db={fb} must exceed 3 dB")
            sector = Sector(
                network_id=net,
                sector_id=sid,
                site=GeoPoint(lat, lon),
                azimuth_deg=az,
                hpbw_deg=hpbw,
                height_m=_float(row, "height_m", optional=True),
                freq_hz=_float(row, "freq_hz", optional=True),
                fb_db=fb,
            )
        except ValueError as exc:
            result.diagnostics.append(Diagnostic(line, str(exc)))
            continue
        if sector.key in first_row:
            result.diagnostics.append(Diagnostic(
                line, f"duplicate sector {net}/{sid} (first defined on row {first_row[sector.key]})"
            ))
            continue
        first_row[sector.key] = line
        result.records.append(sector)
    return result


def parse_measurements(
    stream: TextIO, known_sectors: Container[tuple[str, str]] | None = None
) -> ParseResult[Observation]:
    """Parse a scanner measurement table.

    RSRP outside [-160, -20] dBm only produces a warning. When
    ``known_sectors`` is given, observations of other sectors are kept with
    ``known=False`` so they still compete for best server.
    """
    reader = _reader(stream, MEAS_COLUMNS)
    result: ParseResult[Observation] = ParseResult()
    lo, hi = RSRP_RANGE_DBM
    for row in reader:
        line = reader.line_num
        try:
            net, sid = _label(row, "network_id"), _label(row, "sector_id")
            obs = Observation(
                scan_id=_label(row, "scan_id"),
                timestamp=_float(row, "timestamp"),
                location=GeoPoint(_float(row, "lat_deg"), _float(row, "lon_deg")),
                network_id=net,
                sector_id=sid,
                rsrp_dbm=_float(row, "rsrp_dbm"),
                known=True if known_sectors is None else (net, sid) in known_sectors,
            )
        except ValueError as exc:
            result.diagnostics.append(Diagnostic(line, str(exc)))
            continue
        if not lo <= obs.rsrp_dbm <= hi:
            result.diagnostics.append(Diagnostic(
                line, f"rsrp_dbm={obs.rsrp_dbm} outside plausible range [{lo}, {hi}]", "warning"
            ))
        result.records.append(obs)
    return result


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_infrastructure(sectors: Iterable[Sector], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(INFRA_COLUMNS)
    for s in sectors:
        writer.writerow([
            s.network_id, s.sector_id, _fmt(s.site.lat_deg), _fmt(s.site.lon_deg),
            _fmt(s.azimuth_deg), _fmt(s.hpbw_deg),
            _fmt(s.height_m), _fmt(s.freq_hz), _fmt(s.fb_db),
        ])


def write_measurements(observations: Iterable[Observation], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(MEAS_COLUMNS)
    for o in observations:
        writer.writerow([
            o.scan_id, _fmt(o.timestamp), _fmt(o.location.lat_deg), _fmt(o.location.lon_deg),
            o.network_id, o.sector_id, _fmt(o.rsrp_dbm),
        ])


def best_server(observations: Iterable[Observation]) -> list[Assignment]:
    """One assignment per (scan_id, network_id): the strongest-RSRP sector.

    Exact RSRP ties go to the lexicographically smallest sector_id. Groups are
    emitted in order of first appearance.
    """
    groups: dict[tuple[str, str], list[Observation]] = {}
    for o in observations:
        groups.setdefault((o.scan_id, o.network_id), []).append(o)
    out = []
    for group in groups.values():
        ranked = sorted(group, key=lambda o: (-o.rsrp_dbm, o.sector_id))
        best = ranked[0]
        margin = best.rsrp_dbm - ranked[1].rsrp_dbm if len(ranked) > 1 else 0.0
        out.append(Assignment(
            scan_id=best.scan_id,
            timestamp=best.timestamp,
            location=best.location,
            network_id=best.network_id,
            best_sector_id=best.sector_id,
            best_rsrp_dbm=best.rsrp_dbm,
            margin_db=margin,
            known=best.known,
        ))
    return out
