"""Command-line interface: ``rplkit {rpl,evaluate,sweep,synth,report}``.

Exit codes: 0 success, 1 I/O or parse failure, 2 domain error (unknown
sector, empty join), 3 infeasibility.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, evaluate, ingest, rpl, synth
from .geo import OutOfRangeError

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_INFEASIBLE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(path: Path, command: str, inputs: Sequence[Path], parameters: dict) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "inputs": [{"path": str(p), "sha256": _digest(p)} for p in inputs],
        "parameters": parameters,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sector_key(text: str) -> tuple[str, str]:
    if ":" not in text:
        raise argparse.ArgumentTypeError(f"sector must be NETWORK:SECTOR, got {text!r}")
    net, sid = text.split(":", 1)
    return net.strip(), sid.strip()


def _report_diagnostics(path: Path, result: ingest.ParseResult) -> None:
    for d in result.diagnostics:
        print(f"{path}: {d}", file=sys.stderr)


def _load_infra(path: Path) -> list[rpl.Sector]:
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            result = ingest.parse_infrastructure(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
    except ingest.IngestError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from None
    _report_diagnostics(path, result)
    return result.records


def _load_measurements(path: Path, known) -> list[ingest.Observation]:
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            result = ingest.parse_measurements(fh, known)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
    except ingest.IngestError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from None
    _report_diagnostics(path, result)
    return result.records


def _params(args) -> rpl.RplParams:
    try:
        return rpl.RplParams(n=args.n, m_neighbors=args.m, c=args.c, grid_size=args.grid_size)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None


def _param_dict(params: rpl.RplParams) -> dict:
    return {"n": params.n, "m": params.m_neighbors, "c": params.c, "grid_size": params.grid_size}


def cmd_rpl(args) -> int:
    sectors = _load_infra(args.infra)
    params = _params(args)
    by_key = {s.key: s for s in sectors}
    key = args.sector
    if key not in by_key:
        raise CliError(f"unknown sector {key[0]}:{key[1]} in {args.infra}", EXIT_DOMAIN)
    try:
        region = rpl.build_rpl(by_key[key], rpl.sites_from_sectors(sectors), params)
    except rpl.InsufficientInfrastructureError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(out, rpl.to_feature(region))
    _write_manifest(out.with_name(out.name + ".manifest.json"), "rpl", [args.infra],
                    {**_param_dict(params), "sector": f"{key[0]}:{key[1]}"})
    return EXIT_OK


def _select(sectors, assignments, keys, top):
    assigned_keys = {(a.network_id, a.best_sector_id) for a in assignments}
    joined = [s for s in sectors if s.key in assigned_keys]
    if not joined:
        raise CliError("no sector in the infrastructure file has best-server records (empty join)", EXIT_DOMAIN)
    if keys:
        known = {s.key for s in sectors}
        missing = [k for k in keys if k not in known]
        if missing:
            raise CliError("unknown sector(s): " + ", ".join(f"{n}:{s}" for n, s in missing), EXIT_DOMAIN)
        joined = [s for s in joined if s.key in set(keys)]
        if not joined:
            raise CliError("selected sector(s) have no best-server records", EXIT_DOMAIN)
    if top:
        counts: dict[tuple[str, str], int] = {}
        for a in assignments:
            k = (a.network_id, a.best_sector_id)
            counts[k] = counts.get(k, 0) + 1
        picked = []
        for net in sorted({s.network_id for s in joined}):
            ranked = sorted((s for s in joined if s.network_id == net), key=lambda s: (-counts[s.key], s.sector_id))
            picked.extend(ranked[:top])
        joined = picked
    return sorted(joined, key=lambda s: s.key)


def _run_sweep(args, n_grid, m_grid):
    sectors = _load_infra(args.infra)
    params = _params(args)
    obs = _load_measurements(args.measurements, {s.key for s in sectors})
    assignments = ingest.best_server(obs)
    chosen = _select(sectors, assignments, args.sector, args.top)
    sites = rpl.sites_from_sectors(sectors)
    try:
        report = evaluate.sweep(chosen, sites, assignments, n_grid, m_grid, params)
    except (rpl.InsufficientInfrastructureError, OutOfRangeError) as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    manifest_params = {
        **_param_dict(params), "n_grid": list(n_grid), "m_grid": list(m_grid),
        "sectors": [f"{n}:{s}" for n, s in (args.sector or [])], "top": args.top,
    }
    return sectors, sites, assignments, report, manifest_params


def _sector_bundle(sector, sites, assignments, evaluation) -> dict:
    region = rpl.build_rpl(sector, sites, evaluation.params)
    mine = evaluate.assigned_to(sector, assignments)
    features = [rpl.to_feature(region)]
    for a, inside in zip(mine, evaluation.inside):
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [a.location.lon_deg, a.location.lat_deg]},
            "properties": {"scan_id": a.scan_id, "rsrp_dbm": a.best_rsrp_dbm, "inside": bool(inside)},
        })
    return {"type": "FeatureCollection", "features": features}


def _exit_for(report) -> int:
    if report.infeasible:
        for n, s in report.infeasible:
            print(f"infeasible: sector {n}:{s} has points beyond the radio horizon", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_evaluate(args) -> int:
    sectors, sites, assignments, report, mparams = _run_sweep(args, args.n_grid, args.m_grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(evaluate.summary_csv(report), encoding="utf-8")
    (out / "tradeoff.csv").write_text(evaluate.tradeoff_csv(report), encoding="utf-8")
    (out / "report.txt").write_text(evaluate.render_text(report), encoding="utf-8")
    if args.geojson:
        gdir = out / "geojson"
        gdir.mkdir(exist_ok=True)
        by_key = {s.key: s for s in sectors}
        for e in report.evaluations:
            bundle = _sector_bundle(by_key[e.key], sites, assignments, e)
            _dump_json(gdir / f"{e.network_id}_{e.sector_id}.geojson", bundle)
    _write_manifest(out / "manifest.json", "evaluate", [args.infra, args.measurements], mparams)
    return _exit_for(report)


def cmd_sweep(args) -> int:
    _, _, _, report, mparams = _run_sweep(args, args.n_grid, args.m_grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(evaluate.combos_csv(report), encoding="utf-8")
    (out / "summary.csv").write_text(evaluate.summary_csv(report), encoding="utf-8")
    (out / "tradeoff.csv").write_text(evaluate.tradeoff_csv(report), encoding="utf-8")
    _write_manifest(out / "manifest.json", "sweep", [args.infra, args.measurements], mparams)
    return _exit_for(report)


def cmd_report(args) -> int:
    _, _, _, report, _ = _run_sweep(args, args.n_grid, args.m_grid)
    text = evaluate.render_text(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return _exit_for(report)


def cmd_synth(args) -> int:
    try:
        config = synth.load_config(args.config) if args.config else synth.ScenarioConfig()
        if args.seed is not None:
            config = synth.dataclasses.replace(config, seed=args.seed)
    except OSError as exc:
        raise CliError(f"cannot read {args.config}: {exc}", EXIT_IO) from None
    except (synth.ConfigError, ValueError) as exc:
        raise CliError(f"config: {exc}", EXIT_IO) from None
    try:
        sectors = synth.generate_network(config)
    except synth.LayoutError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    observations = synth.generate_observations(sectors, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "infrastructure.csv").open("w", encoding="utf-8", newline="") as fh:
        ingest.write_infrastructure(sectors, fh)
    with (out / "measurements.csv").open("w", encoding="utf-8", newline="") as fh:
        ingest.write_measurements(observations, fh)
    params = synth.dataclasses.asdict(config)
    params["route"] = [[p.lat_deg, p.lon_deg] for p in config.effective_route()]
    params["boresight_coverage_radius_m"] = synth.coverage_radius(config)
    _write_manifest(out / "manifest.json", "synth", [Path(args.config)] if args.config else [], params)
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=float, default=4.0, help="path loss exponent for the RPL shape")
    p.add_argument("--m", type=int, default=3, help="number of neighbor BSs for the mean distance")
    p.add_argument("--c", type=float, default=1.0, help="RPL size coefficient")
    p.add_argument("--grid-size", type=int, default=720, help="azimuth samples on the boundary")


def _add_eval_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--infra", type=Path, required=True)
    p.add_argument("--measurements", type=Path, required=True)
    p.add_argument("--sector", type=_sector_key, action="append",
                   help="restrict to NETWORK:SECTOR (repeatable)")
    p.add_argument("--top", type=int, default=None,
                   help="keep only the N sectors per network with the most records")
    p.add_argument("--n-grid", type=_float_list, default=list(evaluate.DEFAULT_N_GRID))
    p.add_argument("--m-grid", type=_int_list, default=list(evaluate.DEFAULT_M_GRID))
    _add_params(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rplkit", description="Region-of-plausible-location estimation "
                                     "for CDR serving sectors, with best-server evaluation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rpl", help="write the RPL of one sector as GeoJSON")
    p.add_argument("--infra", type=Path, required=True)
    p.add_argument("--sector", type=_sector_key, required=True, help="NETWORK:SECTOR")
    p.add_argument("--out", required=True, help="output GeoJSON path")
    _add_params(p)
    p.set_defaults(func=cmd_rpl)

    p = sub.add_parser("evaluate", help="best-server evaluation at fixed parameters")
    _add_eval_inputs(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--geojson", action="store_true", help="also write per-sector GeoJSON bundles")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="per-sector (n, M) sweep table")
    _add_eval_inputs(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="print a human-readable evaluation report")
    _add_eval_inputs(p)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic infrastructure + measurement pair")
    p.add_argument("--config", type=Path, help="key = value scenario file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "n_grid", None) == [] or getattr(args, "m_grid", None) == []:
        print("rplkit: error: --n-grid and --m-grid must be nonempty", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rplkit: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"rplkit: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
