import csv
import json

import numpy as np
import pytest

from rplkit import ingest
from rplkit.cli import main
from rplkit.geo import GeoPoint, range_bearing

CONFIG = "seed = 11\nn_sites = 8\nregion_km = 8\nscan_spacing_m = 100\n"


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    cfg = root / "scenario.cfg"
    cfg.write_text(CONFIG)
    assert main(["synth", "--config", str(cfg), "--out", str(root / "data")]) == 0
    return root / "data"


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_eval(data, out, *extra, cmd="evaluate"):
    return main([cmd, "--infra", str(data / "infrastructure.csv"),
                 "--measurements", str(data / "measurements.csv"), "--out", str(out), *extra])


class TestSynth:
    def test_byte_identical(self, data, tmp_path):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(CONFIG)
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "again")]) == 0
        for name in ("infrastructure.csv", "measurements.csv"):
            assert (tmp_path / "again" / name).read_bytes() == (data / name).read_bytes()

    def test_round_trip_without_diagnostics(self, data):
        with open(data / "infrastructure.csv", newline="") as fh:
            infra = ingest.parse_infrastructure(fh)
        with open(data / "measurements.csv", newline="") as fh:
            meas = ingest.parse_measurements(fh, {s.key for s in infra.records})
        assert not infra.diagnostics and not meas.diagnostics
        assert len(infra.records) == 24 and meas.records
        assert all(o.known for o in meas.records)

    def test_manifest(self, data):
        m = json.loads((data / "manifest.json").read_text())
        assert m["command"] == "synth" and m["parameters"]["seed"] == 11
        assert len(m["inputs"]) == 1 and len(m["inputs"][0]["sha256"]) == 64

    def test_seed_override_and_bad_config(self, tmp_path):
        assert main(["synth", "--seed", "3", "--out", str(tmp_path / "a")]) == 0
        bad = tmp_path / "bad.cfg"
        bad.write_text("n_sites = 1\n")
        assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "b")]) == 1
        assert main(["synth", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "c")]) == 1


class TestRpl:
    def invoke(self, data, out, *extra, sector="SYN:S000-0"):
        return main(["rpl", "--infra", str(data / "infrastructure.csv"), "--sector", sector, "--out", str(out), *extra])

    def test_writes_feature(self, data, tmp_path):
        out = tmp_path / "r.geojson"
        assert self.invoke(data, out) == 0
        f = json.loads(out.read_text())
        assert f["type"] == "Feature" and f["properties"]["sector_id"] == "S000-0"
        assert (tmp_path / "r.geojson.manifest.json").exists()

    def test_unknown_sector(self, data, tmp_path):
        out = tmp_path / "r.geojson"
        assert self.invoke(data, out, sector="SYN:nope") == 2
        assert not out.exists()

    def test_missing_file(self, tmp_path):
        assert main(["rpl", "--infra", str(tmp_path / "x.csv"), "--sector", "A:b", "--out", str(tmp_path / "o")]) == 1

    def test_c_linearity(self, data, tmp_path):
        infra = {tuple(r[k] for k in ("network_id", "sector_id")): r for r in rows(data / "infrastructure.csv")}
        site = infra[("SYN", "S000-0")]
        anchor = GeoPoint(float(site["lat_deg"]), float(site["lon_deg"]))
        radii = {}
        for c in ("1", "2"):
            out = tmp_path / f"c{c}.geojson"
            assert self.invoke(data, out, "--c", c) == 0
            ring = json.loads(out.read_text())["geometry"]["coordinates"][0]
            radii[c] = np.array([range_bearing(anchor, GeoPoint(lat, lon))[0] for lon, lat in ring[:-1]])
        np.testing.assert_allclose(radii["2"], 2 * radii["1"], rtol=1e-9)


class TestEvaluate:
    def test_outputs_and_counts(self, data, tmp_path):
        assert run_eval(data, tmp_path, "--geojson") == 0
        summary = rows(tmp_path / "summary.csv")
        assert summary and all(int(r["n_outside"]) <= int(r["n_records"]) for r in summary)
        keys = [(r["network_id"], r["sector_id"]) for r in summary]
        assert keys == sorted(keys)
        bundle = json.loads((tmp_path / "geojson" / f"SYN_{summary[0]['sector_id']}.geojson").read_text())
        points = [f for f in bundle["features"] if f["geometry"]["type"] == "Point"]
        assert len(points) == int(summary[0]["n_records"])
        assert sum(not p["properties"]["inside"] for p in points) == int(summary[0]["n_outside"])
        assert "aggregate:" in (tmp_path / "report.txt").read_text()

    def test_single_sector_filter(self, data, tmp_path):
        first = rows_first(data, tmp_path / "all")
        assert run_eval(data, tmp_path / "one", "--sector", f"SYN:{first}") == 0
        assert [r["sector_id"] for r in rows(tmp_path / "one" / "summary.csv")] == [first]

    def test_unknown_filter(self, data, tmp_path):
        assert run_eval(data, tmp_path, "--sector", "SYN:nope") == 2

    def test_empty_join(self, data, tmp_path):
        other = tmp_path / "infra.csv"
        text = (data / "infrastructure.csv").read_text().replace("SYN,", "OTHER,")
        other.write_text(text)
        code = main(["evaluate", "--infra", str(other), "--measurements", str(data / "measurements.csv"),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_global_c_closure(self, data, tmp_path):
        assert run_eval(data, tmp_path / "base") == 0
        summary = rows(tmp_path / "base" / "summary.csv")
        g = max(float(r["c_star"]) for r in summary)
        assert sum(int(r["n_outside"]) for r in summary) > 0
        assert run_eval(data, tmp_path / "fixed", "--c", repr(g)) == 0
        assert all(int(r["n_outside"]) == 0 for r in rows(tmp_path / "fixed" / "summary.csv"))

    def test_report_stdout(self, data, capsys, tmp_path):
        args = ["report", "--infra", str(data / "infrastructure.csv"), "--measurements", str(data / "measurements.csv")]
        assert main(args) == 0
        text = capsys.readouterr().out
        assert text.startswith("RPL evaluation") and "aggregate:" in text
        assert run_eval(data, tmp_path / "e") == 0
        assert text == (tmp_path / "e" / "report.txt").read_text()

    def test_infeasible_exit(self, tmp_path):
        infra = tmp_path / "i.csv"
        infra.write_text(
            "network_id,sector_id,lat_deg,lon_deg,azimuth_deg,hpbw_deg,height_m,freq_hz,fb_db\n"
            "A,s,28.5,-81.5,0,66,10,,\nA,t,28.52,-81.5,0,66,10,,\n"
        )
        meas = tmp_path / "m.csv"
        meas.write_text("scan_id,timestamp,lat_deg,lon_deg,network_id,sector_id,rsrp_dbm\n1,0,28.7,-81.5,A,s,-100\n")
        code = main(["evaluate", "--infra", str(infra), "--measurements", str(meas), "--out", str(tmp_path / "o")])
        assert code == 3


def rows_first(data, out):
    assert run_eval(data, out) == 0
    return rows(out / "summary.csv")[0]["sector_id"]


class TestSweep:
    def test_nine_rows_per_sector(self, data, tmp_path):
        assert run_eval(data, tmp_path, cmd="sweep") == 0
        table = rows(tmp_path / "sweep.csv")
        per = {}
        for r in table:
            per.setdefault(r["sector_id"], []).append(r)
        assert per and all(len(v) == 9 for v in per.values())
        assert all(sum(r["is_optimal"] == "true" for r in v) == 1 for v in per.values())

    def test_rederivable_by_evaluate(self, data, tmp_path):
        assert run_eval(data, tmp_path / "sw", cmd="sweep") == 0
        table = rows(tmp_path / "sw" / "sweep.csv")
        for n in (2, 3, 4):
            for m in (1, 2, 3):
                out = tmp_path / f"e{n}{m}"
                assert run_eval(data, out, "--n", str(n), "--m", str(m), "--n-grid", str(n), "--m-grid", str(m)) == 0
                for r in rows(out / "summary.csv"):
                    (ref,) = [t for t in table if t["sector_id"] == r["sector_id"]
                              and float(t["n"]) == n and int(t["m"]) == m]
                    assert float(r["c_star"]) == float(ref["c_star"])
                    assert float(r["optimal_area_m2"]) == float(ref["area_m2"])

    def test_empty_grid(self, data, tmp_path):
        assert run_eval(data, tmp_path, "--n-grid", "", cmd="sweep") == 2
