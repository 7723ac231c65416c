import math

import pytest
from hypothesis import given, strategies as st

from rplkit.geo import (
    GeoPoint,
    LocalVector,
    OutOfRangeError,
    destination,
    project,
    range_bearing,
    unproject,
)

WG = GeoPoint(28.565, -81.586)


def test_identity_projection():
    v = project(WG, WG)
    assert (v.east_m, v.north_m) == (0.0, 0.0)


def test_north_offset():
    # 6371000 * radians(0.009) = 1000.7543 m
    v = project(WG, GeoPoint(28.574, -81.586))
    assert v.east_m == 0.0
    assert v.north_m == pytest.approx(1000.754, abs=1e-3)
    assert v.north_m == pytest.approx(1000.6, abs=1.0)


def test_east_offset_at_equator():
    v = project(GeoPoint(0, 0), GeoPoint(0, 0.01))
    assert v.north_m == 0.0
    assert v.east_m == pytest.approx(1111.949266, abs=1e-5)


def test_range_bearing_axes():
    r, b = range_bearing(WG, GeoPoint(28.574, -81.586))
    assert r == pytest.approx(1000.754, abs=1e-3)
    assert b == 0.0
    assert range_bearing(GeoPoint(0, 0), GeoPoint(0, 0.01))[1] == pytest.approx(90.0)
    assert range_bearing(WG, WG) == (0.0, 0.0)


def test_out_of_range():
    with pytest.raises(OutOfRangeError):
        project(WG, GeoPoint(30.0, -81.586))


def test_point_validation():
    with pytest.raises(ValueError):
        GeoPoint(91.0, 0.0)
    assert GeoPoint(0.0, 180.0).lon_deg == -180.0
    assert GeoPoint(0.0, 190.0).lon_deg == pytest.approx(-170.0)


def test_antimeridian_wrap():
    v = project(GeoPoint(0.0, 179.995), GeoPoint(0.0, -179.995))
    assert v.east_m == pytest.approx(1111.949, abs=1e-2)


@given(
    r=st.floats(1.0, 20_000.0),
    bearing=st.floats(0.0, 359.999),
    lat=st.floats(-60.0, 60.0),
    lon=st.floats(-179.0, 179.0),
)
def test_round_trip_through_range_bearing(r, bearing, lat, lon):
    anchor = GeoPoint(lat, lon)
    b = math.radians(bearing)
    east, north = r * math.sin(b), r * math.cos(b)
    p = unproject(LocalVector(east, north, anchor))
    v = project(anchor, p)
    assert v.east_m == pytest.approx(east, abs=1e-6)
    assert v.north_m == pytest.approx(north, abs=1e-6)

    r2, b2 = range_bearing(anchor, p)
    q = destination(anchor, r2, b2)
    w = project(anchor, q)
    assert w.east_m == pytest.approx(east, abs=1e-6)
    assert w.north_m == pytest.approx(north, abs=1e-6)


@given(east=st.floats(-20_000, 20_000), north=st.floats(-20_000, 20_000))
def test_reflected_bearing_differs_by_180(east, north):
    if math.hypot(east, north) < 1.0:
        return
    p = unproject(LocalVector(east, north, WG))
    q = unproject(LocalVector(-east, -north, WG))
    _, b1 = range_bearing(WG, p)
    _, b2 = range_bearing(WG, q)
    diff = (b2 - b1) % 360.0
    assert min(abs(diff - 180.0), 360.0 - abs(diff - 180.0)) < 1e-6


def test_determinism():
    p = GeoPoint(28.6, -81.5)
    assert project(WG, p) == project(WG, GeoPoint(28.6, -81.5))
