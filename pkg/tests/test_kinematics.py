import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mmentangle import kinematics
from mmentangle.errors import DegenerateGeometryError, DomainError
from mmentangle.kinematics import LabSite


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def arm_by_rotations(lat, azimuth, t_hours):
    """Arm vector built by chained rotation matrices, independent of local_frame.

    Start at latitude 0, hour angle 0 where north = +z, east = +y, tilt to
    the latitude about -y, then spin the Earth about z.
    """
    north0 = np.array([0.0, 0.0, 1.0])
    east0 = np.array([0.0, 1.0, 0.0])
    arm0 = math.cos(azimuth) * north0 + math.sin(azimuth) * east0
    tilt = rot_y(-lat)
    spin = rot_z(2 * math.pi * t_hours / 24.0)
    return spin @ tilt @ arm0


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


unit_vectors = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: np.linalg.norm(v) > 0.1
).map(lambda v: tuple(unit(v)))
sites = st.builds(LabSite, st.floats(-1.5, 1.5), st.floats(0.0, 6.28))


def test_site_validation():
    with pytest.raises(DomainError):
        LabSite(2.0, 0.0)
    with pytest.raises(DomainError):
        LabSite(0.5, 7.0)


@given(sites, st.floats(0.0, 2 * math.pi), st.floats(0.0, 24.0))
def test_local_frame_orthonormal(site, stage, t):
    up, east, north = kinematics.local_frame(site, t)
    m = np.vstack([up, east, north])
    assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
    arm = kinematics.arm_direction(site, stage, t)
    assert abs(np.dot(arm, up)) < 1e-12


@given(sites, st.floats(0.0, 2 * math.pi), st.floats(0.0, 24.0))
def test_arm_direction_matches_rotation_matrices(site, stage, t):
    got = kinematics.arm_direction(site, stage, t)
    ref = arm_by_rotations(site.latitude, site.arm_azimuth + stage, t)
    assert np.allclose(got, ref, atol=1e-12)


def test_constructed_alignment():
    site = LabSite(math.radians(47.0), 0.3)
    wind = kinematics.wind_along_arm(site, 0.0)
    assert kinematics.arm_wind_angle(site, 0.0, wind, 0.0) == pytest.approx(0.0, abs=1e-7)
    assert kinematics.arm_wind_angle(site, math.pi / 2, wind, 0.0) == pytest.approx(math.pi / 2, abs=1e-12)
    assert kinematics.arm_wind_angle_3d(site, 0.0, wind, 0.0) == pytest.approx(0.0, abs=1e-7)


def test_equator_six_hours_3d():
    # equatorial site, wind in the equatorial plane towards hour angle 0, arm pointing east
    site = LabSite(0.0, math.pi / 2)
    wind = (1.0, 0.0, 0.0)
    a0 = kinematics.arm_wind_angle_3d(site, 0.0, wind, 0.0)
    a6 = kinematics.arm_wind_angle_3d(site, 0.0, wind, 6.0)
    ref0 = math.acos(min(1.0, abs(np.dot(arm_by_rotations(0.0, math.pi / 2, 0.0), wind))))
    ref6 = math.acos(min(1.0, abs(np.dot(arm_by_rotations(0.0, math.pi / 2, 6.0), wind))))
    assert a0 == pytest.approx(ref0, abs=1e-9) and a6 == pytest.approx(ref6, abs=1e-9)
    assert abs(a6 - a0) == pytest.approx(math.pi / 2, abs=1e-9)


def test_pole_six_hours_projected():
    site = LabSite(math.pi / 2, 0.0)
    wind = (1.0, 0.0, 0.0)
    a0 = kinematics.arm_wind_angle(site, 0.0, wind, 0.0)
    a6 = kinematics.arm_wind_angle(site, 0.0, wind, 6.0)
    assert abs(a6 - a0) == pytest.approx(math.pi / 2, abs=1e-9)


def test_vertical_wind_is_degenerate():
    site = LabSite(0.3, 0.0)
    up, _, _ = kinematics.local_frame(site, 5.0)
    with pytest.raises(DegenerateGeometryError):
        kinematics.arm_wind_angle(site, 0.0, tuple(up), 5.0)


def test_wind_must_be_unit():
    with pytest.raises(DomainError):
        kinematics.arm_wind_angle(LabSite(0.3), 0.0, (1.0, 1.0, 0.0), 0.0)


@given(sites, unit_vectors, st.floats(0.0, 2 * math.pi), st.floats(0.0, 24.0))
def test_angles_in_range_and_periodic(site, wind, stage, t):
    for fn in (kinematics.arm_wind_angle, kinematics.arm_wind_angle_3d):
        try:
            a = fn(site, stage, wind, t)
            b = fn(site, stage, wind, t + 24.0)
        except DegenerateGeometryError:
            continue
        assert 0.0 <= a <= math.pi / 2
        assert abs(a - b) <= 1e-9 or abs(math.cos(a) - math.cos(b)) <= 1e-12


@given(sites, unit_vectors, st.floats(0.0, 2 * math.pi), st.floats(0.0, 24.0), st.floats(-3.0, 3.0))
def test_rotation_covariance(site, wind, stage, t, delta):
    """A stage offset of delta turns the arm by delta (clockwise seen from above)."""
    up, _, _ = kinematics.local_frame(site, t)
    w = np.asarray(wind)
    horizontal = w - np.dot(w, up) * up
    assume(np.linalg.norm(horizontal) > 1e-3)
    a = kinematics.arm_direction(site, stage, t)
    signed = math.atan2(np.dot(np.cross(a, horizontal), up), np.dot(a, horizontal))
    turned = kinematics.arm_wind_angle(site, stage + delta, wind, t)
    assert math.cos(turned) == pytest.approx(abs(math.cos(signed + delta)), abs=1e-9)


def test_aligned_mode():
    assert kinematics.aligned_mode_angle(0.0) == 0.0
    assert kinematics.aligned_mode_angle(math.pi / 2) == math.pi / 2
    assert kinematics.aligned_arm_angles(0.0) == (0.0, math.pi / 2)
    assert kinematics.aligned_arm_angles(math.pi / 2) == (math.pi / 2, 0.0)
    for bad in (0.1, math.pi, 3 * math.pi / 2):
        with pytest.raises(DomainError):
            kinematics.aligned_mode_angle(bad)


def test_aligned_mode_consistent_with_geometry():
    site = LabSite(math.radians(47.0), 0.0)
    wind = kinematics.wind_along_arm(site, 0.0)
    for stage in (0.0, math.pi / 2):
        assert kinematics.arm_wind_angle(site, stage, wind, 0.0) == pytest.approx(
            kinematics.aligned_mode_angle(stage), abs=1e-7
        )
