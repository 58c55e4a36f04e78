"""Arm-to-wind angles as the Earth turns.

Frame conventions
-----------------
The wind direction is a unit vector in an equatorial frame: ``z`` along the
Earth's rotation axis, ``x`` towards local sidereal angle zero. A lab at
latitude ``phi`` and local sidereal time ``t`` (hours) has

    up    = (cos phi cos h, cos phi sin h, sin phi),  h = 2 pi t / 24
    east  = (-sin h, cos h, 0)
    north = up x east, rotated into (-sin phi cos h, -sin phi sin h, cos phi)

The short arm points at azimuth ``arm_azimuth + stage`` (measured from north
through east); the long arm is 90 degrees further round. The site longitude
is folded into ``t``.

Two angles are offered: :func:`arm_wind_angle` uses the wind projected onto
the horizontal plane, :func:`arm_wind_angle_3d` uses the full 3-D wind. Both
are folded into [0, pi/2] since a two-way light path cannot tell an axis
from its reverse. Campaign phases use the 3-D angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError

SIDEREAL_DAY_HOURS = 24.0
HALF_PI = 0.5 * math.pi
_STAGE_TOL = 1e-12


@dataclass(frozen=True)
class LabSite:
    """Latitude and stage-zero short-arm azimuth, both in radians."""

    latitude: float
    arm_azimuth: float = 0.0

    def __post_init__(self):
        if not (-HALF_PI <= self.latitude <= HALF_PI):
            raise DomainError(f"latitude {self.latitude} outside [-pi/2, pi/2]")
        if not (0.0 <= self.arm_azimuth < 2.0 * math.pi):
            raise DomainError(f"arm azimuth {self.arm_azimuth} outside [0, 2pi)")


def local_frame(site: LabSite, t_sidereal: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(up, east, north) unit vectors of the lab in the equatorial frame."""
    h = 2.0 * math.pi * math.fmod(t_sidereal, SIDEREAL_DAY_HOURS) / SIDEREAL_DAY_HOURS
    cp, sp = math.cos(site.latitude), math.sin(site.latitude)
    ch, sh = math.cos(h), math.sin(h)
    up = np.array([cp * ch, cp * sh, sp])
    east = np.array([-sh, ch, 0.0])
    north = np.array([-sp * ch, -sp * sh, cp])
    return up, east, north


def arm_direction(site: LabSite, stage: float, t_sidereal: float, arm: str = "short") -> np.ndarray:
    """Unit vector along the short or long arm."""
    if arm not in ("short", "long"):
        raise ValueError(f"arm must be 'short' or 'long', got {arm!r}")
    _, east, north = local_frame(site, t_sidereal)
    az = site.arm_azimuth + stage + (HALF_PI if arm == "long" else 0.0)
    return math.cos(az) * north + math.sin(az) * east


def _unit(wind_dir) -> np.ndarray:
    w = np.asarray(wind_dir, dtype=float)
    if w.shape != (3,) or abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise DomainError("wind direction must be a unit 3-vector (to 1e-9)")
    return w


def _fold(cos_angle: float) -> float:
    return math.acos(min(1.0, abs(cos_angle)))


def arm_wind_angle(
    site: LabSite, stage: float, wind_dir, t_sidereal: float, arm: str = "short"
) -> float:
    """Angle in [0, pi/2] between the arm and the horizontal projection of the wind."""
    w = _unit(wind_dir)
    up, _, _ = local_frame(site, t_sidereal)
    horizontal = w - np.dot(w, up) * up
    norm = np.linalg.norm(horizontal)
    if norm < 1e-12:
        raise DegenerateGeometryError("wind is along the local vertical")
    a = arm_direction(site, stage, t_sidereal, arm)
    return _fold(float(np.dot(a, horizontal)) / norm)


def arm_wind_angle_3d(
    site: LabSite, stage: float, wind_dir, t_sidereal: float, arm: str = "short"
) -> float:
    """Angle in [0, pi/2] between the arm and the full wind vector."""
    w = _unit(wind_dir)
    a = arm_direction(site, stage, t_sidereal, arm)
    return _fold(float(np.dot(a, w)))


def aligned_mode_angle(stage: float) -> float:
    """Short-arm angle under perfect alignment: 0 at stage 0, pi/2 after the turn."""
    if abs(stage) <= _STAGE_TOL:
        return 0.0
    if abs(stage - HALF_PI) <= _STAGE_TOL:
        return HALF_PI
    raise DomainError(f"aligned mode only knows stages 0 and pi/2, got {stage}")


def aligned_arm_angles(stage: float) -> tuple[float, float]:
    """(short, long) arm-to-wind angles under perfect alignment."""
    theta_s = aligned_mode_angle(stage)
    return theta_s, HALF_PI - theta_s


def wind_along_arm(site: LabSite, t_sidereal: float = 0.0, stage: float = 0.0) -> tuple[float, float, float]:
    """Equatorial unit vector pointing along the short arm at the given time and stage."""
    return tuple(float(x) for x in arm_direction(site, stage, t_sidereal, "short"))
