"""Closed-form optics of the two-interferometer rotation experiment.

Round-trip light times in an arm moving through a hypothetical ether, the
optical path differences they produce, the phase shift picked up when the
setup is rotated by 90 degrees, and the joint outcome law of the entangled
pair.

Sign conventions follow the formulas as usually written:

* relativistic path difference is ``(l - s) / c`` (long minus short);
* ``ShortParallel`` preferred-frame difference is short-arm time minus
  long-arm time, ``LongParallel`` is long-arm time minus short-arm time;
* ``Angled`` uses long minus short.

Only the rotation shift (a difference of differences) is consumed by the
simulator, and the conventions cancel there.

All "exact" quantities avoid the Taylor expansions; the leading-order forms
live in the ``*_approx`` functions and are meant for cross-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

C_CODATA = 299_792_458.0
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = C_CODATA

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"speed of light must be positive, got {self.c}")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SourceSpec:
    """Angular frequencies (rad/s) of the two photons of a pair."""

    omega_a: float
    omega_b: float

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise DomainError("angular frequencies must be positive")

    @classmethod
    def from_wavelengths(
        cls,
        wavelength_a: float,
        wavelength_b: float | None = None,
        consts: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "SourceSpec":
        if wavelength_b is None:
            wavelength_b = wavelength_a
        if not (wavelength_a > 0 and wavelength_b > 0):
            raise DomainError("wavelengths must be positive")
        return cls(TWO_PI * consts.c / wavelength_a, TWO_PI * consts.c / wavelength_b)

    def wavelengths(self, consts: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
        return TWO_PI * consts.c / self.omega_a, TWO_PI * consts.c / self.omega_b

    def frequencies(self) -> tuple[float, float]:
        return self.omega_a / TWO_PI, self.omega_b / TWO_PI


@dataclass(frozen=True)
class ArmGeometry:
    """Long arm ``l``, short arm ``s`` (metres) and a fine-trim phase in [0, 2pi)."""

    l: float
    s: float
    trim: float = 0.0

    def __post_init__(self):
        if not (self.l > self.s > 0):
            raise DomainError(f"arm lengths need l > s > 0, got l={self.l}, s={self.s}")
        if not (0.0 <= self.trim < TWO_PI):
            raise DomainError(f"trim must lie in [0, 2pi), got {self.trim}")

    @property
    def total(self) -> float:
        return self.l + self.s


@dataclass(frozen=True)
class EtherWind:
    """Lab velocity relative to the preferred frame.

    ``direction`` is a unit vector in the equatorial frame; it only matters
    for projected-geometry runs. ``speed < c`` is checked where ``c`` is known.
    """

    speed: float
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.speed >= 0 and math.isfinite(self.speed)):
            raise DomainError(f"wind speed must be finite and >= 0, got {self.speed}")
        norm = math.sqrt(sum(x * x for x in self.direction))
        if len(self.direction) != 3 or abs(norm - 1.0) > 1e-9:
            raise DomainError("wind direction must be a unit 3-vector")

    def beta2(self, consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        if self.speed >= consts.c:
            raise DomainError(f"wind speed {self.speed} must be below c = {consts.c}")
        return (self.speed / consts.c) ** 2


@dataclass(frozen=True)
class Relativistic:
    """Same light speed along every arm: no orientation dependence."""


@dataclass(frozen=True)
class PreferredFrame:
    wind: EtherWind


PhaseModel = Union[Relativistic, PreferredFrame]


class Orientation(enum.Enum):
    SHORT_PARALLEL = "short_parallel"
    LONG_PARALLEL = "long_parallel"


@dataclass(frozen=True)
class Angled:
    """Arm-to-wind angles (rad) for the short and long arm."""

    theta_s: float
    theta_l: float


@dataclass(frozen=True)
class JointProbabilities:
    p_same: float
    p_diff: float


def _check_length(L: float) -> None:
    if not L > 0:
        raise DomainError(f"arm length must be positive, got {L}")


# -- round-trip times -------------------------------------------------------


def roundtrip_time_parallel(
    L: float, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """``2 L c / (c^2 - v^2)``: there and back along the wind."""
    _check_length(L)
    wind.beta2(consts)
    c, v = consts.c, wind.speed
    return 2.0 * L * c / (c * c - v * v)


def roundtrip_time_perpendicular(
    L: float, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """``2 L / sqrt(c^2 - v^2)``: there and back across the wind."""
    _check_length(L)
    wind.beta2(consts)
    c, v = consts.c, wind.speed
    return 2.0 * L / math.sqrt(c * c - v * v)


def roundtrip_time_at_angle(
    L: float, theta: float, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Round trip along an arm at angle ``theta`` to the wind.

    ``(2L/c) * sqrt(1 - b^2 sin^2 theta) / (1 - b^2)`` with ``b = v/c``.
    ``theta`` is used modulo pi; the two axis-aligned cases defer to the
    dedicated functions so the boundary values coincide bit for bit.
    """
    _check_length(L)
    b2 = wind.beta2(consts)
    reduced = math.fmod(theta, math.pi)
    if reduced < 0:
        reduced += math.pi
    if reduced == 0.0:
        return roundtrip_time_parallel(L, wind, consts)
    if reduced == 0.5 * math.pi:
        return roundtrip_time_perpendicular(L, wind, consts)
    sin2 = math.sin(reduced) ** 2
    return 2.0 * L / consts.c * math.sqrt(1.0 - b2 * sin2) / (1.0 - b2)


def roundtrip_excess_at_angle(
    L: float, theta: float, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """``roundtrip_time_at_angle - 2L/c`` without cancellation.

    Uses ``sqrt(1-x)/(1-b2) - 1 = b2 * (1 - sin2/(1 + sqrt(1-x))) / (1-b2)``
    with ``x = b2 sin2``, so the result keeps full relative precision even
    when ``b`` is 1e-5 and the excess is ten orders below the round trip.
    """
    _check_length(L)
    b2 = wind.beta2(consts)
    sin2 = math.sin(theta) ** 2
    root = math.sqrt(1.0 - b2 * sin2)
    factor = b2 * (1.0 - sin2 / (1.0 + root)) / (1.0 - b2)
    return 2.0 * L / consts.c * factor


# -- path differences --------------------------------------------------------


def optical_path_difference(
    arms: ArmGeometry,
    model: PhaseModel,
    orientation: Orientation | Angled = Orientation.SHORT_PARALLEL,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Travel-time difference between the two arms of one interferometer (s).

    Relativistic: ``(l - s)/c`` whatever the orientation.
    Preferred frame: exact difference of round-trip times, in the sign
    convention of the orientation (see module docstring). At ``v = 0`` the
    preferred-frame value is ``+-2(l - s)/c``: it counts the full round trip,
    the relativistic expression does not.
    """
    if isinstance(model, Relativistic):
        return (arms.l - arms.s) / consts.c
    wind = model.wind
    base = 2.0 * (arms.l - arms.s) / consts.c
    half_pi = 0.5 * math.pi
    if orientation is Orientation.SHORT_PARALLEL:
        exc_s = roundtrip_excess_at_angle(arms.s, 0.0, wind, consts)
        exc_l = roundtrip_excess_at_angle(arms.l, half_pi, wind, consts)
        return -base + (exc_s - exc_l)
    if orientation is Orientation.LONG_PARALLEL:
        exc_l = roundtrip_excess_at_angle(arms.l, 0.0, wind, consts)
        exc_s = roundtrip_excess_at_angle(arms.s, half_pi, wind, consts)
        return base + (exc_l - exc_s)
    exc_l = roundtrip_excess_at_angle(arms.l, orientation.theta_l, wind, consts)
    exc_s = roundtrip_excess_at_angle(arms.s, orientation.theta_s, wind, consts)
    return base + (exc_l - exc_s)


def rotation_path_difference_total(
    arms: ArmGeometry, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Exact ``tau_1 + tau_2``: change of the path difference under a 90 degree turn.

    The ``+-2(l-s)/c`` parts of the two orientations cancel exactly, so only
    the round-trip excesses are summed.
    """
    half_pi = 0.5 * math.pi
    ex = roundtrip_excess_at_angle
    return (ex(arms.s, 0.0, wind, consts) - ex(arms.s, half_pi, wind, consts)) + (
        ex(arms.l, 0.0, wind, consts) - ex(arms.l, half_pi, wind, consts)
    )


def rotation_path_difference_approx(
    arms: ArmGeometry, wind: EtherWind, consts: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Leading-order ``(l + s) v^2 / c^3``."""
    wind.beta2(consts)
    return arms.total * wind.speed**2 / consts.c**3


def rotation_phase_shift(
    arms_a: ArmGeometry,
    arms_b: ArmGeometry,
    source: SourceSpec,
    wind: EtherWind,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """``omega_A tau_A + omega_B tau_B`` from the exact per-interferometer shifts."""
    tau_a = rotation_path_difference_total(arms_a, wind, consts)
    tau_b = rotation_path_difference_total(arms_b, wind, consts)
    return source.omega_a * tau_a + source.omega_b * tau_b


def rotation_phase_shift_approx(
    arms_a: ArmGeometry,
    arms_b: ArmGeometry,
    source: SourceSpec,
    wind: EtherWind,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Leading-order shift; equals ``4 pi (l+s)/lambda * b^2`` for identical arms and photons."""
    return source.omega_a * rotation_path_difference_approx(
        arms_a, wind, consts
    ) + source.omega_b * rotation_path_difference_approx(arms_b, wind, consts)


def size_apparatus_for_shift(
    target_shift: float,
    source: SourceSpec,
    wind: EtherWind,
    consts: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Arm-length sum ``l + s`` giving ``target_shift`` under the leading-order law.

    For equal photons this is ``target * lambda * c^2 / (4 pi v^2)``.
    """
    if not target_shift > 0:
        raise DomainError(f"target shift must be positive, got {target_shift}")
    wind.beta2(consts)
    if wind.speed == 0:
        raise DomainError("no finite apparatus produces a shift without wind")
    c = consts.c
    return target_shift * c**3 / ((source.omega_a + source.omega_b) * wind.speed**2)


# -- outcome law --------------------------------------------------------------


def joint_probabilities(phi: float) -> JointProbabilities:
    p_same = 0.5 * (1.0 + math.cos(phi))
    return JointProbabilities(p_same=p_same, p_diff=1.0 - p_same)


def correlation(phi: float) -> float:
    """``E = P(a=b) - P(a!=b) = cos phi``."""
    return math.cos(phi)


def phase_from_p_same(p_same: float) -> float:
    """Principal-branch inverse of the outcome law: phase in [0, pi]."""
    x = float(np.clip(2.0 * p_same - 1.0, -1.0, 1.0))
    return math.acos(x)
