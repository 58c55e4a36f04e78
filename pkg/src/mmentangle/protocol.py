"""Campaign orchestration: rotation trial, sidereal sweep, Bell test.

Every campaign point gets its own random-stream family, numbered by its
position in the campaign plan (stage index for the rotation trial,
``time_index * n_stages + stage_index`` for the sweep, setting index for the
Bell test). Results therefore do not depend on execution order or on the
number of worker threads.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import analysis, montecarlo, physics
from .config import ROTATION_TARGET_SHIFT, CampaignConfig
from .errors import ConfigError, EmptyTallyError

HALF_PI = 0.5 * math.pi
_STAGE_TOL = 1e-12

NOMINAL_LENGTH_M = 6.25
NOMINAL_WAVELENGTH_M = 1550e-9
ROUNDED_WAVELENGTH_M = 1500e-9
ROUNDED_C = 3.0e8
ROUNDED_SPEED = 3.0e4


class Decision(str, enum.Enum):
    PREFERRED_FRAME_DETECTED = "PreferredFrameDetected"
    NO_SHIFT_DETECTED = "NoShiftDetected"


@dataclass(frozen=True)
class PointResult:
    t_sidereal: float
    stage: float
    tally: montecarlo.Tally
    estimate: analysis.ProportionEstimate
    expected_p_same: float


@dataclass(frozen=True)
class VerdictReport:
    model: str
    points: list[PointResult]
    shift: analysis.ShiftTest
    decision: Decision
    delta_phi: float
    delta_phi_stderr: float
    expected_delta_phi: float
    t_sidereal: float
    sizing: dict


@dataclass(frozen=True)
class SweepRow:
    t_sidereal: float
    stage: float
    model: str
    tally: montecarlo.Tally
    estimate: analysis.ProportionEstimate
    expected_p_same: float


def _stage_index(stages, target: float) -> Optional[int]:
    for i, s in enumerate(stages):
        if abs(s - target) <= _STAGE_TOL:
            return i
    return None


def apparatus_sizing_report(cfg: CampaignConfig, target_shift: float = ROTATION_TARGET_SHIFT) -> dict:
    """Arm-length sum needed for ``target_shift`` under the configured and the rounded constants.

    The 6.25 m nominal figure comes out only with 1500 nm photons and
    ``v/c = 1e-4`` exactly; 1550 nm at 30 km/s with the exact ``c`` needs
    about 6.449 m. Both numbers, and the gap, are reported.
    """
    c = cfg.constants.c
    configured = None
    if cfg.wind.speed > 0:
        configured = physics.size_apparatus_for_shift(target_shift, cfg.source, cfg.wind, cfg.constants)
    rounded_consts = physics.PhysicalConstants(ROUNDED_C)
    rounded = physics.size_apparatus_for_shift(
        target_shift,
        physics.SourceSpec.from_wavelengths(ROUNDED_WAVELENGTH_M, consts=rounded_consts),
        physics.EtherWind(ROUNDED_SPEED),
        rounded_consts,
    )
    nominal_exact = physics.size_apparatus_for_shift(
        target_shift,
        physics.SourceSpec.from_wavelengths(NOMINAL_WAVELENGTH_M),
        physics.EtherWind(30_000.0),
    )
    shift_at_nominal = None
    if cfg.wind.speed > 0:
        arms = physics.ArmGeometry(0.8 * NOMINAL_LENGTH_M, 0.2 * NOMINAL_LENGTH_M)
        shift_at_nominal = physics.rotation_phase_shift(arms, arms, cfg.source, cfg.wind, cfg.constants)
    return {
        "target_shift_rad": target_shift,
        "configured_wavelengths_m": list(cfg.wavelengths),
        "configured_wind_speed": cfg.wind.speed,
        "configured_c": c,
        "configured_l_plus_s_m": configured,
        "apparatus_l_plus_s_m": [cfg.arms_a.total, cfg.arms_b.total],
        "nominal_l_plus_s_m": NOMINAL_LENGTH_M,
        "nominal_wavelength_m": NOMINAL_WAVELENGTH_M,
        "l_plus_s_at_nominal_wavelength_exact_c_m": nominal_exact,
        "nominal_relative_discrepancy": nominal_exact / NOMINAL_LENGTH_M - 1.0,
        "l_plus_s_at_1500nm_beta_1e-4_m": rounded,
        "shift_of_nominal_length_with_configured_constants_rad": shift_at_nominal,
        "note": (
            "6.25 m yields a pi/6 shift only for 1500 nm photons with v/c = 1e-4; "
            f"1550 nm photons at 30 km/s with c = {physics.C_CODATA:.0f} m/s need "
            f"{nominal_exact:.4f} m"
        ),
    }


def best_aligned_time(cfg: CampaignConfig) -> float:
    """Sidereal time on the configured grid with the largest expected rotation shift."""
    if cfg.mode == "aligned":
        return 0.0
    if not cfg.sidereal_hours:
        raise ConfigError("sidereal_hours", "must not be empty")
    best_t, best = cfg.sidereal_hours[0], -1.0
    for t in cfg.sidereal_hours:
        shift = abs(montecarlo.orientation_phase(cfg, HALF_PI, t))
        if shift > best:
            best_t, best = t, shift
    return best_t


def _run_points(cfg: CampaignConfig, plan, threads: int) -> list[montecarlo.Tally]:
    """Simulate ``plan`` = [(point index, stage, t)], each with its own stream family."""

    def work(item):
        point, stage, t = item
        return montecarlo.simulate_campaign_point(
            cfg, stage, t, cfg.events_per_point, cfg.rng, point=point, threads=1
        )

    if threads > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, plan))
    return [
        montecarlo.simulate_campaign_point(
            cfg, stage, t, cfg.events_per_point, cfg.rng, point=point, threads=threads
        )
        for point, stage, t in plan
    ]


def run_rotation_campaign(cfg: CampaignConfig, threads: int = 1) -> VerdictReport:
    """Simulate every scheduled stage and test stage 0 against stage pi/2."""
    i0, i90 = _stage_index(cfg.stages, 0.0), _stage_index(cfg.stages, HALF_PI)
    if i0 is None or i90 is None:
        raise ConfigError("stages_deg", "rotation campaign needs stages 0 and 90 degrees")
    if cfg.mode == "aligned":
        for i, st in enumerate(cfg.stages):
            if i not in (i0, i90):
                raise ConfigError(f"stages_deg[{i}]", "aligned mode only supports 0 and 90 degrees")
    t = best_aligned_time(cfg)
    plan = [(k, st, t) for k, st in enumerate(cfg.stages)]
    tallies = _run_points(cfg, plan, threads)
    points = [
        PointResult(t, st, tl, analysis.estimate_p_same(tl), montecarlo.expected_p_same(cfg, st, t))
        for (_, st, _), tl in zip(plan, tallies)
    ]
    before, after = tallies[i0], tallies[i90]
    shift = analysis.two_proportion_z(before, after, cfg.sigma_threshold)
    delta = physics.phase_from_p_same(shift.p_after.p_hat) - physics.phase_from_p_same(shift.p_before.p_hat)
    # delta-method: d(arccos(2p-1))/dp = -1/sqrt(p(1-p)), so each side contributes 1/n
    delta_se = math.sqrt(1.0 / shift.p_before.n + 1.0 / shift.p_after.n)
    decision = Decision.PREFERRED_FRAME_DETECTED if shift.significant else Decision.NO_SHIFT_DETECTED
    return VerdictReport(
        model=cfg.model,
        points=points,
        shift=shift,
        decision=decision,
        delta_phi=delta,
        delta_phi_stderr=delta_se,
        expected_delta_phi=montecarlo.orientation_phase(cfg, HALF_PI, t),
        t_sidereal=t,
        sizing=apparatus_sizing_report(cfg),
    )


def run_sidereal_sweep(cfg: CampaignConfig, threads: int = 1) -> list[SweepRow]:
    """One estimate per (sidereal time, stage); trims re-set at stage 0 of each time."""
    if cfg.mode != "projected":
        raise ConfigError("mode", "sidereal sweep needs projected mode")
    if cfg.site is None:
        raise ConfigError("site", "sidereal sweep needs a lab site")
    if not cfg.sidereal_hours:
        raise ConfigError("sidereal_hours", "must not be empty")
    n_st = len(cfg.stages)
    plan = [
        (i * n_st + j, st, t)
        for i, t in enumerate(cfg.sidereal_hours)
        for j, st in enumerate(cfg.stages)
    ]
    tallies = _run_points(cfg, plan, threads)
    return [
        SweepRow(t, st, cfg.model, tl, analysis.estimate_p_same(tl), montecarlo.expected_p_same(cfg, st, t))
        for (_, st, t), tl in zip(plan, tallies)
    ]


def sweep_shift_profile(rows: list[SweepRow]) -> list[tuple[float, float]]:
    """(t, |p(stage 0) - p(stage pi/2)|) per sidereal time, from the estimates."""
    by_time: dict[float, dict[str, float]] = {}
    for r in rows:
        slot = by_time.setdefault(r.t_sidereal, {})
        if abs(r.stage) <= _STAGE_TOL:
            slot["before"] = r.estimate.p_hat
        elif abs(r.stage - HALF_PI) <= _STAGE_TOL:
            slot["after"] = r.estimate.p_hat
    return [
        (t, abs(s["before"] - s["after"]))
        for t, s in by_time.items()
        if "before" in s and "after" in s
    ]


def bell_setting_phases(cfg: CampaignConfig) -> list[float]:
    """Total phase for the four setting pairs (a1,b1), (a1,b2), (a2,b1), (a2,b2)."""
    ch = cfg.chsh
    if ch is None:
        raise ConfigError("chsh", "Bell campaign needs chsh settings")
    return [ch.base_phase + a + b for a in ch.alpha for b in ch.beta]


def run_bell_campaign(cfg: CampaignConfig, threads: int = 1) -> analysis.ChshResult:
    """Four equal-budget runs with local phase offsets added to each side's trim."""
    phases = bell_setting_phases(cfg)
    if cfg.events_per_point == 0:
        raise EmptyTallyError("Bell campaign with zero events per setting")

    def work(item):
        k, phi = item
        return montecarlo.simulate_batch(
            cfg.events_per_point, phi, cfg.rng, point=k, detector=cfg.detector
        )

    items = list(enumerate(phases))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tallies = list(pool.map(work, items))
    else:
        tallies = [work(it) for it in items]
    return analysis.chsh(tallies, cfg.chsh.subtract)

