"""Event-level photon-pair sampling and coincidence tallies.

Each pair: photon A and photon B independently take the short or long arm
with probability 1/2. Only matched pairs (short-short, long-long) survive
post-selection; for those an outcome pair is drawn with
``P(a = b) = (1 + cos phi) / 2`` and uniform single-side marginals.

Randomness is split into chunks of ``RngPolicy.chunk_size`` events. Chunk
``k`` of campaign point ``p`` always draws from the stream seeded by
``SeedSequence(master_seed, spawn_key=(p, k))``, so tallies do not depend on
how many worker threads run the chunks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kinematics, physics


class Path(enum.IntEnum):
    SHORT = 0
    LONG = 1


class Outcome(enum.IntEnum):
    """Detector label: ``PLUS`` fires D(+), ``MINUS`` fires D(-)."""

    PLUS = 0
    MINUS = 1


@dataclass(frozen=True)
class PairEvent:
    path_a: Path
    path_b: Path
    postselected: bool
    outcome_a: Optional[Outcome] = None
    outcome_b: Optional[Outcome] = None

    @property
    def same(self) -> Optional[bool]:
        if not self.postselected:
            return None
        return self.outcome_a == self.outcome_b


@dataclass(frozen=True)
class Tally:
    n_pairs: int = 0
    n_postselected: int = 0
    n_same: int = 0
    n_diff: int = 0

    def __post_init__(self):
        if min(self.n_pairs, self.n_postselected, self.n_same, self.n_diff) < 0:
            raise ValueError("tally counts must be non-negative")
        if self.n_same + self.n_diff != self.n_postselected:
            raise ValueError("n_same + n_diff must equal n_postselected")
        if self.n_postselected > self.n_pairs:
            raise ValueError("n_postselected cannot exceed n_pairs")

    def merge(self, other: "Tally") -> "Tally":
        return Tally(
            self.n_pairs + other.n_pairs,
            self.n_postselected + other.n_postselected,
            self.n_same + other.n_same,
            self.n_diff + other.n_diff,
        )

    __add__ = merge


def merge_all(tallies) -> Tally:
    total = Tally()
    for t in tallies:
        total = total.merge(t)
    return total


@dataclass(frozen=True)
class RngPolicy:
    master_seed: int
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    def stream(self, point: int, chunk: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(point, chunk))
        return np.random.Generator(np.random.PCG64(seq))

    def chunks(self, n: int) -> list[tuple[int, int]]:
        """(chunk index, events in chunk) covering ``n`` events."""
        full, rest = divmod(n, self.chunk_size)
        out = [(k, self.chunk_size) for k in range(full)]
        if rest:
            out.append((full, rest))
        return out


@dataclass(frozen=True)
class DetectorModel:
    """Per-photon detection efficiency and per-window dark-click probability.

    With the defaults (1, 0) the outcome law is exact. Otherwise a matched
    pair registers only if each side clicks, either from its photon (prob.
    ``efficiency``) or, failing that, from a dark count (prob.
    ``dark_count_prob``) with a random outcome. Pairs that do not register
    are counted in ``n_pairs`` but not in ``n_postselected``.
    """

    efficiency: float = 1.0
    dark_count_prob: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.efficiency <= 1.0):
            raise ValueError("efficiency must lie in (0, 1]")
        if not (0.0 <= self.dark_count_prob <= 1.0):
            raise ValueError("dark_count_prob must lie in [0, 1]")

    @property
    def ideal(self) -> bool:
        return self.efficiency == 1.0 and self.dark_count_prob == 0.0


IDEAL_DETECTOR = DetectorModel()


def _apply_detectors(gen, outcome, detector):
    k = outcome.size
    if detector.ideal:
        return outcome, np.ones(k, dtype=bool)
    hit = gen.random(k) < detector.efficiency
    dark = gen.random(k) < detector.dark_count_prob
    noise = gen.integers(0, 2, size=k, dtype=np.uint8)
    clicked = hit | dark
    return np.where(hit, outcome, noise), clicked


def _sample_chunk(gen: np.random.Generator, m: int, p_same: float, detector: DetectorModel):
    """Raw arrays for ``m`` pairs: paths, post-selection mask, outcomes of matched pairs."""
    paths = gen.integers(0, 4, size=m, dtype=np.uint8)
    path_a = paths & 1
    path_b = paths >> 1
    matched = path_a == path_b
    k = int(np.count_nonzero(matched))
    out_a = gen.integers(0, 2, size=k, dtype=np.uint8)
    same = gen.random(k) < p_same
    out_b = np.where(same, out_a, out_a ^ 1)
    out_a, click_a = _apply_detectors(gen, out_a, detector)
    out_b, click_b = _apply_detectors(gen, out_b, detector)
    registered = click_a & click_b
    return path_a, path_b, matched, out_a, out_b, registered


def _chunk_tally(rng: RngPolicy, point: int, chunk: int, m: int, p_same: float, detector) -> Tally:
    gen = rng.stream(point, chunk)
    _, _, _, out_a, out_b, registered = _sample_chunk(gen, m, p_same, detector)
    n_post = int(np.count_nonzero(registered))
    n_same = int(np.count_nonzero((out_a == out_b) & registered))
    return Tally(m, n_post, n_same, n_post - n_same)


def simulate_batch(
    n: int,
    phi: float,
    rng: RngPolicy,
    *,
    point: int = 0,
    detector: DetectorModel = IDEAL_DETECTOR,
    threads: int = 1,
) -> Tally:
    """Tally of ``n`` pairs at total phase ``phi``.

    ``point`` selects the stream family, so distinct campaign points never
    share random numbers. ``threads`` only changes wall time.
    """
    if n < 0:
        raise ValueError("event count must be non-negative")
    p_same = physics.joint_probabilities(phi).p_same
    plan = rng.chunks(n)

    def work(item):
        chunk, m = item
        return _chunk_tally(rng, point, chunk, m, p_same, detector)

    if threads > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, plan))
    else:
        parts = [work(item) for item in plan]
    return merge_all(parts)


def sample_events(
    n: int,
    phi: float,
    rng: RngPolicy,
    *,
    point: int = 0,
    detector: DetectorModel = IDEAL_DETECTOR,
) -> list[PairEvent]:
    """Individual pair records drawn from the same streams as :func:`simulate_batch`."""
    p_same = physics.joint_probabilities(phi).p_same
    events: list[PairEvent] = []
    for chunk, m in rng.chunks(n):
        gen = rng.stream(point, chunk)
        path_a, path_b, matched, out_a, out_b, registered = _sample_chunk(gen, m, p_same, detector)
        j = 0
        for i in range(m):
            pa, pb = Path(int(path_a[i])), Path(int(path_b[i]))
            if matched[i]:
                if registered[j]:
                    events.append(PairEvent(pa, pb, True, Outcome(int(out_a[j])), Outcome(int(out_b[j]))))
                else:
                    events.append(PairEvent(pa, pb, False))
                j += 1
            else:
                events.append(PairEvent(pa, pb, False))
    return events


def tally_events(events) -> Tally:
    n_post = sum(1 for e in events if e.postselected)
    n_same = sum(1 for e in events if e.postselected and e.same)
    return Tally(len(events), n_post, n_same, n_post - n_same)


# -- campaign points ------------------------------------------------------------


def arm_angles(cfg, stage: float, t_sidereal: float) -> tuple[float, float]:
    """(short, long) arm-to-wind angles for a campaign point."""
    if cfg.mode == "aligned":
        return kinematics.aligned_arm_angles(stage)
    site = cfg.site
    w = cfg.wind.direction
    return (
        kinematics.arm_wind_angle_3d(site, stage, w, t_sidereal, "short"),
        kinematics.arm_wind_angle_3d(site, stage, w, t_sidereal, "long"),
    )


def _excess_difference(cfg, arms: physics.ArmGeometry, angles: tuple[float, float]) -> float:
    theta_s, theta_l = angles
    wind, consts = cfg.wind, cfg.constants
    return physics.roundtrip_excess_at_angle(
        arms.l, theta_l, wind, consts
    ) - physics.roundtrip_excess_at_angle(arms.s, theta_s, wind, consts)


def orientation_phase(cfg, stage: float, t_sidereal: float, reference_stage: float = 0.0) -> float:
    """Phase change at ``stage`` relative to ``reference_stage`` at the same time.

    Zero for the relativistic model. For the preferred-frame model the
    ``2(l - s)/c`` parts of the path differences cancel, so only round-trip
    excesses enter and the result is free of cancellation error.
    """
    if cfg.model == "relativistic" or cfg.wind.speed == 0.0:
        return 0.0
    now = arm_angles(cfg, stage, t_sidereal)
    ref = arm_angles(cfg, reference_stage, t_sidereal)
    src = cfg.source
    return src.omega_a * (
        _excess_difference(cfg, cfg.arms_a, now) - _excess_difference(cfg, cfg.arms_a, ref)
    ) + src.omega_b * (
        _excess_difference(cfg, cfg.arms_b, now) - _excess_difference(cfg, cfg.arms_b, ref)
    )


def raw_phases(cfg, stage: float, t_sidereal: float) -> tuple[float, float]:
    """Untrimmed per-interferometer phases ``omega_i * tau_i`` (mod 2pi)."""
    if cfg.model == "relativistic":
        model = physics.Relativistic()
        orient = physics.Orientation.SHORT_PARALLEL
    else:
        model = physics.PreferredFrame(cfg.wind)
        orient = physics.Angled(*arm_angles(cfg, stage, t_sidereal))
    out = []
    for arms, omega in ((cfg.arms_a, cfg.source.omega_a), (cfg.arms_b, cfg.source.omega_b)):
        tau = physics.optical_path_difference(arms, model, orient, cfg.constants)
        out.append(math.fmod(omega * tau, physics.TWO_PI))
    return out[0], out[1]


def calibrated_trims(cfg, t_sidereal: float = 0.0, operating_point: float | None = None) -> tuple[float, float]:
    """Mirror trims putting the stage-0 total phase on the operating point.

    The total correction is split evenly between the two interferometers.
    """
    target = cfg.operating_point if operating_point is None else operating_point
    raw_a, raw_b = raw_phases(cfg, 0.0, t_sidereal)
    half = 0.5 * target
    return (half - raw_a) % physics.TWO_PI, (half - raw_b) % physics.TWO_PI


def campaign_phase(cfg, stage: float, t_sidereal: float) -> float:
    """Total phase at a campaign point.

    The trims are set at stage 0 of the same sidereal time so that the
    pre-rotation reading sits on ``cfg.operating_point``; the rotation then
    adds :func:`orientation_phase`.
    """
    return cfg.operating_point + orientation_phase(cfg, stage, t_sidereal)


def simulate_campaign_point(
    cfg,
    stage: float,
    t_sidereal: float,
    n: int,
    rng: RngPolicy,
    *,
    point: int = 0,
    threads: int = 1,
) -> Tally:
    phi = campaign_phase(cfg, stage, t_sidereal)
    return simulate_batch(n, phi, rng, point=point, detector=cfg.detector, threads=threads)


def expected_p_same(cfg, stage: float, t_sidereal: float) -> float:
    return physics.joint_probabilities(campaign_phase(cfg, stage, t_sidereal)).p_same

