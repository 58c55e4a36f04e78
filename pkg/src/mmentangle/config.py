"""Campaign configuration: dataclasses plus the strict JSON schema.

Schema (``schema_version`` 1)::

    {
      "schema_version": 1,
      "model": "preferred_frame" | "relativistic",
      "mode": "aligned" | "projected",
      "constants": {"c": 299792458.0},
      "source": {"wavelength_a": 1.55e-6, "wavelength_b": 1.55e-6},
      "apparatus": {"target_shift_rad": 0.5235987755982988, "long_fraction": 0.8},
      "arms_a": {"l": 5.0, "s": 1.25},          # instead of "apparatus"
      "arms_b": {"l": 5.0, "s": 1.25},
      "wind": {"speed": 30000.0, "direction": [1, 0, 0]},
      "site": {"latitude_deg": 47.0, "arm_azimuth_deg": 0.0},
      "events_per_point": 1000000,
      "rng": {"master_seed": 20141008, "chunk_size": 65536},
      "stages_deg": [0.0, 90.0],
      "sidereal_hours": [0.0, 1.0],
      "operating_point_rad": 1.5707963267948966,
      "sigma_threshold": 5.0,
      "detector": {"efficiency": 1.0, "dark_count_prob": 0.0},
      "chsh": {"alpha_deg": [0, 90], "beta_deg": [-45, 45],
               "subtract": "e22", "base_phase_rad": 0.0}
    }

``wind`` may give ``"align_at_hours": t`` instead of ``direction``: the wind
then points along the stage-0 short arm at sidereal time ``t`` (needs
``site``). Unknown keys are errors. A run manifest (which carries the
config under ``"config"``) is accepted wherever a config is.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from . import kinematics, physics
from .errors import ConfigError, DomainError
from .montecarlo import DetectorModel, RngPolicy

SCHEMA_VERSION = 1
MODELS = ("relativistic", "preferred_frame")
MODES = ("aligned", "projected")
ROTATION_TARGET_SHIFT = math.pi / 6
DEFAULT_WAVELENGTH = 1550e-9
DEFAULT_WIND_SPEED = 30_000.0
DEFAULT_LONG_FRACTION = 0.8


@dataclass(frozen=True)
class ChshSettings:
    alpha: tuple[float, float]
    beta: tuple[float, float]
    subtract: str = "e22"
    base_phase: float = 0.0


@dataclass(frozen=True)
class Sizing:
    target_shift: float = ROTATION_TARGET_SHIFT
    long_fraction: float = DEFAULT_LONG_FRACTION


@dataclass(frozen=True)
class CampaignConfig:
    source: physics.SourceSpec
    arms_a: physics.ArmGeometry
    arms_b: physics.ArmGeometry
    wind: physics.EtherWind
    model: str = "preferred_frame"
    mode: str = "aligned"
    constants: physics.PhysicalConstants = physics.DEFAULT_CONSTANTS
    site: Optional[kinematics.LabSite] = None
    events_per_point: int = 1_000_000
    rng: RngPolicy = field(default_factory=lambda: RngPolicy(0))
    stages: tuple[float, ...] = (0.0, math.pi / 2)
    sidereal_hours: tuple[float, ...] = (0.0,)
    chsh: Optional[ChshSettings] = None
    detector: DetectorModel = DetectorModel()
    sigma_threshold: float = 5.0
    operating_point: float = math.pi / 2
    sizing: Optional[Sizing] = None
    wavelengths: tuple[float, float] = (DEFAULT_WAVELENGTH, DEFAULT_WAVELENGTH)
    wind_align_hours: Optional[float] = None

    def phase_model(self) -> physics.PhaseModel:
        if self.model == "relativistic":
            return physics.Relativistic()
        return physics.PreferredFrame(self.wind)

    def with_model(self, model: str) -> "CampaignConfig":
        return replace(self, model=model)

    def with_seed(self, seed: int) -> "CampaignConfig":
        return replace(self, rng=RngPolicy(seed, self.rng.chunk_size))

    def with_events(self, n: int) -> "CampaignConfig":
        return replace(self, events_per_point=n)


# -- parsing helpers ------------------------------------------------------------


def _expect_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    return value


def _check_keys(d: dict, allowed, path: str, required=()) -> None:
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown field")
    for k in required:
        if k not in d:
            raise ConfigError(f"{path}.{k}" if path else k, "missing required field")


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(path, "must be finite")
    return x


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _num_list(value, path: str, length: int | None = None) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(value)}")
    return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(value))


def _choice(value, options, path: str) -> str:
    if value not in options:
        raise ConfigError(path, f"must be one of {list(options)}, got {value!r}")
    return value


def _arms(d, path: str) -> physics.ArmGeometry:
    d = _expect_dict(d, path)
    _check_keys(d, ("l", "s", "trim"), path, required=("l", "s"))
    l, s = _num(d["l"], f"{path}.l"), _num(d["s"], f"{path}.s")
    trim = _num(d.get("trim", 0.0), f"{path}.trim")
    try:
        return physics.ArmGeometry(l, s, trim)
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from None


_TOP_KEYS = (
    "schema_version", "model", "mode", "constants", "source", "apparatus", "arms_a",
    "arms_b", "wind", "site", "events_per_point", "rng", "stages_deg", "sidereal_hours",
    "operating_point_rad", "sigma_threshold", "detector", "chsh",
)  # fmt: skip


def config_from_dict(raw: dict) -> CampaignConfig:
    """Validate a schema dict and build the config; raises :class:`ConfigError`."""
    raw = _expect_dict(raw, "<root>")
    _check_keys(raw, _TOP_KEYS, "", required=("schema_version", "model", "source", "wind"))
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {raw['schema_version']!r}")
    model = _choice(raw["model"], MODELS, "model")
    mode = _choice(raw.get("mode", "aligned"), MODES, "mode")

    consts_d = _expect_dict(raw.get("constants", {}), "constants")
    _check_keys(consts_d, ("c",), "constants")
    c = _num(consts_d.get("c", physics.C_CODATA), "constants.c")
    if c <= 0:
        raise ConfigError("constants.c", "must be positive")
    consts = physics.PhysicalConstants(c)

    src_d = _expect_dict(raw["source"], "source")
    _check_keys(src_d, ("wavelength_a", "wavelength_b"), "source", required=("wavelength_a",))
    lam_a = _num(src_d["wavelength_a"], "source.wavelength_a")
    lam_b = _num(src_d.get("wavelength_b", lam_a), "source.wavelength_b")
    for name, lam in (("wavelength_a", lam_a), ("wavelength_b", lam_b)):
        if lam <= 0:
            raise ConfigError(f"source.{name}", "must be positive")
    source = physics.SourceSpec.from_wavelengths(lam_a, lam_b, consts)

    site = None
    if "site" in raw:
        site_d = _expect_dict(raw["site"], "site")
        _check_keys(site_d, ("latitude_deg", "arm_azimuth_deg"), "site", required=("latitude_deg",))
        lat = _num(site_d["latitude_deg"], "site.latitude_deg")
        az = _num(site_d.get("arm_azimuth_deg", 0.0), "site.arm_azimuth_deg")
        if not -90.0 <= lat <= 90.0:
            raise ConfigError("site.latitude_deg", "must lie in [-90, 90]")
        if not 0.0 <= az < 360.0:
            raise ConfigError("site.arm_azimuth_deg", "must lie in [0, 360)")
        site = kinematics.LabSite(math.radians(lat), math.radians(az))
    if mode == "projected" and site is None:
        raise ConfigError("site", "projected mode needs a lab site")

    wind_d = _expect_dict(raw["wind"], "wind")
    _check_keys(wind_d, ("speed", "direction", "align_at_hours"), "wind", required=("speed",))
    speed = _num(wind_d["speed"], "wind.speed")
    if speed < 0:
        raise ConfigError("wind.speed", "must be non-negative")
    if speed >= c:
        raise ConfigError("wind.speed", f"must be below c = {c}")
    align_hours = None
    if "direction" in wind_d and "align_at_hours" in wind_d:
        raise ConfigError("wind.direction", "give either direction or align_at_hours, not both")
    if "align_at_hours" in wind_d:
        align_hours = _num(wind_d["align_at_hours"], "wind.align_at_hours")
        if site is None:
            raise ConfigError("wind.align_at_hours", "needs a lab site")
        direction = kinematics.wind_along_arm(site, align_hours)
    else:
        direction = _num_list(wind_d.get("direction", [1.0, 0.0, 0.0]), "wind.direction", 3)
        norm = math.sqrt(sum(x * x for x in direction))
        if abs(norm - 1.0) > 1e-9:
            raise ConfigError("wind.direction", f"must be a unit vector (norm {norm})")
    wind = physics.EtherWind(speed, direction)

    sizing = None
    if "apparatus" in raw:
        if "arms_a" in raw or "arms_b" in raw:
            raise ConfigError("apparatus", "give either apparatus sizing or explicit arms, not both")
        app = _expect_dict(raw["apparatus"], "apparatus")
        _check_keys(app, ("target_shift_rad", "long_fraction"), "apparatus")
        target = _num(app.get("target_shift_rad", ROTATION_TARGET_SHIFT), "apparatus.target_shift_rad")
        frac = _num(app.get("long_fraction", DEFAULT_LONG_FRACTION), "apparatus.long_fraction")
        if target <= 0:
            raise ConfigError("apparatus.target_shift_rad", "must be positive")
        if not 0.5 < frac < 1.0:
            raise ConfigError("apparatus.long_fraction", "must lie in (0.5, 1)")
        if speed == 0:
            raise ConfigError("wind.speed", "apparatus sizing needs a non-zero wind speed")
        sizing = Sizing(target, frac)
        total = physics.size_apparatus_for_shift(target, source, wind, consts)
        arms_a = arms_b = physics.ArmGeometry(frac * total, (1.0 - frac) * total)
    else:
        if "arms_a" not in raw:
            raise ConfigError("arms_a", "missing (or give an apparatus block)")
        arms_a = _arms(raw["arms_a"], "arms_a")
        arms_b = _arms(raw["arms_b"], "arms_b") if "arms_b" in raw else arms_a

    events = _int(raw.get("events_per_point", 1_000_000), "events_per_point")
    if events < 0:
        raise ConfigError("events_per_point", "must be non-negative")

    rng_d = _expect_dict(raw.get("rng", {}), "rng")
    _check_keys(rng_d, ("master_seed", "chunk_size"), "rng")
    seed = _int(rng_d.get("master_seed", 0), "rng.master_seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("rng.master_seed", "must be an unsigned 64-bit integer")
    chunk = _int(rng_d.get("chunk_size", 1 << 16), "rng.chunk_size")
    if chunk < 1:
        raise ConfigError("rng.chunk_size", "must be positive")

    stages_deg = _num_list(raw.get("stages_deg", [0.0, 90.0]), "stages_deg")
    if not stages_deg:
        raise ConfigError("stages_deg", "must not be empty")
    for i, st in enumerate(stages_deg):
        if not 0.0 <= st < 360.0:
            raise ConfigError(f"stages_deg[{i}]", "must lie in [0, 360)")
    stages = tuple(math.radians(x) for x in stages_deg)

    hours = _num_list(raw.get("sidereal_hours", [0.0]), "sidereal_hours")
    for i, h in enumerate(hours):
        if not 0.0 <= h < kinematics.SIDEREAL_DAY_HOURS:
            raise ConfigError(f"sidereal_hours[{i}]", "must lie in [0, 24)")

    det_d = _expect_dict(raw.get("detector", {}), "detector")
    _check_keys(det_d, ("efficiency", "dark_count_prob"), "detector")
    eff = _num(det_d.get("efficiency", 1.0), "detector.efficiency")
    dark = _num(det_d.get("dark_count_prob", 0.0), "detector.dark_count_prob")
    if not 0.0 < eff <= 1.0:
        raise ConfigError("detector.efficiency", "must lie in (0, 1]")
    if not 0.0 <= dark <= 1.0:
        raise ConfigError("detector.dark_count_prob", "must lie in [0, 1]")

    chsh = None
    if "chsh" in raw:
        ch = _expect_dict(raw["chsh"], "chsh")
        _check_keys(ch, ("alpha_deg", "beta_deg", "subtract", "base_phase_rad"), "chsh",
                    required=("alpha_deg", "beta_deg"))  # fmt: skip
        alpha = tuple(math.radians(x) for x in _num_list(ch["alpha_deg"], "chsh.alpha_deg", 2))
        beta = tuple(math.radians(x) for x in _num_list(ch["beta_deg"], "chsh.beta_deg", 2))
        subtract = _choice(ch.get("subtract", "e22"), ("e11", "e12", "e21", "e22"), "chsh.subtract")
        base = _num(ch.get("base_phase_rad", 0.0), "chsh.base_phase_rad")
        chsh = ChshSettings(alpha, beta, subtract, base)

    sigma = _num(raw.get("sigma_threshold", 5.0), "sigma_threshold")
    if sigma <= 0:
        raise ConfigError("sigma_threshold", "must be positive")
    op = _num(raw.get("operating_point_rad", math.pi / 2), "operating_point_rad")

    return CampaignConfig(
        source=source,
        arms_a=arms_a,
        arms_b=arms_b,
        wind=wind,
        model=model,
        mode=mode,
        constants=consts,
        site=site,
        events_per_point=events,
        rng=RngPolicy(seed, chunk),
        stages=stages,
        sidereal_hours=hours,
        chsh=chsh,
        detector=DetectorModel(eff, dark),
        sigma_threshold=sigma,
        operating_point=op,
        sizing=sizing,
        wavelengths=(lam_a, lam_b),
        wind_align_hours=align_hours,
    )


def config_to_dict(cfg: CampaignConfig) -> dict[str, Any]:
    """Inverse of :func:`config_from_dict` (round-trips to an equal config)."""
    d: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "model": cfg.model,
        "mode": cfg.mode,
        "constants": {"c": cfg.constants.c},
        "source": {"wavelength_a": cfg.wavelengths[0], "wavelength_b": cfg.wavelengths[1]},
    }
    if cfg.sizing is not None:
        d["apparatus"] = {
            "target_shift_rad": cfg.sizing.target_shift,
            "long_fraction": cfg.sizing.long_fraction,
        }
    else:
        d["arms_a"] = {"l": cfg.arms_a.l, "s": cfg.arms_a.s, "trim": cfg.arms_a.trim}
        d["arms_b"] = {"l": cfg.arms_b.l, "s": cfg.arms_b.s, "trim": cfg.arms_b.trim}
    wind: dict[str, Any] = {"speed": cfg.wind.speed}
    if cfg.wind_align_hours is not None:
        wind["align_at_hours"] = cfg.wind_align_hours
    else:
        wind["direction"] = list(cfg.wind.direction)
    d["wind"] = wind
    if cfg.site is not None:
        d["site"] = {
            "latitude_deg": math.degrees(cfg.site.latitude),
            "arm_azimuth_deg": math.degrees(cfg.site.arm_azimuth),
        }
    d["events_per_point"] = cfg.events_per_point
    d["rng"] = {"master_seed": cfg.rng.master_seed, "chunk_size": cfg.rng.chunk_size}
    d["stages_deg"] = [math.degrees(s) for s in cfg.stages]
    d["sidereal_hours"] = list(cfg.sidereal_hours)
    d["operating_point_rad"] = cfg.operating_point
    d["sigma_threshold"] = cfg.sigma_threshold
    d["detector"] = {
        "efficiency": cfg.detector.efficiency,
        "dark_count_prob": cfg.detector.dark_count_prob,
    }
    if cfg.chsh is not None:
        d["chsh"] = {
            "alpha_deg": [math.degrees(a) for a in cfg.chsh.alpha],
            "beta_deg": [math.degrees(b) for b in cfg.chsh.beta],
            "subtract": cfg.chsh.subtract,
            "base_phase_rad": cfg.chsh.base_phase,
        }
    return d


def load_config(path, overrides: dict[str, Any] | None = None) -> CampaignConfig:
    """Read a config (or a run manifest) from ``path``.

    ``overrides`` maps ``"seed"`` and ``"events"`` to replacement values.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {p}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if isinstance(raw, dict) and "manifest_version" in raw:
        raw = raw.get("config")
    raw = _expect_dict(raw, "<root>")
    raw = json.loads(json.dumps(raw))
    overrides = overrides or {}
    if overrides.get("seed") is not None:
        raw.setdefault("rng", {})
        _expect_dict(raw["rng"], "rng")["master_seed"] = overrides["seed"]
    if overrides.get("events") is not None:
        raw["events_per_point"] = overrides["events"]
    return config_from_dict(raw)


def rotation_preset_dict(
    model: str = "preferred_frame",
    *,
    wavelength: float = DEFAULT_WAVELENGTH,
    speed: float = DEFAULT_WIND_SPEED,
    c: float = physics.C_CODATA,
    events: int = 1_000_000,
    seed: int = 20141008,
) -> dict[str, Any]:
    """Rotation preset: arms sized for a pi/6 turn shift, stage-0 reading P(a=b) = 0.5."""
    return {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "mode": "aligned",
        "constants": {"c": c},
        "source": {"wavelength_a": wavelength, "wavelength_b": wavelength},
        "apparatus": {"target_shift_rad": ROTATION_TARGET_SHIFT, "long_fraction": DEFAULT_LONG_FRACTION},
        "wind": {"speed": speed, "direction": [1.0, 0.0, 0.0]},
        "events_per_point": events,
        "rng": {"master_seed": seed, "chunk_size": 1 << 16},
        "stages_deg": [0.0, 90.0],
        "operating_point_rad": math.pi / 2,
        "sigma_threshold": 5.0,
    }


def rotation_preset(model: str = "preferred_frame", **kwargs) -> CampaignConfig:
    return config_from_dict(rotation_preset_dict(model, **kwargs))


def sweep_preset_dict(model: str = "preferred_frame", *, events: int = 200_000, seed: int = 1887) -> dict[str, Any]:
    """24-hour projected sweep; the wind lies along the stage-0 short arm at t = 0."""
    d = rotation_preset_dict(model, events=events, seed=seed)
    d["mode"] = "projected"
    d["site"] = {"latitude_deg": 47.0, "arm_azimuth_deg": 0.0}
    d["wind"] = {"speed": DEFAULT_WIND_SPEED, "align_at_hours": 0.0}
    d["sidereal_hours"] = [float(h) for h in range(24)]
    return d


def bell_preset_dict(*, events: int = 1_000_000, seed: int = 1964) -> dict[str, Any]:
    """Optimal CHSH settings for the subtract-E22 pattern."""
    d = rotation_preset_dict("relativistic", events=events, seed=seed)
    d["chsh"] = {"alpha_deg": [0.0, 90.0], "beta_deg": [-45.0, 45.0], "subtract": "e22", "base_phase_rad": 0.0}
    return d
