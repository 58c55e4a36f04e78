"""Command-line entry point.

    mmentangle rotate --config cfg.json [--seed N] [--events N] [--out DIR] [--threads N]
    mmentangle sweep  --config cfg.json ...
    mmentangle bell   --config cfg.json ...
    mmentangle power  --p1 0.5 --p2 0.25 [--sigma 5]

Exit codes: 0 success, 2 configuration/validation error, 3 numerical or
runtime domain error.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analysis, output, protocol
from .config import config_to_dict, load_config
from .errors import ConfigError, DomainError

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="campaign config JSON (or a run manifest)")
    common.add_argument("--seed", type=_u64, help="override rng.master_seed")
    common.add_argument("--events", type=_nonneg, help="override events_per_point")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads (results do not depend on it)")

    parser = argparse.ArgumentParser(prog="mmentangle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rotate", parents=[common], help="90-degree rotation trial")
    sub.add_parser("sweep", parents=[common], help="sidereal sweep (projected mode)")
    sub.add_parser("bell", parents=[common], help="CHSH campaign")
    power = sub.add_parser("power", parents=[common], help="events per stage for a given separation")
    power.add_argument("--p1", type=float, required=True)
    power.add_argument("--p2", type=float, required=True)
    power.add_argument("--sigma", type=float, default=5.0)
    return parser


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _load(args):
    if args.config is None:
        raise ConfigError("config", "--config is required")
    return load_config(args.config, {"seed": args.seed, "events": args.events})


def _write_manifest(out: Path, command: str, cfg, started: str, files: list[str], threads: int) -> str:
    name = f"{command}_manifest.json"
    output.write_json(
        out / name,
        {
            "manifest_version": 1,
            "tool": "mmentangle",
            "tool_version": __version__,
            "command": command,
            "master_seed": cfg.rng.master_seed,
            "threads": threads,
            "started_utc": started,
            "finished_utc": _now(),
            "outputs": files,
            "config": config_to_dict(cfg),
        },
    )
    return name


def cmd_rotate(args) -> int:
    started = _now()
    cfg = _load(args)
    report = protocol.run_rotation_campaign(cfg, threads=args.threads)
    args.out.mkdir(parents=True, exist_ok=True)
    output.write_json(args.out / "rotate_verdict.json", output.verdict_dict(report))
    (args.out / "rotate_points.csv").write_text(output.points_csv(report.points, cfg.model))
    _write_manifest(args.out, "rotate", cfg, started, ["rotate_verdict.json", "rotate_points.csv"], args.threads)
    s = report.shift
    print(
        f"{report.decision.value} model={cfg.model} z={s.z:.3f} "
        f"p_before={s.p_before.p_hat:.5f} p_after={s.p_after.p_hat:.5f} "
        f"dphi={report.delta_phi:.4f}+-{report.delta_phi_stderr:.4f} rad"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = _now()
    cfg = _load(args)
    rows = protocol.run_sidereal_sweep(cfg, threads=args.threads)
    flat = analysis.flatness_test([r.tally for r in rows], cfg.sigma_threshold)
    profile = protocol.sweep_shift_profile(rows)
    t_max, shift_max = max(profile, key=lambda x: x[1])
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "sweep.csv").write_text(output.points_csv(rows, cfg.model))
    output.write_json(
        args.out / "sweep_summary.json",
        {
            "model": cfg.model,
            "rows": len(rows),
            "flatness_chi2": flat.chi2,
            "flatness_dof": flat.dof,
            "flatness_p_value": flat.p_value,
            "flat": flat.flat,
            "max_shift_t_sidereal_h": t_max,
            "max_shift_abs_dp": shift_max,
            "shift_profile": [{"t_sidereal_h": t, "abs_dp": d} for t, d in profile],
        },
    )
    _write_manifest(args.out, "sweep", cfg, started, ["sweep.csv", "sweep_summary.json"], args.threads)
    print(f"sweep rows={len(rows)} flat={flat.flat} max_shift_at={t_max:g}h |dp|={shift_max:.5f}")
    return EXIT_OK


def cmd_bell(args) -> int:
    started = _now()
    cfg = _load(args)
    if cfg.chsh is None:
        raise ConfigError("chsh", "Bell campaign needs chsh settings")
    result = protocol.run_bell_campaign(cfg, threads=args.threads)
    args.out.mkdir(parents=True, exist_ok=True)
    output.write_json(args.out / "bell.json", output.chsh_dict(result))
    _write_manifest(args.out, "bell", cfg, started, ["bell.json"], args.threads)
    print(f"S={result.s_value:.5f}+-{result.s_stderr:.5f}")
    return EXIT_OK


def cmd_power(args) -> int:
    for name, p in (("p1", args.p1), ("p2", args.p2)):
        if not 0.0 < p < 1.0:
            raise ConfigError(name, "must lie strictly between 0 and 1")
    if args.p1 == args.p2:
        raise ConfigError("p2", "must differ from p1")
    if not args.sigma >= 0:
        raise ConfigError("sigma", "must be non-negative")
    print(analysis.required_n_per_arm(args.p1, args.p2, args.sigma))
    return EXIT_OK


COMMANDS = {"rotate": cmd_rotate, "sweep": cmd_sweep, "bell": cmd_bell, "power": cmd_power}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
