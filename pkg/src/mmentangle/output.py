"""CSV/JSON writers. Floats are always written with 17 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from . import analysis, protocol

POINT_HEADER = (
    "t_sidereal_h", "stage_deg", "model", "n_pairs", "n_postselected",
    "n_same", "n_diff", "p_same", "ci_low", "ci_high",
)  # fmt: skip


def fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    return format(x, "#.17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text like ``json.dumps`` but with 17-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def _row(t: float, stage: float, model: str, tally, est: analysis.ProportionEstimate) -> list[str]:
    return [
        fmt_float(t),
        fmt_float(math.degrees(stage)),
        model,
        str(tally.n_pairs),
        str(tally.n_postselected),
        str(tally.n_same),
        str(tally.n_diff),
        fmt_float(est.p_hat),
        fmt_float(est.ci_low),
        fmt_float(est.ci_high),
    ]


def points_csv(rows, model: str) -> str:
    """CSV text for rotation points or sweep rows (same header)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POINT_HEADER)
    for r in rows:
        w.writerow(_row(r.t_sidereal, r.stage, model, r.tally, r.estimate))
    return buf.getvalue()


def _estimate_dict(e: analysis.ProportionEstimate) -> dict:
    return {"p_hat": e.p_hat, "n": e.n, "ci_low": e.ci_low, "ci_high": e.ci_high}


def verdict_dict(report: protocol.VerdictReport) -> dict:
    s = report.shift
    return {
        "model": report.model,
        "decision": report.decision.value,
        "t_sidereal_h": report.t_sidereal,
        "p_before": _estimate_dict(s.p_before),
        "p_after": _estimate_dict(s.p_after),
        "z": s.z,
        "sigma_threshold": s.threshold,
        "significant": s.significant,
        "delta_phi_rad": report.delta_phi,
        "delta_phi_stderr_rad": report.delta_phi_stderr,
        "expected_delta_phi_rad": report.expected_delta_phi,
        "points": [
            {
                "t_sidereal_h": p.t_sidereal,
                "stage_deg": math.degrees(p.stage),
                "n_pairs": p.tally.n_pairs,
                "n_postselected": p.tally.n_postselected,
                "n_same": p.tally.n_same,
                "n_diff": p.tally.n_diff,
                "expected_p_same": p.expected_p_same,
                "estimate": _estimate_dict(p.estimate),
            }
            for p in report.points
        ],
        "apparatus_sizing": report.sizing,
    }


def chsh_dict(result: analysis.ChshResult) -> dict:
    return {
        "e11": result.e11,
        "e12": result.e12,
        "e21": result.e21,
        "e22": result.e22,
        "subtract": result.subtract,
        "s_value": result.s_value,
        "s_stderr": result.s_stderr,
        "quantum_max": 2.0 * math.sqrt(2.0),
        "local_bound": 2.0,
    }
