"""Acceptance criteria, one test each, tolerances as stated in the build contract.

Each test records a PASS/FAIL line; pytest prints them in an
"acceptance criteria" section at the end of the run.
"""

import json
import math

import numpy as np

from mmentangle import analysis, cli, config, physics, protocol
from mmentangle.montecarlo import RngPolicy, Tally, simulate_batch
from mmentangle.physics import ArmGeometry, EtherWind, PhysicalConstants, SourceSpec

C = physics.C_CODATA


# 1 -------------------------------------------------------------------------------


def test_c1a_sizing_rounded_constants(criterion):
    results = []
    for consts in (PhysicalConstants(3e8), PhysicalConstants()):
        src = SourceSpec.from_wavelengths(1500e-9, consts=consts)
        wind = EtherWind(1e-4 * consts.c)
        results.append(physics.size_apparatus_for_shift(math.pi / 6, src, wind, consts))
    err = max(abs(x / 6.25 - 1) for x in results)
    criterion("C1a l+s(pi/6, 1500 nm, v/c=1e-4) = 6.25 m", err <= 1e-9, f"got {results}, rel err {err:.2e}")


def test_c1b_sizing_stated_constants(criterion):
    src = SourceSpec.from_wavelengths(1550e-9)
    got = physics.size_apparatus_for_shift(math.pi / 6, src, EtherWind(30_000.0))
    err = abs(got / 6.467 - 1)
    criterion(
        "C1b l+s(pi/6, 1550 nm, 30 km/s, CODATA c) = 6.467 m +-0.1%",
        err <= 1e-3,
        f"got {got:.6f} m, rel err {err:.2e}",
    )


def test_c1c_discrepancy_in_report(criterion, tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(config.rotation_preset_dict(events=20_000)))
    code = cli.main(["rotate", "--config", str(p), "--out", str(tmp_path / "o")])
    rep = json.loads((tmp_path / "o" / "rotate_verdict.json").read_text())["apparatus_sizing"]
    ok = (
        code == 0
        and abs(rep["nominal_l_plus_s_m"] - 6.25) < 1e-12
        and abs(rep["l_plus_s_at_1500nm_beta_1e-4_m"] / 6.25 - 1) < 1e-9
        and rep["nominal_relative_discrepancy"] > 0.03
    )
    criterion(
        "C1c sizing discrepancy surfaced in verdict report",
        ok,
        f"1550 nm needs {rep['l_plus_s_at_nominal_wavelength_exact_c_m']:.4f} m vs nominal 6.25 m",
    )


# 2 -------------------------------------------------------------------------------


def test_c2_rate_prediction(criterion):
    r = protocol.run_rotation_campaign(config.rotation_preset("preferred_frame", events=10**6))
    pb, pa = r.shift.p_before.p_hat, r.shift.p_after.p_hat
    ok = abs(pb - 0.50) <= 0.0035 and abs(pa - 0.25) <= 0.0031
    criterion("C2 preferred-frame p_before=0.50+-0.0035, p_after=0.25+-0.0031", ok, f"p_before={pb:.5f} p_after={pa:.5f}")


# 3 -------------------------------------------------------------------------------


def test_c3_null_result(criterion):
    reps, good = 200, 0
    for s in range(reps):
        r = protocol.run_rotation_campaign(config.rotation_preset("relativistic", events=10**6, seed=s))
        good += abs(r.shift.z) < 5 and r.decision is protocol.Decision.NO_SHIFT_DETECTED
    criterion("C3 relativistic: no shift in >=99% of 200 seeds", good / reps >= 0.99, f"{good}/{reps}")


# 4 -------------------------------------------------------------------------------


def test_c4_expansion_fidelity(criterion):
    arms = ArmGeometry(5.0, 1.25)
    src = SourceSpec.from_wavelengths(1550e-9)
    worst = []
    for beta in (1e-5, 1e-4, 1e-3):
        wind = EtherWind(beta * C)
        tau = physics.rotation_path_difference_total(arms, wind)
        tau_approx = physics.rotation_path_difference_approx(arms, wind)
        dphi = physics.rotation_phase_shift(arms, arms, src, wind)
        dphi_approx = physics.rotation_phase_shift_approx(arms, arms, src, wind)
        bound = 10 * beta**2
        worst.append(max(abs(tau / tau_approx - 1), abs(dphi_approx / dphi - 1)) / bound)
    criterion("C4 exact vs leading-order within 10 beta^2", max(worst) <= 1.0, f"max err/bound = {max(worst):.3f}")


# 5 -------------------------------------------------------------------------------


def _local_tallies(alphas, betas, n, seed):
    """Each side answers sign(cos(lambda -+ setting)) for a shared hidden angle."""
    gen = np.random.default_rng(seed)
    out = []
    for a in alphas:
        for b in betas:
            lam = gen.uniform(0, 2 * math.pi, n)
            same = int(np.count_nonzero(np.sign(np.cos(lam - a)) == np.sign(np.cos(lam + b))))
            out.append(Tally(2 * n, n, same, n - same))
    return out


def test_c5_bell_violation(criterion):
    r = protocol.run_bell_campaign(config.config_from_dict(config.bell_preset_dict(events=10**6)))
    quantum_ok = abs(r.s_value - 2 * math.sqrt(2)) <= 5 * r.s_stderr
    alphas, betas = (0.0, math.pi / 2), (-math.pi / 4, math.pi / 4)
    loc = analysis.chsh(_local_tallies(alphas, betas, 500_000, 1))
    local_ok = loc.s_value <= 2 + 5 * loc.s_stderr
    criterion(
        "C5 CHSH 2sqrt2 within 5 se; local model <= 2 + 5 se",
        quantum_ok and local_ok,
        f"S_q={r.s_value:.5f}+-{r.s_stderr:.5f} S_local={loc.s_value:.5f}+-{loc.s_stderr:.5f}",
    )


# 6 -------------------------------------------------------------------------------


def test_c6a_required_n(criterion):
    n = analysis.required_n_per_arm(0.5, 0.25, 5)
    var = 0.5 * 0.5 + 0.25 * 0.75
    brute = next(m for m in range(1, 10_000) if 0.25 / math.sqrt(var / m) >= 5 * (1 - 1e-12))
    criterion("C6a required_n_per_arm(0.5, 0.25, 5) = 175 (brute force)", n == brute == 175, f"n={n} brute={brute}")


def test_c6b_power_at_required_n(criterion):
    """n = 175 post-selected per stage, realised as 350 pairs per stage."""
    reps, hits = 1000, 0
    for s in range(reps):
        rng = RngPolicy(500_000 + s)
        before = simulate_batch(350, math.pi / 2, rng, point=0)
        after = simulate_batch(350, math.pi / 2 + math.pi / 6, rng, point=1)
        hits += analysis.two_proportion_z(before, after).z >= 5
    criterion("C6b detection at n=175/stage in >=95% of 1000 seeds", hits / reps >= 0.95, f"{hits}/{reps}")


# 7 -------------------------------------------------------------------------------


def test_c7_determinism_across_threads(criterion, tmp_path):
    p = tmp_path / "cfg.json"
    d = config.rotation_preset_dict(events=10**6)
    d["rng"]["chunk_size"] = 50_000
    p.write_text(json.dumps(d))
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        assert cli.main(["rotate", "--config", str(p), "--out", str(out), "--threads", str(threads), "--seed", "7"]) == 0
        outs.append({name: (out / name).read_bytes() for name in ("rotate_verdict.json", "rotate_points.csv")})
    criterion("C7 cmd_rotate outputs identical for --threads 1 and 4", outs[0] == outs[1])


# 8 -------------------------------------------------------------------------------


def test_c8_wilson_coverage(criterion):
    n, trials = 200, 10_000
    coverage = {}
    for p in (0.05, 0.25, 0.5):
        ks = np.random.default_rng(8_000 + int(p * 100)).binomial(n, p, size=trials)
        hit = 0
        for k in ks:
            lo, hi = analysis.wilson_interval(int(k), n)
            hit += lo <= p <= hi
        coverage[p] = hit / trials
    ok = all(0.93 <= c <= 0.97 for c in coverage.values())
    criterion("C8 Wilson 95% coverage in [0.93, 0.97]", ok, str(coverage))
