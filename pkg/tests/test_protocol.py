import math

import pytest

from mmentangle import analysis, config, protocol
from mmentangle.errors import ConfigError, EmptyTallyError
from mmentangle.protocol import Decision


def preset(model="preferred_frame", **kw):
    return config.rotation_preset(model, **kw)


def test_rotation_preferred_frame():
    r = protocol.run_rotation_campaign(preset(events=10**6))
    assert r.decision is Decision.PREFERRED_FRAME_DETECTED
    assert abs(r.shift.p_before.p_hat - 0.5) < 0.0035
    assert abs(r.shift.p_after.p_hat - 0.25) < 0.0031
    assert abs(r.delta_phi - math.pi / 6) <= 3 * r.delta_phi_stderr
    assert r.expected_delta_phi == pytest.approx(math.pi / 6, rel=1e-7)


def test_rotation_relativistic():
    r = protocol.run_rotation_campaign(preset("relativistic", events=10**6))
    assert r.decision is Decision.NO_SHIFT_DETECTED
    for est in (r.shift.p_before, r.shift.p_after):
        assert abs(est.p_hat - 0.5) <= 5 * math.sqrt(0.25 / est.n)


def test_rotation_without_wind_reports_no_shift():
    d = config.rotation_preset_dict("preferred_frame", events=200_000)
    del d["apparatus"]
    d["arms_a"] = {"l": 5.0, "s": 1.25}
    d["wind"]["speed"] = 0.0
    r = protocol.run_rotation_campaign(config.config_from_dict(d))
    assert r.decision is Decision.NO_SHIFT_DETECTED
    assert r.expected_delta_phi == 0.0


def test_rotation_needs_both_stages():
    d = config.rotation_preset_dict(events=100)
    d["stages_deg"] = [0.0]
    with pytest.raises(ConfigError):
        protocol.run_rotation_campaign(config.config_from_dict(d))
    d["stages_deg"] = [0.0, 45.0, 90.0]
    with pytest.raises(ConfigError):
        protocol.run_rotation_campaign(config.config_from_dict(d))


def test_rotation_zero_events_is_empty():
    with pytest.raises(EmptyTallyError):
        protocol.run_rotation_campaign(preset(events=0))


def test_rotation_threads_do_not_change_result():
    cfg = preset(events=300_000)
    assert protocol.run_rotation_campaign(cfg, threads=1) == protocol.run_rotation_campaign(cfg, threads=4)


def test_stage_label_swap_negates_z():
    cfg = preset(events=50_000)
    r = protocol.run_rotation_campaign(cfg)
    before, after = r.points[0].tally, r.points[1].tally
    swapped = analysis.two_proportion_z(after, before)
    assert swapped.z == -r.shift.z
    assert abs(swapped.z) == abs(r.shift.z)


def test_model_discrimination_soundness():
    n_events = 2000  # ~1000 post-selected per stage, above the 175 sizing
    assert n_events // 2 >= analysis.required_n_per_arm(0.5, 0.25, 5)
    detected = nulls = 0
    for s in range(200):
        detected += protocol.run_rotation_campaign(preset(events=n_events, seed=s)).decision is Decision.PREFERRED_FRAME_DETECTED
        nulls += protocol.run_rotation_campaign(preset("relativistic", events=n_events, seed=s)).decision is Decision.NO_SHIFT_DETECTED
    assert detected >= 198 and nulls >= 198


def test_delta_phi_recovery_over_seeds():
    misses = 0
    for s in range(50):
        r = protocol.run_rotation_campaign(preset(events=100_000, seed=10_000 + s))
        misses += abs(r.delta_phi - math.pi / 6) > 3 * r.delta_phi_stderr
    assert misses <= 2


def test_sizing_report_surfaces_gap():
    rep = protocol.apparatus_sizing_report(preset(events=10))
    assert rep["l_plus_s_at_1500nm_beta_1e-4_m"] == pytest.approx(6.25, rel=1e-12)
    assert rep["l_plus_s_at_nominal_wavelength_exact_c_m"] == pytest.approx(6.4494005881577192, rel=1e-12)
    assert rep["nominal_relative_discrepancy"] > 0.03
    assert "6.4494" in rep["note"]


# -- sidereal sweep ---------------------------------------------------------------------


def sweep_cfg(model, events=100_000):
    return config.config_from_dict(config.sweep_preset_dict(model, events=events))


def test_sweep_relativistic_is_flat():
    rows = protocol.run_sidereal_sweep(sweep_cfg("relativistic"))
    assert len(rows) == 48
    assert analysis.flatness_test([r.tally for r in rows]).flat


def test_sweep_preferred_frame_peaks_at_alignment():
    rows = protocol.run_sidereal_sweep(sweep_cfg("preferred_frame", events=400_000))
    profile = protocol.sweep_shift_profile(rows)
    t_max, _ = max(profile, key=lambda x: x[1])
    assert t_max == 0.0
    expected = {r.t_sidereal: r.expected_p_same for r in rows if r.stage > 0}
    assert min(expected.values()) == expected[0.0]


def test_sweep_rejects_aligned_mode_and_empty_times():
    cfg = preset(events=10)
    with pytest.raises(ConfigError):
        protocol.run_sidereal_sweep(cfg)
    d = config.sweep_preset_dict("relativistic", events=10)
    d["sidereal_hours"] = []
    with pytest.raises(ConfigError):
        protocol.run_sidereal_sweep(config.config_from_dict(d))


def test_projected_rotation_uses_best_time():
    d = config.sweep_preset_dict("preferred_frame", events=200_000)
    d["sidereal_hours"] = [6.0, 0.0, 12.0]
    cfg = config.config_from_dict(d)
    assert protocol.best_aligned_time(cfg) == 0.0
    r = protocol.run_rotation_campaign(cfg)
    assert r.t_sidereal == 0.0 and r.decision is Decision.PREFERRED_FRAME_DETECTED


# -- Bell campaign --------------------------------------------------------------------------


def bell_cfg(events=10**6, alpha=(0.0, 90.0), beta=(-45.0, 45.0)):
    d = config.bell_preset_dict(events=events)
    d["chsh"]["alpha_deg"], d["chsh"]["beta_deg"] = list(alpha), list(beta)
    return config.config_from_dict(d)


def test_bell_ideal():
    r = protocol.run_bell_campaign(bell_cfg())
    assert abs(r.s_value - 2 * math.sqrt(2)) <= 5 * r.s_stderr


def test_bell_zero_settings():
    r = protocol.run_bell_campaign(bell_cfg(events=100_000, alpha=(0, 0), beta=(0, 0)))
    assert r.s_value == 2.0


def test_bell_errors():
    with pytest.raises(EmptyTallyError):
        protocol.run_bell_campaign(bell_cfg(events=0))
    with pytest.raises(ConfigError):
        protocol.run_bell_campaign(preset(events=10))
