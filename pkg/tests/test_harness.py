import csv
import math

import numpy as np
import pytest

from fblquad.config import (
    ConfigError, DEFAULTS, NAMED_SCENARIOS, ScenarioConfig, load_config, parse_text, parse_value,
)
from fblquad.io import export_csv, export_summary, meta_path, read_csv
from fblquad.metrics import compute_metrics, moving_average, zero_crossings
from fblquad.runner import COLUMNS, RunLog, run_scenario, make_trajectory

QUICK = {"sim.duration": 1.0}


@pytest.mark.parametrize("ctrl", ["fbl", "fbl-no-delay-comp", "cascaded", "reduced-attitude"])
def test_hover_equilibrium(ctrl):
    log = run_scenario(ScenarioConfig.from_dict({"controller.type": ctrl, "sim.duration": 10.0}))
    assert not log.aborted
    err = np.linalg.norm(log.vec("p", "m") - log.vec("p_des", "m"), axis=1)
    assert err.max() < 1e-6
    assert log.t[-1] == pytest.approx(10.0 - 0.002)


def test_run_is_deterministic(tmp_path):
    cfg = load_config("weave-r3", ["sim.duration=1.5", "wind.turbulence=0.5"])
    a, b = run_scenario(cfg), run_scenario(cfg)
    assert np.array_equal(a.data, b.data)
    export_csv(a, tmp_path / "a.csv")
    export_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_rate_contract():
    cfg = ScenarioConfig.from_dict({"compensation.type": "learned", "sim.duration": 2.0,
                                    "trajectory.type": "weave"})
    log = run_scenario(cfg)
    assert log.meta["outer_ticks"] == round(2.0 / 0.01)
    # first tick has no earlier sample to difference against
    assert log.meta["learner_updates"] + log.meta["learner_skipped"] == 2.0 / 0.01 - 1
    assert np.all(np.diff(log.t) > 0)


def test_disturbance_held_between_outer_ticks():
    cfg = ScenarioConfig.from_dict({"compensation.type": "adaptive", "sim.duration": 0.5,
                                    "wind.type": "uniform-gust", "wind.peak": [1.0, 0.0, 0.0]})
    dh = run_scenario(cfg).vec("dhat", "m_s2")
    blocks = dh.reshape(-1, 5, 3)
    assert np.all(blocks == blocks[:, :1, :])


@pytest.mark.parametrize("ctrl,reason", [("fbl", "thrust singularity"),
                                         ("cascaded", "free-fall")])
def test_abort_keeps_partial_log(tmp_path, ctrl, reason):
    cfg = ScenarioConfig.from_dict({"trajectory.type": "step", "trajectory.goal": [0, 0, -40, 0],
                                    "controller.type": ctrl})
    log = run_scenario(cfg)
    assert reason in log.aborted
    assert 0 < len(log) < 3000
    export_csv(log, tmp_path / "abort.csv")
    back = read_csv(tmp_path / "abort.csv")
    assert back.data.shape == log.data.shape
    assert reason in back.aborted


def test_learned_model_warm_start():
    cfg = ScenarioConfig.from_dict({"compensation.type": "learned", "sim.duration": 1.0,
                                    "trajectory.type": "weave",
                                    "wind.type": "position-dependent-jet",
                                    "wind.peak": [0, -4, 0], "wind.width": [0.5, 0.5, 0.5]})
    from fblquad.runner import make_learner
    model = make_learner(cfg)
    run_scenario(cfg, model=model)
    n = model.n_updates
    run_scenario(cfg, model=model)
    assert model.n_updates == 2 * n


# --- metrics --------------------------------------------------------------

def _meta(**traj):
    return {"trajectory": traj, "smoothing_window": 0.5, "deadband": 0.0,
            "exclude_first_trial": False}


def test_metrics_zero_error():
    t = np.arange(0, 5, 0.01)
    p = np.column_stack([np.sin(t), t, 0 * t])
    m = compute_metrics(t, p, p, np.ones((len(t), 3)), _meta())
    assert m.mean_error_m == 0 and m.max_error_m == 0 and m.altitude_peak_error_m == 0
    assert np.all(m.smoothed_error_m == 0)


def test_metrics_constant_offset_is_smoothing_invariant():
    t = np.arange(0, 5, 0.01)
    p = np.zeros((len(t), 3))
    m = compute_metrics(t, p + [0.1, 0, 0], p, p, _meta())
    assert m.mean_error_m == pytest.approx(0.1)
    assert np.allclose(m.smoothed_error_m, 0.1)


def test_metrics_per_revolution():
    dt = 0.01
    t = np.arange(0, 3, dt)
    err = np.where(t < 1, 0.2, 0.1)
    p = np.column_stack([err, 0 * t, 0 * t])
    m = compute_metrics(t, p, np.zeros_like(p), np.zeros_like(p),
                        _meta(revolution_period=1.0, trial_duration=1.0))
    assert np.allclose(m.per_revolution_error_m, [0.2, 0.1, 0.1])


def test_metrics_exclude_first_trial():
    t = np.arange(0, 4, 0.01)
    err = np.where(t < 2, 1.0, 0.1)
    p = np.column_stack([err, 0 * t, 0 * t])
    meta = _meta(revolution_period=1.0, trial_duration=2.0)
    meta["exclude_first_trial"] = True
    m = compute_metrics(t, p, np.zeros_like(p), np.zeros_like(p), meta)
    assert m.mean_error_m == pytest.approx(0.1)
    assert m.window_start_s == pytest.approx(2.0)


def test_zero_crossings_and_smoothing():
    e = np.array([0.5, -0.5, 0.001, -0.001, 0.5, 0.5, -0.2])
    assert zero_crossings(e, 0.0) == 5
    assert zero_crossings(e, 0.01) == 3
    x = np.array([0.0, 0.0, 3.0, 0.0, 0.0])
    assert np.allclose(moving_average(x, 3), [0, 1, 1, 1, 0])


def test_mean_speed():
    t = np.arange(0, 1, 0.01)
    v = np.tile([3.0, 4.0, 0.0], (len(t), 1))
    z = np.zeros((len(t), 3))
    assert compute_metrics(t, z, z, v, _meta()).mean_speed_m_s == pytest.approx(5.0)


# --- CSV ------------------------------------------------------------------

def test_empty_log_header_only(tmp_path):
    path = export_csv(RunLog(data=np.zeros((0, len(COLUMNS)))), tmp_path / "e.csv")
    assert path.read_bytes() == (",".join(COLUMNS) + "\r\n").encode()
    assert read_csv(path).data.shape == (0, len(COLUMNS))


def test_csv_roundtrip_and_schema(tmp_path):
    cfg = load_config("yaw-r3", ["sim.duration=3"])
    log = run_scenario(cfg)
    path = export_csv(log, tmp_path / "run.csv")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == COLUMNS
    assert {len(r) for r in rows} == {len(COLUMNS)}
    assert all(len(f.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 9
               for f in rows[100])
    assert meta_path(path).exists()
    back = read_csv(path)
    assert np.allclose(back.data, log.data, rtol=1e-8, atol=1e-12)
    from fblquad.metrics import metrics_for_log
    m1, m2 = metrics_for_log(log), metrics_for_log(back)
    for key, val in m1.scalars().items():
        assert m2.scalars()[key] == pytest.approx(val, rel=1e-7, abs=1e-9)


def test_csv_errors_have_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        export_csv(RunLog(data=np.zeros((0, len(COLUMNS)))), tmp_path / "nope" / "x.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(COLUMNS) + "\r\n1,2\r\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        read_csv(bad)


def test_summary_csv(tmp_path):
    t = np.arange(0, 1, 0.01)
    z = np.zeros((len(t), 3))
    m = compute_metrics(t, z + 0.1, z, z, _meta())
    path = export_summary(m, tmp_path / "s.csv")
    rows = dict(csv.reader(path.open(newline="")))
    assert float(rows["mean_error_m"]) == pytest.approx(math.sqrt(0.03))


# --- config ---------------------------------------------------------------

def test_parse_value():
    assert parse_value("10") == 10
    assert parse_value("0.5") == 0.5
    assert parse_value("1, 2, 3") == [1.0, 2.0, 3.0]
    assert parse_value("true") is True
    assert parse_value("fbl") == "fbl"
    assert parse_value("off, 5") == ["off", "5"]


def test_parse_text_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_text("nope.key = 1")
    with pytest.raises(ConfigError, match=":1:"):
        parse_text("just words")
    assert parse_text("# comment\n\nplant.tau_u = 5  # trailing\n") == {"plant.tau_u": 5}


def test_config_validation():
    with pytest.raises(ConfigError, match="integer multiple"):
        ScenarioConfig.from_dict({"sim.dt_outer": 0.003})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"controller.type": "pid"})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"sim.duration": -1.0})


@pytest.mark.parametrize("name", NAMED_SCENARIOS)
def test_named_scenarios_load_and_roundtrip(name):
    cfg = load_config(name)
    assert cfg["scenario.name"] == name
    back = ScenarioConfig.from_dict(parse_text(cfg.dump()))
    for key in DEFAULTS:
        a, b = cfg[key], back[key]
        if isinstance(a, list) and len(a) == 1:
            continue
        assert np.all(np.asarray(a) == np.asarray(b)) if not isinstance(a, str) else a == b


def test_overrides():
    cfg = load_config("fig2-step", ["controller.type=cascaded", "plant.tau_u=20"])
    assert cfg["controller.type"] == "cascaded" and cfg["plant.tau_u"] == 20
    with pytest.raises(ConfigError):
        load_config("fig2-step", ["bogus"])
    with pytest.raises(ConfigError):
        load_config("no-such-scenario")


def test_weave_metadata():
    _, info = make_trajectory(load_config("weave-r3"))
    assert info.n_trials == 3
    assert info.trial_duration == pytest.approx(3 * info.revolution_period)


def test_scenario_backends_agree(monkeypatch):
    from fblquad import kernels
    if "cython" not in kernels.backends():
        pytest.skip("extension not built")
    cfg = load_config("weave-r3", ["sim.duration=1.0"])
    logs = {}
    for name, mod in kernels.backends().items():
        for fn in ("plant_step", "chol_update", "feature_eval", "wind_accel"):
            monkeypatch.setattr(kernels, fn, getattr(mod, fn))
        logs[name] = run_scenario(cfg).data
    assert np.allclose(logs["python"], logs["cython"], rtol=1e-9, atol=1e-9)
