"""Scenario runner: plant, controller, disturbance compensation and reference.

The loop has two rates.  Every inner step (default 500 Hz) the attitude-level
law runs and the plant advances.  Every outer tick (default 100 Hz) position
feedback is sampled, the learner gets one training pair, the adaptive
estimator gets one velocity sample, and the disturbance triple plus the
position-loop output are recomputed and then held for the inner steps.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import dynamics as dyn
from .baselines import (
    ATTITUDE_LAWS, AdaptiveEstimatorState, CascadedGains, FreeFallCommandError,
    adaptive_update, attitude_command, desired_attitude, position_feedback, position_setpoint,
)
from .fbl import (
    DisturbanceTriple, FblControllerState, FblGains, G_WORLD, ThrustSingularityError, ZERO_DISTURBANCE,
    fbl_control, snap_feedforward,
)
from .learner import DisturbanceModel, FeatureConfig, build_pair, feature_rates, features_of
from .trajectories import StepSequence, Weave, YawInPlace, hover_reference, weave_for_envelope

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e3

AXES = ("x", "y", "z")


def _vec_cols(prefix, unit):
    return [f"{prefix}_{a}_{unit}" for a in AXES]


COLUMNS = (
    ["t_s"] + _vec_cols("p", "m") + _vec_cols("v", "m_s")
    + [f"r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + _vec_cols("omega", "rad_s") + ["u_m_s2"]
    + _vec_cols("p_des", "m") + _vec_cols("v_des", "m_s") + ["psi_rad", "psi_des_rad"]
    + ["u_des_m_s2"] + _vec_cols("alpha", "rad_s2")
    + _vec_cols("fe_true", "m_s2") + _vec_cols("fe_pred", "m_s2") + _vec_cols("dhat", "m_s2")
    + ["saturated"]
)
COL = {name: i for i, name in enumerate(COLUMNS)}


@dataclass
class TrajectoryInfo:
    """What the metrics need to know about the reference."""
    kind: str
    duration: float
    t_start: float = 0.0
    revolution_period: float = 0.0
    trial_duration: float = 0.0
    n_trials: int = 1


@dataclass
class RunLog:
    data: np.ndarray
    meta: dict = field(default_factory=dict)
    aborted: str = ""

    def __len__(self):
        return self.data.shape[0]

    def col(self, name):
        return self.data[:, COL[name]]

    def vec(self, prefix, unit):
        idx = [COL[c] for c in _vec_cols(prefix, unit)]
        return self.data[:, idx]

    @property
    def t(self):
        return self.col("t_s")


def make_trajectory(cfg):
    """Reference callable plus its metadata.

    Step references jump at ``trajectory.t0``; evaluate them just before it to
    get the starting pose.
    """
    kind = cfg["trajectory.type"]
    t0 = float(cfg["trajectory.t0"])
    if kind == "hover":
        start = np.asarray(cfg["trajectory.start"], float)
        ref = hover_reference(start[:3], start[3])
        return (lambda t: ref), TrajectoryInfo(kind, duration=5.0)
    if kind in ("step", "step-sequence"):
        start = np.asarray(cfg["trajectory.start"], float)
        goal = np.asarray(cfg["trajectory.goal"], float)
        count = 1 if kind == "step" else int(cfg["trajectory.count"])
        seq = StepSequence((start[:3], start[3]), (goal[:3], goal[3]),
                           hold=float(cfg["trajectory.hold"]), count=count, t0=t0)
        return seq, TrajectoryInfo(kind, duration=seq.duration, t_start=t0,
                                   revolution_period=seq.hold, trial_duration=seq.hold,
                                   n_trials=count)
    if kind == "weave":
        shape = Weave(amplitude=cfg["trajectory.amplitude"], harmonic=cfg["trajectory.harmonic"],
                      phase=cfg["trajectory.phase"], center=cfg["trajectory.center"])
        weave = weave_for_envelope(float(cfg["trajectory.v_max"]), float(cfg["trajectory.a_max"]),
                                   shape)
        per_trial = int(cfg["trajectory.circuits_per_trial"])
        trials = int(cfg["trajectory.trials"])
        info = TrajectoryInfo(kind, duration=t0 + weave.period * per_trial * trials, t_start=t0,
                              revolution_period=weave.period,
                              trial_duration=weave.period * per_trial, n_trials=trials)
        if t0 > 0:
            return (lambda t: weave(max(t - t0, 0.0)) if t >= t0 else _hold(weave(0.0))), info
        return weave, info
    if kind == "yaw-in-place":
        revs = float(cfg["trajectory.revolutions"])
        trials = int(cfg["trajectory.trials"])
        yaw = YawInPlace(position=cfg["trajectory.center"],
                         rate=math.radians(float(cfg["trajectory.rate_deg"])),
                         revolutions=revs * trials, t0=t0)
        info = TrajectoryInfo(kind, duration=yaw.duration, t_start=t0,
                              revolution_period=yaw.revolution_time,
                              trial_duration=yaw.revolution_time * revs, n_trials=trials)
        return yaw, info
    raise ValueError(kind)


def _hold(ref):
    ref.v = np.zeros(3)
    ref.a = np.zeros(3)
    ref.j = np.zeros(3)
    ref.s = np.zeros(3)
    return ref


def make_wind(cfg):
    return dyn.WindField(kind=cfg["wind.type"], peak=cfg["wind.peak"], center=cfg["wind.center"],
                         width=cfg["wind.width"], drag=float(cfg["wind.drag"]),
                         psi0=float(cfg["wind.psi0"]), f_max=float(cfg["wind.f_max"]))


class Turbulence:
    """Zero-mean band-limited noise: a seeded sum of sinusoids per axis."""

    def __init__(self, amplitude, bandwidth, seed, n_terms=12):
        rng = np.random.default_rng(seed + 7919)
        self.amplitude = float(amplitude)
        self.freq = rng.uniform(0.1, bandwidth, size=(3, n_terms))
        self.phase = rng.uniform(0.0, 2 * math.pi, size=(3, n_terms))
        self.scale = self.amplitude * math.sqrt(2.0 / n_terms)

    def __call__(self, t):
        if self.amplitude == 0.0:
            return None
        return self.scale * np.sin(self.freq * t + self.phase).sum(axis=1)


def initial_state(ref, g=G_WORLD):
    """Vehicle state consistent with the reference at its first sample."""
    force = ref.a - g
    R = desired_attitude(force, ref.psi)
    return dyn.VehicleState(p=ref.p.copy(), v=ref.v.copy(), R=R, omega=np.zeros(3),
                            u=float(np.linalg.norm(force)))


def _gains(cfg):
    fg = FblGains(k1=cfg["controller.k1"], k2=cfg["controller.k2"], k3=cfg["controller.k3"],
                  k4=cfg["controller.k4"], tau_u=float(cfg["controller.tau_u"]),
                  k_yaw=cfg["controller.k_yaw"], k_yaw_rate=cfg["controller.k_yaw_rate"])
    cg = CascadedGains(k_p=cfg["controller.k_p"], k_v=cfg["controller.k_v"],
                       k_theta=cfg["controller.k_theta"], k_omega=cfg["controller.k_omega"])
    return fg, cg


def make_learner(cfg):
    use_yaw = bool(cfg["learner.use_yaw"])
    fc = FeatureConfig(n_features=int(cfg["learner.n_features"]),
                       length_scales=tuple(np.atleast_1d(cfg["learner.length_scales"])),
                       lam=float(cfg["learner.lam"]), seed=int(cfg["sim.seed"]), use_yaw=use_yaw)
    return DisturbanceModel(fc)


def duration_of(cfg, info):
    d = float(cfg["sim.duration"])
    return d if d > 0 else info.duration


def run_scenario(cfg, model=None):
    """Simulate one configuration; returns a :class:`RunLog`.

    ``model`` optionally warm-starts the learner (it is updated in place).
    Controller singularities and divergence abort the run; the partial log is
    returned with ``aborted`` set.
    """
    traj, info = make_trajectory(cfg)
    wind = make_wind(cfg)
    params = dyn.PlantParams(tau_u=float(cfg["plant.tau_u"]),
                             thrust_to_weight=float(cfg["plant.thrust_to_weight"]))
    g = params.g
    fgains, cgains = _gains(cfg)
    ctype = cfg["controller.type"]
    comp = cfg["compensation.type"]
    is_fbl = ctype.startswith("fbl")
    delay_comp = ctype == "fbl"
    dt = float(cfg["sim.dt_inner"])
    ratio = int(round(float(cfg["sim.dt_outer"]) / dt))
    dT = ratio * dt
    duration = duration_of(cfg, info)
    n_steps = int(round(duration / dt))
    turbulence = Turbulence(cfg["wind.turbulence"], float(cfg["wind.turbulence_bandwidth"]),
                            int(cfg["sim.seed"]))

    learned = comp.startswith("learned")
    use_yaw = bool(cfg["learner.use_yaw"])
    if learned and model is None:
        model = make_learner(cfg)
    est = AdaptiveEstimatorState(gamma=float(cfg["adaptive.gamma"]),
                                 omega_f=float(cfg["adaptive.omega_f"]),
                                 bound=float(cfg["adaptive.bound"]))

    x = initial_state(traj(min(0.0, info.t_start) - 1e-9) if info.kind.startswith("step")
                      else traj(0.0), g)
    xa = x.to_array()
    nxt = np.empty_like(xa)
    ctl = FblControllerState(u=x.u, u_des=x.u, u_dot=0.0)
    # thrust the controller believes is applied: its own estimate for the
    # feedback-linearizing variants, the last command for the baselines
    u_cmd = x.u

    data = np.zeros((n_steps, len(COLUMNS)))
    triple = ZERO_DISTURBANCE
    d_hat = np.zeros(3)
    fe_pred = np.zeros(3)
    p_err = v_err = fb = None
    ref = traj(0.0)
    prev_sample = None
    prev_u = None
    alpha_prev = np.zeros(3)
    aborted = ""
    saturations = 0
    outer_ticks = 0
    law = ATTITUDE_LAWS.get(ctype)
    k = 0
    try:
        for k in range(n_steps):
            t = k * dt
            x = dyn.VehicleState.from_array(xa)
            u_model = ctl.u if is_fbl else u_cmd
            ref = traj(t)
            if k % ratio == 0:
                outer_ticks += 1
                sample = x
                if learned and prev_sample is not None:
                    pair = build_pair(prev_sample, sample, dT, prev_u, g, use_yaw)
                    model.update(pair.xi, pair.y)
                if comp == "adaptive":
                    est = adaptive_update(est, sample, u_model, dT, g)
                    d_hat = est.d_hat
                # baselines carry no thrust-rate state
                u_rate = ctl.u_dot if is_fbl else 0.0
                prev_sample, prev_u = sample, u_model
                if learned:
                    triple = _learned_triple(model, x, u_rate, u_model, g,
                                             alpha_prev, use_yaw, comp == "learned")
                    fe_pred = triple.f
                    d_hat = triple.f
                elif comp == "adaptive":
                    triple = DisturbanceTriple(f=d_hat.copy())
                # position feedback is sampled here and held until the next tick
                p_err, v_err = x.p - ref.p, x.v - ref.v
                if not is_fbl:
                    fb = position_feedback(x, ref, cgains)
            if is_fbl:
                s_ff = snap_feedforward(p_err, v_err, ref, fgains, triple)
                cmd, ctl = fbl_control(x, ctl, ref, triple, fgains, dt, s_ff=s_ff, g=g,
                                       delay_comp=delay_comp, u_max=params.u_max)
            else:
                setpoint = position_setpoint(x, ref, cgains, triple if comp != "none" else None,
                                             g, feedback=fb)
                cmd = attitude_command(x, setpoint, cgains, law)
                u_cmd = min(max(cmd.u_des, 0.0), params.u_max)
            alpha_prev = cmd.alpha
            row = data[k]
            row[0] = t
            row[1:19] = xa[:18]
            row[19] = xa[18]
            row[20:23] = ref.p
            row[23:26] = ref.v
            row[26] = x.yaw
            row[27] = ref.psi
            row[28] = cmd.u_des
            row[29:32] = cmd.alpha
            row[32:35] = dyn.eval_wind(wind, x.p, x.v, row[26])
            row[35:38] = fe_pred
            row[38:41] = d_hat
            extra = turbulence(t)
            sat = dyn.step_array(xa, cmd, params, wind, dt, nxt, extra)
            row[41] = sat
            saturations += sat
            xa, nxt = nxt, xa
            if not np.all(np.isfinite(xa)) or np.abs(xa[:6]).max() > DIVERGENCE_LIMIT:
                raise dyn.InvalidStateError("state diverged")
        k = n_steps
    except (ThrustSingularityError, FreeFallCommandError, dyn.InvalidStateError) as exc:
        aborted = str(exc)
        log.warning("scenario aborted at t=%.3f s: %s", k * dt, aborted)
    if saturations:
        log.info("thrust command saturated on %d steps", saturations)
    meta = {
        "scenario": cfg["scenario.name"],
        "controller": ctype,
        "compensation": comp,
        "dt_inner": dt,
        "dt_outer": dT,
        "duration": duration,
        "trajectory": info.__dict__.copy(),
        "outer_ticks": outer_ticks,
        "learner_updates": model.n_updates if learned else 0,
        "learner_skipped": model.n_skipped if learned else 0,
        "saturated_steps": int(saturations),
        "smoothing_window": float(cfg["metrics.smoothing_window"]),
        "exclude_first_trial": _exclude_first(cfg),
        "deadband": float(cfg["metrics.deadband"]),
        "aborted": aborted,
    }
    return RunLog(data=data[:k].copy(), meta=meta, aborted=aborted)


def _exclude_first(cfg):
    flag = cfg["metrics.exclude_first_trial"]
    if flag == "auto":
        return cfg["compensation.type"].startswith("learned")
    return bool(flag)


def _learned_triple(model, x, u_dot, u, g, alpha_cmd, use_yaw, with_dynamics):
    """Model prediction and its time derivatives at the current sample.

    Acceleration and jerk come from the thrust/attitude reconstruction, which
    is evaluated in sequence: ``f`` -> ``a`` -> ``f_dot`` -> ``j`` -> ``f_ddot``.
    """
    xi = features_of(x.p, x.v, x.R, use_yaw)
    zeros = np.zeros_like(xi)
    f, _, _ = model.disturbance_triple(xi, zeros, zeros)
    if not with_dynamics:
        return DisturbanceTriple(f=f)
    z = x.R[:, 2]
    w_world = x.R @ x.omega
    z_dot = np.cross(w_world, z)
    a = u * z + g + f
    psi_dot = float(w_world[2])
    psi_ddot = float((x.R @ alpha_cmd)[2])
    xi_dot, _ = feature_rates(x.v, a, np.zeros(3), x.R, psi_dot, psi_ddot, use_yaw)
    _, f_dot, _ = model.disturbance_triple(xi, xi_dot, zeros)
    j = u_dot * z + u * z_dot + f_dot
    xi_dot, xi_ddot = feature_rates(x.v, a, j, x.R, psi_dot, psi_ddot, use_yaw)
    _, _, f_ddot = model.disturbance_triple(xi, xi_dot, xi_ddot)
    return DisturbanceTriple(f=f, f_dot=f_dot, f_ddot=f_ddot)
