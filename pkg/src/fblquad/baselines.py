"""Comparison controllers and the adaptive disturbance estimator.

* cascaded geometric SO(3) controller (position loop -> attitude loop),
* tilt-prioritized reduced-attitude variant of the same,
* an L1-style acceleration-disturbance estimator (velocity predictor,
  piecewise-constant adaptation, low-pass filtered output).

Neither attitude controller models the thrust lag.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .dynamics import PlantCommand
from .fbl import G_WORLD, U_MIN
from .geometry import E3, vee, wrap_angle


class FreeFallCommandError(RuntimeError):
    """The position loop asked for (near) zero specific force."""


def _d3(values):
    out = np.asarray(values, dtype=float) * np.ones(3)
    if np.any(out <= 0):
        raise ValueError("gains must be positive")
    return out


@dataclass
class CascadedGains:
    k_p: np.ndarray = field(default_factory=lambda: np.array([5.47, 5.47, 10.0]))
    k_v: np.ndarray = field(default_factory=lambda: np.array([3.16, 3.16, 6.0]))
    k_theta: np.ndarray = field(default_factory=lambda: np.array([190.0, 190.0, 30.0]))
    k_omega: np.ndarray = field(default_factory=lambda: np.array([25.0, 25.0, 10.0]))

    def __post_init__(self):
        self.k_p = _d3(self.k_p)
        self.k_v = _d3(self.k_v)
        self.k_theta = _d3(self.k_theta)
        self.k_omega = _d3(self.k_omega)


@dataclass
class AttitudeSetpoint:
    """Output of the position loop: specific-force vector and attitude target.

    Rates are world-frame feedforward terms from the reference (and, when
    available, the disturbance-model derivatives).
    """
    force: np.ndarray
    R_d: np.ndarray
    omega_d: np.ndarray
    alpha_d: np.ndarray = field(default_factory=lambda: np.zeros(3))


def desired_attitude(force, psi):
    """Rotation whose z-axis is along ``force`` with heading ``psi``."""
    n = np.linalg.norm(force)
    z_d = force / n
    x_c = np.array([math.cos(psi), math.sin(psi), 0.0])
    y_d = np.cross(z_d, x_c)
    y_d /= np.linalg.norm(y_d)
    x_d = np.cross(y_d, z_d)
    return np.column_stack((x_d, y_d, z_d))


def position_feedback(x, ref, gains):
    """PD term of the position loop, ``-k_p p_err - k_v v_err``."""
    return -gains.k_p * (x.p - ref.p) - gains.k_v * (x.v - ref.v)


def position_setpoint(x, ref, gains, d_hat=None, g=G_WORLD, u_min=U_MIN, feedback=None):
    """Position loop with acceleration feedforward and disturbance cancellation.

    ``d_hat`` is either a disturbance vector or a ``DisturbanceTriple``; with
    a triple, its derivatives enter the rate and angular-acceleration
    feedforward through the thrust-direction derivatives.  ``feedback`` may
    carry a PD term sampled earlier (slower position loop).
    """
    if feedback is None:
        feedback = position_feedback(x, ref, gains)
    f_dot_ff = ref.j
    f_ddot_ff = ref.s
    a_cmd = feedback + ref.a
    if d_hat is not None:
        if hasattr(d_hat, "f_dot"):
            a_cmd = a_cmd - d_hat.f
            f_dot_ff = f_dot_ff - d_hat.f_dot
            f_ddot_ff = f_ddot_ff - d_hat.f_ddot
        else:
            a_cmd = a_cmd - d_hat
    force = a_cmd - g
    n = float(np.linalg.norm(force))
    if n < u_min:
        raise FreeFallCommandError(f"free-fall command: |a_cmd - g| = {n:.3g}")
    R_d = desired_attitude(force, ref.psi)
    z = R_d[:, 2]
    n_dot = float(z @ f_dot_ff)
    z_dot = (f_dot_ff - n_dot * z) / n
    n_ddot = float(z @ f_ddot_ff) + n * float(z_dot @ z_dot)
    z_ddot = (f_ddot_ff - n_ddot * z - 2.0 * n_dot * z_dot) / n
    omega_d = np.cross(z, z_dot) + ref.psi_dot * z[2] * z
    alpha_d = np.cross(z, z_ddot) + ref.psi_ddot * z[2] * z
    return AttitudeSetpoint(force=force, R_d=R_d, omega_d=omega_d, alpha_d=alpha_d)


def so3_attitude_law(R, omega, sp, gains):
    """Geometric attitude law with ``e_R = vee(R_d^T R - R^T R_d) / 2``."""
    e_R = 0.5 * vee(sp.R_d.T @ R - R.T @ sp.R_d)
    w_ref = R.T @ sp.omega_d
    ff = R.T @ sp.alpha_d - np.cross(omega, w_ref)
    return -gains.k_theta * e_R - gains.k_omega * (omega - w_ref) + ff


def tilt_yaw_errors(R, R_d):
    """Split the attitude error into a tilt part and a heading part.

    The tilt error is ``e3 x (R^T z_d)`` in the body frame (no z component);
    the heading error is the wrapped angle of the remaining rotation about the
    body z-axis once the tilt is removed.
    """
    zdb = R.T @ R_d[:, 2]
    tilt = np.array([-zdb[1], zdb[0], 0.0])
    sn = math.hypot(tilt[0], tilt[1])
    cs = zdb[2]
    if sn > 1e-12:
        ang = math.atan2(sn, cs)
        axis = tilt / sn
        K = np.array([[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]],
                      [-axis[1], axis[0], 0.0]])
        R_tilt = np.eye(3) + math.sin(ang) * K + (1.0 - math.cos(ang)) * (K @ K)
    else:
        R_tilt = np.eye(3)
    R_rest = (R @ R_tilt).T @ R_d
    yaw_err = wrap_angle(math.atan2(R_rest[1, 0], R_rest[0, 0]))
    return tilt, yaw_err


def reduced_attitude_law(R, omega, sp, gains):
    """Tilt-prioritized law: tilt and heading errors get separate gains."""
    tilt, yaw_err = tilt_yaw_errors(R, sp.R_d)
    w_ref = R.T @ sp.omega_d
    ff = R.T @ sp.alpha_d - np.cross(omega, w_ref)
    k = gains.k_theta
    return (np.array([k[0] * tilt[0], k[1] * tilt[1], k[2] * yaw_err])
            - gains.k_omega * (omega - w_ref) + ff)


def attitude_command(x, sp, gains, law):
    alpha = law(x.R, x.omega, sp, gains)
    return PlantCommand(u_des=float(sp.force @ x.R[:, 2]), alpha=alpha)


def cascaded_control(x, ref, gains, d_hat=None, g=G_WORLD):
    sp = position_setpoint(x, ref, gains, d_hat, g)
    return attitude_command(x, sp, gains, so3_attitude_law)


def reduced_attitude_control(x, ref, gains, d_hat=None, g=G_WORLD):
    sp = position_setpoint(x, ref, gains, d_hat, g)
    return attitude_command(x, sp, gains, reduced_attitude_law)


ATTITUDE_LAWS = {"cascaded": so3_attitude_law, "reduced-attitude": reduced_attitude_law}


@dataclass
class AdaptiveEstimatorState:
    """L1-style acceleration-disturbance estimator.

    ``gamma`` is the adaptation bandwidth (1/s) of the raw estimate and
    ``omega_f`` the bandwidth (rad/s) of the output low-pass filter.
    """
    gamma: float = 100.0
    omega_f: float = 5.0
    bound: float = 15.0
    d_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_pred: np.ndarray = None

    def copy(self):
        return AdaptiveEstimatorState(self.gamma, self.omega_f, self.bound, self.d_hat.copy(),
                                      self.sigma.copy(),
                                      None if self.v_pred is None else self.v_pred.copy())


def _project(vec, bound):
    n = float(np.linalg.norm(vec))
    return vec * (bound / n) if n > bound else vec


def _blend(rate, dt):
    return 1.0 if math.isinf(rate) else 1.0 - math.exp(-rate * dt)


def adaptive_update(est, x, u_applied, dt, g=G_WORLD):
    """Advance the estimator by one sample of velocity and applied thrust.

    The predictor error over the last interval, divided by ``dt``, is the
    innovation for the raw estimate; the output is its first-order low-pass.
    Returns a new state; the input is not modified.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    new = est.copy()
    if est.v_pred is not None:
        innovation = (x.v - est.v_pred) / dt
        new.sigma = _project(est.sigma + _blend(est.gamma, dt) * innovation, est.bound)
        new.d_hat = _project(est.d_hat + _blend(est.omega_f, dt) * (new.sigma - est.d_hat),
                             est.bound)
    new.v_pred = x.v + dt * (u_applied * x.R[:, 2] + g + new.sigma)
    return new


def adaptive_frequency_response(est, omega, dt):
    """Complex gain from a sinusoidal disturbance to ``d_hat`` at ``omega`` rad/s.

    Product of the interval-averaging of the velocity difference and the two
    first-order discrete filter stages, evaluated on the unit circle.
    """
    zinv = np.exp(-1j * omega * dt)
    h = omega * dt / 2.0
    avg = np.exp(-1j * h) * (math.sin(h) / h if h > 0 else 1.0)
    b1 = _blend(est.gamma, dt)
    b2 = _blend(est.omega_f, dt)
    return avg * b1 / (1.0 - (1.0 - b1) * zinv) * b2 / (1.0 - (1.0 - b2) * zinv)
