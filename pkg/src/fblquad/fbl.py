"""Feedback-linearizing multirotor controller with dynamic extension.

The plant input is the desired thrust and the body angular acceleration.  The
position output is differentiated four times; the thrust command enters the
snap through its derivative (one integrator, because the thrust lag already
supplies the other), the angular acceleration through the second derivative
of the body z-axis.  The linear outer law assigns the snap.

With ``delay_comp=False`` the thrust lag is ignored and the classic double
integrator on thrust is used instead.

The body-frame law needs only the gravity vector, body rates and the
feedforward snap expressed in the body frame; no trigonometry is evaluated on
that path.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .dynamics import GRAVITY, PlantCommand
from .geometry import E3, wrap_angle, yaw_of

log = logging.getLogger(__name__)

G_WORLD = np.array([0.0, 0.0, -GRAVITY])
U_MIN = 1.0


class ThrustSingularityError(RuntimeError):
    """The thrust estimate fell below the singularity guard."""


def _diag3(k):
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        return np.full(3, float(k))
    if k.ndim == 2:
        return np.diag(k).copy()
    return k.copy()


def is_hurwitz(coeffs):
    """True when all roots of the monic polynomial lie in the open left half-plane."""
    return bool(np.all(np.real(np.roots(coeffs)) < 0.0))


@dataclass
class FblGains:
    k1: np.ndarray = field(default_factory=lambda: np.array([1040.0, 1040.0, 1900.0]))
    k2: np.ndarray = field(default_factory=lambda: np.array([600.0, 600.0, 1140.0]))
    k3: float = 190.0
    k4: float = 25.0
    tau_u: float = 10.0
    k_yaw: float = 30.0
    k_yaw_rate: float = 10.0

    def __post_init__(self):
        self.k1 = _diag3(self.k1)
        self.k2 = _diag3(self.k2)
        self.k3 = float(self.k3)
        self.k4 = float(self.k4)
        if np.any(self.k1 <= 0) or np.any(self.k2 <= 0) or self.k3 <= 0 or self.k4 <= 0:
            raise ValueError("feedback gains must be positive")
        if self.tau_u <= 0:
            raise ValueError("tau_u must be positive")
        for i in range(3):
            if not is_hurwitz([1.0, self.k4, self.k3, self.k2[i], self.k1[i]]):
                raise ValueError(f"error dynamics on axis {i} are not Hurwitz")


@dataclass
class FblControllerState:
    """Dynamic-extension states: thrust estimate, thrust command and its rate."""
    u: float
    u_des: float
    u_dot: float = 0.0


@dataclass
class DisturbanceTriple:
    f: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_ddot: np.ndarray = field(default_factory=lambda: np.zeros(3))


ZERO_DISTURBANCE = DisturbanceTriple()


def init_controller_state(x, d=ZERO_DISTURBANCE, g=G_WORLD):
    """Hover-consistent extension state: the thrust that best zeroes v_dot."""
    u0 = float(-(g + d.f) @ x.R[:, 2])
    return FblControllerState(u=u0, u_des=u0, u_dot=0.0)


def feedback_acc_jerk(x, ctl, d=ZERO_DISTURBANCE, g=G_WORLD):
    """Acceleration and jerk reconstructed from thrust, attitude and the model."""
    z = x.R[:, 2]
    w_world = x.R @ x.omega
    z_dot = np.cross(w_world, z)
    a = ctl.u * z + g + d.f
    j = ctl.u_dot * z + ctl.u * z_dot + d.f_dot
    return a, j


def snap_feedforward(p_err, v_err, ref, gains, d=ZERO_DISTURBANCE):
    """Snap terms that do not depend on thrust or attitude.

    ``-k1 p_err - k2 v_err + k3 (a_des - f) + k4 (j_des - f_dot) + s_des - f_ddot``
    """
    return (-gains.k1 * p_err - gains.k2 * v_err
            + gains.k3 * (ref.a - d.f) + gains.k4 * (ref.j - d.f_dot)
            + ref.s - d.f_ddot)


def yaw_alpha(x, ref, gains):
    """Body-z angular acceleration from a PD law on wrapped heading error."""
    w_world_z = float(x.R[2] @ x.omega)
    err = wrap_angle(ref.psi - yaw_of(x.R))
    return gains.k_yaw * err + gains.k_yaw_rate * (ref.psi_dot - w_world_z) + ref.psi_ddot


def body_frame_law(R, omega, u, u_dot, u_des, s_ff, gains, g=G_WORLD, delay_comp=True):
    """Angular acceleration about body x/y and the thrust-channel input.

    Returns ``(alpha_xy, v)`` where ``v`` is the desired-thrust rate when
    ``delay_comp`` is set and the thrust second derivative otherwise.
    """
    s_b = R.T @ s_ff
    g_b = R.T @ g
    w_xy = np.array([omega[0], omega[1], 0.0])
    wz = omega[2]
    k3 = gains.k3
    k4 = gains.k4
    # e3 x a == (-a_y, a_x, 0)
    e3_s = np.array([-s_b[1], s_b[0], 0.0])
    e3_g = np.array([-g_b[1], g_b[0], 0.0])
    e3_w = np.array([-omega[1], omega[0], 0.0])
    alpha_xy = (e3_s - k3 * e3_g - 2.0 * u_dot * w_xy) / u - k4 * w_xy - wz * e3_w
    u_ddot = s_b[2] - k3 * (u + g_b[2]) - k4 * u_dot + u * (omega[0] ** 2 + omega[1] ** 2)
    if not delay_comp:
        return alpha_xy, u_ddot
    tau = gains.tau_u
    return alpha_xy, u_ddot / tau - tau * (u - u_des)


def world_frame_law(R, omega, u, u_dot, u_des, s_ff, f_ddot, gains, g=G_WORLD, delay_comp=True):
    """Same control law composed in the world frame from the snap assignment.

    Builds the full snap command, then solves the projected snap equation for
    the thrust channel and the cross-product form for the tilt channel.
    Returns ``(alpha_xy_world, v)``; kept as an independent route for checks.
    """
    z = R[:, 2]
    w = R @ omega
    z_dot = np.cross(w, z)
    s = s_ff - gains.k3 * (u * z + g) - gains.k4 * (u_dot * z + u * z_dot) + f_ddot
    w_z = float(w @ z)
    w_xy = w - w_z * z
    sf = s - f_ddot
    alpha_xy = (np.cross(z, sf) - 2.0 * u_dot * w_xy) / u + w_z * np.cross(w, z)
    u_ddot = float(sf @ z) + u * float(z_dot @ z_dot)
    if not delay_comp:
        return alpha_xy, u_ddot
    tau = gains.tau_u
    return alpha_xy, u_ddot / tau - tau * (u - u_des)


def _advance_extension(ctl, v, gains, dt, delay_comp, u_max):
    """Integrate the extension states exactly for an input held over ``dt``.

    Returns the new state and the ``(u_des, rate)`` ramp to hand the plant.
    """
    if delay_comp:
        tau = gains.tau_u
        rate = v
        u_des1 = ctl.u_des + rate * dt
        if u_max is not None and not 0.0 <= u_des1 <= u_max:
            u_des1 = min(max(u_des1, 0.0), u_max)
            rate = (u_des1 - ctl.u_des) / dt
        e0 = ctl.u - ctl.u_des
        decay = math.exp(-tau * dt)
        e1 = (e0 + rate / tau) * decay - rate / tau
        u1 = u_des1 + e1
        new = FblControllerState(u=u1, u_des=u_des1, u_dot=-tau * e1)
        return new, ctl.u_des, rate
    u1 = ctl.u + ctl.u_dot * dt + 0.5 * v * dt * dt
    ud1 = ctl.u_dot + v * dt
    if u_max is not None and not 0.0 <= u1 <= u_max:
        u1 = min(max(u1, 0.0), u_max)
        ud1 = 0.0
    new = FblControllerState(u=u1, u_des=u1, u_dot=ud1)
    return new, ctl.u, (u1 - ctl.u) / dt


def fbl_control(x, ctl, ref, d, gains, dt, s_ff=None, g=G_WORLD, delay_comp=True,
                u_max=None, u_min=U_MIN):
    """One control update; returns ``(PlantCommand, FblControllerState)``.

    ``s_ff`` may be supplied pre-computed (e.g. held from a slower position
    loop); otherwise it is formed from the current state and ``ref``.
    """
    if ctl.u < u_min:
        raise ThrustSingularityError(f"thrust singularity: u={ctl.u:.3g} < {u_min}")
    if s_ff is None:
        s_ff = snap_feedforward(x.p - ref.p, x.v - ref.v, ref, gains, d)
    u_dot = -gains.tau_u * (ctl.u - ctl.u_des) if delay_comp else ctl.u_dot
    alpha_xy, v = body_frame_law(x.R, x.omega, ctl.u, u_dot, ctl.u_des, s_ff, gains, g,
                                 delay_comp)
    alpha = alpha_xy
    alpha[2] = yaw_alpha(x, ref, gains)
    new, u_cmd, rate = _advance_extension(ctl, v, gains, dt, delay_comp, u_max)
    return PlantCommand(u_des=u_cmd, alpha=alpha, u_des_rate=rate), new


def linear_error_coefficients(gains, axis):
    """Monic characteristic polynomial of the closed-loop error on one axis."""
    return np.array([1.0, gains.k4, gains.k3, gains.k2[axis], gains.k1[axis]])
