"""Augmented multirotor plant with first-order thrust lag and synthetic wind.

The state carries the realized mass-normalized thrust ``u`` alongside the
rigid-body states; the input is the desired thrust and the body angular
acceleration.  World frame is z-up, so hover thrust is 9.81 m/s^2.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .geometry import E3, yaw_of

GRAVITY = 9.81


class InvalidStateError(ValueError):
    """Raised when a non-finite state or command reaches the plant."""


@dataclass
class VehicleState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    u: float = GRAVITY

    @property
    def z(self):
        return self.R[:, 2]

    @property
    def yaw(self):
        return yaw_of(self.R)

    def to_array(self):
        out = np.empty(kernels.STATE_SIZE)
        out[0:3] = self.p
        out[3:6] = self.v
        out[6:15] = np.asarray(self.R).ravel()
        out[15:18] = self.omega
        out[18] = self.u
        return out

    @classmethod
    def from_array(cls, x):
        return cls(x[0:3].copy(), x[3:6].copy(), x[6:15].reshape(3, 3).copy(),
                   x[15:18].copy(), float(x[18]))

    def copy(self):
        return VehicleState(self.p.copy(), self.v.copy(), self.R.copy(),
                            self.omega.copy(), self.u)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.to_array())))


@dataclass
class PlantCommand:
    """Desired thrust (m/s^2) and body angular acceleration (rad/s^2).

    ``u_des_rate`` lets a controller that integrates its thrust command hand
    the plant the exact ramp over the step instead of a held value.
    """
    u_des: float
    alpha: np.ndarray
    u_des_rate: float = 0.0


@dataclass
class PlantParams:
    tau_u: float = 10.0
    thrust_to_weight: float = 5.0
    g: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -GRAVITY]))

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.tau_u <= 0:
            raise ValueError("plant thrust-lag rate must be positive")
        if self.u_max <= np.linalg.norm(self.g):
            raise ValueError("u_max must exceed gravity")

    @property
    def u_max(self):
        return self.thrust_to_weight * GRAVITY


WIND_KINDS = {"none": 0, "uniform-gust": 1, "position-dependent-jet": 2,
              "yaw-dependent-plate": 3}


@dataclass
class WindField:
    """Synthetic ground-truth acceleration disturbance.

    ``position-dependent-jet``: ``peak * exp(-|(p - center) / width|^2 / 2) - drag * v``.
    ``yaw-dependent-plate``: the jet scaled by ``(1 + cos(psi - psi0)) / 2``.
    ``uniform-gust``: ``peak - drag * v`` everywhere.

    A width of ``inf`` along an axis makes the field constant along it.  The
    output norm is clipped to ``f_max``.
    """
    kind: str = "none"
    peak: np.ndarray = field(default_factory=lambda: np.zeros(3))
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    width: np.ndarray = field(default_factory=lambda: np.ones(3))
    drag: float = 0.0
    psi0: float = 0.0
    f_max: float = 30.0

    def __post_init__(self):
        if self.kind not in WIND_KINDS:
            raise ValueError(f"unknown wind field {self.kind!r}")
        self.peak = np.asarray(self.peak, dtype=float) * np.ones(3)
        self.center = np.asarray(self.center, dtype=float) * np.ones(3)
        self.width = np.asarray(self.width, dtype=float) * np.ones(3)
        if np.any(self.width <= 0):
            raise ValueError("wind widths must be positive")
        self._packed = None

    def pack(self):
        if self._packed is None:
            w = np.zeros(kernels.WIND_SIZE)
            w[0] = WIND_KINDS[self.kind]
            w[1:4] = self.peak
            w[4:7] = self.center
            w[7:10] = 1.0 / self.width
            w[10] = self.drag
            w[11] = self.psi0
            w[12] = self.f_max
            self._packed = w
        return self._packed


NO_WIND = WindField()


def eval_wind(wind, p, v, psi):
    """Ground-truth disturbance acceleration (m/s^2) at the given state."""
    out = np.zeros(3)
    kernels.wind_accel(wind.pack(), np.ascontiguousarray(p, dtype=float),
                       np.ascontiguousarray(v, dtype=float), float(psi), out)
    return out


@dataclass
class StateDerivative:
    p_dot: np.ndarray
    v_dot: np.ndarray
    R_dot: np.ndarray
    omega_dot: np.ndarray
    u_dot: float


def plant_derivative(x, cmd, params, wind=NO_WIND):
    """Continuous-time right-hand side of the augmented model."""
    if not x.is_finite() or not np.all(np.isfinite(cmd.alpha)) or not math.isfinite(cmd.u_des):
        raise InvalidStateError("invalid state")
    u_des = min(max(cmd.u_des, 0.0), params.u_max)
    f_e = eval_wind(wind, x.p, x.v, x.yaw)
    R = x.R
    w = x.omega
    R_dot = R @ np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return StateDerivative(
        p_dot=x.v.copy(),
        v_dot=x.u * (R @ E3) + params.g + f_e,
        R_dot=R_dot,
        omega_dot=np.asarray(cmd.alpha, dtype=float).copy(),
        u_dot=-params.tau_u * (x.u - u_des),
    )


def step(x, cmd, params, wind=NO_WIND, dt=0.002, extra_accel=None):
    """Fixed-step advance of the plant; returns ``(new_state, saturated)``.

    ``extra_accel`` is an optional acceleration held constant over the step
    (used for additive turbulence).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    xa = x.to_array()
    alpha = np.ascontiguousarray(cmd.alpha, dtype=float)
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(alpha))
            and math.isfinite(cmd.u_des) and math.isfinite(cmd.u_des_rate)):
        raise InvalidStateError("invalid state")
    out = np.empty(kernels.STATE_SIZE)
    extra = np.zeros(3) if extra_accel is None else np.ascontiguousarray(extra_accel, dtype=float)
    sat = kernels.plant_step(xa, float(cmd.u_des), float(cmd.u_des_rate), alpha,
                             float(params.tau_u), float(params.u_max), params.g,
                             wind.pack(), extra, float(dt), out)
    return VehicleState.from_array(out), bool(sat)


def step_array(xa, cmd, params, wind, dt, out, extra=None):
    """Array-level variant of :func:`step` for the simulation loop (no checks)."""
    return kernels.plant_step(xa, cmd.u_des, cmd.u_des_rate, cmd.alpha, params.tau_u,
                              params.u_max, params.g, wind.pack(),
                              _ZERO3 if extra is None else extra, dt, out)


_ZERO3 = np.zeros(3)
