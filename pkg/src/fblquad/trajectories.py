"""Flat-output references: setpoint steps, a 3D weave and yaw-in-place."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import wrap_angle


def _z3():
    return np.zeros(3)


@dataclass
class FlatReference:
    p: np.ndarray = field(default_factory=_z3)
    v: np.ndarray = field(default_factory=_z3)
    a: np.ndarray = field(default_factory=_z3)
    j: np.ndarray = field(default_factory=_z3)
    s: np.ndarray = field(default_factory=_z3)
    psi: float = 0.0
    psi_dot: float = 0.0
    psi_ddot: float = 0.0


def hover_reference(p=(0.0, 0.0, 0.0), psi=0.0):
    return FlatReference(p=np.array(p, dtype=float), psi=psi)


def step_reference(t, start, goal):
    """Setpoint jump at ``t = 0`` from pose ``start`` to ``goal``.

    Poses are ``(position, yaw)`` pairs; all desired derivatives are zero.
    """
    p, psi = start if t < 0 else goal
    return FlatReference(p=np.array(p, dtype=float), psi=float(psi))


@dataclass
class StepSequence:
    """Alternating setpoint steps between two poses, ``hold`` seconds apart.

    The first jump (start -> goal) happens at ``t0``.
    """
    start: tuple
    goal: tuple
    hold: float = 4.0
    count: int = 10
    t0: float = 0.0

    def __call__(self, t):
        k = math.floor((t - self.t0) / self.hold)
        if k < 0:
            return step_reference(-1.0, self.start, self.goal)
        k = min(k, self.count - 1)
        pose = self.goal if k % 2 == 0 else self.start
        return step_reference(0.0, pose, pose)

    @property
    def duration(self):
        return self.t0 + self.hold * self.count


@dataclass
class Weave:
    """Per-axis sinusoids ``p_i = c_i + A_i sin(k_i w t + phase_i)``.

    Defaults give a figure-eight in xy with a vertical bob at twice the base
    frequency; :func:`weave_for_envelope` rescales amplitude and frequency to a
    velocity/acceleration envelope.
    """
    amplitude: np.ndarray = field(default_factory=lambda: np.array([2.0, 1.0, 0.5]))
    harmonic: np.ndarray = field(default_factory=lambda: np.array([1.0, 2.0, 2.0]))
    phase: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.5 * math.pi]))
    omega: float = 1.0
    center: np.ndarray = field(default_factory=_z3)
    psi: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "harmonic", "phase", "center"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    def __call__(self, t):
        return weave_reference(t, self.amplitude, self.harmonic * self.omega, self.phase,
                               center=self.center, psi=self.psi)


def weave_reference(t, amplitude, frequency, phase, center=(0.0, 0.0, 0.0), psi=0.0):
    """Sinusoid on each axis with its derivatives through snap."""
    A = np.asarray(amplitude, dtype=float)
    w = np.asarray(frequency, dtype=float)
    th = w * t + np.asarray(phase, dtype=float)
    s = A * np.sin(th)
    c = A * np.cos(th)
    w2 = w * w
    return FlatReference(
        p=np.asarray(center, dtype=float) + s,
        v=w * c,
        a=-w2 * s,
        j=-w2 * w * c,
        s=w2 * w2 * s,
        psi=psi,
    )


def _peak_norm(fn, period):
    """Max of ``fn(t)`` over one period: dense scan, then bounded refinement."""
    ts = np.linspace(0.0, period, 4001)
    vals = np.array([fn(t) for t in ts])
    k = int(np.argmax(vals))
    dt = ts[1] - ts[0]
    res = minimize_scalar(lambda t: -fn(t), bounds=(ts[k] - dt, ts[k] + dt),
                          method="bounded", options={"xatol": 1e-12})
    return max(vals[k], -res.fun)


def weave_peaks(weave):
    """(max |v_des|, max |a_des|) over one period."""
    vmax = _peak_norm(lambda t: float(np.linalg.norm(weave(t).v)), weave.period)
    amax = _peak_norm(lambda t: float(np.linalg.norm(weave(t).a)), weave.period)
    return vmax, amax


def weave_for_envelope(v_max=2.7, a_max=5.5, shape=None):
    """Scale a weave shape so its peak speed and acceleration hit the envelope.

    With amplitude scale ``k`` and base frequency ``w`` the peaks are
    ``k w Fv`` and ``k w^2 Fa`` where ``Fv, Fa`` are the unit-shape peaks, so
    both can be matched exactly.
    """
    base = Weave() if shape is None else shape
    unit = Weave(amplitude=base.amplitude, harmonic=base.harmonic, phase=base.phase,
                 omega=1.0, center=base.center, psi=base.psi)
    fv, fa = weave_peaks(unit)
    w = (a_max / fa) / (v_max / fv)
    k = v_max / (w * fv)
    return Weave(amplitude=base.amplitude * k, harmonic=base.harmonic, phase=base.phase,
                 omega=w, center=base.center, psi=base.psi)


@dataclass
class YawInPlace:
    """Constant position while yawing at ``rate`` for ``revolutions`` turns, then hold."""
    position: np.ndarray = field(default_factory=_z3)
    rate: float = math.radians(120.0)
    revolutions: float = 4.0
    t0: float = 0.0

    def __post_init__(self):
        if self.rate == 0:
            raise ValueError("yaw rate must be nonzero")
        self.position = np.asarray(self.position, dtype=float)

    @property
    def revolution_time(self):
        return 2.0 * math.pi / abs(self.rate)

    @property
    def duration(self):
        return self.t0 + self.revolutions * self.revolution_time

    def __call__(self, t):
        return yaw_in_place_reference(t - self.t0, self.rate, self.revolutions, self.position)


def yaw_in_place_reference(t, rate=math.radians(120.0), revolutions=4.0, position=(0.0, 0.0, 0.0)):
    if rate == 0:
        raise ValueError("yaw rate must be nonzero")
    t_end = revolutions * 2.0 * math.pi / abs(rate)
    if t <= 0.0:
        psi, psi_dot = 0.0, 0.0
    elif t < t_end:
        psi, psi_dot = rate * t, rate
    else:
        psi, psi_dot = rate * t_end, 0.0
    return FlatReference(p=np.array(position, dtype=float), psi=wrap_angle(psi), psi_dot=psi_dot)
