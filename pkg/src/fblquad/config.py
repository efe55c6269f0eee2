"""Scenario configuration: flat ``dotted.key = value`` text files.

Syntax, one setting per line::

    # comment
    plant.tau_u = 10
    controller.type = fbl
    controller.k1 = 1040, 1040, 1900
    trajectory.goal = 0, 3, 0, 3.131592653589793

Values are parsed as int, float, bool (``true``/``false``), comma-separated
number lists, or bare strings.  Unknown keys are rejected.  Command-line
``--set key=value`` overrides use the same value syntax.
"""
from dataclasses import dataclass
from importlib import resources
import math
from pathlib import Path

DEFAULTS = {
    "scenario.name": "custom",
    "plant.tau_u": 10.0,
    "plant.thrust_to_weight": 5.0,
    "controller.type": "fbl",
    "controller.tau_u": 10.0,
    "controller.k1": [1040.0, 1040.0, 1900.0],
    "controller.k2": [600.0, 600.0, 1140.0],
    "controller.k3": 190.0,
    "controller.k4": 25.0,
    "controller.k_yaw": 30.0,
    "controller.k_yaw_rate": 10.0,
    "controller.k_p": [5.47, 5.47, 10.0],
    "controller.k_v": [3.16, 3.16, 6.0],
    "controller.k_theta": [190.0, 190.0, 30.0],
    "controller.k_omega": [25.0, 25.0, 10.0],
    "compensation.type": "none",
    "adaptive.gamma": 100.0,
    "adaptive.omega_f": 5.0,
    "adaptive.bound": 15.0,
    "learner.n_features": 50,
    "learner.length_scales": [1.0] * 6,
    "learner.lam": 1e-3,
    "learner.use_yaw": False,
    "wind.type": "none",
    "wind.peak": [0.0, 0.0, 0.0],
    "wind.center": [0.0, 0.0, 0.0],
    "wind.width": [1.0, 1.0, 1.0],
    "wind.drag": 0.0,
    "wind.psi0": 0.0,
    "wind.f_max": 30.0,
    "wind.turbulence": 0.0,
    "wind.turbulence_bandwidth": 20.0,
    "trajectory.type": "hover",
    "trajectory.start": [0.0, 0.0, 0.0, 0.0],
    "trajectory.goal": [0.0, 3.0, 0.0, math.pi - 0.01],
    "trajectory.hold": 4.0,
    "trajectory.count": 1,
    "trajectory.t0": 0.0,
    "trajectory.v_max": 2.7,
    "trajectory.a_max": 5.5,
    "trajectory.amplitude": [2.0, 1.0, 0.5],
    "trajectory.harmonic": [1.0, 2.0, 2.0],
    "trajectory.phase": [0.0, 0.0, math.pi / 2],
    "trajectory.center": [0.0, 0.0, 0.0],
    "trajectory.circuits_per_trial": 3,
    "trajectory.trials": 1,
    "trajectory.rate_deg": 120.0,
    "trajectory.revolutions": 4,
    "sim.dt_inner": 0.002,
    "sim.dt_outer": 0.01,
    "sim.duration": 0.0,
    "sim.seed": 0,
    "metrics.smoothing_window": 0.5,
    "metrics.exclude_first_trial": "auto",
    "metrics.deadband": 0.002,
    "sweep.param": "",
    "sweep.values": "",
}

CONTROLLERS = ("fbl", "fbl-no-delay-comp", "cascaded", "reduced-attitude")
COMPENSATION = ("none", "adaptive", "learned", "learned-no-dynamics")
TRAJECTORIES = ("hover", "step", "step-sequence", "weave", "yaw-in-place")

NAMED_SCENARIOS = ("fig2-step", "fig3-delay-sweep", "weave-r3", "yaw-r3")


class ConfigError(ValueError):
    pass


def parse_value(text):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return [float(p) for p in parts]
        except ValueError:
            return parts
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_text(text, source="<string>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = parse_value(value)
    return out


def resolve_config_path(name):
    """A file path, or the name of a built-in scenario."""
    path = Path(name)
    if path.exists():
        return path
    if name in NAMED_SCENARIOS:
        return resources.files("fblquad") / "scenarios" / f"{name}.cfg"
    raise ConfigError(f"no such config file or built-in scenario: {name}")


def load_config(name, overrides=()):
    """Read a config file (or built-in name) and apply ``key=value`` overrides."""
    path = resolve_config_path(name)
    values = parse_text(path.read_text(), str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = parse_value(value)
    return ScenarioConfig.from_dict(values)


@dataclass
class ScenarioConfig:
    values: dict

    @classmethod
    def from_dict(cls, values=None, **kw):
        merged = dict(DEFAULTS)
        for src in (values or {}), kw:
            for key, value in src.items():
                key = key.replace("__", ".")
                if key not in DEFAULTS:
                    raise ConfigError(f"unknown key {key!r}")
                merged[key] = value
        cfg = cls(merged)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def replace(self, **kw):
        return ScenarioConfig.from_dict(self.values, **kw)

    def with_values(self, updates):
        return ScenarioConfig.from_dict({**self.values, **updates})

    def validate(self):
        v = self.values
        if v["controller.type"] not in CONTROLLERS:
            raise ConfigError(f"controller.type must be one of {CONTROLLERS}")
        if v["compensation.type"] not in COMPENSATION:
            raise ConfigError(f"compensation.type must be one of {COMPENSATION}")
        if v["trajectory.type"] not in TRAJECTORIES:
            raise ConfigError(f"trajectory.type must be one of {TRAJECTORIES}")
        dti, dto = float(v["sim.dt_inner"]), float(v["sim.dt_outer"])
        if dti <= 0 or dto <= 0:
            raise ConfigError("time steps must be positive")
        ratio = dto / dti
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("sim.dt_outer must be an integer multiple of sim.dt_inner")
        if float(v["sim.duration"]) < 0:
            raise ConfigError("sim.duration must be positive (0 = trajectory length)")

    def dump(self):
        lines = []
        for key in DEFAULTS:
            val = self.values[key]
            if isinstance(val, (list, tuple)):
                val = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"
