"""Summary metrics computed from a run log."""
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter1d


@dataclass
class MetricsSummary:
    mean_error_m: float
    max_error_m: float
    rms_error_m: float
    mean_speed_m_s: float
    max_excursion_m: list
    altitude_peak_error_m: float
    altitude_rms_error_m: float
    altitude_zero_crossings: int
    per_revolution_error_m: list = field(default_factory=list)
    smoothed_error_m: np.ndarray = None
    window_start_s: float = 0.0
    settings: dict = field(default_factory=dict)

    def scalars(self):
        """Flat ``name -> value`` mapping (no series)."""
        out = {}
        for key, val in asdict(self).items():
            if key in ("smoothed_error_m", "settings"):
                continue
            if isinstance(val, (list, tuple, np.ndarray)):
                for i, item in enumerate(val):
                    out[f"{key}[{i}]"] = float(item)
            else:
                out[key] = val
        return out


def moving_average(x, window_samples):
    """Centered moving average; edges use the nearest value so constants pass through."""
    if window_samples <= 1 or len(x) == 0:
        return np.asarray(x, dtype=float).copy()
    return uniform_filter1d(np.asarray(x, dtype=float), size=int(window_samples), mode="nearest")


def zero_crossings(e, deadband):
    """Sign changes of ``e``, ignoring samples inside ``+-deadband``."""
    signs = np.sign(e[np.abs(e) > deadband])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def compute_metrics(t, p, p_des, v, meta):
    """Error/speed statistics over the metric window of a run.

    ``meta`` carries ``trajectory`` (start time, revolution period, trial
    length), ``smoothing_window``, ``exclude_first_trial`` and ``deadband``.
    Per-revolution errors cover only whole revolutions inside the window.
    """
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        raise ValueError("empty log")
    traj = meta.get("trajectory", {})
    t_start = float(traj.get("t_start", 0.0))
    period = float(traj.get("revolution_period", 0.0))
    trial = float(traj.get("trial_duration", 0.0))
    window = float(meta.get("smoothing_window", 0.5))
    deadband = float(meta.get("deadband", 0.0))
    dt = float(t[1] - t[0]) if t.size > 1 else 1.0

    w0 = t_start + (trial if meta.get("exclude_first_trial") and trial > 0 else 0.0)
    mask = t >= w0 - 1e-9
    if not mask.any():
        mask = np.ones_like(t, dtype=bool)

    err_vec = np.asarray(p) - np.asarray(p_des)
    err = np.linalg.norm(err_vec, axis=1)
    smoothed = moving_average(err, max(1, int(round(window / dt))))
    speed = np.linalg.norm(np.asarray(v), axis=1)
    alt = err_vec[:, 2]

    per_rev = []
    if period > 0:
        k = 0
        while True:
            a, b = t_start + k * period, t_start + (k + 1) * period
            if b > t[-1] + dt + 1e-9:
                break
            sel = (t >= a - 1e-9) & (t < b - 1e-9)
            per_rev.append(float(err[sel].mean()) if sel.any() else float("nan"))
            k += 1

    em = err[mask]
    return MetricsSummary(
        mean_error_m=float(em.mean()),
        max_error_m=float(em.max()),
        rms_error_m=float(np.sqrt(np.mean(em ** 2))),
        mean_speed_m_s=float(speed[mask].mean()),
        max_excursion_m=[float(np.abs(err_vec[mask, i]).max()) for i in range(3)],
        altitude_peak_error_m=float(np.abs(alt[mask]).max()),
        altitude_rms_error_m=float(np.sqrt(np.mean(alt[mask] ** 2))),
        altitude_zero_crossings=zero_crossings(alt[mask], deadband),
        per_revolution_error_m=per_rev,
        smoothed_error_m=smoothed,
        window_start_s=float(w0),
        settings={"smoothing_window_s": window, "deadband_m": deadband,
                  "exclude_first_trial": bool(meta.get("exclude_first_trial")),
                  "revolution_period_s": period, "trial_duration_s": trial},
    )


def metrics_for_log(log):
    return compute_metrics(log.t, log.vec("p", "m"), log.vec("p_des", "m"), log.vec("v", "m_s"),
                           log.meta)
