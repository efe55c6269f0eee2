"""Compare the compiled and pure-Python kernel backends.

Times each kernel in isolation, then a full weave scenario in a fresh
interpreter per backend (the backend is chosen at import).

    python3 benchmarks/bench_kernels.py [--repeat 2000]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fblquad import dynamics as dyn
from fblquad.kernels import STATE_SIZE, backends
from fblquad.runner import initial_state
from fblquad.trajectories import hover_reference

SCENARIO = (
    "import time; from fblquad import load_config, run_scenario; from fblquad.kernels import BACKEND;"
    "cfg = load_config('weave-r3', ['sim.duration=20']); t = time.perf_counter();"
    "run_scenario(cfg); print(BACKEND, time.perf_counter() - t)"
)


def kernel_cases(mod):
    rng = np.random.default_rng(0)
    x = initial_state(hover_reference(np.zeros(3))).to_array()
    out = np.empty(STATE_SIZE)
    wind = dyn.WindField("position-dependent-jet", peak=(0, -4, 0), center=(0.7, 0, 0),
                         width=(0.5, 0.5, 0.5), drag=0.5).pack()
    g = np.array([0.0, 0.0, -9.81])
    alpha, extra = np.array([0.1, -0.2, 0.05]), np.zeros(3)
    n, d = 50, 6
    omega = rng.normal(size=(n, d))
    W = rng.normal(size=(2 * n, 3))
    xi, xd, xdd = rng.normal(size=d), rng.normal(size=d), rng.normal(size=d)
    f, df, ddf = np.empty(3), np.empty(3), np.empty(3)
    R = np.triu(rng.normal(size=(2 * n, 2 * n))) + 10 * np.eye(2 * n)
    phi = rng.normal(size=2 * n)
    wout = np.empty(3)
    p, v = rng.normal(size=3), rng.normal(size=3)
    return {
        "plant_step": lambda: mod.plant_step(x, 9.81, 0.0, alpha, 10.0, 49.05, g, wind, extra,
                                             0.002, out),
        "chol_update": lambda: mod.chol_update(R, phi * 1e-3),
        "feature_eval": lambda: mod.feature_eval(omega, W, xi, xd, xdd, f, df, ddf),
        "wind_accel": lambda: mod.wind_accel(wind, p, v, 0.3, wout),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--skip-scenario", action="store_true")
    args = ap.parse_args()

    mods = backends()
    print(f"{'kernel':<14}" + "".join(f"{name:>14}" for name in mods) + f"{'speedup':>10}")
    for kernel in kernel_cases(mods["python"]):
        times = {}
        for name, mod in mods.items():
            fn = kernel_cases(mod)[kernel]
            times[name] = min(timeit.repeat(fn, number=args.repeat, repeat=3)) / args.repeat
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{kernel:<14}" + "".join(f"{times[n] * 1e6:>11.2f} us" for n in mods)
              + f"{speed:>9.1f}x")

    if args.skip_scenario:
        return
    print("\n20 s weave scenario with learner (wall clock, s):")
    for force in ("0", "1"):
        env = dict(os.environ, FBLQUAD_PURE_PYTHON=force)
        res = subprocess.run([sys.executable, "-c", SCENARIO], env=env, capture_output=True,
                             text=True, check=True)
        name, secs = res.stdout.split()
        print(f"  {name:<8} {float(secs):.2f}")


if __name__ == "__main__":
    main()
