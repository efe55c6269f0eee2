"""Pure-Python implementations of the hot kernels.

These are the reference versions; ``_kernels_ext`` (Cython) mirrors them
signature for signature.  ``fblquad.kernels`` picks one at import time.

State vectors are flat float64 arrays of length 19::

    [p(3), v(3), R row-major(9), omega(3), u]

Wind parameters are a flat float64 array of length 16 (see
``fblquad.dynamics.WindField.pack``)::

    [kind, peak(3), center(3), inv_width(3), drag, psi0, f_max, 0, 0, 0]
"""
import math

import numpy as np

STATE_SIZE = 19
WIND_SIZE = 16

WIND_NONE = 0
WIND_UNIFORM = 1
WIND_JET = 2
WIND_PLATE = 3


def wind_accel(w, p, v, psi, out):
    """Write the wind acceleration for position ``p``, velocity ``v``, yaw ``psi``."""
    kind = int(w[0])
    if kind == WIND_NONE:
        out[0] = out[1] = out[2] = 0.0
        return
    if kind == WIND_UNIFORM:
        scale = 1.0
    else:
        q = 0.0
        for i in range(3):
            d = (p[i] - w[4 + i]) * w[7 + i]
            q += d * d
        scale = math.exp(-0.5 * q)
        if kind == WIND_PLATE:
            scale *= 0.5 * (1.0 + math.cos(psi - w[11]))
    kd = w[10]
    n2 = 0.0
    for i in range(3):
        out[i] = w[1 + i] * scale - kd * v[i]
        n2 += out[i] * out[i]
    fmax = w[12]
    if fmax > 0.0 and n2 > fmax * fmax:
        s = fmax / math.sqrt(n2)
        for i in range(3):
            out[i] *= s


def _rodrigues(phi):
    th2 = phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2]
    K = np.array([
        [0.0, -phi[2], phi[1]],
        [phi[2], 0.0, -phi[0]],
        [-phi[1], phi[0], 0.0],
    ])
    if th2 < 1e-16:
        return np.eye(3) + K + 0.5 * (K @ K)
    th = math.sqrt(th2)
    return np.eye(3) + (math.sin(th) / th) * K + ((1.0 - math.cos(th)) / th2) * (K @ K)


def plant_step(x, u_des, u_rate, alpha, tau, u_max, g, wind, extra, dt, out):
    """Advance the augmented plant by ``dt``; returns 1 if the thrust command saturated.

    RK4 on (p, v, u) with the attitude treated as a known function of time
    over the step (body rate ramps linearly under constant ``alpha``).  The
    attitude path keeps the first two Magnus terms, which is exact to the
    order of the integrator.
    """
    p0 = x[0:3]
    v0 = x[3:6]
    R0 = x[6:15].reshape(3, 3)
    w0 = x[15:18]
    u0 = x[18]
    sat = 0

    half = 0.5 * dt
    wxa = np.cross(w0, alpha) / 12.0
    Rh = R0 @ _rodrigues(w0 * half + alpha * (0.5 * half * half) + wxa * half ** 3)
    R1 = R0 @ _rodrigues(w0 * dt + alpha * (0.5 * dt * dt) + wxa * dt ** 3)
    rots = (R0, Rh, Rh, R1)
    times = (0.0, half, half, dt)

    f = np.empty(3)

    def deriv(k, p, v, u):
        nonlocal sat
        R = rots[k]
        ud = u_des + u_rate * times[k]
        if ud < 0.0:
            ud = 0.0
            sat = 1
        elif ud > u_max:
            ud = u_max
            sat = 1
        wind_accel(wind, p, v, math.atan2(R[1, 0], R[0, 0]), f)
        acc = u * R[:, 2] + g + f + extra
        return v, acc, -tau * (u - ud)

    k1p, k1v, k1u = deriv(0, p0, v0, u0)
    k2p, k2v, k2u = deriv(1, p0 + half * k1p, v0 + half * k1v, u0 + half * k1u)
    k3p, k3v, k3u = deriv(2, p0 + half * k2p, v0 + half * k2v, u0 + half * k2u)
    k4p, k4v, k4u = deriv(3, p0 + dt * k3p, v0 + dt * k3v, u0 + dt * k3u)
    s6 = dt / 6.0
    out[0:3] = p0 + s6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    out[3:6] = v0 + s6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    u1 = u0 + s6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    out[18] = u1 if u1 > 0.0 else 0.0
    out[6:15] = (0.5 * R1 @ (3.0 * np.eye(3) - R1.T @ R1)).ravel()
    out[15:18] = w0 + alpha * dt
    return sat


def chol_update(R, x):
    """In-place rank-one update of an upper factor: ``R^T R += x x^T``.

    ``x`` is overwritten.
    """
    n = R.shape[0]
    for k in range(n):
        rkk = R[k, k]
        r = math.hypot(rkk, x[k])
        c = r / rkk
        s = x[k] / rkk
        R[k, k] = r
        if k + 1 < n:
            R[k, k + 1:] = (R[k, k + 1:] + s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * R[k, k + 1:]


def feature_eval(Omega, W, xi, xi_dot, xi_ddot, out_f, out_df, out_ddf):
    """Model value and its first two time derivatives along a path.

    ``f = W^T [cos(Omega xi); sin(Omega xi)] / sqrt(N)``, differentiated via
    the chain rule with the given input rates.
    """
    n = Omega.shape[0]
    scale = 1.0 / math.sqrt(n)
    th = Omega @ xi
    c = np.cos(th)
    s = np.sin(th)
    r1 = Omega @ xi_dot
    r2 = Omega @ xi_ddot
    Wc = W[:n]
    Ws = W[n:]
    out_f[:] = scale * (Wc.T @ c + Ws.T @ s)
    # d/dt cos = -sin * r1 ; d/dt sin = cos * r1
    out_df[:] = scale * (Wc.T @ (-s * r1) + Ws.T @ (c * r1))
    r1sq = r1 * r1
    out_ddf[:] = scale * (Wc.T @ (-c * r1sq - s * r2) + Ws.T @ (-s * r1sq + c * r2))
