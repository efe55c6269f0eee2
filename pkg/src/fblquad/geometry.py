"""Rotation-group helpers shared by the plant and the controllers.

Orientation is a 3x3 rotation matrix mapping body-frame vectors into the world
frame.  Everything here is a pure function on small numpy arrays.
"""
import math

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])

_SMALL_ANGLE = 1e-8


def hat(v):
    """Skew-symmetric matrix such that ``hat(v) @ w == cross(v, w)``."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def vee(S):
    """Inverse of :func:`hat` (reads the skew part only)."""
    return np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]]) * 0.5


def exp_so3(phi):
    """Rotation by angle ``|phi|`` about ``phi / |phi|`` (Rodrigues).

    Below 1e-8 rad the second-order series ``I + K + K^2/2`` is used.
    """
    phi = np.asarray(phi, dtype=float)
    theta = math.sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    K = hat(phi)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * (K @ K)
    a = math.sin(theta) / theta
    b = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def log_so3(R):
    """Rotation vector of ``R``; the angle is returned in [0, pi]."""
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = 0.5 * float(np.linalg.norm(w))
    c = 0.5 * (np.trace(R) - 1.0)
    theta = math.atan2(s, c)
    if s < 1e-12 and c > 0:
        return 0.5 * w
    if math.pi - theta < 1e-6:
        # axis from the symmetric part; sign is arbitrary at exactly pi
        B = 0.5 * (R + np.eye(3))
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / math.sqrt(max(B[k, k], 1e-300))
        axis /= np.linalg.norm(axis)
        if axis @ w < 0:
            axis = -axis
        return theta * axis
    return theta / (2.0 * s) * w


def orthonormalize(R):
    """One Newton step toward the polar factor: ``R (3I - R^T R) / 2``.

    Quadratically convergent, so a single step per integration step keeps the
    drift at round-off level.
    """
    return 0.5 * R @ (3.0 * np.eye(3) - R.T @ R)


def integrate_rotation(R, omega, dt):
    """Advance ``R_dot = R hat(omega)`` by ``dt`` with body rate held constant."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return orthonormalize(R @ exp_so3(np.asarray(omega, dtype=float) * dt))


def rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def yaw_of(R):
    """Heading of the body x-axis projected on the world xy-plane."""
    return math.atan2(R[1, 0], R[0, 0])


def wrap_angle(a):
    """Map an angle to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi
