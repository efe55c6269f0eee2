"""Incremental sparse-spectrum regression of the acceleration disturbance.

Inputs are projected onto ``N`` random frequencies and the features
``[cos(Omega xi); sin(Omega xi)]`` are regressed onto the disturbance with
ridge regularization.  The information matrix ``lam I + sum phi phi^T`` is
kept as an upper Cholesky factor updated one sample at a time, so each update
costs O(N^2).

Prediction is ``W^T phi / sqrt(N)``; the ``1/sqrt(N)`` factor is applied to
the features before regression so ``W`` is exactly the ridge solution on the
scaled features.
"""
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .geometry import yaw_of

log = logging.getLogger(__name__)

OUTLIER_THRESHOLD = 30.0


class LearnerError(ValueError):
    pass


@dataclass
class FeatureConfig:
    n_features: int = 50
    length_scales: tuple = (1.0,) * 6
    lam: float = 1e-3
    seed: int = 0
    use_yaw: bool = False

    def __post_init__(self):
        self.length_scales = tuple(float(m) for m in np.atleast_1d(self.length_scales))
        if self.n_features < 1:
            raise ValueError("need at least one frequency")
        if any(m <= 0 for m in self.length_scales):
            raise ValueError("length scales must be positive")
        if self.lam <= 0:
            raise ValueError("regularizer must be positive")
        if self.use_yaw and len(self.length_scales) != 8:
            raise ValueError("yaw features need 8 length scales")

    @property
    def d_x(self):
        return len(self.length_scales)


def make_features(cfg):
    """Random frequency matrix: standard normals scaled by inverse length scales."""
    rng = np.random.default_rng(cfg.seed)
    G = rng.standard_normal((cfg.n_features, cfg.d_x))
    return G / np.asarray(cfg.length_scales)


class DisturbanceModel:
    """Online ridge regression on random sinusoidal features (3 outputs)."""

    def __init__(self, cfg, omega=None):
        self.cfg = cfg
        self.omega = make_features(cfg) if omega is None else np.ascontiguousarray(omega, float)
        n2 = 2 * self.n
        self.factor = math.sqrt(cfg.lam) * np.eye(n2)
        self.moments = np.zeros((n2, 3))
        self.W = np.zeros((n2, 3))
        self.n_updates = 0
        self.n_skipped = 0
        self._work = np.empty(n2)

    @property
    def n(self):
        return self.omega.shape[0]

    @property
    def d_x(self):
        return self.omega.shape[1]

    def _check(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.d_x,):
            raise LearnerError(f"expected input of length {self.d_x}, got {xi.shape}")
        return xi

    def phi(self, xi):
        """Unscaled feature vector ``[cos(Omega xi); sin(Omega xi)]``."""
        th = self.omega @ self._check(xi)
        return np.concatenate((np.cos(th), np.sin(th)))

    def update(self, xi, y):
        """Add one training pair; returns False if it was gated as an outlier."""
        xi = self._check(xi)
        y = np.asarray(y, dtype=float)
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(y))):
            raise LearnerError("non-finite training pair")
        if np.linalg.norm(y) > OUTLIER_THRESHOLD:
            self.n_skipped += 1
            log.debug("skipping outlier pair |y|=%.3g", np.linalg.norm(y))
            return False
        ph = self.phi(xi) / math.sqrt(self.n)
        self.moments += np.outer(ph, y)
        self._work[:] = ph
        kernels.chol_update(self.factor, self._work)
        self._solve()
        self.n_updates += 1
        return True

    def _solve(self):
        tmp = solve_triangular(self.factor, self.moments, trans="T", check_finite=False)
        self.W = np.ascontiguousarray(solve_triangular(self.factor, tmp, check_finite=False))

    def predict(self, xi):
        return self.W.T @ self.phi(xi) / math.sqrt(self.n)

    def predict_jacobian(self, xi):
        """``d f / d xi`` as a 3 x d_x matrix."""
        xi = self._check(xi)
        th = self.omega @ xi
        n = self.n
        Wc, Ws = self.W[:n], self.W[n:]
        coef = (-Wc * np.sin(th)[:, None] + Ws * np.cos(th)[:, None])  # N x 3
        return coef.T @ self.omega / math.sqrt(n)

    def predict_hessian(self, xi):
        """Second derivatives as a 3 x d_x x d_x tensor (symmetric in the last two)."""
        xi = self._check(xi)
        th = self.omega @ xi
        n = self.n
        Wc, Ws = self.W[:n], self.W[n:]
        coef = -(Wc * np.cos(th)[:, None] + Ws * np.sin(th)[:, None])  # N x 3
        return np.einsum("no,ni,nj->oij", coef, self.omega, self.omega) / math.sqrt(n)

    def disturbance_triple(self, xi, xi_dot, xi_ddot):
        """``(f, f_dot, f_ddot)`` along a path with the given input rates."""
        f = np.empty(3)
        df = np.empty(3)
        ddf = np.empty(3)
        kernels.feature_eval(self.omega, np.ascontiguousarray(self.W),
                             np.ascontiguousarray(self._check(xi)),
                             np.ascontiguousarray(xi_dot, dtype=float),
                             np.ascontiguousarray(xi_ddot, dtype=float), f, df, ddf)
        return f, df, ddf

    def information_condition(self):
        d = np.abs(np.diag(self.factor))
        return float((d.max() / d.min()) ** 2)

    # --- persistence -------------------------------------------------------

    def to_arrays(self):
        return {"omega": self.omega, "W": self.W, "factor": self.factor,
                "moments": self.moments}

    def save(self, path):
        """Write ``omega``, ``W``, ``factor`` and ``moments`` to an ``.npz`` file."""
        np.savez(path, lam=self.cfg.lam, n_updates=self.n_updates, **self.to_arrays())

    @classmethod
    def load(cls, path, cfg):
        data = np.load(path)
        model = cls(cfg, omega=data["omega"])
        model.W = data["W"].copy()
        model.factor = data["factor"].copy()
        model.moments = data["moments"].copy()
        model.n_updates = int(data["n_updates"])
        return model


def batch_ridge(model, xis, ys):
    """Ridge weights from scratch on the scaled features (reference solution)."""
    Phi = np.array([model.phi(x) for x in xis]) / math.sqrt(model.n)
    A = Phi.T @ Phi + model.cfg.lam * np.eye(2 * model.n)
    return np.linalg.solve(A, Phi.T @ np.asarray(ys))


def features_of(p, v, R=None, use_yaw=False):
    """Model input: position and velocity, plus (sin, cos) of heading if enabled."""
    if not use_yaw:
        return np.concatenate((p, v))
    psi = yaw_of(R)
    return np.concatenate((p, v, [math.sin(psi), math.cos(psi)]))


def feature_rates(v, a, j, R=None, psi_dot=0.0, psi_ddot=0.0, use_yaw=False):
    """First and second time derivatives of :func:`features_of`."""
    if not use_yaw:
        return np.concatenate((v, a)), np.concatenate((a, j))
    psi = yaw_of(R)
    s, c = math.sin(psi), math.cos(psi)
    d1 = [c * psi_dot, -s * psi_dot]
    d2 = [-s * psi_dot ** 2 + c * psi_ddot, -c * psi_dot ** 2 - s * psi_ddot]
    return np.concatenate((v, a, d1)), np.concatenate((a, j, d2))


@dataclass
class TrainingPair:
    xi: np.ndarray
    y: np.ndarray


def build_pair(prev, cur, dT, u_prev, g, use_yaw=False):
    """Training pair from two consecutive samples ``dT`` apart.

    ``y = (v_cur - v_prev) / dT - (u_prev z_prev + g)`` and the input is taken
    at the current sample.  ``prev``/``cur`` need ``p``, ``v`` and ``R``.
    """
    if dT <= 0:
        raise ValueError("dT must be positive")
    y = (cur.v - prev.v) / dT - (u_prev * prev.R[:, 2] + g)
    return TrainingPair(features_of(cur.p, cur.v, cur.R, use_yaw), y)
