# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py`` (same signatures)."""
from libc.math cimport sin, cos, sqrt, exp, atan2, hypot


cdef inline void _wind(const double[::1] w, const double* p, const double* v,
                       double psi, double* out) noexcept nogil:
    cdef int kind = <int>w[0]
    cdef double scale, q, d, n2, s, kd, fmax
    cdef int i
    if kind == 0:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
        return
    if kind == 1:
        scale = 1.0
    else:
        q = 0.0
        for i in range(3):
            d = (p[i] - w[4 + i]) * w[7 + i]
            q += d * d
        scale = exp(-0.5 * q)
        if kind == 3:
            scale *= 0.5 * (1.0 + cos(psi - w[11]))
    kd = w[10]
    n2 = 0.0
    for i in range(3):
        out[i] = w[1 + i] * scale - kd * v[i]
        n2 += out[i] * out[i]
    fmax = w[12]
    if fmax > 0.0 and n2 > fmax * fmax:
        s = fmax / sqrt(n2)
        for i in range(3):
            out[i] *= s


def wind_accel(const double[::1] w, const double[::1] p, const double[::1] v,
               double psi, double[::1] out):
    _wind(w, &p[0], &v[0], psi, &out[0])


cdef inline void _rodrigues(const double* phi, double* E) noexcept nogil:
    cdef double th2 = phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2]
    cdef double a, b, th
    cdef double K[9]
    cdef double K2[9]
    cdef int i, j, k
    K[0] = 0.0; K[1] = -phi[2]; K[2] = phi[1]
    K[3] = phi[2]; K[4] = 0.0; K[5] = -phi[0]
    K[6] = -phi[1]; K[7] = phi[0]; K[8] = 0.0
    for i in range(3):
        for j in range(3):
            K2[3 * i + j] = 0.0
            for k in range(3):
                K2[3 * i + j] += K[3 * i + k] * K[3 * k + j]
    if th2 < 1e-16:
        a = 1.0
        b = 0.5
    else:
        th = sqrt(th2)
        a = sin(th) / th
        b = (1.0 - cos(th)) / th2
    for i in range(9):
        E[i] = a * K[i] + b * K2[i]
    E[0] += 1.0
    E[4] += 1.0
    E[8] += 1.0


cdef inline void _matmul3(const double* A, const double* B, double* C) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += A[3 * i + k] * B[3 * k + j]
            C[3 * i + j] = acc


cdef inline int _deriv(const double* R, double ud, double u_max, double tau,
                       const double* g, const double[::1] wind, const double* extra,
                       const double* p, const double* v, double u,
                       double* dp, double* dv, double* du) noexcept nogil:
    cdef int sat = 0
    cdef double f[3]
    cdef int i
    if ud < 0.0:
        ud = 0.0
        sat = 1
    elif ud > u_max:
        ud = u_max
        sat = 1
    _wind(wind, p, v, atan2(R[3], R[0]), f)
    for i in range(3):
        dp[i] = v[i]
        dv[i] = u * R[3 * i + 2] + g[i] + f[i] + extra[i]
    du[0] = -tau * (u - ud)
    return sat


def plant_step(const double[::1] x, double u_des, double u_rate, const double[::1] alpha,
               double tau, double u_max, const double[::1] g, const double[::1] wind,
               const double[::1] extra, double dt, double[::1] out):
    cdef double half = 0.5 * dt
    cdef double phi[3]
    cdef double E[9]
    cdef double Rh[9]
    cdef double R1[9]
    cdef double RtR[9]
    cdef double ps[3]
    cdef double vs[3]
    cdef double k1p[3], k1v[3], k2p[3], k2v[3], k3p[3], k3v[3], k4p[3], k4v[3]
    cdef double k1u, k2u, k3u, k4u, u1, s6, acc
    cdef int i, j, k
    cdef int sat = 0
    cdef const double* R0 = &x[6]
    cdef double wxa[3]
    # second Magnus term: the rate ramp does not commute with the initial rate
    wxa[0] = x[16] * alpha[2] - x[17] * alpha[1]
    wxa[1] = x[17] * alpha[0] - x[15] * alpha[2]
    wxa[2] = x[15] * alpha[1] - x[16] * alpha[0]

    for i in range(3):
        phi[i] = (x[15 + i] * half + alpha[i] * (0.5 * half * half)
                  + wxa[i] * (half * half * half / 12.0))
    _rodrigues(phi, E)
    _matmul3(R0, E, Rh)
    for i in range(3):
        phi[i] = (x[15 + i] * dt + alpha[i] * (0.5 * dt * dt)
                  + wxa[i] * (dt * dt * dt / 12.0))
    _rodrigues(phi, E)
    _matmul3(R0, E, R1)

    sat |= _deriv(R0, u_des, u_max, tau, &g[0], wind, &extra[0],
                  &x[0], &x[3], x[18], k1p, k1v, &k1u)
    for i in range(3):
        ps[i] = x[i] + half * k1p[i]
        vs[i] = x[3 + i] + half * k1v[i]
    sat |= _deriv(Rh, u_des + u_rate * half, u_max, tau, &g[0], wind, &extra[0],
                  ps, vs, x[18] + half * k1u, k2p, k2v, &k2u)
    for i in range(3):
        ps[i] = x[i] + half * k2p[i]
        vs[i] = x[3 + i] + half * k2v[i]
    sat |= _deriv(Rh, u_des + u_rate * half, u_max, tau, &g[0], wind, &extra[0],
                  ps, vs, x[18] + half * k2u, k3p, k3v, &k3u)
    for i in range(3):
        ps[i] = x[i] + dt * k3p[i]
        vs[i] = x[3 + i] + dt * k3v[i]
    sat |= _deriv(R1, u_des + u_rate * dt, u_max, tau, &g[0], wind, &extra[0],
                  ps, vs, x[18] + dt * k3u, k4p, k4v, &k4u)

    s6 = dt / 6.0
    for i in range(3):
        out[i] = x[i] + s6 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i])
        out[3 + i] = x[3 + i] + s6 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])
        out[15 + i] = x[15 + i] + alpha[i] * dt
    u1 = x[18] + s6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    out[18] = u1 if u1 > 0.0 else 0.0

    # one Newton polar step: R1 (3I - R1^T R1) / 2
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += R1[3 * k + i] * R1[3 * k + j]
            RtR[3 * i + j] = -acc
        RtR[4 * i] += 3.0
    _matmul3(R1, RtR, E)
    for i in range(9):
        out[6 + i] = 0.5 * E[i]
    return sat


def chol_update(double[:, ::1] R, double[::1] x):
    cdef Py_ssize_t n = R.shape[0]
    cdef Py_ssize_t k, j
    cdef double rkk, r, c, s, rkj
    with nogil:
        for k in range(n):
            rkk = R[k, k]
            r = hypot(rkk, x[k])
            c = r / rkk
            s = x[k] / rkk
            R[k, k] = r
            for j in range(k + 1, n):
                rkj = (R[k, j] + s * x[j]) / c
                R[k, j] = rkj
                x[j] = c * x[j] - s * rkj


def feature_eval(const double[:, ::1] Omega, const double[:, ::1] W,
                 const double[::1] xi, const double[::1] xi_dot, const double[::1] xi_ddot,
                 double[::1] out_f, double[::1] out_df, double[::1] out_ddf):
    cdef Py_ssize_t n = Omega.shape[0]
    cdef Py_ssize_t d = Omega.shape[1]
    cdef Py_ssize_t i, k, o
    cdef double th, r1, r2, c, s, wc, ws, a0, a1, a2
    cdef double scale = 1.0 / sqrt(<double>n)
    for o in range(3):
        out_f[o] = 0.0
        out_df[o] = 0.0
        out_ddf[o] = 0.0
    with nogil:
        for i in range(n):
            th = 0.0
            r1 = 0.0
            r2 = 0.0
            for k in range(d):
                th += Omega[i, k] * xi[k]
                r1 += Omega[i, k] * xi_dot[k]
                r2 += Omega[i, k] * xi_ddot[k]
            c = cos(th)
            s = sin(th)
            a1 = r1 * r1
            for o in range(3):
                wc = W[i, o]
                ws = W[n + i, o]
                out_f[o] += wc * c + ws * s
                out_df[o] += (-wc * s + ws * c) * r1
                out_ddf[o] += wc * (-c * a1 - s * r2) + ws * (-s * a1 + c * r2)
        for o in range(3):
            out_f[o] *= scale
            out_df[o] *= scale
            out_ddf[o] *= scale
