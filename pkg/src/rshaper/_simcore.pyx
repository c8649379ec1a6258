# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-step RK4 kernels for the delay-differential closed loop.

Mirrors _simcore_py exactly; selected at import time by rshaper.sim.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite


cdef inline void _deriv(double[:, ::1] A, double[::1] B, double u,
                        double* z, double* dz, int n) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(n):
        acc = B[i] * u
        for j in range(n):
            acc += A[i, j] * z[j]
        dz[i] = acc


cdef inline int _rk4_step(double[:, ::1] A, double[::1] B, double u,
                          double* z, double dt, int n,
                          double* k1, double* k2, double* k3, double* k4,
                          double* tmp) noexcept nogil:
    cdef int i
    _deriv(A, B, u, z, k1, n)
    for i in range(n):
        tmp[i] = z[i] + 0.5 * dt * k1[i]
    _deriv(A, B, u, tmp, k2, n)
    for i in range(n):
        tmp[i] = z[i] + 0.5 * dt * k2[i]
    _deriv(A, B, u, tmp, k3, n)
    for i in range(n):
        tmp[i] = z[i] + dt * k3[i]
    _deriv(A, B, u, tmp, k4, n)
    for i in range(n):
        z[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not isfinite(z[i]):
            return 1
    return 0


def run_closed_loop(double[:, ::1] A, double[::1] B, double[::1] F,
                    double kp, double ki, double kd, double tau, double ug,
                    double[::1] r, double dt, int dist_step,
                    double dist_impulse, int dist_state):
    """RK4 with zero-order-hold control over each step.

    Returns (x, y, u, steps_completed); steps_completed < nsteps means the
    state went nonfinite (diverged) and the trace is truncated there.
    """
    cdef int n = A.shape[0]
    cdef int nsteps = r.shape[0] - 1
    cdef int yi = 1 if n >= 2 else 0
    x_arr = np.zeros(nsteps + 1)
    y_arr = np.zeros(nsteps + 1)
    u_arr = np.zeros(nsteps + 1)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr
    cdef double[::1] u = u_arr
    cdef double z[16]
    cdef double k1[16], k2[16], k3[16], k4[16], tmp[16]
    cdef int i, j, i0
    cdef double integ = 0.0, e_prev = 0.0, e = 0.0
    cdef double xcur, xdel, ucur, fidx, frac, lag
    cdef int delay_on = 1 if (kd != 0.0 and tau > 0.0) else 0
    for i in range(n):
        z[i] = 0.0
    lag = tau / dt

    xcur = 0.0
    for j in range(n):
        xcur += F[j] * z[j]
    x[0] = xcur
    y[0] = z[yi]
    e_prev = r[0] - xcur

    for i in range(nsteps):
        if i == dist_step and dist_state >= 0:
            z[dist_state] += dist_impulse
            xcur = 0.0
            for j in range(n):
                xcur += F[j] * z[j]
            x[i] = xcur
            y[i] = z[yi]
        xcur = x[i]
        e = r[i] - xcur
        if i > 0:
            integ += 0.5 * dt * (e_prev + e)
        e_prev = e
        ucur = kp * e + ki * integ + ug
        if delay_on:
            fidx = i - lag
            if fidx <= 0.0:
                xdel = x[0]
            else:
                i0 = <int> fidx
                frac = fidx - i0
                xdel = x[i0] * (1.0 - frac) + x[i0 + 1] * frac
            ucur += kd * (xcur - xdel)
        u[i] = ucur
        if _rk4_step(A, B, ucur, z, dt, n, k1, k2, k3, k4, tmp):
            return x_arr, y_arr, u_arr, i
        xcur = 0.0
        for j in range(n):
            xcur += F[j] * z[j]
        x[i + 1] = xcur
        y[i + 1] = z[yi]
    u[nsteps] = u[nsteps - 1] if nsteps > 0 else ug
    return x_arr, y_arr, u_arr, nsteps


def run_open_loop(double[:, ::1] A, double[::1] B, double[::1] F,
                  double[::1] u_in, double ug, double dt):
    """Open-loop RK4 with the sampled input held over each step."""
    cdef int n = A.shape[0]
    cdef int nsteps = u_in.shape[0] - 1
    cdef int yi = 1 if n >= 2 else 0
    x_arr = np.zeros(nsteps + 1)
    y_arr = np.zeros(nsteps + 1)
    u_arr = np.zeros(nsteps + 1)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr
    cdef double[::1] u = u_arr
    cdef double z[16]
    cdef double k1[16], k2[16], k3[16], k4[16], tmp[16]
    cdef int i, j
    cdef double ucur, xcur
    for i in range(n):
        z[i] = 0.0
    x[0] = 0.0
    for j in range(n):
        x[0] += F[j] * z[j]
    y[0] = z[yi]
    for i in range(nsteps):
        ucur = u_in[i] + ug
        u[i] = ucur
        if _rk4_step(A, B, ucur, z, dt, n, k1, k2, k3, k4, tmp):
            return x_arr, y_arr, u_arr, i
        xcur = 0.0
        for j in range(n):
            xcur += F[j] * z[j]
        x[i + 1] = xcur
        y[i + 1] = z[yi]
    u[nsteps] = u_in[nsteps] + ug
    return x_arr, y_arr, u_arr, nsteps
