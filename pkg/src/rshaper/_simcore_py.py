"""Pure-Python fallback for the simulation kernels.

Same contract as the compiled _simcore extension; used when the
extension is not built. Plain-float inner loops, no BLAS, so traces are
deterministic and bit-identical across runs.
"""

from __future__ import annotations

import math

import numpy as np


def _rk4_step(A, B, u, z, dt, n):
    k1 = [sum(A[i][j] * z[j] for j in range(n)) + B[i] * u for i in range(n)]
    t = [z[i] + 0.5 * dt * k1[i] for i in range(n)]
    k2 = [sum(A[i][j] * t[j] for j in range(n)) + B[i] * u for i in range(n)]
    t = [z[i] + 0.5 * dt * k2[i] for i in range(n)]
    k3 = [sum(A[i][j] * t[j] for j in range(n)) + B[i] * u for i in range(n)]
    t = [z[i] + dt * k3[i] for i in range(n)]
    k4 = [sum(A[i][j] * t[j] for j in range(n)) + B[i] * u for i in range(n)]
    for i in range(n):
        z[i] = z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not math.isfinite(z[i]):
            return True
    return False


def run_closed_loop(A, B, F, kp, ki, kd, tau, ug, r, dt,
                    dist_step, dist_impulse, dist_state):
    A = [list(row) for row in np.asarray(A)]
    B = list(np.asarray(B))
    F = list(np.asarray(F))
    r = np.asarray(r)
    n = len(B)
    nsteps = len(r) - 1
    yi = 1 if n >= 2 else 0
    x = np.zeros(nsteps + 1)
    y = np.zeros(nsteps + 1)
    u = np.zeros(nsteps + 1)
    z = [0.0] * n
    delay_on = kd != 0.0 and tau > 0.0
    lag = tau / dt
    x[0] = sum(F[j] * z[j] for j in range(n))
    y[0] = z[yi]
    integ = 0.0
    e_prev = r[0] - x[0]
    for i in range(nsteps):
        if i == dist_step and dist_state >= 0:
            z[dist_state] += dist_impulse
            x[i] = sum(F[j] * z[j] for j in range(n))
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
                i0 = int(fidx)
                frac = fidx - i0
                xdel = x[i0] * (1.0 - frac) + x[i0 + 1] * frac
            ucur += kd * (xcur - xdel)
        u[i] = ucur
        if _rk4_step(A, B, ucur, z, dt, n):
            return x, y, u, i
        x[i + 1] = sum(F[j] * z[j] for j in range(n))
        y[i + 1] = z[yi]
    u[nsteps] = u[nsteps - 1] if nsteps > 0 else ug
    return x, y, u, nsteps


def run_open_loop(A, B, F, u_in, ug, dt):
    A = [list(row) for row in np.asarray(A)]
    B = list(np.asarray(B))
    F = list(np.asarray(F))
    u_in = np.asarray(u_in)
    n = len(B)
    nsteps = len(u_in) - 1
    yi = 1 if n >= 2 else 0
    x = np.zeros(nsteps + 1)
    y = np.zeros(nsteps + 1)
    u = np.zeros(nsteps + 1)
    z = [0.0] * n
    x[0] = sum(F[j] * z[j] for j in range(n))
    y[0] = z[yi]
    for i in range(nsteps):
        ucur = u_in[i] + ug
        u[i] = ucur
        if _rk4_step(A, B, ucur, z, dt, n):
            return x, y, u, i
        x[i + 1] = sum(F[j] * z[j] for j in range(n))
        y[i + 1] = z[yi]
    u[nsteps] = u_in[nsteps] + ug
    return x, y, u, nsteps
