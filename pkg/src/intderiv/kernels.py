"""Compiled inner loops.

Everything here is ``numba.njit``-compiled and operates on plain floats and
float64 arrays.  The Python-facing wrappers live in :mod:`intderiv.observer`,
:mod:`intderiv.signals` and :mod:`intderiv.ode`; these functions must stay
numerically identical to the reference implementations there (checked in the
test-suite).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EULER = 0
RK4 = 1


@njit(cache=True, nogil=True)
def psign(x, alpha):
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** alpha, x)


@njit(cache=True, nogil=True)
def observer_accel(x, a, eps, gains, alphas, p):
    """Right-hand side of the last observer equation, ``dx_n/dt``.

    ``p`` is 1-based.  The measured channel is driven by ``x_p - a``; every other
    channel contributes a damping term on ``eps**i * x_i``.
    """
    n = x.shape[0]
    acc = 0.0
    for i in range(n):
        if i == p - 1:
            acc -= gains[i] * psign(x[i] - a, alphas[i])
        else:
            acc -= gains[i] * psign(eps ** (i + 1) * x[i], alphas[i])
    return acc / eps ** (n + 1)


@njit(cache=True, nogil=True)
def observer_deriv(x, a, eps, gains, alphas, p, out):
    n = x.shape[0]
    for i in range(n - 1):
        out[i] = x[i + 1]
    out[n - 1] = observer_accel(x, a, eps, gains, alphas, p)


@njit(cache=True, nogil=True)
def signal_channel(t, order, amps, omegas, poly_table):
    """Flattened signal: sum of ``A cos(w t)`` terms plus a polynomial.

    ``order`` is -2 (double integral), -1 (integral), 0 (value), 1, 2
    (derivatives).  ``poly_table[order + 2]`` holds ascending coefficients of
    the polynomial part already integrated/differentiated to that order.
    """
    val = 0.0
    for j in range(amps.shape[0]):
        A = amps[j]
        w = omegas[j]
        wt = w * t
        if order == -2:
            val += A * (1.0 - math.cos(wt)) / (w * w)
        elif order == -1:
            val += A * math.sin(wt) / w
        elif order == 0:
            val += A * math.cos(wt)
        elif order == 1:
            val -= A * w * math.sin(wt)
        else:
            val -= A * w * w * math.cos(wt)
    row = poly_table[order + 2]
    acc = 0.0
    for c in range(row.shape[0] - 1, -1, -1):
        acc = acc * t + row[c]
    return val + acc


@njit(cache=True, nogil=True)
def identity_hold(t, x, row, params):
    return row.copy()


@njit(cache=True, nogil=True)
def integrate(rhs, hold, method, t0, dt, x0, inputs, params, n_steps, record_every):
    """Fixed-step integration with per-step held inputs.

    At every grid point ``k`` the held vector ``u = hold(t_k, x_k, inputs[k])``
    is formed once and kept constant through all stages of the step.

    Returns:
        (states, held, n_recorded, fail_step, last_state).  ``fail_step`` is -1
        on success, otherwise the step index whose result was non-finite.
    """
    n = x0.shape[0]
    u0 = hold(t0, x0, inputs[0], params)
    n_rec = n_steps // record_every + 1
    states = np.empty((n_rec, n))
    held = np.empty((n_rec, u0.shape[0]))
    x = x0.copy()
    r = 0
    for k in range(n_steps):
        t = t0 + k * dt
        u = u0 if k == 0 else hold(t, x, inputs[k], params)
        if k % record_every == 0:
            states[r] = x
            held[r] = u
            r += 1
        if method == RK4:
            k1 = rhs(t, x, u, params)
            k2 = rhs(t + 0.5 * dt, x + (0.5 * dt) * k1, u, params)
            k3 = rhs(t + 0.5 * dt, x + (0.5 * dt) * k2, u, params)
            k4 = rhs(t + dt, x + dt * k3, u, params)
            xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            xn = x + dt * rhs(t, x, u, params)
        for i in range(n):
            if not math.isfinite(xn[i]):
                return states, held, r, k, xn
        x = xn
    if n_steps % record_every == 0:
        t = t0 + n_steps * dt
        states[r] = x
        held[r] = hold(t, x, inputs[n_steps], params)
        r += 1
    return states, held, r, -1, x


# -- right-hand sides used by the scenario runners ---------------------------


@njit(cache=True, nogil=True)
def tracking_rhs(t, x, u, params):
    """Observer fed ``a(t) = signal(t) + u[0]`` (u[0] is the held noise sample)."""
    eps, gains, alphas, p, amps, omegas, poly_table = params
    a = signal_channel(t, 0, amps, omegas, poly_table) + u[0]
    out = np.empty_like(x)
    observer_deriv(x, a, eps, gains, alphas, p, out)
    return out


@njit(cache=True, nogil=True)
def closed_loop_rhs(t, s, u, params):
    """Double-integrator plant + observer on ``y = z1 + noise``.

    State layout: ``[z1, z2, x_1..x_n, int_z1]``; held ``u = [noise, control]``.
    """
    eps, gains, alphas, p, pid, amps, omegas, poly_table = params
    n = gains.shape[0]
    out = np.empty_like(s)
    out[0] = s[1]
    out[1] = u[1]
    y = s[0] + u[0]
    x = s[2 : 2 + n]
    obs = np.empty(n)
    observer_deriv(x, y, eps, gains, alphas, p, obs)
    for i in range(n):
        out[2 + i] = obs[i]
    out[2 + n] = s[0]
    return out


@njit(cache=True, nogil=True)
def closed_loop_hold(t, s, row, params):
    """Noise sample and PID control computed from the observer channels.

    ``u = K_P (x2 - zd) + K_I (x1 - int zd) + K_D (x3 - zd') + zd''``.
    """
    eps, gains, alphas, p, pid, amps, omegas, poly_table = params
    kp = pid[0]
    ki = pid[1]
    kd = pid[2]
    e_int = s[2] - signal_channel(t, -1, amps, omegas, poly_table)
    e_val = s[3] - signal_channel(t, 0, amps, omegas, poly_table)
    e_der = s[4] - signal_channel(t, 1, amps, omegas, poly_table)
    ctrl = kp * e_val + ki * e_int + kd * e_der + signal_channel(t, 2, amps, omegas, poly_table)
    out = np.empty(2)
    out[0] = row[0]
    out[1] = ctrl
    return out
