"""Compiled inner loops for the cut-off flow.

State vector: (a, b, g, theta) where w = a + ib is the strip coordinate of the
projected point, g the accumulated scaling exponent and theta the accumulated
phase of the fiber coordinates.  In strip coordinates the cut-off field
f(p) R + f'(p) V reads

    w' = 2 sqrt(pi) f'(p) + 2 pi (f(p) - p f'(p)) cosh(w),

so the uncut flow (f = p) is the translation w' = 2 sqrt(pi).
"""

import math

import numpy as np
from numba import njit

SQRT_PI = math.sqrt(math.pi)

PROFILE_QUADRATIC = 0
PROFILE_SMOOTHSTEP = 1

STATUS_OK = 0
STATUS_STEP_FAILURE = 1


@njit(cache=True)
def mu(x, kind):
    if x <= 0.0:
        return 0.5
    if x >= 1.0:
        return x
    if kind == PROFILE_QUADRATIC:
        return 0.5 + 0.5 * x * x
    return 0.5 + x * x * x - 0.5 * x * x * x * x


@njit(cache=True)
def dmu(x, kind):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if kind == PROFILE_QUADRATIC:
        return x
    return 3.0 * x * x - 2.0 * x * x * x


@njit(cache=True)
def cutoff(p, eta, delta, kind):
    """(f, f') of the odd extension of f(p) = eta + delta - delta mu((eta - p + delta) / delta)."""
    s = 1.0
    if p < 0.0:
        s = -1.0
        p = -p
    x = (eta - p + delta) / delta
    # exact branches: inner zone is the uncut field, outer zone a pure rotation
    if x >= 1.0:
        return s * p, 1.0
    if x <= 0.0:
        return s * (eta + 0.5 * delta), 0.0
    return s * (eta + delta - delta * mu(x, kind)), dmu(x, kind)


@njit(cache=True)
def eta_at(t, T):
    a = -SQRT_PI * T + 2.0 * SQRT_PI * t
    e = math.exp(-abs(a))
    return 2.0 * e / (1.0 + e * e) / SQRT_PI


@njit(cache=True)
def rhs(t, y, T, delta, kind, out):
    a = y[0]
    b = y[1]
    e = math.exp(-abs(a))
    sech = 2.0 * e / (1.0 + e * e)
    sb = math.sin(b)
    cb = math.cos(b)
    den = SQRT_PI * (1.0 + sb * sech)
    p = cb * sech / den
    q = math.tanh(a) / den
    f, fp = cutoff(p, eta_at(t, T), delta, kind)
    k = f - p * fp
    if k != 0.0:
        cosh_a = math.cosh(a)
        sinh_a = math.sinh(a)
        out[0] = 2.0 * SQRT_PI * fp + 2.0 * math.pi * k * cosh_a * cb
        out[1] = 2.0 * math.pi * k * sinh_a * sb
    else:
        out[0] = 2.0 * SQRT_PI * fp
        out[1] = 0.0
    out[2] = -2.0 * math.pi * fp * q
    out[3] = 2.0 * math.pi * f - math.pi * fp * p


@njit(cache=True)
def rk4_step(t, y, h, T, delta, kind, k1, k2, k3, k4, tmp, out):
    rhs(t, y, T, delta, kind, k1)
    for i in range(4):
        tmp[i] = y[i] + 0.5 * h * k1[i]
    rhs(t + 0.5 * h, tmp, T, delta, kind, k2)
    for i in range(4):
        tmp[i] = y[i] + 0.5 * h * k2[i]
    rhs(t + 0.5 * h, tmp, T, delta, kind, k3)
    for i in range(4):
        tmp[i] = y[i] + h * k3[i]
    rhs(t + h, tmp, T, delta, kind, k4)
    for i in range(4):
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    # keep b on the closed strip; the boundary lines are invariant
    if out[1] < 0.0:
        out[1] = 0.0
    elif out[1] > math.pi:
        out[1] = math.pi


@njit(cache=True)
def integrate(y0, times, T, delta, kind, tol, h_min, max_steps=2_000_000):
    """RK4 through the output ``times`` with step-doubling control.

    Each output interval is covered by substeps; a substep is accepted when
    the two-half-steps vs one-step difference / 15 is below ``tol`` (tol <= 0
    disables control, giving plain fixed-step RK4 on the output grid).
    Returns (states, status, n_substeps, max_error_estimate).
    """
    n = times.shape[0]
    ys = np.empty((n, 4))
    y = y0.copy()
    ys[0] = y
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    full = np.empty(4)
    half = np.empty(4)
    two = np.empty(4)
    n_sub = 0
    max_err = 0.0
    for j in range(n - 1):
        t = times[j]
        t_end = times[j + 1]
        h = t_end - t
        if tol <= 0.0:
            rk4_step(t, y, h, T, delta, kind, k1, k2, k3, k4, tmp, full)
            y[:] = full
            n_sub += 1
            ys[j + 1] = y
            continue
        while t < t_end:
            last = t + h >= t_end
            if last:
                h = t_end - t
            if n_sub >= max_steps:
                ys[j + 1 :] = np.nan
                return ys, STATUS_STEP_FAILURE, n_sub, max_err
            rk4_step(t, y, h, T, delta, kind, k1, k2, k3, k4, tmp, full)
            rk4_step(t, y, 0.5 * h, T, delta, kind, k1, k2, k3, k4, tmp, half)
            rk4_step(t + 0.5 * h, half, 0.5 * h, T, delta, kind, k1, k2, k3, k4, tmp, two)
            err = 0.0
            for i in range(4):
                d = abs(two[i] - full[i]) / 15.0
                if d > err:
                    err = d
            if err > tol:
                h *= 0.5
                if h < h_min:
                    ys[j + 1 :] = np.nan
                    return ys, STATUS_STEP_FAILURE, n_sub, err
                continue
            y[:] = two
            t = t_end if last else t + h
            n_sub += 1
            if err > max_err:
                max_err = err
            if err < tol / 64.0:
                h *= 2.0
        ys[j + 1] = y
    return ys, STATUS_OK, n_sub, max_err
