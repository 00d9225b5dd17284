"""Adaptive propagation kernels for the driven, parametrically pumped oscillator.

The state integrated per mode is (beta_ip, A, B, phi):

* ``beta_ip`` -- drive-induced displacement in the interaction picture of the
  quadratic part of the motion,
* ``A, B``   -- entries of the quadratic-part propagator M = [[A, B], [B*, A*]]
  acting on (beta, beta*), so the rotating-frame displacement is
  beta = A beta_ip + B beta_ip*,
* ``phi``    -- accumulated phase-space loop area 2 Im(integral beta_ip* dbeta_ip).

The equation of motion is linear with the drive entering inhomogeneously, so
d(beta_ip)/dt = M^{-1} drive, which closes the system without ever forming beta.

The stepper is Dormand-Prince 5(4) with standard proportional step control and
exact landing on requested sample times. Compiled with numba when available;
setting PAION_NUMBA=0 (or numba being absent) selects the identical
pure-Python path.
"""

import math
import os

import numpy as np


def _want_numba() -> bool:
    flag = os.environ.get("PAION_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


USING_NUMBA = False
if _want_numba():
    try:
        import numba

        USING_NUMBA = True
    except ImportError:
        numba = None


def _jit(func):
    if USING_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


# Status codes returned by the propagator.
OK = 0
STEP_UNDERFLOW = 1
STEP_BUDGET = 2


@_jit
def _deriv(t, bip, a, b, delta, g, theta, mu, fs, full, tc, ts):
    """Time derivative of (beta_ip, A, B, phi) at time t.

    (tc, ts) = (cosh r, sinh r * e^{i theta}) select the frame: (1, 0) is the
    bare-mode frame; nonzero ts evaluates the same dynamics conjugated by the
    constant two-mode map T = [[tc, -ts], [-ts*, tc]].
    """
    if full:
        c2 = math.cos(2.0 * mu * t - theta)
        em2 = np.exp(-2j * mu * t)
        p = -1j * delta + 2j * g * c2
        q = (-2j * g * c2) * em2
        d = fs * (1.0 + em2)
    else:
        p = -1j * delta + 0j
        q = -1j * g * np.exp(-1j * theta)
        d = fs + 0j
    if ts.real != 0.0 or ts.imag != 0.0:
        w1 = tc * p - ts * np.conj(q)
        w2 = tc * q - ts * np.conj(p)
        p = w1 * tc + w2 * np.conj(ts)
        q = w1 * ts + w2 * tc
        d = tc * d - ts * np.conj(d)
    da = p * a + q * np.conj(b)
    db = q * np.conj(a) + p * b
    dbip = np.conj(a) * d - b * np.conj(d)
    dphi = 2.0 * (np.conj(bip) * dbip).imag
    return dbip, da, db, dphi


@_jit
def dp5_propagate(
    t_samples,
    delta,
    g,
    theta,
    mu,
    fs,
    full,
    tc,
    ts,
    bip0,
    rtol,
    atol_bip,
    atol_ab,
    atol_phi,
    h0,
    max_step,
    n_max,
    out_bip,
    out_a,
    out_b,
    out_phi,
):
    """Integrate from t = 0, writing the state at each requested sample time.

    t_samples must be strictly increasing and non-negative. Returns
    (status, steps_taken) where steps counts attempted stages, accepted or not.
    """
    n_s = t_samples.shape[0]
    t_end = t_samples[n_s - 1]

    t = 0.0
    y0 = bip0
    y1 = 1.0 + 0j
    y2 = 0.0 + 0j
    y3 = 0.0

    idx = 0
    while idx < n_s and t_samples[idx] <= t:
        out_bip[idx] = y0
        out_a[idx] = y1
        out_b[idx] = y2
        out_phi[idx] = y3
        idx += 1

    h = h0
    if h > max_step:
        h = max_step
    h_floor = 1e-16 * t_end
    n_steps = 0
    k10, k11, k12, k13 = _deriv(t, y0, y1, y2, delta, g, theta, mu, fs, full, tc, ts)

    while idx < n_s:
        if n_steps >= n_max:
            return STEP_BUDGET, n_steps
        t_next = t_samples[idx]
        hit = False
        h_try = h
        if t + h_try >= t_next:
            h_try = t_next - t
            hit = True

        # Dormand-Prince 5(4) stages, first-same-as-last.
        z0 = y0 + h_try * 0.2 * k10
        z1 = y1 + h_try * 0.2 * k11
        z2 = y2 + h_try * 0.2 * k12
        z3 = y3 + h_try * 0.2 * k13
        k20, k21, k22, k23 = _deriv(t + 0.2 * h_try, z0, z1, z2, delta, g, theta, mu, fs, full, tc, ts)

        z0 = y0 + h_try * (0.075 * k10 + 0.225 * k20)
        z1 = y1 + h_try * (0.075 * k11 + 0.225 * k21)
        z2 = y2 + h_try * (0.075 * k12 + 0.225 * k22)
        z3 = y3 + h_try * (0.075 * k13 + 0.225 * k23)
        k30, k31, k32, k33 = _deriv(t + 0.3 * h_try, z0, z1, z2, delta, g, theta, mu, fs, full, tc, ts)

        c41 = 44.0 / 45.0
        c42 = -56.0 / 15.0
        c43 = 32.0 / 9.0
        z0 = y0 + h_try * (c41 * k10 + c42 * k20 + c43 * k30)
        z1 = y1 + h_try * (c41 * k11 + c42 * k21 + c43 * k31)
        z2 = y2 + h_try * (c41 * k12 + c42 * k22 + c43 * k32)
        z3 = y3 + h_try * (c41 * k13 + c42 * k23 + c43 * k33)
        k40, k41, k42, k43 = _deriv(t + 0.8 * h_try, z0, z1, z2, delta, g, theta, mu, fs, full, tc, ts)

        c51 = 19372.0 / 6561.0
        c52 = -25360.0 / 2187.0
        c53 = 64448.0 / 6561.0
        c54 = -212.0 / 729.0
        z0 = y0 + h_try * (c51 * k10 + c52 * k20 + c53 * k30 + c54 * k40)
        z1 = y1 + h_try * (c51 * k11 + c52 * k21 + c53 * k31 + c54 * k41)
        z2 = y2 + h_try * (c51 * k12 + c52 * k22 + c53 * k32 + c54 * k42)
        z3 = y3 + h_try * (c51 * k13 + c52 * k23 + c53 * k33 + c54 * k43)
        k50, k51, k52, k53 = _deriv(t + (8.0 / 9.0) * h_try, z0, z1, z2, delta, g, theta, mu, fs, full, tc, ts)

        c61 = 9017.0 / 3168.0
        c62 = -355.0 / 33.0
        c63 = 46732.0 / 5247.0
        c64 = 49.0 / 176.0
        c65 = -5103.0 / 18656.0
        z0 = y0 + h_try * (c61 * k10 + c62 * k20 + c63 * k30 + c64 * k40 + c65 * k50)
        z1 = y1 + h_try * (c61 * k11 + c62 * k21 + c63 * k31 + c64 * k41 + c65 * k51)
        z2 = y2 + h_try * (c61 * k12 + c62 * k22 + c63 * k32 + c64 * k42 + c65 * k52)
        z3 = y3 + h_try * (c61 * k13 + c62 * k23 + c63 * k33 + c64 * k43 + c65 * k53)
        k60, k61, k62, k63 = _deriv(t + h_try, z0, z1, z2, delta, g, theta, mu, fs, full, tc, ts)

        b1 = 35.0 / 384.0
        b3 = 500.0 / 1113.0
        b4 = 125.0 / 192.0
        b5 = -2187.0 / 6784.0
        b6 = 11.0 / 84.0
        y0n = y0 + h_try * (b1 * k10 + b3 * k30 + b4 * k40 + b5 * k50 + b6 * k60)
        y1n = y1 + h_try * (b1 * k11 + b3 * k31 + b4 * k41 + b5 * k51 + b6 * k61)
        y2n = y2 + h_try * (b1 * k12 + b3 * k32 + b4 * k42 + b5 * k52 + b6 * k62)
        y3n = y3 + h_try * (b1 * k13 + b3 * k33 + b4 * k43 + b5 * k53 + b6 * k63)
        k70, k71, k72, k73 = _deriv(t + h_try, y0n, y1n, y2n, delta, g, theta, mu, fs, full, tc, ts)

        e1 = 71.0 / 57600.0
        e3 = -71.0 / 16695.0
        e4 = 71.0 / 1920.0
        e5 = -17253.0 / 339200.0
        e6 = 22.0 / 525.0
        e7 = -1.0 / 40.0
        er0 = h_try * (e1 * k10 + e3 * k30 + e4 * k40 + e5 * k50 + e6 * k60 + e7 * k70)
        er1 = h_try * (e1 * k11 + e3 * k31 + e4 * k41 + e5 * k51 + e6 * k61 + e7 * k71)
        er2 = h_try * (e1 * k12 + e3 * k32 + e4 * k42 + e5 * k52 + e6 * k62 + e7 * k72)
        er3 = h_try * (e1 * k13 + e3 * k33 + e4 * k43 + e5 * k53 + e6 * k63 + e7 * k73)

        sc0 = atol_bip + rtol * max(abs(y0), abs(y0n))
        sc1 = atol_ab + rtol * max(abs(y1), abs(y1n))
        sc2 = atol_ab + rtol * max(abs(y2), abs(y2n))
        sc3 = atol_phi + rtol * max(abs(y3), abs(y3n))
        err = math.sqrt(
            (
                (abs(er0) / sc0) ** 2
                + (abs(er1) / sc1) ** 2
                + (abs(er2) / sc2) ** 2
                + (er3 / sc3) ** 2
            )
            / 4.0
        )

        n_steps += 1
        if err <= 1.0:
            y0, y1, y2, y3 = y0n, y1n, y2n, y3n
            k10, k11, k12, k13 = k70, k71, k72, k73
            if hit:
                t = t_next
                out_bip[idx] = y0
                out_a[idx] = y1
                out_b[idx] = y2
                out_phi[idx] = y3
                idx += 1
                # The controller step h is untouched: h_try was shortened only
                # to land on the sample, not because of the error estimate.
            else:
                t = t + h_try
                if err > 1e-30:
                    fac = 0.9 * err ** -0.2
                    if fac > 5.0:
                        fac = 5.0
                else:
                    fac = 5.0
                h = h_try * fac
                if h > max_step:
                    h = max_step
        else:
            # Reject and shrink. A rejected landing step also ends up here:
            # the shrunken h undercuts the gap, so the next attempt is a
            # normal interior step.
            fac = 0.9 * err ** -0.2
            if fac < 0.1:
                fac = 0.1
            h = h_try * fac
            if h < h_floor:
                return STEP_UNDERFLOW, n_steps

    return OK, n_steps


# The uncompiled stepper is kept reachable for path-equivalence tests. Note
# that when numba is active this still calls the compiled derivative; the
# honest end-to-end fallback comparison runs in a PAION_NUMBA=0 interpreter
# (see benchmarks/bench_integrator.py).
if USING_NUMBA:
    dp5_propagate_py = dp5_propagate.py_func
else:
    dp5_propagate_py = dp5_propagate
