"""Fused numba loops for the millisecond-timestep closed-loop simulations.

Kept free of package imports so the kernels compile once and stay cacheable.
All kernels integrate the zone ODE with explicit RK4 (switch held constant
across a step) and log decimated samples plus exact running integrals, so
window averages downstream are free of decimation aliasing.

State vector layout (resumable across chunked runs, e.g. fleet dispatch):
  0  T            zone temperature, degC
  1  u            switch position in [0, 1]
  2  t            simulation clock, s
  3  timer        seconds in current binary compressor state
  4  comp         binary compressor state (u >= 0.5), 0.0/1.0
  5  open_t       start time of the open ON interval, -1 if none
  6  reach_t      first |sigma| <= reach_band instant, -1 until reached
  7  Tmin         running min of T
  8  Tmax         running max of T
  9  n_on         completed ON intervals recorded
  10 overflow     ON intervals dropped for lack of space
  11 cum_pin      integral of electrical power P_rated*u, kJ
  12 cum_pout     integral of absorbed power (injection), kJ
  13 cum_yz       integral of y_z, kJ
  14 cum_imb      integral of (P_r_out - P_r_in), kJ
  15 forced       forced-off latch (max-ON exceeded), 0.0/1.0
"""

import numpy as np
from numba import njit

N_STATE = 16
(S_T, S_U, S_TIME, S_TIMER, S_COMP, S_OPEN_T, S_REACH, S_TMIN, S_TMAX,
 S_NON, S_OVERFLOW, S_CUM_PIN, S_CUM_POUT, S_CUM_YZ, S_CUM_IMB,
 S_FORCED) = range(N_STATE)

SUPPLY_RATED_CODE = 0
SUPPLY_MODULATED_CODE = 1


@njit(cache=True, inline="always")
def _ambient_at(t, kt, kv, idx):
    n = kt.shape[0]
    while idx < n - 2 and t >= kt[idx + 1]:
        idx += 1
    t0 = kt[idx]
    t1 = kt[idx + 1]
    if t <= t0:
        return kv[idx], idx
    if t >= t1:
        return kv[idx + 1], idx
    w = (t - t0) / (t1 - t0)
    return kv[idx] * (1.0 - w) + kv[idx + 1] * w, idx


@njit(cache=True, inline="always")
def _injection(T, u, Pr, mcp, Tsup, sign, supply_mode):
    if supply_mode == SUPPLY_RATED_CODE:
        return sign * Pr * u
    return u * mcp * (Tsup - T)


@njit(cache=True, inline="always")
def _rhs(T, T0, u, R, Cw, Pr, mcp, Tsup, sign, supply_mode):
    return (_injection(T, u, Pr, mcp, Tsup, sign, supply_mode) - (T - T0) / R) / Cw


@njit(cache=True, inline="always")
def _rk4(T, u, Ta, Tm, Tb, dt, R, Cw, Pr, mcp, Tsup, sign, supply_mode):
    k1 = _rhs(T, Ta, u, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
    k2 = _rhs(T + 0.5 * dt * k1, Tm, u, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
    k3 = _rhs(T + 0.5 * dt * k2, Tm, u, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
    k4 = _rhs(T + dt * k3, Tb, u, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
    return T + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def bang_bang_loop(state, n_steps, dt, kt, kv,
                   R, Cw, Pr, mcp, Tsup, sign, supply_mode, heating,
                   T_lo, T_hi, decim, log, log_offset):
    """Embedded-automation run.  `log` columns:

    0 t, 1 T, 2 u, 3 P_r_in, 4 P_r_out, 5 E, 6 p, 7 yz, 8 T0,
    9 cum_pin, 10 cum_pout, 11 cum_yz, 12 cum_imb
    Returns rows written.
    """
    T = state[S_T]
    u = state[S_U]
    t = state[S_TIME]
    cum_pin = state[S_CUM_PIN]
    cum_pout = state[S_CUM_POUT]
    cum_yz = state[S_CUM_YZ]
    cum_imb = state[S_CUM_IMB]
    idx = 0
    row = log_offset
    for k in range(n_steps + 1):
        T0a, idx = _ambient_at(t, kt, kv, idx)
        if heating == 1:
            if T < T_lo:
                u = 1.0
            elif T > T_hi:
                u = 0.0
        else:
            if T > T_hi:
                u = 1.0
            elif T < T_lo:
                u = 0.0
        inj = _injection(T, u, Pr, mcp, Tsup, sign, supply_mode)
        yz = (T - T0a) / R
        p = inj - yz
        pin = Pr * u
        if k % decim == 0 or k == n_steps:
            log[row, 0] = t
            log[row, 1] = T
            log[row, 2] = u
            log[row, 3] = pin
            log[row, 4] = inj
            log[row, 5] = Cw * (T - T0a)
            log[row, 6] = p
            log[row, 7] = yz
            log[row, 8] = T0a
            log[row, 9] = cum_pin
            log[row, 10] = cum_pout
            log[row, 11] = cum_yz
            log[row, 12] = cum_imb
            row += 1
        if k == n_steps:
            break
        T0m, idx = _ambient_at(t + 0.5 * dt, kt, kv, idx)
        T0b, idx = _ambient_at(t + dt, kt, kv, idx)
        T_new = _rk4(T, u, T0a, T0m, T0b, dt, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
        inj_b = _injection(T_new, u, Pr, mcp, Tsup, sign, supply_mode)
        yz_b = (T_new - T0b) / R
        cum_pin += 0.5 * (pin + Pr * u) * dt
        cum_pout += 0.5 * (inj + inj_b) * dt
        cum_yz += 0.5 * (yz + yz_b) * dt
        cum_imb += 0.5 * ((inj - pin) + (inj_b - Pr * u)) * dt
        T = T_new
        t += dt
    state[S_T] = T
    state[S_U] = u
    state[S_TIME] = t
    state[S_COMP] = 1.0 if u >= 0.5 else 0.0
    state[S_CUM_PIN] = cum_pin
    state[S_CUM_POUT] = cum_pout
    state[S_CUM_YZ] = cum_yz
    state[S_CUM_IMB] = cum_imb
    return row - log_offset


@njit(cache=True)
def primary_loop(state, n_steps, dt, kt, kv,
                 R, Cw, Pr, mcp, Tsup, sign, supply_mode,
                 yref_t, yref_v,
                 alpha, yz_plus, yz_minus,
                 tau_min_on, tau_max_on, reach_band,
                 decim, log, log_offset, on_start, on_end):
    """Sliding-mode energy-control run with cycling lockouts.

    Threshold law on sigma = yz - yz_ref: command +alpha at/above yz_plus,
    -alpha at/below yz_minus, 0 inside.  The switch integrates
    du/dt = -sign * Qdot_u / (2 P_rated); for cooling this is the literal
    switch mapping, heating flips the sense so the loop is stabilizing.
    Lockouts: an ON->OFF transition is deferred until the ON dwell reaches
    tau_min_on; at tau_max_on the compressor is forced off (latched until
    the switch fully closes).  tau_min_on <= 0 disables lockouts.

    `log` columns:
    0 t, 1 T, 2 u, 3 P_r_in, 4 P_r_out, 5 E, 6 p, 7 yz, 8 T0,
    9 cum_pin, 10 cum_pout, 11 cum_yz, 12 cum_imb,
    13 sigma, 14 Qdot_u (effective), 15 yz_ref, 16 comp_on,
    17 pdot, 18 E_t, 19 qdot_T_net, 20 qdot_T_supply_form
    Returns rows written.
    """
    T = state[S_T]
    u = state[S_U]
    t = state[S_TIME]
    timer = state[S_TIMER]
    comp = state[S_COMP] >= 0.5
    open_t = state[S_OPEN_T]
    reach_t = state[S_REACH]
    Tmin = state[S_TMIN]
    Tmax = state[S_TMAX]
    n_on = int(state[S_NON])
    overflow = int(state[S_OVERFLOW])
    cum_pin = state[S_CUM_PIN]
    cum_pout = state[S_CUM_POUT]
    cum_yz = state[S_CUM_YZ]
    cum_imb = state[S_CUM_IMB]
    forced = state[S_FORCED] >= 0.5

    lockouts = tau_min_on > 0.0
    cap = on_start.shape[0]
    ramp = alpha / (2.0 * Pr)
    idx = 0
    jref = 0
    nref = yref_t.shape[0]
    row = log_offset

    for k in range(n_steps + 1):
        T0a, idx = _ambient_at(t, kt, kv, idx)
        while jref < nref - 1 and t >= yref_t[jref + 1]:
            jref += 1
        yref = yref_v[jref]
        yz = (T - T0a) / R
        sigma = yz - yref

        # threshold sliding command (band shrunk to zero reduces to sign law)
        if sigma >= yz_plus and sigma > 0.0:
            qcmd = alpha
        elif sigma <= yz_minus and sigma < 0.0:
            qcmd = -alpha
        else:
            qcmd = 0.0

        # rail direction implied by the switch mapping
        dudt = -sign * qcmd / (2.0 * Pr)
        desire = 0
        if dudt > 0.0:
            desire = 1
        elif dudt < 0.0:
            desire = -1

        if lockouts:
            if forced:
                # trip latch: rail the switch fully closed, then release
                if u <= 0.0:
                    forced = False
                else:
                    desire = -1
            if not forced:
                if comp and timer >= tau_max_on:
                    forced = True
                    desire = -1
                elif desire == -1 and comp and timer < tau_min_on:
                    desire = 0  # min-ON dwell not yet served

        q_eff = 0.0
        if desire == 1:
            q_eff = -sign * alpha
            u = u + dt * ramp
            if u > 1.0:
                u = 1.0
        elif desire == -1:
            q_eff = sign * alpha
            u = u - dt * ramp
            if u < 0.0:
                u = 0.0

        comp_new = u >= 0.5
        if comp_new != comp:
            if comp_new:
                open_t = t
            else:
                if open_t >= 0.0:
                    if n_on < cap:
                        on_start[n_on] = open_t
                        on_end[n_on] = t
                        n_on += 1
                    else:
                        overflow += 1
                open_t = -1.0
            timer = 0.0
            comp = comp_new

        if reach_t < 0.0 and abs(sigma) <= reach_band:
            reach_t = t
        if T < Tmin:
            Tmin = T
        if T > Tmax:
            Tmax = T

        inj = _injection(T, u, Pr, mcp, Tsup, sign, supply_mode)
        p = inj - yz
        pin = Pr * u
        if k % decim == 0 or k == n_steps:
            dTdt = p / Cw
            delta = T - T0a
            injdot = 0.0
            if supply_mode == SUPPLY_MODULATED_CODE:
                injdot = -u * mcp * dTdt
            pdot = injdot - dTdt / R
            if abs(delta) > 1e-12:
                E_t = Cw * dTdt * dTdt / (2.0 * delta)
                qdot_net = injdot - 2.0 * inj * dTdt / delta + dTdt / R
                g = mcp * (Tsup - T)
                qdot_sup = -mcp * dTdt - 2.0 * g * dTdt / delta
            else:
                E_t = np.nan
                qdot_net = np.nan
                qdot_sup = np.nan
            log[row, 0] = t
            log[row, 1] = T
            log[row, 2] = u
            log[row, 3] = pin
            log[row, 4] = inj
            log[row, 5] = Cw * delta
            log[row, 6] = p
            log[row, 7] = yz
            log[row, 8] = T0a
            log[row, 9] = cum_pin
            log[row, 10] = cum_pout
            log[row, 11] = cum_yz
            log[row, 12] = cum_imb
            log[row, 13] = sigma
            log[row, 14] = q_eff
            log[row, 15] = yref
            log[row, 16] = 1.0 if comp else 0.0
            log[row, 17] = pdot
            log[row, 18] = E_t
            log[row, 19] = qdot_net
            log[row, 20] = qdot_sup
            row += 1
        if k == n_steps:
            break

        T0m, idx = _ambient_at(t + 0.5 * dt, kt, kv, idx)
        T0b, idx = _ambient_at(t + dt, kt, kv, idx)
        T_new = _rk4(T, u, T0a, T0m, T0b, dt, R, Cw, Pr, mcp, Tsup, sign, supply_mode)
        inj_b = _injection(T_new, u, Pr, mcp, Tsup, sign, supply_mode)
        yz_b = (T_new - T0b) / R
        cum_pin += pin * dt
        cum_pout += 0.5 * (inj + inj_b) * dt
        cum_yz += 0.5 * (yz + yz_b) * dt
        cum_imb += 0.5 * ((inj - pin) + (inj_b - pin)) * dt
        T = T_new
        t += dt
        timer += dt

    state[S_T] = T
    state[S_U] = u
    state[S_TIME] = t
    state[S_TIMER] = timer
    state[S_COMP] = 1.0 if comp else 0.0
    state[S_OPEN_T] = open_t
    state[S_REACH] = reach_t
    state[S_TMIN] = Tmin
    state[S_TMAX] = Tmax
    state[S_NON] = float(n_on)
    state[S_OVERFLOW] = float(overflow)
    state[S_CUM_PIN] = cum_pin
    state[S_CUM_POUT] = cum_pout
    state[S_CUM_YZ] = cum_yz
    state[S_CUM_IMB] = cum_imb
    state[S_FORCED] = 1.0 if forced else 0.0
    return row - log_offset
