"""Device-level sliding-mode energy controller with compressor-cycling guards.

The controlled output is y_z = (T - T0)/R, the quasi-static power absorption
of the zone.  The virtual control is a reactive-power rate Qdot_u mapped to
the physical switch through du/dt = Qdot_u / (2 P_rated); the relay law
drives the sliding surface sigma = y_z - y_z_ref to a small deadband whose
width is sized so that closed-loop compressor dwell times respect the
manufacturer's ON-time window.

Because the thermal surface can only move as fast as the plant
(|dy_z/dt| <= headroom/tau), the usable reaching margin K is capped by the
slowest railed drift rate; gains are designed from a calibration run of the
uncontrolled plant.  Controller instances are single-threaded per unit and
share nothing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import AssumptionViolated
from .plant import (HEATING, SUPPLY_MODULATED, AmbientProfile, ComfortSpec,
                    PlantState, ThermalParams)
from .trajectory import CONTROL_COLUMNS, Trajectory


@dataclass(frozen=True)
class PrimaryControllerConfig:
    """Sliding gain, reaching margin, cycling limits, and timestep."""

    alpha: float                 # sliding gain, kW/s
    K: float                     # reaching margin, kW/s
    L_bar: float                 # disturbance bound, kW/s
    dt: float                    # controller/plant timestep, s
    tau_min_on: float = 300.0    # minimum compressor ON dwell, s
    tau_max_on: float = 900.0    # maximum compressor ON dwell, s
    yz_plus: float = 0.0         # upper sliding-surface threshold, kW
    yz_minus: float = 0.0        # lower sliding-surface threshold, kW
    reach_band: float = None     # |sigma| band counted as "reached", kW
    enforce_cycling: bool = True

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("reaching margin K must be positive")
        if abs(self.alpha - (self.L_bar + self.K)) > 1e-9 * max(1.0, self.alpha):
            raise ValueError("gain rule violated: alpha must equal L_bar + K")
        if not 0 < self.tau_min_on < self.tau_max_on:
            raise ValueError("need 0 < tau_min_on < tau_max_on")
        if self.yz_plus < 0 or self.yz_minus > 0:
            raise ValueError("thresholds must satisfy yz_minus <= 0 <= yz_plus")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    def pure_sliding(self) -> "PrimaryControllerConfig":
        """Zero-width deadband, cycling guards off (reaching-law studies)."""
        return replace(self, yz_plus=0.0, yz_minus=0.0, enforce_cycling=False)


@dataclass
class SlidingState:
    """Controller-side scalar state at one evaluation instant."""

    sigma: float
    Qdot_u: float
    u: float
    reach_time: float | None = None


def output_yz(T, T0, R: float):
    """Quasi-static power absorption y_z = (T - T0)/R in kW."""
    if R <= 0:
        raise ValueError("R must be positive")
    return (np.asarray(T, dtype=float) - T0) / R


def reference_yz(comfort: ComfortSpec, T0, R: float, dP_n: float = 0.0):
    """Reference absorption: thermal baseline (T_ref - T0)/R plus the
    commanded adjustment dP_n, held constant over each secondary step."""
    return (comfort.T_ref - np.asarray(T0, dtype=float)) / R + dP_n


def sliding_mode_qdot(sigma: float, cfg: PrimaryControllerConfig) -> float:
    """Relay law alpha*sign(sigma), with sign(0) = 0."""
    if sigma > 0:
        return cfg.alpha
    if sigma < 0:
        return -cfg.alpha
    return 0.0


def thresholded_qdot(yz: float, yz_ref: float, cfg: PrimaryControllerConfig) -> float:
    """Deadband relay: +/-alpha outside [yz_minus, yz_plus], 0 inside.

    With the band shrunk to zero this reduces exactly to sliding_mode_qdot.
    """
    sigma = yz - yz_ref
    if sigma >= cfg.yz_plus and sigma > 0:
        return cfg.alpha
    if sigma <= cfg.yz_minus and sigma < 0:
        return -cfg.alpha
    return 0.0


def switch_update(u: float, Qdot_u: float, P_rated: float, dt: float) -> float:
    """Physical switch mapping u' = clamp(u + dt*Qdot_u/(2 P_rated), 0, 1)."""
    if P_rated <= 0:
        raise ValueError("P_rated must be positive")
    return min(1.0, max(0.0, u + dt * Qdot_u / (2.0 * P_rated)))


def exact_on_time(y_level: float, params: ThermalParams, comfort: ComfortSpec,
                  T0: float) -> float:
    """Compressor ON duration for a full sweep of [T_min, T_max].

    Cooling form: tau_ON = R*Cw * log((T_max - T0 + R*y)/(T_min - T0 + R*y));
    heating mirrors the sweep direction.  Returns inf when the sweep cannot
    complete (equilibrium inside the band).
    """
    rc = params.tau
    if params.mode == HEATING:
        num = y_level * params.R - (comfort.T_min - T0)
        den = y_level * params.R - (comfort.T_max - T0)
    else:
        num = comfort.T_max - T0 + params.R * y_level
        den = comfort.T_min - T0 + params.R * y_level
    if num <= 0 or den <= 0:
        return math.inf
    ratio = num / den
    if ratio <= 1.0:
        return math.inf
    return rc * math.log(ratio)


def paper_threshold_form(comfort: ComfortSpec, params: ThermalParams, T0: float,
                         tau_on: float) -> float:
    """Printed linearized threshold: (T_min-T0)*(tau_on/RC)/R - (T_max-T_min)/R.

    Kept for reference only: its round trip through the exact ON-time
    relation does not land inside [tau_min, tau_max] (the linearization
    inverts the log incorrectly), so the closed loop is designed with
    `cycling_thresholds` instead.
    """
    rc = params.tau
    return ((comfort.T_min - T0) * (tau_on / rc) - (comfort.T_max - comfort.T_min)) / params.R


def railed_on_time(width: float, headroom: float, tau: float) -> float:
    """Exact ON dwell for a symmetric sigma band of `width` under a railed
    switch with power headroom `headroom` above the operating point."""
    if headroom <= width / 2.0:
        return math.inf
    return tau * math.log((headroom + width / 2.0) / (headroom - width / 2.0))


def cycling_thresholds(comfort: ComfortSpec, params: ThermalParams, T0: float,
                       tau_min_on: float = 300.0, tau_max_on: float = 900.0,
                       y_ref: float | None = None,
                       P_reserve: float = 0.0,
                       dwell_target: float | None = None) -> tuple[float, float]:
    """Sliding-surface deadband sized so compressor dwells satisfy the
    ON-time window [tau_min_on, tau_max_on].

    The railed closed loop sweeps the band at rate headroom/tau, so the
    exact dwell for a symmetric band of width w is
    tau*log((h + w/2)/(h - w/2)); this inverts to w = 2h*tanh(T*/2tau) at
    the dwell target T* (default: geometric mean of the window).  The width
    is clipped so both the slowest expected operating point stays within
    tau_max_on and the temperature sweep R*w fits inside the comfort band.
    `P_reserve` reserves headroom for secondary-layer adjustments.

    Warns (AssumptionViolated) when dwell/(R*Cw) exceeds 0.2, where the
    quasi-static sizing degrades.
    """
    if not 0 < tau_min_on < tau_max_on:
        raise ValueError("need 0 < tau_min_on < tau_max_on")
    y_op = reference_yz(comfort, T0, params.R) if y_ref is None else y_ref
    tau = params.tau
    h_on = params.P_rated - abs(y_op) - P_reserve
    if h_on <= 0:
        raise ValueError("no switching headroom: |y_ref| exceeds P_rated")
    h_off = abs(y_op)
    # size at the slower rail so neither dwell can exceed tau_max_on
    h_slow = min(h_on, h_off)
    if dwell_target is None:
        dwell_target = math.sqrt(tau_min_on * tau_max_on)
    if not tau_min_on <= dwell_target <= tau_max_on:
        raise ValueError("dwell_target must lie inside the ON-time window")
    w = 2.0 * h_slow * math.tanh(dwell_target / (2.0 * tau))
    # clip so the slow-rail dwell stays within tau_max_on
    w_cap = 2.0 * h_slow * math.tanh(tau_max_on / (2.0 * tau))
    w = min(w, w_cap)
    # comfort guard: the y_z sweep maps to a temperature sweep of R*w
    band_room = (comfort.T_max - comfort.T_min) / params.R
    if w > band_room:
        w = band_room
    dwell = railed_on_time(w, h_on, tau)
    if dwell / tau > 0.2:
        warnings.warn(
            f"on-dwell/(R*Cw) = {dwell / tau:.3f} > 0.2; quasi-static sizing degraded",
            AssumptionViolated,
        )
    return (w / 2.0, -w / 2.0)


def controller_step(T: float, T0: float, u: float, yz_ref: float,
                    cfg: PrimaryControllerConfig, R: float, P_rated: float,
                    mode_sign: float) -> tuple[float, SlidingState]:
    """One controller evaluation from sensor measurements only.

    Reads zone temperature, outdoor temperature, the switch position and
    the reference; internal air-handler state (supply temperature, flow)
    never enters.  Returns the new switch position and the sliding log
    entry.  Cycling lockouts live in the run loop, which owns the dwell
    timers.
    """
    yz = output_yz(T, T0, R)
    sigma = yz - yz_ref
    qdot = thresholded_qdot(yz, yz_ref, cfg)
    # heating flips the actuation sense so the relay is stabilizing;
    # cooling keeps the literal switch mapping
    u_new = switch_update(u, -mode_sign * qdot, P_rated, cfg.dt)
    return u_new, SlidingState(sigma=float(sigma), Qdot_u=qdot, u=u_new)


@dataclass
class PrimaryRun:
    """Closed-loop run output: trajectory, dwell intervals, reach bookkeeping."""

    trajectory: Trajectory
    on_intervals: np.ndarray       # shape (n, 2) completed ON intervals [start, end]
    reach_time: float | None
    T_min_seen: float
    T_max_seen: float
    final_state: np.ndarray        # raw kernel state vector (resumable)
    overflow: int = 0

    @property
    def on_durations(self) -> np.ndarray:
        return self.on_intervals[:, 1] - self.on_intervals[:, 0]


def _reference_schedule(yref_schedule, t_end: float):
    """Normalize a schedule spec into (times, values) step arrays."""
    if np.isscalar(yref_schedule):
        return np.array([0.0, t_end]), np.array([float(yref_schedule)] * 2)
    times, values = yref_schedule
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or times.size < 1:
        raise ValueError("schedule must be equal-length times/values arrays")
    if np.any(np.diff(times) <= 0):
        raise ValueError("schedule times must be strictly increasing")
    return times, values


def run_primary(params: ThermalParams, comfort: ComfortSpec,
                cfg: PrimaryControllerConfig, ambient: AmbientProfile,
                yref_schedule, t_end: float, initial: PlantState,
                decim: int = 100, state: np.ndarray | None = None,
                max_intervals: int = None) -> PrimaryRun:
    """Simulate the sliding-mode loop from `initial` for t in [initial.t, t_end].

    `yref_schedule` is either a constant (kW) or a (times, values) pair of
    step arrays.  `decim` sets the logging stride; running integrals are
    exact regardless.  Pass `state` (from a previous PrimaryRun) to resume.
    """
    dt = cfg.dt
    if dt > params.tau / 100.0:
        from .errors import StepTooLarge
        raise StepTooLarge(f"dt={dt} exceeds tau/100={params.tau / 100.0}")
    n_steps = int(round((t_end - initial.t) / dt))
    if n_steps < 1:
        raise ValueError("t_end must exceed the initial time by at least one step")
    if not ambient.covers(initial.t, t_end):
        raise ValueError("ambient profile does not cover the run horizon")
    yref_t, yref_v = _reference_schedule(yref_schedule, t_end)

    if state is None:
        state = np.zeros(_kernels.N_STATE)
        state[_kernels.S_T] = initial.T
        state[_kernels.S_U] = initial.u
        state[_kernels.S_TIME] = initial.t
        state[_kernels.S_TIMER] = initial.on_timer
        state[_kernels.S_COMP] = 1.0 if initial.u >= 0.5 else 0.0
        state[_kernels.S_OPEN_T] = initial.t if initial.u >= 0.5 else -1.0
        state[_kernels.S_REACH] = -1.0
        state[_kernels.S_TMIN] = initial.T
        state[_kernels.S_TMAX] = initial.T
    reach_band = cfg.reach_band
    if reach_band is None:
        reach_band = 0.05 * 0.07 * params.P_rated

    n_log = n_steps // decim + 2
    log = np.empty((n_log, len(CONTROL_COLUMNS)))
    if max_intervals is None:
        max_intervals = int((t_end - initial.t) / max(cfg.tau_min_on, 30.0)) + 8
    base = int(state[_kernels.S_NON])
    on_start = np.full(base + max_intervals, np.nan)
    on_end = np.full(base + max_intervals, np.nan)

    tau_min = cfg.tau_min_on if cfg.enforce_cycling else 0.0
    tau_max = cfg.tau_max_on if cfg.enforce_cycling else np.inf

    rows = _kernels.primary_loop(
        state, n_steps, dt, ambient.times, ambient.values,
        params.R, params.Cw, params.P_rated, params.mdot_cp, params.T_sup,
        params.mode_sign,
        _kernels.SUPPLY_MODULATED_CODE if params.supply_model == SUPPLY_MODULATED
        else _kernels.SUPPLY_RATED_CODE,
        yref_t, yref_v,
        cfg.alpha, cfg.yz_plus, cfg.yz_minus,
        tau_min, tau_max, reach_band,
        decim, log, 0, on_start, on_end,
    )

    data = {name: log[:rows, i].copy() for i, name in enumerate(CONTROL_COLUMNS)}
    traj = Trajectory(data, meta={"dt": dt, "decim": decim, "controller": "sliding"})
    n_on = int(state[_kernels.S_NON])
    intervals = np.column_stack([on_start[:n_on], on_end[:n_on]])
    reach = state[_kernels.S_REACH]
    return PrimaryRun(
        trajectory=traj,
        on_intervals=intervals,
        reach_time=None if reach < 0 else float(reach),
        T_min_seen=float(state[_kernels.S_TMIN]),
        T_max_seen=float(state[_kernels.S_TMAX]),
        final_state=state,
        overflow=int(state[_kernels.S_OVERFLOW]),
    )


def calibrate_disturbance_bound(params: ThermalParams, comfort: ComfortSpec,
                                ambient: AmbientProfile, t_end: float,
                                dt: float, decim: int = 100,
                                safety: float = 1.5) -> float:
    """Disturbance bound L_bar from an uncontrolled (embedded automation)
    calibration run: safety * max |dp/dt| along the trajectory.

    The energy-rate disturbance 4 E_t - Qdot_r_out equals dp/dt on the
    uncontrolled plant, so bounding the measured dp/dt bounds it."""
    from .plant import run_embedded

    base = run_embedded(params, comfort, ambient, t_end, dt,
                        initial=PlantState(T=comfort.T_ref), decim=decim)
    p = base.trajectory["p"]
    t = base.trajectory["t"]
    pdot = np.gradient(p, t, edge_order=2)
    return safety * float(np.max(np.abs(pdot)))


def design_gains(params: ThermalParams, comfort: ComfortSpec,
                 ambient: AmbientProfile, dt: float, T_s: float,
                 sigma0_design: float = None, L_bar: float = None,
                 calibration_horizon: float = 7200.0,
                 margin: float = 0.5) -> tuple[float, float, float]:
    """Pick (alpha, K, L_bar) for a scenario.

    K is capped by the slowest railed drift rate of y_z over the ambient
    envelope (the thermal surface cannot reach faster than the plant
    moves), then tightened toward the T_s/10 reaching-time goal when that
    is physically available.  alpha = L_bar + K always.
    """
    if L_bar is None:
        L_bar = calibrate_disturbance_bound(params, comfort, ambient,
                                            calibration_horizon, dt)
    T0_lo = float(np.min(ambient.values))
    T0_hi = float(np.max(ambient.values))
    y_candidates = [abs(reference_yz(comfort, T0, params.R)) for T0 in (T0_lo, T0_hi)]
    y_max, y_min = max(y_candidates), min(y_candidates)
    headroom = params.P_rated - y_max
    if headroom <= 0:
        raise ValueError("P_rated leaves no headroom over the ambient envelope")
    r_min = min(headroom, y_min) / params.tau
    K_cap = margin * r_min / math.sqrt(2.0)
    if sigma0_design is not None and sigma0_design > 0:
        K_goal = 10.0 * sigma0_design / (math.sqrt(2.0) * T_s)
        K = min(K_goal, K_cap)
    else:
        K = K_cap
    return L_bar + K, K, L_bar
