"""Single-zone HVAC thermal plant with switch and embedded automation.

The zone obeys Cw*dT/dt = -(T - T0)/R + injection(u, T).  Two supply models
are available:

* ``rated``:      injection = s * P_rated * u, the nameplate constant gated
                  by the switch (s = +1 heating, -1 cooling).
* ``modulated``:  injection = u * mdot_a*Cp * (T_sup - T), the air-stream
                  enthalpy balance evaluated at the instantaneous zone
                  temperature.  The electrical meter still reads
                  P_rated * u, so absorbed and injected power disagree
                  whenever the zone is away from the sizing point; this is
                  the mechanism behind the accumulated imbalance diagnostic.

A plant instance is deterministic and single-threaded; distinct instances
may run on distinct threads.
"""

from __future__ import annotations

import csv as _csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import SchemaError, StepTooLarge
from .units import fahrenheit_to_celsius

HEATING = "heating"
COOLING = "cooling"

SUPPLY_RATED = "rated"
SUPPLY_MODULATED = "modulated"


@dataclass(frozen=True)
class ThermalParams:
    """Physical constants of one HVAC unit.

    tau = R*Cw is derived, never stored independently.  P_rated and the
    air-side product mdot_a*Cp*(T_sup - T) are not forced to agree
    dynamically; `supply_consistency` reports the mismatch.
    """

    R: float          # thermal resistance, degC/kW
    Cw: float         # thermal capacitance, kJ/degC
    P_rated: float    # nameplate electrical power, kW
    mdot_a: float     # supply air mass flow, kg/s
    Cp: float         # air specific heat, kJ/(kg*degC)
    T_sup: float      # supply temperature, degC
    mode: str = HEATING
    supply_model: str = SUPPLY_RATED

    def __post_init__(self):
        for name in ("R", "Cw", "P_rated", "mdot_a", "Cp"):
            if getattr(self, name) <= 0 or not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be positive and finite")
        if self.mode not in (HEATING, COOLING):
            raise ValueError(f"mode must be '{HEATING}' or '{COOLING}'")
        if self.supply_model not in (SUPPLY_RATED, SUPPLY_MODULATED):
            raise ValueError("supply_model must be 'rated' or 'modulated'")

    @property
    def tau(self) -> float:
        return self.R * self.Cw

    @property
    def mdot_cp(self) -> float:
        return self.mdot_a * self.Cp

    @property
    def mode_sign(self) -> float:
        return 1.0 if self.mode == HEATING else -1.0

    def supply_consistency(self, T: float) -> float:
        """Relative mismatch between P_rated and mdot_a*Cp*|T_sup - T|."""
        air_side = self.mdot_cp * abs(self.T_sup - T)
        return (air_side - self.P_rated) / self.P_rated

    @staticmethod
    def sized(R: float, Cw: float, P_rated: float, T_sup: float, T_ref: float,
              mode: str = HEATING, supply_model: str = SUPPLY_RATED,
              mdot_a: float = 1.0) -> "ThermalParams":
        """Build params with Cp chosen so the air stream carries P_rated at T_ref."""
        cp = P_rated / (mdot_a * abs(T_sup - T_ref))
        return ThermalParams(R=R, Cw=Cw, P_rated=P_rated, mdot_a=mdot_a,
                             Cp=cp, T_sup=T_sup, mode=mode,
                             supply_model=supply_model)


@dataclass
class PlantState:
    """Instantaneous plant state: zone temperature, switch, cycling timer."""

    T: float
    u: float = 0.0
    on_timer: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.u <= 1.0:
            raise ValueError("switch position u must lie in [0, 1]")
        if self.on_timer < 0:
            raise ValueError("on_timer must be non-negative")


@dataclass(frozen=True)
class ComfortSpec:
    """Consumer setpoint and tolerable band, plus hard excursion limits."""

    T_ref: float
    T_db: float
    T_min: float = None  # type: ignore[assignment]
    T_max: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.T_db <= 0:
            raise ValueError("T_db must be positive")
        if self.T_min is None:
            object.__setattr__(self, "T_min", self.T_ref - self.T_db)
        if self.T_max is None:
            object.__setattr__(self, "T_max", self.T_ref + self.T_db)
        if not (self.T_min <= self.T_ref - self.T_db < self.T_ref + self.T_db <= self.T_max):
            raise ValueError("need T_min <= T_ref - T_db < T_ref + T_db <= T_max")

    @property
    def band(self) -> tuple[float, float]:
        return (self.T_ref - self.T_db, self.T_ref + self.T_db)


class AmbientProfile:
    """Piecewise-linear ambient temperature over the scenario horizon."""

    def __init__(self, times, values):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 1:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("breakpoints must be finite")
        self.times = t
        self.values = v

    @classmethod
    def constant(cls, T0: float, t_end: float = 1e9) -> "AmbientProfile":
        return cls([0.0, t_end], [T0, T0])

    @classmethod
    def from_csv(cls, path) -> "AmbientProfile":
        """Load `t_seconds,T0_celsius` (or `_fahrenheit`, auto-converted)."""
        with open(path, newline="") as fh:
            rows = [r for r in _csv.reader(fh) if r and not r[0].startswith("#")]
        if not rows:
            raise SchemaError(f"{path}: empty ambient file")
        header = [c.strip().lower() for c in rows[0]]
        if header[:1] != ["t_seconds"] or len(header) < 2:
            raise SchemaError(f"{path}: expected header t_seconds,T0_celsius|T0_fahrenheit")
        if header[1] == "t0_celsius":
            conv = float
        elif header[1] == "t0_fahrenheit":
            conv = lambda s: fahrenheit_to_celsius(float(s))  # noqa: E731
        else:
            raise SchemaError(f"{path}: unknown temperature column '{rows[0][1]}'")
        times = [float(r[0]) for r in rows[1:]]
        values = [conv(r[1]) for r in rows[1:]]
        return cls(times, values)

    def covers(self, t0: float, t1: float) -> bool:
        return self.times[0] <= t0 and t1 <= self.times[-1]

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def sample(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.values)


def thermal_injection(params: ThermalParams, u: float, T: float) -> float:
    """Thermal power entering the zone for switch position u, in kW."""
    if params.supply_model == SUPPLY_RATED:
        return params.mode_sign * params.P_rated * u
    return u * params.mdot_cp * (params.T_sup - T)


def _rhs(params: ThermalParams, T: float, T0: float, u: float) -> float:
    return (thermal_injection(params, u, T) - (T - T0) / params.R) / params.Cw


def step_plant(state: PlantState, params: ThermalParams, T0: float, dt: float) -> PlantState:
    """Advance the zone temperature by one explicit RK4 step, u held constant.

    Raises StepTooLarge when dt exceeds tau/100 (stiffness guard).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt > params.tau / 100.0:
        raise StepTooLarge(f"dt={dt} exceeds tau/100={params.tau / 100.0}")
    T, u = state.T, state.u
    k1 = _rhs(params, T, T0, u)
    k2 = _rhs(params, T + 0.5 * dt * k1, T0, u)
    k3 = _rhs(params, T + 0.5 * dt * k2, T0, u)
    k4 = _rhs(params, T + dt * k3, T0, u)
    T_new = T + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return replace(state, T=T_new, t=state.t + dt, on_timer=state.on_timer + dt)


def embedded_bang_bang(state: PlantState, comfort: ComfortSpec, params: ThermalParams) -> float:
    """Factory hysteresis switching: rail outside the deadband, hold inside.

    Heating turns on below the band and off above it; cooling mirrors the
    thresholds.  Returns the new switch position in {0, 1}.
    """
    lo, hi = comfort.band
    prev = 1.0 if state.u >= 0.5 else 0.0
    if params.mode == HEATING:
        if state.T < lo:
            return 1.0
        if state.T > hi:
            return 0.0
        return prev
    if state.T > hi:
        return 1.0
    if state.T < lo:
        return 0.0
    return prev


@dataclass
class BaselineRun:
    """Embedded-automation run output."""

    trajectory: "Trajectory"
    final_state: np.ndarray


def run_embedded(params: ThermalParams, comfort: ComfortSpec,
                 ambient: AmbientProfile, t_end: float, dt: float,
                 initial: PlantState, decim: int = 100,
                 state: np.ndarray = None) -> BaselineRun:
    """Simulate the factory bang-bang automation from `initial` to t_end.

    Logging stride `decim`; running integrals are exact.  Pass `state`
    from a previous run to resume.
    """
    from . import _kernels
    from .trajectory import BASE_COLUMNS, Trajectory

    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt > params.tau / 100.0:
        raise StepTooLarge(f"dt={dt} exceeds tau/100={params.tau / 100.0}")
    n_steps = int(round((t_end - initial.t) / dt))
    if n_steps < 1:
        raise ValueError("t_end must exceed the initial time")
    if not ambient.covers(initial.t, t_end):
        raise ValueError("ambient profile does not cover the run horizon")
    if state is None:
        state = np.zeros(_kernels.N_STATE)
        state[_kernels.S_T] = initial.T
        state[_kernels.S_U] = initial.u
        state[_kernels.S_TIME] = initial.t
    n_log = n_steps // decim + 2
    log = np.empty((n_log, len(BASE_COLUMNS)))
    lo, hi = comfort.band
    rows = _kernels.bang_bang_loop(
        state, n_steps, dt, ambient.times, ambient.values,
        params.R, params.Cw, params.P_rated, params.mdot_cp, params.T_sup,
        params.mode_sign,
        _kernels.SUPPLY_MODULATED_CODE if params.supply_model == SUPPLY_MODULATED
        else _kernels.SUPPLY_RATED_CODE,
        1 if params.mode == HEATING else 0,
        lo, hi, decim, log, 0,
    )
    data = {name: log[:rows, i].copy() for i, name in enumerate(BASE_COLUMNS)}
    traj = Trajectory(data, meta={"dt": dt, "decim": decim, "controller": "embedded"})
    return BaselineRun(trajectory=traj, final_state=state)


def power_imbalance_diagnostic(t: np.ndarray, P_r_out: np.ndarray, P_r_in: np.ndarray):
    """Per-sample imbalance P_r_out - P_r_in and its running trapezoidal integral.

    On an ideally rated plant the two sides agree and both outputs vanish;
    with the modulated supply the integral exposes the energy the embedded
    automation silently mis-meters.
    Returns (imbalance series kW, accumulated series kJ).
    """
    imbalance = np.asarray(P_r_out, float) - np.asarray(P_r_in, float)
    t = np.asarray(t, float)
    accumulated = np.concatenate(
        ([0.0], np.cumsum(0.5 * (imbalance[1:] + imbalance[:-1]) * np.diff(t)))
    )
    return imbalance, accumulated
