"""Energy-space quantities for a single-zone thermal load.

Everything here is a pure function over sampled series or scalars.  The
building blocks are the generalized port quantities (effort, flow) ->
(instantaneous power, rate of reactive power), the stored energy measured
from ambient, and the tangent-space energy built from effort/flow
derivatives.  Thermal-side quantities treat (temperature difference from
ambient, entropy flow) as the port pair; the entropy function is lumped
into the constant capacitance Cw.

Internal units: kJ, kW, degC, seconds.  Safe to call from any thread; no
module state is mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTemperature, SeriesTooShort

# Guard for the (T - T0) denominators.  Below this the tangent energy and
# thermal reactive rate are reported as errors, never silently zeroed.
EPS_TEMP = 1e-3


def _finite(*values) -> bool:
    return all(np.all(np.isfinite(np.asarray(v, dtype=float))) for v in values)


def gradient_uniform(y: np.ndarray, dt: float) -> np.ndarray:
    """Second-order finite difference on a uniform grid.

    Central differences in the interior, one-sided second-order stencils at
    both ends (matches np.gradient with edge_order=2).
    """
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        raise SeriesTooShort(f"need >= 3 samples for second-order differences, got {y.size}")
    if dt <= 0:
        raise ValueError("sample spacing must be positive")
    return np.gradient(y, dt, edge_order=2)


@dataclass(frozen=True)
class PortSignal:
    """Generalized effort/flow pair sampled on a uniform grid.

    Electrical ports carry (V, A); the thermal port carries
    (degC difference, kW/degC entropy flow).
    """

    effort: np.ndarray
    flow: np.ndarray
    dt_sample: float

    def __post_init__(self):
        effort = np.asarray(self.effort, dtype=float)
        flow = np.asarray(self.flow, dtype=float)
        object.__setattr__(self, "effort", effort)
        object.__setattr__(self, "flow", flow)
        if self.dt_sample <= 0 or not np.isfinite(self.dt_sample):
            raise ValueError("dt_sample must be a positive finite number")
        if effort.shape != flow.shape or effort.ndim != 1:
            raise ValueError("effort and flow must be 1-d series of equal length")
        if effort.size < 2:
            raise ValueError("port series need at least 2 samples")
        if not _finite(effort, flow):
            raise ValueError("port series must be finite")

    def __len__(self) -> int:
        return self.effort.size


@dataclass
class EnergyDerived:
    """Per-sample derived energy quantities of one trajectory.

    E_t is the tangent-space stored energy, Qdot_T the thermal rate of
    reactive power, Qdot_r_out / P_r_out the outgoing interaction-variable
    rates, and P_r_in the injected electrical power.
    """

    E_t: np.ndarray
    Qdot_T: np.ndarray
    Qdot_r_out: np.ndarray
    P_r_out: np.ndarray
    P_r_in: np.ndarray


def stored_energy(T, T0, Cw: float):
    """Stored thermal energy Cw*(T - T0) in kJ, measured from ambient.

    Negative when the zone is colder than ambient.  Accepts scalars or
    arrays.
    """
    if Cw <= 0:
        raise ValueError("Cw must be positive")
    if not _finite(T, T0, Cw):
        raise ValueError("inputs must be finite")
    return Cw * (np.asarray(T, dtype=float) - T0)


def tangent_energy(T, dTdt, T0, Cw: float):
    """Stored energy in tangent space: Cw/(2*(T-T0)) * (dT/dt)^2.

    Raises DegenerateTemperature whenever |T - T0| <= EPS_TEMP; the
    quantity is singular there.
    """
    if Cw <= 0:
        raise ValueError("Cw must be positive")
    if not _finite(T, dTdt, T0):
        raise ValueError("inputs must be finite")
    delta = np.asarray(T, dtype=float) - T0
    if np.any(np.abs(delta) <= EPS_TEMP):
        raise DegenerateTemperature(
            f"|T - T0| <= {EPS_TEMP} degC; tangent energy is singular"
        )
    return Cw / (2.0 * delta) * np.square(np.asarray(dTdt, dtype=float))


def real_reactive_power(port: PortSignal) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous power e*f and reactive rate e*df/dt - de/dt*f.

    Derivatives are second-order finite differences (one-sided at the
    ends), so at least 3 samples are required.
    """
    if len(port) < 3:
        raise SeriesTooShort("need >= 3 samples for central differences")
    e, f = port.effort, port.flow
    dt = port.dt_sample
    P = e * f
    Qdot = e * gradient_uniform(f, dt) - gradient_uniform(e, dt) * f
    return P, Qdot


def thermal_qdot(T: np.ndarray, T0, params, dt: float) -> np.ndarray:
    """Thermal rate of reactive power of the supply port, as-printed form.

    Port pair: effort (T - T0), flow S_f = mdot_a*Cp*(T_sup - T)/(T - T0)
    evaluated per sample.  Steady state (both derivatives zero) gives 0.
    Note this form covers the supply stream only; `thermal_qdot_net` adds
    the ambient-loss port so the energy-rate identity closes exactly.
    """
    T = np.asarray(T, dtype=float)
    delta = T - np.asarray(T0, dtype=float)
    if np.any(np.abs(delta) <= EPS_TEMP):
        raise DegenerateTemperature("|T - T0| <= eps along the series")
    s_f = params.mdot_cp * (params.T_sup - T) / delta
    _, qdot = real_reactive_power(PortSignal(effort=delta, flow=s_f, dt_sample=dt))
    return qdot


def thermal_qdot_net(
    T: np.ndarray,
    T0,
    params,
    dt: float,
    injection: np.ndarray | None = None,
) -> np.ndarray:
    """Net thermal rate of reactive power absorbed by the zone.

    Two thermal ports act on the zone: the gated supply stream (entropy
    flow = injection/(T - T0)) and the ambient leak (constant flow 1/R,
    whose outgoing reactive rate is -dT/dt * 1/R).  The net absorbed rate
    is supply minus leak-outgoing, i.e. Qdot_supply + dT/dt / R.  With this
    bookkeeping dp/dt = 4*E_t + Qdot_T_net holds exactly on every
    constant-switch segment of the plant.

    `injection` is the actual thermal injection series (kW); defaults to
    the ungated mdot_cp*(T_sup - T) stream.
    """
    T = np.asarray(T, dtype=float)
    delta = T - np.asarray(T0, dtype=float)
    if np.any(np.abs(delta) <= EPS_TEMP):
        raise DegenerateTemperature("|T - T0| <= eps along the series")
    if injection is None:
        inj = params.mdot_cp * (params.T_sup - T)
    else:
        inj = np.asarray(injection, dtype=float)
    s_f = inj / delta
    _, qdot_supply = real_reactive_power(PortSignal(effort=delta, flow=s_f, dt_sample=dt))
    dTdt = gradient_uniform(T, dt)
    return qdot_supply + dTdt / params.R


def interaction_variables(
    T: np.ndarray,
    T0,
    params,
    qdot_u: np.ndarray,
    dt: float,
    p: np.ndarray | None = None,
    P_r_in: np.ndarray | None = None,
) -> EnergyDerived:
    """Outgoing interaction-variable rates along a trajectory.

    P_r_out = p + E/tau and Qdot_r_out = 4*E_t - Qdot_u - dp/dt, evaluated
    per sample.  `p` defaults to the finite-difference derivative of the
    stored energy.  Raises DegenerateTemperature through tangent_energy
    when the trajectory touches ambient.
    """
    T = np.asarray(T, dtype=float)
    qdot_u = np.asarray(qdot_u, dtype=float)
    if qdot_u.shape != T.shape:
        raise ValueError("qdot_u must match the temperature series")
    E = stored_energy(T, T0, params.Cw)
    if p is None:
        p = gradient_uniform(E, dt)
    else:
        p = np.asarray(p, dtype=float)
    dTdt = gradient_uniform(T, dt)
    E_t = tangent_energy(T, dTdt, T0, params.Cw)
    pdot = gradient_uniform(p, dt)
    qdot_T = thermal_qdot(T, T0, params, dt)
    P_r_out = p + E / params.tau
    Qdot_r_out = 4.0 * E_t - qdot_u - pdot
    if P_r_in is None:
        P_r_in = np.zeros_like(P_r_out)
    return EnergyDerived(
        E_t=E_t,
        Qdot_T=qdot_T,
        Qdot_r_out=Qdot_r_out,
        P_r_out=P_r_out,
        P_r_in=np.asarray(P_r_in, dtype=float),
    )
