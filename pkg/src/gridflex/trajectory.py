"""Sampled trajectory container shared by the simulators and post-processing.

Columns always present: t, T, u, P_r_in, P_r_out, E, p, yz, T0 plus exact
running integrals cum_pin, cum_pout, cum_yz, cum_imb taken inside the
integration loop (so window averages do not suffer decimation aliasing).
Controlled runs add sigma, qdot_u, yz_ref, comp_on and the exact-rate
columns pdot, E_t, qdot_T_net, qdot_T_sup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BASE_COLUMNS = ["t", "T", "u", "P_r_in", "P_r_out", "E", "p", "yz", "T0",
                "cum_pin", "cum_pout", "cum_yz", "cum_imb"]
CONTROL_COLUMNS = BASE_COLUMNS + ["sigma", "qdot_u", "yz_ref", "comp_on",
                                  "pdot", "E_t", "qdot_T_net", "qdot_T_sup"]

# column orders for the canonical CSV outputs
TRAJECTORY_CSV_COLUMNS = ["t", "T", "u", "P_r_in", "P_r_out", "E", "p", "yz"]
CONTROLLER_CSV_COLUMNS = ["t", "sigma", "qdot_u", "u", "yz", "yz_ref", "comp_on"]


@dataclass
class Trajectory:
    data: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.data[key]

    def __contains__(self, key: str) -> bool:
        return key in self.data

    @property
    def t(self) -> np.ndarray:
        return self.data["t"]

    @property
    def n(self) -> int:
        return self.data["t"].size

    @property
    def t_end(self) -> float:
        return float(self.data["t"][-1])

    def columns(self) -> list[str]:
        return list(self.data)

    def window_average(self, cum_col: str, t0: float, t1: float) -> float:
        """Exact mean of the integrand over [t0, t1] from its running integral."""
        if t1 <= t0:
            raise ValueError("need t1 > t0")
        c = self.data[cum_col]
        lo, hi = np.interp([t0, t1], self.t, c)
        return float((hi - lo) / (t1 - t0))

    def trailing_average(self, cum_col: str, window: float) -> np.ndarray:
        """Trailing-window mean at every sample; NaN before one full window."""
        t, c = self.t, self.data[cum_col]
        out = np.full_like(c, np.nan)
        ok = t >= t[0] + window
        earlier = np.interp(t[ok] - window, t, c)
        out[ok] = (c[ok] - earlier) / window
        return out

    def period_averages(self, cum_col: str, period: float, t_start: float = None):
        """Tumbling-window means aligned at t_start; returns (centers, means)."""
        t0 = self.t[0] if t_start is None else t_start
        edges = np.arange(t0, self.t_end + 1e-9, period)
        if edges.size < 2:
            return np.array([]), np.array([])
        cum = np.interp(edges, self.t, self.data[cum_col])
        means = np.diff(cum) / period
        centers = edges[:-1] + period / 2.0
        return centers, means

    def slice_time(self, t0: float, t1: float) -> "Trajectory":
        m = (self.t >= t0) & (self.t <= t1)
        return Trajectory({k: v[m] for k, v in self.data.items()}, dict(self.meta))


def concat(parts: list[Trajectory]) -> Trajectory:
    """Stitch chunked runs; drops the duplicated boundary sample of each part."""
    if not parts:
        raise ValueError("nothing to concatenate")
    keys = parts[0].columns()
    out = {k: [parts[0][k]] for k in keys}
    for prev, part in zip(parts, parts[1:]):
        start = 1 if part.t.size and prev.t.size and part.t[0] <= prev.t[-1] else 0
        for k in keys:
            out[k].append(part[k][start:])
    return Trajectory({k: np.concatenate(v) for k, v in out.items()}, dict(parts[0].meta))
