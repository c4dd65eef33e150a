"""Figure-style parameter sweeps over the closed-form optimum.

Each sweep returns a :class:`Table` (header plus numeric rows) that the CLI
writes as CSV.  Fixed parameters are ratios to ``gamma1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import OperatingPoint, s_min

__all__ = [
    "SweepSpec",
    "Table",
    "grid",
    "point_row",
    "POINT_HEADER",
    "spectrum_table",
    "pump_sweep_table",
    "squeeze_sweep_table",
    "fmt",
]

POINT_HEADER = (
    "gamma3", "rho1", "rho3", "pump", "r", "omega",
    "s_min", "s_min_db", "g_opt", "theta_opt", "eta", "duan_sum", "inseparable",
)


def fmt(v) -> str:
    """Fixed 12-significant-digit rendering used in every CSV."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return f"{float(v):.12g}"


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.axis not in ("omega", "pump", "squeeze"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if not self.start < self.stop:
            raise ValueError("start must be < stop")

    def values(self) -> np.ndarray:
        return grid(self.start, self.stop, self.step)


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid; values rounded so ``0.6`` on the grid is exactly ``0.6``."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError("empty grid")
    return np.round(start + step * np.arange(n), 12)


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)


def point_row(gamma3, rho1, rho3, pump, r, omega) -> tuple:
    res = s_min(OperatingPoint.from_ratios(gamma3, rho1, rho3, pump, r, omega))
    return (gamma3, rho1, rho3, pump, r, omega, res.s_min, res.s_min_db, res.g_opt,
            res.theta_opt, res.eta, res.duan_sum, res.inseparable)


def _smin(gamma3, rho1, rho3, pump, r, omega) -> float:
    return s_min(OperatingPoint.from_ratios(gamma3, rho1, rho3, pump, r, omega)).s_min


def spectrum_table(spec: SweepSpec, r_values, gamma3=1.0, rho1=0.1, rho3=0.1, pump=1.0) -> Table:
    """S_min versus normalised frequency, one column per squeeze factor."""
    omegas = spec.values()
    header = ("omega",) + tuple(f"smin_r={fmt(r)}" for r in r_values)
    rows = [(w,) + tuple(_smin(gamma3, rho1, rho3, pump, r, w) for r in r_values) for w in omegas]
    return Table(header, rows)


def pump_sweep_table(spec: SweepSpec, gamma3_values, r_values, rho1=0.1, rho3=0.1,
                     omega=0.0) -> Table:
    """S_min versus pump parameter for every (gamma3, r) pair, with per-curve minima."""
    pumps = spec.values()
    curves = [(g3, r) for g3 in gamma3_values for r in r_values]
    header = ("pump",) + tuple(f"smin_gamma3={fmt(g3)}_r={fmt(r)}" for g3, r in curves)
    cols = [[_smin(g3, rho1, rho3, x, r, omega) for x in pumps] for g3, r in curves]
    rows = [(x,) + tuple(c[i] for c in cols) for i, x in enumerate(pumps)]
    summary = {}
    for name, col in zip(header[1:], cols):
        i = int(np.argmin(col))
        summary[name] = {"argmin_pump": float(pumps[i]), "min_smin": float(col[i])}
    return Table(header, rows, summary)


def squeeze_sweep_table(spec: SweepSpec, gamma3=1.0, rho1=0.1, rho3=0.1, pump=1.0,
                        omega=0.0) -> Table:
    """S_min versus squeeze factor; the summary carries the large-r limit ``1 - eta``."""
    rs = spec.values()
    rows = [(r, _smin(gamma3, rho1, rho3, pump, r, omega)) for r in rs]
    eta = s_min(OperatingPoint.from_ratios(gamma3, rho1, rho3, pump, 0.0, omega)).eta
    return Table(("r", "smin"), rows, {"asymptote": 1.0 - eta, "eta": eta})
