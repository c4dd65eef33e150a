"""Randomised batteries comparing every closed form with the oracle path."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .metrics import OperatingPoint, correlation_variance, s_min
from .oracle import assemble_correlation_row, row_variance, scan_optimum, solve_channel_transfer
from .transfer import AnalysisFrequency, ChannelTransfer, SfgParams, transfer_coeffs

__all__ = ["Draw", "BatteryResult", "TOLERANCES", "random_draws", "run_batteries"]

TOLERANCES = {
    "sum_rule": 1e-10,
    "efficiency_consistency": 1e-10,
    "oracle_transfer": 1e-10,
    "unitarity": 1e-10,
    "variance_oracle": 1e-10,
    "quadrature_pair": 1e-12,
    "decomposition": 1e-10,
    "optimum_scan": 1e-6,
}

FAULT_SIZE = 1e-6


@dataclass(frozen=True)
class Draw:
    params: SfgParams
    omega_tau: float
    r: float
    g: float
    theta: float


@dataclass
class BatteryResult:
    battery: str
    max_error: float
    tolerance: float
    passed: bool
    worst: dict | None = None

    def to_json(self) -> dict:
        out = {"battery": self.battery, "max_error": self.max_error,
               "tolerance": self.tolerance, "pass": self.passed}
        if self.worst is not None and not self.passed:
            out["draw"] = self.worst
        return out


def random_draws(count: int, seed: int) -> list[Draw]:
    """Parameter draws: gamma, rho in [0.01, 0.5], chi_e in [0, 2], omega_tau in [-3, 3]."""
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(count):
        g1, g3, r1, r3 = rng.uniform(0.01, 0.5, 4)
        draws.append(Draw(
            SfgParams(g1, g3, r1, r3, rng.uniform(0.0, 2.0)),
            omega_tau=float(rng.uniform(-3.0, 3.0)),
            r=float(rng.uniform(0.0, 2.0)),
            g=float(rng.uniform(0.0, 2.0)),
            theta=float(rng.uniform(-math.pi, math.pi)),
        ))
    return draws


def _describe(d: Draw) -> dict:
    return {**asdict(d.params), "omega_tau": d.omega_tau, "r": d.r, "g": d.g, "theta": d.theta}


def run_batteries(count: int = 1000, seed: int = 0, inject_fault: bool = False,
                  scan: bool = True) -> list[BatteryResult]:
    """Run every battery over ``count`` seeded draws.

    ``inject_fault`` scales the closed-form ``A`` coefficient by ``1 + 1e-6``
    to confirm the harness notices a transcription error.
    """
    if count < 1:
        raise ValueError("draw count must be >= 1")
    errors = {name: (0.0, None) for name in TOLERANCES}
    if not scan:
        del errors["optimum_scan"]

    def record(name, err, d):
        if not err <= errors[name][0]:  # NaN counts as worst
            errors[name] = (err, d)

    for d in random_draws(count, seed):
        p, w = d.params, d.omega_tau
        k = transfer_coeffs(p, w)
        if inject_fault:
            k = replace(k, A=k.A * (1 + FAULT_SIZE))
        record("sum_rule", k.sum_rule_defect(), d)
        eta = 4 * p.chi_e**2 * p.gamma1 * p.gamma3 / k.R
        record("efficiency_consistency", abs((k.A**2 + k.B**2) / k.R**2 - eta), d)

        closed = ChannelTransfer.from_coeffs(k)
        solved = solve_channel_transfer(p, w)
        record("oracle_transfer",
               max(abs(a - b) for a, b in zip(closed.as_tuple(), solved.as_tuple())), d)
        record("unitarity", abs(solved.total_power() - 1.0), d)

        op = OperatingPoint(p, d.r, AnalysisFrequency(w))
        vx = row_variance(assemble_correlation_row(p, d.r, w, d.g, d.theta, "x"))
        vy = row_variance(assemble_correlation_row(p, d.r, w, d.g, d.theta, "y"))
        record("variance_oracle", abs(correlation_variance(op, d.g, d.theta) - vx), d)
        record("quadrature_pair", abs(vx - vy) / max(1.0, vx), d)

        best = s_min(op)
        c2 = math.cosh(2 * d.r)
        record("decomposition", abs(best.s_min - (best.eta / c2 + 1 - best.eta)), d)
        if scan:
            record("optimum_scan", abs(scan_optimum(p, d.r, w).s - best.s_min), d)

    return [
        BatteryResult(name, err, TOLERANCES[name], err <= TOLERANCES[name],
                      _describe(d) if d is not None else None)
        for name, (err, d) in errors.items()
    ]
