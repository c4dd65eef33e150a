"""Brute-force reference path for the closed forms.

Nothing here uses the coefficient block of :mod:`epr_sfg.transfer`: channel
transfers come from a direct complex solve of the linearised cavity
equations plus the output-coupler boundary condition, and correlation
variances from explicit linear response rows over independent unit-variance
noise coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import SingularSystemError
from .quadrature import canonical_angle, nopa_transform, rotate_quadratures
from .transfer import AnalysisFrequency, ChannelTransfer, SfgParams

__all__ = [
    "BASIS",
    "ScanResult",
    "solve_channel_transfer",
    "output_quadrature_rows",
    "assemble_correlation_row",
    "row_variance",
    "scan_optimum",
]

# Independent unit-variance input coordinates; (X01..Y02) feed a1/a2.
BASIS = ("X01", "Y01", "X02", "Y02", "Xc1", "Yc1", "Xb3in", "Yb3in", "Xc3", "Yc3")
_DET_FLOOR = 1e-14

G_STEP = 0.01
THETA_STEP = math.pi / 360


def solve_channel_transfer(p: SfgParams, f: AnalysisFrequency | float) -> ChannelTransfer:
    """Solve the 2x2 fluctuation system once per unit input excitation."""
    w = float(f)
    x = p.chi_e
    lhs = np.array(
        [[1j * w + p.kappa1, -x], [x, 1j * w + p.kappa3]],
        dtype=complex,
    )
    if abs(np.linalg.det(lhs)) <= _DET_FLOOR:
        raise SingularSystemError(f"singular cavity system at omega_tau={w}")
    # columns: unit drive on b1_in, c1_in, b3_in, c3_in
    drive = np.array(
        [
            [math.sqrt(2 * p.gamma1), math.sqrt(2 * p.rho1), 0.0, 0.0],
            [0.0, 0.0, math.sqrt(2 * p.gamma3), math.sqrt(2 * p.rho3)],
        ],
        dtype=complex,
    )
    beta = np.linalg.solve(lhs, drive)
    out = math.sqrt(2 * p.gamma3) * beta[1] - np.array([0, 0, 1, 0])
    return ChannelTransfer(*(complex(v) for v in out))


def _complex_rows(t: complex) -> tuple[np.ndarray, np.ndarray]:
    # output (X, Y) produced by t * (X_in + i Y_in)
    return np.array([t.real, -t.imag]), np.array([t.imag, t.real])


def output_quadrature_rows(p: SfgParams, r: float, f) -> tuple[np.ndarray, np.ndarray]:
    """Rows of ``X_b3out`` and ``Y_b3out`` over :data:`BASIS`."""
    t = solve_channel_transfer(p, f)
    nopa = nopa_transform(r)
    a1_x, a1_y = nopa[0], nopa[1]
    row_x = np.zeros(len(BASIS))
    row_y = np.zeros(len(BASIS))
    tx, ty = _complex_rows(t.t_b1)
    row_x[:4] += tx[0] * a1_x + tx[1] * a1_y
    row_y[:4] += ty[0] * a1_x + ty[1] * a1_y
    for coef, sl in ((t.t_c1, slice(4, 6)), (t.t_b3, slice(6, 8)), (t.t_c3, slice(8, 10))):
        tx, ty = _complex_rows(coef)
        row_x[sl] += tx
        row_y[sl] += ty
    return row_x, row_y


def _a2_rows(r: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    nopa = nopa_transform(r)
    xr, yr = rotate_quadratures(nopa[2], nopa[3], theta)
    pad = np.zeros(len(BASIS) - 4)
    return np.concatenate([xr, pad]), np.concatenate([yr, pad])


def assemble_correlation_row(p, r, f, g, theta, quadrature="x") -> np.ndarray:
    """Response row of ``X_b3out - g X_a2^theta`` (or ``Y_b3out + g Y_a2^theta``)."""
    out_x, out_y = output_quadrature_rows(p, r, f)
    a2_x, a2_y = _a2_rows(r, theta)
    if quadrature == "x":
        return out_x - g * a2_x
    if quadrature == "y":
        return out_y + g * a2_y
    raise ValueError(f"quadrature must be 'x' or 'y', got {quadrature!r}")


def row_variance(row: np.ndarray) -> float:
    """Variance of an observable given its row (the basis covariance is identity)."""
    return float(row @ row)


@dataclass(frozen=True)
class ScanResult:
    g: float
    theta: float
    s: float
    flat: bool  # theta does not affect the optimum (no usable correlation)


def scan_optimum(p: SfgParams, r: float, f) -> ScanResult:
    """Grid search over ``(g, theta)`` followed by golden-section polishing.

    The grid is g in [0, 2] step 0.01 and theta in (-pi, pi] step pi/360.
    """
    u = assemble_correlation_row(p, r, f, 0.0, 0.0)
    vx = u - assemble_correlation_row(p, r, f, 1.0, 0.0)
    vy = u - assemble_correlation_row(p, r, f, 1.0, math.pi / 2)

    # the variance is a quadratic form in (1, g cos th, g sin th) built from the rows
    uu, ux, uy = u @ u, u @ vx, u @ vy
    xx, xy, yy = vx @ vx, vx @ vy, vy @ vy

    def var(g, th):
        c, s = np.cos(th), np.sin(th)
        return uu - 2 * g * (c * ux + s * uy) + g * g * (c * c * xx + 2 * c * s * xy + s * s * yy)

    gs = np.arange(0.0, 2.0 + G_STEP / 2, G_STEP)
    ths = -math.pi + THETA_STEP * np.arange(1, 721)
    grid = var(gs[:, None], ths[None, :])
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    if i == 0:
        # every theta ties at g = 0; take the direction of steepest initial descent
        j = int(np.argmax(np.cos(ths) * ux + np.sin(ths) * uy))
    g_best, th_best = float(gs[i]), float(ths[j])
    flat = float(np.ptp(grid[1])) < 1e-12

    def f_g(gv, th):
        return float(var(gv, th))

    # coordinate-wise golden refinement; the surface is a smooth bowl near the optimum
    for _ in range(2):
        lo, hi = max(0.0, g_best - 2 * G_STEP), g_best + 2 * G_STEP
        g_best = _golden(lambda gv: f_g(gv, th_best), lo, hi)
        if not flat:
            th_best = _golden(
                lambda th: f_g(g_best, th), th_best - 2 * THETA_STEP, th_best + 2 * THETA_STEP
            )
    s = f_g(g_best, th_best)
    return ScanResult(g_best, canonical_angle(th_best), s, flat)


def _golden(fun, lo: float, hi: float) -> float:
    # bounded Brent: golden-section steps with parabolic acceleration
    res = optimize.minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x)
