"""Correlation between the converted beam and the retained EPR beam."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .quadrature import SqueezeFactor, canonical_angle, epr_combination_variance
from .transfer import AnalysisFrequency, SfgParams, channel_transfer, transfer_coeffs

__all__ = [
    "OperatingPoint",
    "CorrelationResult",
    "correlation_variance",
    "optimal_gain",
    "s_min",
    "is_inseparable",
    "epr_duan_sum",
    "time_domain_rotation_variance",
    "to_decibel",
]

DUAN_BOUND = 2.0


@dataclass(frozen=True)
class OperatingPoint:
    params: SfgParams
    r: float
    freq: AnalysisFrequency = field(default_factory=lambda: AnalysisFrequency(0.0))

    def __post_init__(self):
        object.__setattr__(self, "r", SqueezeFactor(self.r).r)
        if not isinstance(self.freq, AnalysisFrequency):
            object.__setattr__(self, "freq", AnalysisFrequency(self.freq))

    @classmethod
    def from_ratios(cls, gamma3=1.0, rho1=0.0, rho3=0.0, pump=0.0, r=0.0, omega=0.0):
        """Operating point with gamma1 = 1 and normalised frequency ``omega``."""
        return cls(SfgParams.from_ratios(gamma3, rho1, rho3, pump), r, AnalysisFrequency(omega))


@dataclass(frozen=True)
class CorrelationResult:
    s_min: float
    g_opt: float
    theta_opt: float
    eta: float
    duan_sum: float
    s_min_db: float
    degenerate: bool = False

    @property
    def inseparable(self) -> bool:
        return self.duan_sum < DUAN_BOUND


def _terms(op: OperatingPoint):
    p = op.params
    k = transfer_coeffs(p, op.freq)
    eta = 4 * p.chi_e**2 * p.gamma1 * p.gamma3 / k.R
    phi = math.atan2(k.B, k.A) if p.chi_e > 0 else 0.0
    return k, eta, phi


def correlation_variance(op: OperatingPoint, g: float, theta: float) -> float:
    """Variance of ``X_b3out - g X_a2^theta`` (equal to the ``Y`` sum).

    The cavity's added noise is taken from the explicit coefficient sum, so
    the vacuum sum rule is not assumed here.
    """
    g = float(g)
    if not math.isfinite(g):
        raise ValueError("gain must be finite")
    k, eta, phi = _terms(op)
    c2, s2 = math.cosh(2 * op.r), math.sinh(2 * op.r)
    return (
        eta * c2
        - 2 * math.sqrt(eta) * g * math.cos(phi + theta) * s2
        + g * g * c2
        + k.loss_sum()
    )


def optimal_gain(op: OperatingPoint, theta: float) -> float:
    """Gain minimising :func:`correlation_variance` at fixed ``theta``."""
    _, eta, phi = _terms(op)
    return math.sqrt(eta) * math.cos(phi + theta) * math.tanh(2 * op.r)


def s_min(op: OperatingPoint) -> CorrelationResult:
    """Jointly optimal gain and phase and the resulting minimum variance.

    With no pump the output carries no signal: the result is the vacuum
    level 1 with ``degenerate=True``.
    """
    if op.params.chi_e == 0:
        return CorrelationResult(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, degenerate=True)
    k, eta, phi = _terms(op)
    theta = canonical_angle(-phi)
    g = optimal_gain(op, theta)
    s = correlation_variance(op, g, theta)
    return CorrelationResult(
        s_min=s, g_opt=g, theta_opt=theta, eta=eta, duan_sum=2 * s, s_min_db=to_decibel(s)
    )


def is_inseparable(op: OperatingPoint) -> tuple[bool, float]:
    """Duan test for the converted pair at the optimum: ``(sum < 2, sum)``."""
    res = s_min(op)
    return res.duan_sum < DUAN_BOUND, res.duan_sum


def epr_duan_sum(r: float, g: float | None = None) -> float:
    """Duan sum of the source pair ``(a1, a2)``; defaults to the optimal gain."""
    if g is None:
        g = math.tanh(2 * SqueezeFactor(r).r)
    return 2 * epr_combination_variance(r, g)


def time_domain_rotation_variance(op: OperatingPoint, g: float, theta: float) -> float:
    """Variance when ``a2`` is rotated by mixing its own ``X`` and ``Y`` records.

    A frequency-independent real rotation cannot follow the complex phase of
    the conversion at nonzero analysis frequency: only ``Re t_b1`` correlates.
    Agrees with :func:`correlation_variance` whenever ``t_b1`` is real.
    """
    t = channel_transfer(op.params, op.freq)
    k = transfer_coeffs(op.params, op.freq)
    c2, s2 = math.cosh(2 * op.r), math.sinh(2 * op.r)
    eta = abs(t.t_b1) ** 2
    return eta * c2 - 2 * g * math.cos(theta) * t.t_b1.real * s2 + g * g * c2 + k.loss_sum()


def to_decibel(s: float) -> float:
    if not s > 0:
        raise ValueError(f"decibel conversion needs a positive value, got {s!r}")
    return 10 * math.log10(s)
