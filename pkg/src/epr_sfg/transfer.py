"""Closed-form frequency response of the sum-frequency cavity.

The signal ``b1`` (at w1) is converted to ``b3`` (at w3 = w1 + w2) by an
undepleted pump.  All loss parameters are single-pass coefficients, so the
analysis frequency only ever enters as the product ``omega * tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegeneratePumpError
from .quadrature import canonical_angle

__all__ = [
    "SMALL_LOSS_LIMIT",
    "SfgParams",
    "AnalysisFrequency",
    "TransferCoeffs",
    "ChannelTransfer",
    "transfer_coeffs",
    "channel_transfer",
    "conversion_efficiency",
    "rotation_angle_phi",
]

# Above this the small-loss / small-gain linearisation is questionable.
SMALL_LOSS_LIMIT = 0.5


@dataclass(frozen=True)
class SfgParams:
    """Single-pass coefficients of the conversion cavity.

    gamma1, gamma3 : coupler transmission terms for the signal and the
        sum-frequency output.
    rho1, rho3 : extra intracavity losses.
    chi_e : pump parameter (nonlinear coupling times pump amplitude).
    """

    gamma1: float = 1.0
    gamma3: float = 1.0
    rho1: float = 0.0
    rho3: float = 0.0
    chi_e: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma3", "rho1", "rho3", "chi_e"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.gamma1 <= 0 or self.gamma3 <= 0:
            raise ValueError("gamma1 and gamma3 must be > 0")
        if self.rho1 < 0 or self.rho3 < 0:
            raise ValueError("rho1 and rho3 must be >= 0")
        if self.chi_e < 0:
            raise ValueError("chi_e must be >= 0 (pump phase is fixed in-phase)")

    @classmethod
    def from_ratios(cls, gamma3=1.0, rho1=0.0, rho3=0.0, pump=0.0, gamma1=1.0):
        """Build from ratios to ``gamma1`` (the form used by the figures)."""
        return cls(gamma1, gamma3 * gamma1, rho1 * gamma1, rho3 * gamma1, pump * gamma1)

    @property
    def kappa1(self) -> float:
        return self.gamma1 + self.rho1

    @property
    def kappa3(self) -> float:
        return self.gamma3 + self.rho3

    @property
    def small_loss(self) -> bool:
        """False when any coefficient leaves the small-loss regime."""
        return max(self.gamma1, self.gamma3, self.rho1, self.rho3, self.chi_e) <= SMALL_LOSS_LIMIT

    def normalized(self) -> SfgParams:
        """Same cavity with every coefficient divided by ``gamma1``."""
        return SfgParams.from_ratios(*self.ratios())

    def ratios(self) -> tuple[float, float, float, float]:
        """``(gamma3, rho1, rho3, chi_e)`` divided by ``gamma1``."""
        g1 = self.gamma1
        return self.gamma3 / g1, self.rho1 / g1, self.rho3 / g1, self.chi_e / g1


@dataclass(frozen=True)
class AnalysisFrequency:
    """Sideband frequency expressed as ``omega * tau``."""

    omega_tau: float

    def __post_init__(self):
        v = float(self.omega_tau)
        if not math.isfinite(v):
            raise ValueError("analysis frequency must be finite")
        object.__setattr__(self, "omega_tau", v)

    @classmethod
    def normalized(cls, big_omega: float, gamma1: float = 1.0) -> AnalysisFrequency:
        """From the normalised frequency ``Omega = omega tau / gamma1``."""
        return cls(big_omega * gamma1)

    def __float__(self) -> float:
        return self.omega_tau


def _wt(f) -> float:
    return AnalysisFrequency(float(f)).omega_tau


@dataclass(frozen=True)
class TransferCoeffs:
    """Real coefficient block of the output quadratures.

    ``Gc`` is the loss-channel coefficient usually written ``G``; it is renamed
    so it cannot be confused with the EPR gain.
    """

    R: float
    A: float
    B: float
    C: float
    D: float
    Gc: float
    H: float
    M: float
    N: float

    def loss_sum(self) -> float:
        """``(C^2 + D^2 + Gc^2 + H^2 + M^2 + N^2) / R^2``: noise added by the cavity."""
        return (self.C**2 + self.D**2 + self.Gc**2 + self.H**2 + self.M**2 + self.N**2) / self.R**2

    def sum_rule_defect(self) -> float:
        """Relative violation of ``sum of squares == R^2``."""
        total = (
            self.A**2 + self.B**2 + self.C**2 + self.D**2
            + self.Gc**2 + self.H**2 + self.M**2 + self.N**2
        )
        return abs(total - self.R**2) / self.R**2


@dataclass(frozen=True)
class ChannelTransfer:
    """Complex amplitude transfer from each input channel onto ``b3_out``."""

    t_b1: complex
    t_c1: complex
    t_b3: complex
    t_c3: complex

    @classmethod
    def from_coeffs(cls, k: TransferCoeffs) -> ChannelTransfer:
        return cls(
            t_b1=complex(k.A, -k.B) / k.R,
            t_c1=complex(k.M, -k.N) / k.R,
            t_b3=complex(k.C, -k.D) / k.R,
            t_c3=complex(k.Gc, -k.H) / k.R,
        )

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return self.t_b1, self.t_c1, self.t_b3, self.t_c3

    def total_power(self) -> float:
        return sum(abs(t) ** 2 for t in self.as_tuple())


def transfer_coeffs(p: SfgParams, f: AnalysisFrequency | float) -> TransferCoeffs:
    """Evaluate the nine output-quadrature coefficients at one frequency."""
    w = _wt(f)
    g1, g3, r1, r3, x = p.gamma1, p.gamma3, p.rho1, p.rho3, p.chi_e
    k1, k3 = g1 + r1, g3 + r3
    w2, x2 = w * w, x * x
    ksum = k1 + k3
    # real part of the characteristic determinant, and the gamma3-rho3 variant
    re_det = k1 * k3 - w2 + x2
    re_b3 = k1 * (g3 - r3) + w2 - x2
    skew = g3 - r3 - k1

    R = re_det**2 + (w * ksum) ** 2
    A = -2 * x * math.sqrt(g1 * g3) * re_det
    B = -2 * x * math.sqrt(g1 * g3) * w * ksum
    C = re_b3 * re_det + w2 * ksum * skew
    D = w * re_b3 * ksum - w * re_det * skew
    Gc = 2 * math.sqrt(g3 * r3) * ((k1 * k3 + x2) * k1 + w2 * k3)
    H = 2 * math.sqrt(g3 * r3) * w * (k1**2 + w2 - x2)
    M = -2 * x * math.sqrt(r1 * g3) * re_det
    N = -2 * x * math.sqrt(r1 * g3) * w * ksum
    return TransferCoeffs(R, A, B, C, D, Gc, H, M, N)


def channel_transfer(p: SfgParams, f: AnalysisFrequency | float) -> ChannelTransfer:
    return ChannelTransfer.from_coeffs(transfer_coeffs(p, f))


def conversion_efficiency(p: SfgParams, f: AnalysisFrequency | float) -> float:
    """Fraction of signal fluctuation power reaching the output, ``4 (chi E)^2 g1 g3 / R``."""
    k = transfer_coeffs(p, f)
    return 4 * p.chi_e**2 * p.gamma1 * p.gamma3 / k.R


def rotation_angle_phi(p: SfgParams, f: AnalysisFrequency | float) -> float:
    """Phase ``phi`` of the signal-to-output conversion, ``atan2(B, A)``.

    Raises :class:`DegeneratePumpError` when ``chi_e == 0``.
    """
    if p.chi_e == 0:
        raise DegeneratePumpError("conversion phase undefined without pump")
    k = transfer_coeffs(p, f)
    return canonical_angle(math.atan2(k.B, k.A))
