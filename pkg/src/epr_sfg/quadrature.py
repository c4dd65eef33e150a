"""Quadrature conventions and the two-mode squeezing source.

Quadratures are ``X = (b + b^+)/2`` and ``Y = (b - b^+)/2i``, and every
variance in this package is expressed in units where a vacuum quadrature
has variance 1 (the shot-noise level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SqueezeFactor",
    "canonical_angle",
    "nopa_transform",
    "symplectic_form",
    "epr_combination_variance",
    "epr_optimal_gain",
    "per_snl",
    "rotate_quadratures",
]


@dataclass(frozen=True)
class SqueezeFactor:
    """Two-mode squeezing parameter ``r >= 0`` of the parametric amplifier."""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0:
            raise ValueError(f"squeeze factor must be finite and >= 0, got {self.r!r}")
        object.__setattr__(self, "r", r)

    def __float__(self) -> float:
        return self.r


def _r(r: float | SqueezeFactor) -> float:
    return SqueezeFactor(float(r)).r


def canonical_angle(theta: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    t = math.remainder(float(theta), 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    return t


def nopa_transform(r: float | SqueezeFactor) -> np.ndarray:
    """Input-output matrix of the amplifier in amplification mode.

    Maps ``(X01, Y01, X02, Y02)`` to ``(X_a1, Y_a1, X_a2, Y_a2)``: amplitude
    quadratures couple with ``+sinh r``, phase quadratures with ``-sinh r``.
    """
    r = _r(r)
    c, s = math.cosh(r), math.sinh(r)
    return np.array(
        [
            [c, 0.0, s, 0.0],
            [0.0, c, 0.0, -s],
            [s, 0.0, c, 0.0],
            [0.0, -s, 0.0, c],
        ]
    )


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    """Antisymmetric form pairing ``(X_i, Y_i)`` for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def epr_combination_variance(r: float | SqueezeFactor, g: float) -> float:
    """Variance of ``X_a1 - g X_a2`` (equal to that of ``Y_a1 + g Y_a2``).

    Raw units: two independent vacua at ``g = 1`` give 2.
    """
    r = _r(r)
    g = float(g)
    if not math.isfinite(g):
        raise ValueError("gain must be finite")
    c2, s2 = math.cosh(2 * r), math.sinh(2 * r)
    # (1 + g^2) cosh 2r - 2 g sinh 2r, rearranged to avoid cancellation at large r
    return (1 - g) ** 2 * c2 + 2 * g * (c2 - s2)


def epr_optimal_gain(r: float | SqueezeFactor) -> float:
    """Gain minimising :func:`epr_combination_variance`; equals ``tanh 2r``."""
    return math.tanh(2 * _r(r))


def per_snl(variance: float, g: float) -> float:
    """Rescale a combination variance to the shot noise of both beams, ``1 + g^2``."""
    return variance / (1.0 + g * g)


def rotate_quadratures(x, y, theta: float):
    """Rotate a quadrature pair by ``theta``.

    Returns ``(x cos t + y sin t, -x sin t + y cos t)``; works elementwise on
    arrays.
    """
    c, s = math.cos(theta), math.sin(theta)
    return x * c + y * s, -x * s + y * c
