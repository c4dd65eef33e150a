"""EPR entanglement through intracavity sum-frequency conversion.

Closed-form correlation spectra, an independent linear-solve oracle, and a
time-domain Langevin simulator for checking both.
"""

from .metrics import (
    CorrelationResult,
    OperatingPoint,
    correlation_variance,
    is_inseparable,
    optimal_gain,
    s_min,
    to_decibel,
)
from .quadrature import (
    SqueezeFactor,
    epr_combination_variance,
    epr_optimal_gain,
    nopa_transform,
    rotate_quadratures,
)
from .transfer import (
    AnalysisFrequency,
    ChannelTransfer,
    SfgParams,
    TransferCoeffs,
    channel_transfer,
    conversion_efficiency,
    rotation_angle_phi,
    transfer_coeffs,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisFrequency",
    "ChannelTransfer",
    "CorrelationResult",
    "OperatingPoint",
    "SfgParams",
    "SqueezeFactor",
    "TransferCoeffs",
    "channel_transfer",
    "conversion_efficiency",
    "correlation_variance",
    "epr_combination_variance",
    "epr_optimal_gain",
    "is_inseparable",
    "nopa_transform",
    "optimal_gain",
    "rotate_quadratures",
    "rotation_angle_phi",
    "s_min",
    "to_decibel",
    "transfer_coeffs",
]
