"""Time-domain Euler-Maruyama simulation of the conversion cavity.

Time is measured in units of ``tau / gamma1`` so the drift coefficients are
the gamma1-normalised ratios and the angular frequency axis of every
spectrum is directly ``Omega = omega tau / gamma1``.

Noise convention: every white input quadrature is a unit-variance sample per
step, and :func:`estimate_psd` normalises periodograms so such a stream has
PSD 1.  Under this convention the vacuum level is 1 with no further scaling,
which the ``chi_e = 0`` calibration run checks.

Long runs are streamed: noise is generated chunk by chunk, integrated, and
folded into Welch segments, so memory stays bounded for 10^7+ steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.signal import get_window

from .errors import InsufficientDataError, SimulationDivergedError
from .metrics import OperatingPoint, s_min, time_domain_rotation_variance
from .quadrature import nopa_transform
from .transfer import AnalysisFrequency, SfgParams

__all__ = [
    "SimConfig",
    "QuadratureTrace",
    "PsdEstimate",
    "MonteCarloResult",
    "synthesize_epr_streams",
    "integrate_sfg",
    "simulate_traces",
    "estimate_psd",
    "simulate_spectrum",
]

_DIVERGENCE_LIMIT = 1e8
_CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.005
    duration: float = 2e5
    seed: int = 20061016
    welch_segment: int = 16384
    welch_overlap: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not 0 <= self.welch_overlap < 1:
            raise ValueError("welch_overlap must be in [0, 1)")
        if self.welch_segment < 8:
            raise ValueError("welch_segment too short")
        if self.n_steps < 10 * self.welch_segment:
            raise ValueError(
                f"duration/dt = {self.n_steps} must be >= 10 x welch_segment ({self.welch_segment})"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def hop(self) -> int:
        return max(1, int(round(self.welch_segment * (1 - self.welch_overlap))))

    def bin_omegas(self) -> np.ndarray:
        """Angular frequencies of the one-sided Welch bins."""
        return 2 * math.pi * np.fft.rfftfreq(self.welch_segment, self.dt)

    def check_stability(self, p: SfgParams) -> bool:
        """Explicit-integrator advisory ``dt * max(kappa) / gamma1 < 0.1``."""
        ok = self.dt * max(p.kappa1, p.kappa3) / p.gamma1 < 0.1
        if not ok:
            warnings.warn(
                f"dt={self.dt} is coarse for decay rates {p.kappa1:.3g}, {p.kappa3:.3g}",
                RuntimeWarning,
                stacklevel=3,
            )
        return ok


@dataclass
class QuadratureTrace:
    dt: float
    xa2: np.ndarray
    ya2: np.ndarray
    xb3: np.ndarray
    yb3: np.ndarray

    labels = ("Xa2", "Ya2", "Xb3", "Yb3")

    def __post_init__(self):
        n = len(self.xa2)
        if any(len(a) != n for a in (self.ya2, self.xb3, self.yb3)):
            raise ValueError("trace channels must have equal length")

    def __len__(self):
        return len(self.xa2)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self))

    def to_csv(self, path) -> None:
        """Plain CSV with header ``t,Xa2,Ya2,Xb3,Yb3``."""
        data = np.column_stack([self.times(), self.xa2, self.ya2, self.xb3, self.yb3])
        np.savetxt(path, data, delimiter=",", header="t,Xa2,Ya2,Xb3,Yb3",
                   comments="", fmt="%.12g")


def _rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    epr, vac = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(epr), np.random.default_rng(vac)


def _epr_chunk(rng: np.random.Generator, r: float, n: int) -> np.ndarray:
    inputs = rng.standard_normal((n, 4))  # X01, Y01, X02, Y02
    return nopa_transform(r) @ inputs.T


def synthesize_epr_streams(r: float, n: int, seed: int | np.random.Generator) -> np.ndarray:
    """White EPR quadrature streams, shape ``(4, n)``: ``X_a1, Y_a1, X_a2, Y_a2``.

    Each sample is one draw of the amplifier transform applied to unit vacua,
    so every beam quadrature has per-sample variance ``cosh 2r``.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    rng = seed if isinstance(seed, np.random.Generator) else _rngs(seed)[0]
    return _epr_chunk(rng, r, n)


@njit(cache=True)
def _euler_maruyama(state, a1, vac, k1, k3, chi, s_g1, s_r1, s_g3, s_r3, dt, out):
    """Advance the two complex amplitudes; ``out`` receives the output field."""
    b1 = state[0]
    b3 = state[1]
    for n in range(a1.shape[0]):
        c1 = vac[n, 0] + 1j * vac[n, 1]
        b3_in = vac[n, 2] + 1j * vac[n, 3]
        c3 = vac[n, 4] + 1j * vac[n, 5]
        out[n] = s_g3 * b3 - b3_in
        d1 = -k1 * b1 + chi * b3 + s_g1 * a1[n] + s_r1 * c1
        d3 = -k3 * b3 - chi * b1 + s_g3 * b3_in + s_r3 * c3
        b1 = b1 + dt * d1
        b3 = b3 + dt * d3
    state[0] = b1
    state[1] = b3


class _Integrator:
    """Carries the cavity state across chunks."""

    def __init__(self, p: SfgParams, dt: float):
        g3, r1, r3, chi = p.ratios()
        self.coef = (1 + r1, g3 + r3, chi, math.sqrt(2.0), math.sqrt(2 * r1),
                     math.sqrt(2 * g3), math.sqrt(2 * r3), dt)
        self.state = np.zeros(2, dtype=np.complex128)

    def step(self, a1: np.ndarray, vac: np.ndarray) -> np.ndarray:
        out = np.empty(len(a1), dtype=np.complex128)
        _euler_maruyama(self.state, a1, vac, *self.coef, out)
        if not np.all(np.isfinite(self.state)) or np.max(np.abs(self.state)) > _DIVERGENCE_LIMIT:
            raise SimulationDivergedError(
                f"cavity amplitude diverged (|state| = {np.max(np.abs(self.state)):.3g}); reduce dt"
            )
        return out


def integrate_sfg(p: SfgParams, epr: np.ndarray, dt: float,
                  seed: int | np.random.Generator) -> QuadratureTrace:
    """Drive the cavity with ``epr`` (from :func:`synthesize_epr_streams`).

    The vacuum channels ``c1, b3_in, c3`` are drawn from ``seed``.
    """
    vac_rng = seed if isinstance(seed, np.random.Generator) else _rngs(seed)[1]
    n = epr.shape[1]
    integ = _Integrator(p, dt)
    a1 = np.ascontiguousarray(epr[0] + 1j * epr[1])
    out = integ.step(a1, vac_rng.standard_normal((n, 6)))
    return QuadratureTrace(dt, epr[2].copy(), epr[3].copy(), out.real.copy(), out.imag.copy())


def simulate_traces(p: SfgParams, r: float, cfg: SimConfig, n: int | None = None) -> QuadratureTrace:
    """In-memory trajectory of ``n`` steps (default: the whole configured run)."""
    n = cfg.n_steps if n is None else n
    cfg.check_stability(p)
    epr_rng, vac_rng = _rngs(cfg.seed)
    return integrate_sfg(p, synthesize_epr_streams(r, n, epr_rng), cfg.dt, vac_rng)


def _window(segment: int) -> np.ndarray:
    return get_window("hann", segment)


def _overlap_factor(window: np.ndarray, hop: int) -> float:
    """Inflation of the standard error from correlated overlapping segments."""
    u = window @ window
    rho = 0.0
    shift = hop
    while shift < len(window):
        rho += (window[shift:] @ window[:-shift] / u) ** 2
        shift += hop
    return math.sqrt(1 + 2 * rho)


def _segments(x: np.ndarray, segment: int, hop: int) -> np.ndarray:
    if x.shape[-1] < segment:
        return np.empty(x.shape[:-1] + (0, segment))
    return np.lib.stride_tricks.sliding_window_view(x, segment, axis=-1)[..., ::hop, :]


@dataclass(frozen=True)
class PsdEstimate:
    omega: float
    value: float
    stderr: float
    n_segments: int


def estimate_psd(x: np.ndarray, dt: float, omega: float, segment: int = 16384,
                 overlap: float = 0.5) -> PsdEstimate:
    """Welch PSD of a real series at the bin nearest ``omega``.

    A unit-variance white series has PSD 1 in every bin.  The standard error
    is the spread of the per-segment periodograms.
    """
    x = np.asarray(x, dtype=float)
    hop = max(1, int(round(segment * (1 - overlap))))
    segs = _segments(x, segment, hop)
    n_seg = segs.shape[0]
    if n_seg < 10:
        raise InsufficientDataError(f"{len(x)} samples give {n_seg} Welch segments, need 10")
    w = _window(segment)
    omegas = 2 * math.pi * np.fft.rfftfreq(segment, dt)
    k = int(np.argmin(np.abs(omegas - abs(omega))))
    # single-bin DFT per segment; cheaper than a full FFT
    phase = np.exp(-1j * omegas[k] * dt * np.arange(segment))
    per_seg = np.abs(segs @ (w * phase)) ** 2 / (w @ w)
    se = per_seg.std(ddof=1) / math.sqrt(n_seg) * _overlap_factor(w, hop)
    return PsdEstimate(float(omegas[k]), float(per_seg.mean()), float(se), n_seg)


class _Moments:
    def __init__(self, shape):
        self.n = 0
        self.s1 = np.zeros(shape)
        self.s2 = np.zeros(shape)

    def add(self, v: np.ndarray) -> None:
        self.n += v.shape[0]
        self.s1 += v.sum(axis=0)
        self.s2 += (v * v).sum(axis=0)

    def mean(self):
        return self.s1 / self.n

    def stderr(self, factor: float):
        var = (self.s2 - self.s1**2 / self.n) / (self.n - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.n) * factor


@dataclass
class MonteCarloResult:
    """Simulated and analytic correlation spectra at the requested bins.

    ``simulated`` applies the optimal gain as a spectral phase on the ``a2``
    record; ``simulated_rotation`` instead mixes the ``X``/``Y`` records of
    ``a2`` by a fixed angle.  ``spectrum_*`` is the bare output PSD of
    ``b3_out`` on every bin up to the highest requested frequency.
    """

    omega: np.ndarray
    analytic: np.ndarray
    simulated: np.ndarray
    stderr: np.ndarray
    analytic_rotation: np.ndarray
    simulated_rotation: np.ndarray
    stderr_rotation: np.ndarray
    output_psd: np.ndarray
    n_segments: int
    spectrum_omega: np.ndarray = field(repr=False)
    spectrum_psd: np.ndarray = field(repr=False)

    def z_scores(self) -> np.ndarray:
        return (self.simulated - self.analytic) / self.stderr

    def within(self, n_sigma: float = 3.0) -> np.ndarray:
        return np.abs(self.z_scores()) <= n_sigma

    def band_average(self, lo: float, hi: float) -> float:
        """Mean output PSD over bins with ``lo <= Omega < hi``."""
        sel = (self.spectrum_omega >= lo) & (self.spectrum_omega < hi)
        return float(self.spectrum_psd[sel].mean())


def simulate_spectrum(p: SfgParams, r: float, cfg: SimConfig, omegas) -> MonteCarloResult:
    """Streamed Monte Carlo estimate of the optimal correlation spectrum.

    At each requested frequency the analytic optimum ``(g_opt, theta_opt)``
    for the nearest Welch bin is applied to the simulated records.
    """
    cfg.check_stability(p)
    p1 = p.normalized()
    seg, hop = cfg.welch_segment, cfg.hop
    window = _window(seg)
    u = window @ window
    all_bins = cfg.bin_omegas()
    idx = np.array([int(np.argmin(np.abs(all_bins - abs(o)))) for o in np.atleast_1d(omegas)])
    bins = all_bins[idx]
    n_spec = int(np.searchsorted(all_bins, bins.max(), side="right"))

    ops = [OperatingPoint(p1, r, AnalysisFrequency(w)) for w in bins]
    opt = [s_min(op) for op in ops]
    g = np.array([o.g_opt for o in opt])
    th = np.array([o.theta_opt for o in opt])
    k_spec = g * np.exp(1j * th)
    cos_t, sin_t = np.cos(th), np.sin(th)

    combo = _Moments(len(idx))
    rot = _Moments(len(idx))
    bare = _Moments(len(idx))
    spectrum = _Moments(n_spec)

    epr_rng, vac_rng = _rngs(cfg.seed)
    integ = _Integrator(p, cfg.dt)
    carry = np.empty((4, 0))
    remaining = cfg.n_steps
    while remaining > 0:
        n = min(_CHUNK, remaining)
        remaining -= n
        epr = _epr_chunk(epr_rng, r, n)
        out = integ.step(np.ascontiguousarray(epr[0] + 1j * epr[1]),
                         vac_rng.standard_normal((n, 6)))
        buf = np.concatenate([carry, np.stack([epr[2], epr[3], out.real, out.imag])], axis=1)
        segs = _segments(buf, seg, hop)  # (4, n_seg, seg)
        n_seg = segs.shape[1]
        carry = buf[:, n_seg * hop:]
        if n_seg == 0:
            continue
        spec = np.fft.rfft(segs * window, axis=-1)
        fxa, fya, fxb, fyb = spec[..., idx]
        zx = fxb - k_spec * fxa
        zy = fyb + k_spec * fya
        combo.add((np.abs(zx) ** 2 + np.abs(zy) ** 2) / (2 * u))
        rx = fxb - g * (cos_t * fxa + sin_t * fya)
        ry = fyb + g * (-sin_t * fxa + cos_t * fya)
        rot.add((np.abs(rx) ** 2 + np.abs(ry) ** 2) / (2 * u))
        bare.add((np.abs(fxb) ** 2 + np.abs(fyb) ** 2) / (2 * u))
        spectrum.add((np.abs(spec[2, :, :n_spec]) ** 2 + np.abs(spec[3, :, :n_spec]) ** 2) / (2 * u))

    factor = _overlap_factor(window, hop)
    return MonteCarloResult(
        omega=bins,
        analytic=np.array([o.s_min for o in opt]),
        simulated=combo.mean(),
        stderr=combo.stderr(factor),
        analytic_rotation=np.array(
            [time_domain_rotation_variance(op, gi, ti) for op, gi, ti in zip(ops, g, th)]
        ),
        simulated_rotation=rot.mean(),
        stderr_rotation=rot.stderr(factor),
        output_psd=bare.mean(),
        n_segments=combo.n,
        spectrum_omega=all_bins[:n_spec],
        spectrum_psd=spectrum.mean(),
    )
