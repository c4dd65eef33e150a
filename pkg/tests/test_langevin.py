import math

import numpy as np
import pytest

from epr_sfg.errors import InsufficientDataError, SimulationDivergedError
from epr_sfg.langevin import (
    QuadratureTrace,
    SimConfig,
    estimate_psd,
    integrate_sfg,
    simulate_spectrum,
    simulate_traces,
    synthesize_epr_streams,
)
from epr_sfg.transfer import SfgParams

N = 400_000


def _five_sigma_var(n):
    # standard deviation of a sample variance of unit Gaussians
    return 5 * math.sqrt(2 / n)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)
    with pytest.raises(ValueError):
        SimConfig(duration=100.0)  # fewer than 10 segments
    with pytest.raises(ValueError):
        SimConfig(welch_overlap=1.0)
    cfg = SimConfig(dt=0.01, duration=2e4, welch_segment=1024)
    assert cfg.n_steps == 2_000_000
    assert cfg.hop == 512


def test_stability_advisory():
    cfg = SimConfig(dt=0.2, duration=2e5, welch_segment=1024)
    with pytest.warns(RuntimeWarning):
        assert not cfg.check_stability(SfgParams.from_ratios(1, 0.1, 0.1, 1))


def test_vacuum_streams_are_independent():
    x = synthesize_epr_streams(0.0, N, seed=1)
    cov = np.cov(x)
    tol = _five_sigma_var(N)
    np.testing.assert_allclose(cov, np.eye(4), atol=tol)


def test_epr_difference_variance_and_correlation():
    x = synthesize_epr_streams(0.6, N, seed=2)
    diff = np.var(x[0] - x[2])
    expected = 2 * math.exp(-1.2)
    assert diff == pytest.approx(expected, abs=expected * _five_sigma_var(N))
    corr = np.corrcoef(x[0], x[2])[0, 1]
    # Fisher-z standard error ~ 1 / sqrt(n)
    assert math.atanh(corr) == pytest.approx(math.atanh(math.tanh(1.2)), abs=5 / math.sqrt(N))
    assert np.corrcoef(x[1], x[3])[0, 1] == pytest.approx(-math.tanh(1.2), abs=0.01)


def test_psd_of_white_noise_is_one():
    x = np.random.default_rng(0).standard_normal(2_000_000)
    for w in (0.0, 0.5, 2.0):
        est = estimate_psd(x, 0.01, w, segment=1024)
        assert abs(est.value - 1) < 3 * est.stderr + 1e-3


def test_psd_sinusoid_peak():
    dt, seg = 0.01, 4096
    omegas = 2 * np.pi * np.fft.rfftfreq(seg, dt)
    w0 = omegas[100]
    t = dt * np.arange(seg * 20)
    x = np.sin(w0 * t)
    peak = estimate_psd(x, dt, w0, segment=seg).value
    off = estimate_psd(x, dt, omegas[300], segment=seg).value
    assert peak > 100
    assert off < 1e-6 * peak


def test_psd_of_epr_difference_is_flat():
    x = synthesize_epr_streams(0.6, 2_000_000, seed=4)
    d = x[0] - x[2]
    expected = 2 * math.exp(-1.2)
    for w in (0.0, 1.0, 3.0):
        est = estimate_psd(d, 0.01, w, segment=2048)
        assert est.value == pytest.approx(expected, rel=0.05)


def test_psd_needs_enough_segments():
    with pytest.raises(InsufficientDataError):
        estimate_psd(np.zeros(5000), 0.01, 0.0, segment=1024)


def test_determinism():
    p = SfgParams.from_ratios(1, 0.1, 0.1, 1)
    cfg = SimConfig(dt=0.005, duration=500.0, welch_segment=4096, seed=77)
    a = simulate_traces(p, 0.6, cfg)
    b = simulate_traces(p, 0.6, cfg)
    for name in ("xa2", "ya2", "xb3", "yb3"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = simulate_traces(p, 0.6, SimConfig(dt=0.005, duration=500.0, welch_segment=4096, seed=78))
    assert not np.array_equal(a.xb3, c.xb3)


def test_integrate_matches_streamed_traces():
    p = SfgParams.from_ratios(1, 0.1, 0.1, 1)
    cfg = SimConfig(dt=0.005, duration=500.0, welch_segment=4096, seed=5)
    a = simulate_traces(p, 0.6, cfg, n=3000)
    b = simulate_traces(p, 0.6, cfg)
    assert np.array_equal(a.xb3, b.xb3[:3000])


def test_trace_csv(tmp_path):
    tr = QuadratureTrace(0.5, np.zeros(3), np.ones(3), np.zeros(3), np.ones(3))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,Xa2,Ya2,Xb3,Yb3"
    assert lines[2] == "0.5,0,1,0,1"
    with pytest.raises(ValueError):
        QuadratureTrace(0.1, np.zeros(3), np.zeros(2), np.zeros(3), np.zeros(3))


def test_divergence_detected():
    p = SfgParams.from_ratios(1, 0.1, 0.1, 1)
    epr = synthesize_epr_streams(0.0, 20_000, seed=1)
    with pytest.warns(RuntimeWarning), pytest.raises(SimulationDivergedError):
        # dt far beyond the explicit stability limit
        cfg = SimConfig(dt=5.0, duration=1e6, welch_segment=1024)
        cfg.check_stability(p)
        integrate_sfg(p, epr, cfg.dt, seed=1)


SHORT = SimConfig(dt=0.005, duration=2e4, welch_segment=16384, seed=3)


def test_passive_vacuum_short_run():
    res = simulate_spectrum(SfgParams.from_ratios(1, 0.1, 0.1, 0.0), 0.6, SHORT, [0.0, 1.0, 2.0])
    assert np.all(res.within(3.0))
    for lo, hi in ((0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0)):
        assert res.band_average(lo, hi) == pytest.approx(1.0, abs=0.05)


def test_pumped_vacuum_short_run():
    res = simulate_spectrum(SfgParams.from_ratios(1, 0.1, 0.1, 1.0), 0.0, SHORT, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(res.analytic, 1.0, atol=1e-14)
    assert np.all(res.within(3.0))


def test_standard_point_short_run():
    res = simulate_spectrum(SfgParams.from_ratios(1, 0.1, 0.1, 1.0), 0.6, SHORT, [0.0, 1.0])
    assert np.all(res.within(3.0))
    assert np.all(np.abs(res.simulated_rotation - res.analytic_rotation) <= 3 * res.stderr_rotation)


def test_halving_dt_is_statistically_invisible():
    p = SfgParams.from_ratios(1, 0.1, 0.1, 1.0)
    coarse = simulate_spectrum(p, 0.6, SHORT, [0.0])
    fine_cfg = SimConfig(dt=SHORT.dt / 2, duration=SHORT.duration,
                         seed=SHORT.seed + 1, welch_segment=2 * SHORT.welch_segment)
    fine = simulate_spectrum(p, 0.6, fine_cfg, [0.0])
    assert coarse.within(3.0)[0] and fine.within(3.0)[0]
    combined = math.hypot(coarse.stderr[0], fine.stderr[0])
    assert abs(coarse.simulated[0] - fine.simulated[0]) <= 3 * combined
