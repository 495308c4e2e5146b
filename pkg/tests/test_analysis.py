import math

import numpy as np
import pytest

from tcm_echo.analysis import (
    RevivalReport, collapse_width, detect_revivals, oscillation_envelope, rabi_period, revival_heights,
    super_revival_scan,
)
from tcm_echo.dynamics import TimeSeries, s1_exact, s4_exact
from tcm_echo.errors import ResolutionError, ScanError
from tcm_echo.figures import _steps, figure_config
from tcm_echo.model import coherent_weights, make_model
from tcm_echo.runner import compute


def _synthetic(t, values):
    return TimeSeries(t, values, "down", {"time_scale": "absolute"})


def test_three_gaussian_bursts():
    t = np.linspace(0.0, 3.5, 35001)
    env = sum(np.exp(-((t - k) / 0.06) ** 2) for k in (1, 2, 3))
    rep = detect_revivals(_synthetic(t, env * np.sin(400 * np.pi * t) ** 2))
    assert rep.centers.size == 3
    np.testing.assert_allclose(rep.centers, [1, 2, 3], atol=0.01)
    assert rep.initial_peak is None and rep.merge_tau is None
    assert np.all(rep.widths > 0)


def test_centroid_not_maximum_for_skewed_burst():
    t = np.linspace(0.0, 2.0, 20001)
    env = np.where(t < 1, np.exp(-((t - 1) / 0.02) ** 2), np.exp(-((t - 1) / 0.1) ** 2))
    rep = detect_revivals(_synthetic(t, env * np.sin(400 * np.pi * t) ** 2))
    assert rep.centers[0] > 1.02


def test_oscillation_envelope_of_pure_tone():
    t = np.linspace(0.0, 1.0, 1001)
    env = oscillation_envelope(np.sin(40 * np.pi * t) ** 2, 25)
    assert env[100:-100].min() == pytest.approx(1.0, abs=1e-2)


def test_synthetic_collapse_width():
    t = np.linspace(0.0, 3.0, 30001)
    for sigma in (0.4, 0.8):
        fit = collapse_width(_synthetic(t, np.exp(-(t / sigma) ** 2) * np.sin(60 * t) ** 2))
        assert fit.sigma_abs == pytest.approx(sigma, rel=0.05)
        assert fit.sigma_tau is None


@pytest.mark.parametrize("omega", [3.0, 17.0])
def test_synthetic_rabi_period(omega):
    t = np.linspace(0.0, 4 * math.pi / omega, 4001)
    s = _synthetic(t, np.sin(omega * t) ** 2)
    assert rabi_period(s, zero_index=1) == pytest.approx(math.pi / omega, rel=1e-4)
    assert rabi_period(s) == pytest.approx(2 * math.pi / omega, rel=1e-4)


def test_single_molecule_rabi_period():
    t = np.linspace(0.0, 0.5, 5001)
    s = s1_exact(make_model(1), coherent_weights(899.0), t, absolute=True)
    assert rabi_period(s, zero_index=1) == pytest.approx(math.pi / math.sqrt(899), rel=0.02)


def test_single_molecule_collapse_time():
    t = np.linspace(0.0, 0.05, 5001)
    fit = collapse_width(s1_exact(make_model(1), coherent_weights(899.0), t))
    print(f"collapse sigma: {fit.sigma_abs:.4f} (tau {fit.sigma_tau:.5f})")
    assert fit.sigma_abs == pytest.approx(math.sqrt(2), rel=0.05)


def test_single_molecule_echoes_before_merging():
    t = np.linspace(0.0, 20.0, _steps(450, 20.0, 40001))
    rep = detect_revivals(s1_exact(make_model(1), coherent_weights(899.0), t))
    print(f"resolved echoes: {rep.resolved_count}, merge at {rep.merge_tau}")
    assert 13 <= rep.resolved_count <= 15


@pytest.fixture(scope="module")
def first_revivals():
    out = {}
    for N in (100, 400, 900):
        t = np.linspace(0.0, 1.5, _steps(N, 1.5, 3001))
        out[N] = detect_revivals(s4_exact(make_model(N), coherent_weights(10.0), t)).centers[0]
    return out


@pytest.mark.parametrize("N", [100, 400, 900])
def test_first_revival_matches_predicted_period(first_revivals, N):
    print(f"N={N}: measured / predicted = {first_revivals[N]:.4f}")
    assert 0.98 <= first_revivals[N] <= 1.02


def test_mean_field_correction_fits_better(first_revivals):
    for N, measured in first_revivals.items():
        corrected = math.sqrt((N - 10.0 / 2) / N)
        assert abs(measured - corrected) < abs(measured - 1.0)


def test_secondary_revival_onset_ordering():
    onset = {}
    for fig in ("fig4a", "fig4b"):
        _, series = compute(figure_config(fig, 1))
        onset[fig] = detect_revivals(series, merge_fraction=0.1).merge_tau
    print(f"onsets: {onset}")
    assert onset["fig4a"] is not None
    assert onset["fig4b"] is None or onset["fig4b"] > onset["fig4a"]


def test_super_revival_scales_linearly():
    w = coherent_weights(10.0)
    windows = {169: (100, 170), 900: (600, 800), 1600: (1200, 1340)}
    ratio = {N: super_revival_scan(make_model(N), w, win).center / N for N, win in windows.items()}
    print(f"center / N: {ratio}")
    assert max(ratio.values()) / min(ratio.values()) <= 1.10


def test_revival_heights_near_start():
    h = revival_heights(make_model(900), coherent_weights(10.0), [1, 2, 3])
    assert np.all(np.diff(h) < 0)
    assert 0.5 * 10 < h[0] <= 10


def test_resolution_errors():
    w = coherent_weights(10.0)
    coarse = s4_exact(make_model(9), w, np.linspace(0.0, 3.0, 31))
    with pytest.raises(ResolutionError):
        detect_revivals(coarse)
    uneven = TimeSeries(np.array([0.0, 0.1, 0.3, 0.35, 0.9]), np.zeros(5), "down")
    with pytest.raises(ResolutionError):
        detect_revivals(uneven, period=0.01)
    fine = s4_exact(make_model(9), w, np.linspace(0.0, 3.0, 3001))
    with pytest.raises(ResolutionError):
        detect_revivals(fine, window=0.0005)
    with pytest.raises(ResolutionError):
        collapse_width(TimeSeries(np.linspace(0.1, 1, 100), np.zeros(100), "down"))
    with pytest.raises(ResolutionError):
        rabi_period(_synthetic(np.linspace(0, 1, 101), np.sin(np.linspace(0, 1, 101)) ** 2))


def test_scan_errors():
    p, w = make_model(900), coherent_weights(10.0)
    with pytest.raises(ScanError):
        super_revival_scan(p, w, (700, 702))
    with pytest.raises(ScanError):
        super_revival_scan(p, w, (600, 680))


def test_report_invariants_and_schema():
    with pytest.raises(ValueError):
        RevivalReport(np.array([2.0, 1.0]), np.ones(2), np.ones(2), 0.0, None, None)
    t = np.linspace(0.0, 3.5, 35001)
    env = sum(np.exp(-((t - k) / 0.06) ** 2) for k in (0, 1, 2, 3))
    rep = detect_revivals(_synthetic(t, env * np.sin(400 * np.pi * t) ** 2))
    assert rep.initial_peak is not None and rep.centers.size == 3
    d = rep.with_measurements(rabi_period=0.5).to_dict()
    assert {"centers", "widths", "rabi_period", "merge_tau", "super_revival"} <= d.keys()
    assert d["rabi_period"] == 0.5 and d["super_revival"] is None
