"""Characteristic times measured from computed series.

Revival centres, Rabi period, collapse width and the long-time super-revival are
extracted from the series themselves; nothing here predicts them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.optimize import curve_fit
from scipy.signal import argrelextrema, find_peaks

from .approx import refined_absorption_terms
from .dynamics import TimeSeries, _block_pair_terms, _check_mass, _occupied, tau_R, to_gamma_t
from .errors import FitError, ResolutionError, ScanError
from .model import ModelParams, PhotonWeights

MIN_SAMPLES_PER_REVIVAL = 20
MERGE_FRACTION = 0.3


@dataclass(frozen=True)
class CollapseFit:
    sigma_tau: float | None
    sigma_abs: float | None
    amplitude: float
    offset: float
    residual: float


@dataclass(frozen=True)
class SuperRevival:
    center: float
    peak: float
    symmetry: float
    heights: np.ndarray = field(repr=False)
    revivals: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"center": self.center, "peak": self.peak, "symmetry": self.symmetry}


@dataclass(frozen=True)
class RevivalReport:
    """Revival bursts of a series in tau units; ``centers`` excludes the initial burst at tau = 0."""

    centers: np.ndarray
    peaks: np.ndarray
    widths: np.ndarray
    floor: float
    initial_peak: float | None
    merge_tau: float | None
    collapse: CollapseFit | None = None
    rabi_period: float | None = None
    super_revival: SuperRevival | None = None

    def __post_init__(self):
        if np.any(np.diff(self.centers) <= 0):
            raise ValueError("revival centers must be strictly increasing")

    @property
    def resolved_count(self) -> int:
        """Number of revivals before the first merged gap."""
        if self.merge_tau is None:
            return int(self.centers.size)
        return int(np.count_nonzero(self.centers < self.merge_tau))

    def with_measurements(self, **kw) -> "RevivalReport":
        return RevivalReport(**{**{f: getattr(self, f) for f in self.__dataclass_fields__}, **kw})

    def to_dict(self) -> dict:
        return {
            "centers": [float(c) for c in self.centers],
            "peaks": [float(p) for p in self.peaks],
            "widths": [float(w) for w in self.widths],
            "floor": self.floor,
            "initial_peak": self.initial_peak,
            "merge_tau": self.merge_tau,
            "resolved_count": self.resolved_count,
            "collapse_width": asdict(self.collapse) if self.collapse else None,
            "rabi_period": self.rabi_period,
            "super_revival": self.super_revival.to_dict() if self.super_revival else None,
        }


def _uniform_step(taus: np.ndarray) -> float:
    if taus.size < 3:
        raise ResolutionError("series is too short", samples=int(taus.size))
    d = np.diff(taus)
    step = float(np.median(d))
    if step <= 0 or np.max(np.abs(d - step)) > 1e-6 * max(step, 1.0):
        raise ResolutionError("analysis needs a uniform, increasing grid")
    return step


def oscillation_envelope(values: np.ndarray, half_width: int) -> np.ndarray:
    """Peak-to-peak range of the fast oscillation: moving max minus moving min."""
    size = 2 * half_width + 1
    return maximum_filter1d(values, size, mode="nearest") - minimum_filter1d(values, size, mode="nearest")


def detect_revivals(series: TimeSeries, window: float = 0.05, *, period: float = 1.0, threshold: float = 3.0,
                    min_fraction: float = 0.05, merge_fraction: float = MERGE_FRACTION) -> RevivalReport:
    """Locate revival bursts in a series sampled on a uniform tau grid.

    The envelope is the moving peak-to-peak range over ``window`` (a twentieth of the
    revival period by default). Bursts are envelope maxima at least 3/4 of ``period``
    apart that exceed ``threshold`` times the inter-revival floor (the median of the
    envelope minima between candidates) and ``min_fraction`` of the largest candidate.
    Each centre is the centroid of the envelope above that level, not the maximum.
    Revivals merge once the envelope minimum in a gap exceeds ``merge_fraction`` of
    the larger neighbouring peak.
    """
    taus, vals = series.taus, series.values
    step = _uniform_step(taus)
    if period / step < MIN_SAMPLES_PER_REVIVAL:
        raise ResolutionError("grid does not resolve the revivals", samples_per_revival=period / step)
    half = int(round(0.5 * window / step))
    if half < 1:
        raise ResolutionError("envelope window is narrower than the grid step", window=window, step=step)
    env = oscillation_envelope(vals, half)

    cand, _ = find_peaks(env, distance=max(1, int(0.75 * period / step)))
    starts_at_zero = abs(taus[0]) < 0.5 * step
    if starts_at_zero:
        # an initial burst peaks well inside the first quarter period; a maximum on the
        # edge of that span is the rising flank of the first revival instead
        span = max(2, int(0.25 * period / step))
        first = int(np.argmax(env[:span]))
        if first < span - 1:
            cand = np.concatenate([[first], cand[cand > first + int(0.75 * period / step)]])
        else:
            starts_at_zero = False
    if cand.size == 0:
        return RevivalReport(np.array([]), np.array([]), np.array([]), 0.0, None, None)

    gaps = [a + int(np.argmin(env[a:b + 1])) for a, b in zip(cand[:-1], cand[1:])]
    floor = float(np.median(env[gaps])) if gaps else float(env.min())
    level = max(threshold * floor, min_fraction * float(env[cand].max()))
    keep = cand[env[cand] > level]
    initial = None
    if starts_at_zero and keep.size and keep[0] == cand[0]:
        initial = float(env[keep[0]])

    bounds = [0] + [a + int(np.argmin(env[a:b + 1])) for a, b in zip(keep[:-1], keep[1:])] + [env.size - 1]
    centers, peaks, widths = [], [], []
    merge_tau = None
    for k, i in enumerate(keep):
        lo, hi = bounds[k], bounds[k + 1]
        if k > 0 and merge_tau is None:
            if env[lo] > merge_fraction * max(env[keep[k - 1]], env[i]):
                merge_tau = float(taus[lo])
        if initial is not None and k == 0:
            continue
        w = np.clip(env[lo:hi + 1] - level, 0.0, None)
        t = taus[lo:hi + 1]
        c = float((w * t).sum() / w.sum())
        centers.append(c)
        peaks.append(float(env[i]))
        widths.append(float(math.sqrt(max((w * (t - c) ** 2).sum() / w.sum(), step * step))))
    return RevivalReport(np.array(centers), np.array(peaks), np.array(widths), floor, initial, merge_tau)


def _tau_scale(series: TimeSeries) -> float:
    """Absolute time per unit of the series' time axis."""
    m = series.meta
    if m.get("time_scale", "absolute") == "absolute":
        return 1.0
    return tau_R(m["N"], m["time_scale"], m["nbar"], m.get("Delta", 0.0), m.get("gamma", 1.0))


def _parabola_vertex(y0: float, y1: float, y2: float) -> float:
    den = y0 - 2.0 * y1 + y2
    return 0.0 if den == 0 else 0.5 * (y0 - y2) / den


def rabi_period(series: TimeSeries, zero_index: int = 2, depth: float = 0.1) -> float:
    """Absolute time from 0 out to the ``zero_index``-th zero of the signal.

    Zeros are local minima below ``depth`` times the largest value seen before them,
    refined by a parabola through the three nearest samples.
    """
    scale = _tau_scale(series)
    t = series.taus * scale
    v = series.values
    _uniform_step(t)
    mins = argrelextrema(v, np.less_equal, order=1)[0]
    mins = mins[(mins > 0) & (mins < v.size - 1)]
    found = 0
    for i in mins:
        top = float(v[:i].max())
        if top <= 0 or v[i] > depth * top or v[i] == v[i - 1]:
            continue
        found += 1
        if found == zero_index:
            dt = t[1] - t[0]
            return float(t[i] + dt * _parabola_vertex(v[i - 1], v[i], v[i + 1]))
    raise ResolutionError("fewer zeros than requested; refine or extend the early-time grid",
                          found=found, requested=zero_index)


def _extrema_envelope(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    hi = argrelextrema(v, np.greater, order=1)[0]
    lo = argrelextrema(v, np.less, order=1)[0]
    if hi.size < 3 or lo.size < 2:
        raise ResolutionError("fast oscillation is not resolved", maxima=int(hi.size), minima=int(lo.size))
    lo = np.concatenate([[0], lo])
    return np.interp(t, t[hi], v[hi]) - np.interp(t, t[lo], v[lo])


def _gaussian(t, a, s, c):
    return a * np.exp(-(t / s) ** 2) + c


def collapse_width(series: TimeSeries) -> CollapseFit:
    """Gaussian width sigma of the initial envelope decay, a exp(-(t/sigma)^2) + c.

    The envelope is the distance between the interpolated local maxima and minima,
    so the fast oscillation must be resolved. The fit covers three half-widths.
    """
    v = series.values
    t = series.taus
    _uniform_step(t)
    if abs(t[0]) > 1e-12:
        raise ResolutionError("collapse fit needs a grid starting at t = 0")
    env = _extrema_envelope(t, v)
    top = float(env.max())
    below = np.nonzero(env < 0.5 * top)[0]
    if below.size == 0:
        raise ResolutionError("envelope never falls to half its initial value")
    t_half = float(t[below[0]])
    sel = t <= 3.0 * t_half
    if np.count_nonzero(sel) < 10:
        raise ResolutionError("too few samples across the collapse", samples=int(np.count_nonzero(sel)))
    guess = (top, t_half / math.sqrt(math.log(2.0)), float(env[sel][-1]))
    try:
        (a, s, c), _ = curve_fit(_gaussian, t[sel], env[sel], p0=guess, maxfev=10000)
    except (RuntimeError, ValueError) as exc:
        raise FitError("Gaussian fit of the collapse did not converge", reason=str(exc)) from exc
    resid = float(np.sqrt(np.mean((_gaussian(t[sel], a, s, c) - env[sel]) ** 2)))
    if not (np.isfinite(s) and abs(s) > 0):
        raise FitError("degenerate collapse width", sigma=float(s), residual=resid)
    s = abs(float(s))
    scale = _tau_scale(series)
    if series.meta.get("time_scale", "absolute") == "absolute":
        return CollapseFit(None, s, float(a), float(c), resid)
    return CollapseFit(s, s * scale, float(a), float(c), resid)


def _revival_terms(params: ModelParams, weights: PhotonWeights, solver: str):
    if solver == "refined":
        items = refined_absorption_terms(params, weights)
        return (np.concatenate([p * t.coef for p, t in items]), np.concatenate([t.freq for _, t in items]))
    if solver == "exact":
        items = [(p, _block_pair_terms(params.N, n, "down", params.beta_rel)) for n, p in _occupied(weights, 1)]
        c = np.concatenate([p * t.coef for p, t in items])
        f = np.concatenate([t.freq for _, t in items])
        # keep the neighbouring-level band; higher bands carry their own, faster envelopes
        f0 = 2.0 * math.sqrt(params.N + params.Delta)
        band = np.abs(f - f0) < 0.5 * f0
        return c[band], f[band]
    raise ValueError(f"unknown solver {solver!r}")


def revival_heights(params: ModelParams, weights: PhotonWeights, revivals, *, solver: str = "refined",
                    step: float = 0.005) -> np.ndarray:
    """Envelope maximum of the k-th revival, searched over [k - 1/2, k + 1/2).

    The envelope of sum_k c_k Sin^2(w_k gamma t / 2) about its mean is |sum_k c_k exp(i w_k gamma t)|,
    evaluated directly so the fast oscillation never needs to be sampled.
    """
    _check_mass(weights)
    c, f = _revival_terms(params, weights, solver)
    offs = np.arange(-0.5, 0.5, step)
    out = np.empty(len(revivals))
    for idx, k in enumerate(revivals):
        gt = to_gamma_t(k + offs, params.N, "down", weights.mean, params.Delta, params.gamma)
        re = np.zeros(offs.size)
        im = np.zeros(offs.size)
        for ci, fi in zip(c, f):
            re += ci * np.cos(fi * gt)
            im += ci * np.sin(fi * gt)
        env = np.hypot(re, im)
        i = int(np.argmax(env))
        if 0 < i < env.size - 1:
            d = _parabola_vertex(env[i - 1], env[i], env[i + 1])
            out[idx] = env[i] - 0.25 * (env[i - 1] - env[i + 1]) * d
        else:
            out[idx] = env[i]
    return out


def super_revival_scan(params: ModelParams, weights: PhotonWeights, window: tuple[float, float], *,
                       solver: str = "refined", symmetry_span: int = 10) -> SuperRevival:
    """Revival at which the full primary revival height is best restored inside ``window``.

    Every integer revival k in the window is scored by its envelope height. The centre is
    the best k refined by a parabola through its neighbours. The symmetry score is the
    Pearson correlation of the heights at c + i and c - i for i = 1..``symmetry_span``.
    """
    lo, hi = math.ceil(window[0]), math.floor(window[1])
    if hi - lo < 4:
        raise ScanError("scan window must contain at least five revivals", window=list(window))
    ks = np.arange(lo, hi + 1)
    H = revival_heights(params, weights, ks, solver=solver)
    i = int(np.argmax(H))
    if i == 0 or i == ks.size - 1:
        raise ScanError("largest revival lies on the window edge; widen the window",
                        window=list(window), at=int(ks[i]))
    center = float(ks[i] + _parabola_vertex(H[i - 1], H[i], H[i + 1]))
    span = min(symmetry_span, i, ks.size - 1 - i)
    if span < 2:
        symmetry = float("nan")
    else:
        right = H[i + 1:i + 1 + span]
        left = H[i - span:i][::-1]
        symmetry = float(np.corrcoef(left, right)[0, 1])
    H.setflags(write=False)
    return SuperRevival(center, float(H[i]), symmetry, H, ks)
