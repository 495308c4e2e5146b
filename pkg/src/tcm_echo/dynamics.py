"""Exact field observables S1 (all molecules up) and S4 (all molecules down).

S1 is the photon number gained and S4 the photon number lost, averaged over
the initial photon distribution. Both are sums of Sin^2(dq * gamma t / 2)
terms over pairs of eigenvalues of each conserved block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, ParameterDomainError, TruncationError
from .model import ModelParams, PhotonWeights, _check_branch
from .numerics import chunked_map, neumaier_sum
from .spectrum import spectral_block


@dataclass(frozen=True)
class TimeSeries:
    taus: np.ndarray
    values: np.ndarray
    branch: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("taus", "values"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def _check_mass(weights: PhotonWeights) -> None:
    missing = 1.0 - weights.mass
    if missing > weights.tolerance:
        raise TruncationError("initial distribution is missing too much probability", missing=missing)


def tau_R(N: int, branch: str, nbar: float, Delta: float = 0.0, gamma: float = 1.0) -> float:
    if _check_branch(branch) == "up":
        return 2.0 * math.pi * math.sqrt(nbar + 1.0 + Delta) / gamma
    return 4.0 * math.pi * math.sqrt(N + Delta) / gamma


def to_gamma_t(taus, N: int, branch: str, nbar: float, Delta: float = 0.0, gamma: float = 1.0,
               absolute: bool = False) -> np.ndarray:
    """gamma*t for normalized times (or for absolute times when ``absolute``)."""
    taus = np.asarray(taus, dtype=float)
    if absolute:
        return gamma * taus
    return taus * gamma * tau_R(N, branch, nbar, Delta, gamma)


def _meta(params_or_N, weights, solver, branch, time_scale, Delta, extra=None) -> dict:
    is_params = isinstance(params_or_N, ModelParams)
    N = params_or_N.N if is_params else int(params_or_N)
    m = {"N": N, "Delta": Delta, "gamma": params_or_N.gamma if is_params else 1.0, "nbar": weights.mean,
         "distribution": weights.describe(), "solver": solver, "branch": branch, "time_scale": time_scale}
    if extra:
        m.update(extra)
    return m


# ---------------------------------------------------------------------------
# pair-sum representation

@dataclass(frozen=True)
class PairTerms:
    """Coefficients c_k and frequencies w_k of sum_k c_k Sin^2(w_k gamma t / 2) for one block."""

    coef: np.ndarray
    freq: np.ndarray


def _block_pair_terms(N: int, n: int, branch: str, beta: float) -> PairTerms:
    blk = spectral_block(N, n, branch, beta)
    A, q = blk.A, blk.q
    photons = blk.index.photons
    src = blk.row(n)
    # photons gained (up) or lost (down) relative to the initial photon number
    moved = (photons - n) if branch == "up" else (n - photons)
    M = (A * moved[:, None]).T @ A        # sum_p p A_p^j A_p^j'
    iu = np.triu_indices(blk.index.dim, 1)
    coef = -4.0 * src[iu[0]] * src[iu[1]] * M[iu]
    return PairTerms(coef, q[iu[0]] - q[iu[1]])


def _pair_eval(terms: PairTerms, gt: np.ndarray) -> np.ndarray:
    out = np.zeros_like(gt)
    for c, w in zip(terms.coef, terms.freq):
        out += c * np.sin(0.5 * w * gt) ** 2
    return out


def _occupied(weights: PhotonWeights, start: int = 0):
    return [(n, float(p)) for n, p in enumerate(weights.weights) if p > 0 and n >= start]


def _pair_series(N, branch, beta, weights, gt, threads) -> np.ndarray:
    start = 1 if branch == "down" else 0
    items = [(p, _block_pair_terms(N, n, branch, beta)) for n, p in _occupied(weights, start)]

    def chunk(g):
        return neumaier_sum((p * _pair_eval(t, g) for p, t in items), g.shape)
    return chunked_map(chunk, gt, threads)


def s4_exact(params: ModelParams, weights: PhotonWeights, taus, *, absolute: bool = False,
             threads: int = 1) -> TimeSeries:
    """Photons absorbed by N molecules starting in the ground state (pairwise Sin^2 form)."""
    _check_mass(weights)
    gt = to_gamma_t(taus, params.N, "down", weights.mean, params.Delta, params.gamma, absolute)
    vals = _pair_series(params.N, "down", params.beta_rel, weights, gt, threads)
    return TimeSeries(taus, vals, "down", _meta(params, weights, "exact", "down", "absolute" if absolute else "down",
                                                params.Delta))


def s1_exact(params: ModelParams, weights: PhotonWeights, taus, *, absolute: bool = False,
             threads: int = 1) -> TimeSeries:
    """Photons emitted by N molecules starting fully excited (pairwise Sin^2 form)."""
    _check_mass(weights)
    gt = to_gamma_t(taus, params.N, "up", weights.mean, params.Delta, params.gamma, absolute)
    vals = _pair_series(params.N, "up", params.beta_rel, weights, gt, threads)
    return TimeSeries(taus, vals, "up", _meta(params, weights, "exact", "up", "absolute" if absolute else "up",
                                              params.Delta))


def transition_amplitudes(N: int, n: int, branch: str, beta: float, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts of sum_j A_n^j A_m^j exp(i q_j gamma t) for every photon m of the block.

    Returns arrays of shape (dim, len(gt)); row k belongs to photon alpha + k.
    """
    blk = spectral_block(N, n, branch, beta)
    src = blk.row(n)
    W = blk.A * src[None, :]
    re = np.zeros((blk.index.dim, gt.size))
    im = np.zeros((blk.index.dim, gt.size))
    for j in range(blk.index.dim):
        ph = blk.q[j] * gt
        c, s = np.cos(ph), np.sin(ph)
        re += W[:, j:j + 1] * c
        im += W[:, j:j + 1] * s
    return re, im


def s4_alternate(params: ModelParams, weights: PhotonWeights, taus, *, absolute: bool = False,
                 threads: int = 1) -> TimeSeries:
    """Photons absorbed, evaluated as sum_p p |sum_j A A exp(i q gamma t)|^2."""
    _check_mass(weights)
    gt = to_gamma_t(taus, params.N, "down", weights.mean, params.Delta, params.gamma, absolute)
    occ = _occupied(weights, 1)

    def chunk(g):
        def term(n, p):
            re, im = transition_amplitudes(params.N, n, "down", params.beta_rel, g)
            lost = (n - spectral_block(params.N, n, "down", params.beta_rel).index.photons).astype(float)
            return p * (lost[:, None] * (re * re + im * im)).sum(axis=0)
        return neumaier_sum((term(n, p) for n, p in occ), g.shape)

    vals = chunked_map(chunk, gt, threads)
    # orthonormality makes t = 0 exact in theory; avoid the rounding residue
    vals[gt == 0] = 0.0
    return TimeSeries(taus, vals, "down", _meta(params, weights, "alternate", "down",
                                                "absolute" if absolute else "down", params.Delta))


# ---------------------------------------------------------------------------
# closed forms for a few molecules

def _closed_terms_up(N: int, n: int, Delta: float) -> list[tuple[float, float]]:
    """(amplitude, frequency) pairs: S1 contribution = sum amp * Sin^2(freq * gamma t)."""
    if N == 1:
        return [((n + 1.0) / (n + 1.0 + Delta), math.sqrt(n + 1.0 + Delta))]
    if N == 2:
        d = (2 * n + 3.0) ** 2
        w = math.sqrt(n + 1.5)
        return [(8.0 * (n + 1) * (n + 2) / d, w), (-(n + 1.0) / d, 2.0 * w)]
    if N == 3:
        s = math.sqrt(73.0 + 16 * n * (4 + n))
        a, b = math.sqrt(10.0 + 5 * n + s), math.sqrt(10.0 + 5 * n - s)
        D = 73.0 + 16 * n * (4 + n)
        rt = math.sqrt((1.0 + n) * (3 + n))
        z1 = 3 * (2 + n) * (1 + n + rt) / D
        z2 = 3 * (1 + n) * (2 + n) * (8 + 4 * n + s) / (2 * D * (-7 - 2 * n + s))
        z3 = 3 * (2 + n) * (-1 - n + rt) / D
        z4 = 3 * (1 + n) * (2 + n) * (-8 - 4 * n + s) / (2 * D * (7 + 2 * n + s))
        return [(4 * z1, (a - b) / 2), (4 * z2, b), (-4 * z3, (a + b) / 2), (4 * z4, a)]
    if N == 4:
        R = math.sqrt(33.0 + 4 * n * (5 + n))
        S = math.sqrt(82.0 + 16 * n * (5 + n))
        a = math.sqrt(25.0 + 10 * n + 3 * R)
        b = math.sqrt(25.0 + 10 * n - 3 * R)
        f = (1.0 + n) * (2 + n) * (3 + n)
        d1 = (33.0 + 4 * n * (5 + n)) * (41 + 8 * n * (5 + n))
        d2 = 561 - 87 * R + n * (505 - 45 * R + 2 * n * (84 + 10 * n - 3 * R))
        d3 = 561 + 87 * R + n * (505 + 20 * n * n + 45 * R + 6 * n * (28 + R))
        e = 41.0 + 8 * n * (5 + n)
        z1 = f * (10 + 4 * n + S) / d1
        z2 = 12 * f * (4 + n) * (1 + 2 * n + R) / (e * d2)
        z3 = 12 * (-1 - 2 * n + R) * f * (4 + n) / (e * d3)
        z4 = 3 * f * (9 + R + n * (7 + 2 * n + R)) / d2 ** 2
        z5 = f * (-10 - 4 * n + S) / d1
        z6 = 3 * f * (-9 + R + n * (-7 - 2 * n + R)) / d3 ** 2
        return [(4 * z1, (a - b) / 2), (4 * z2, b / 2), (-4 * z3, a / 2), (-4 * z4, b),
                (-4 * z5, (a + b) / 2), (4 * z6, a)]
    raise CapabilityError("closed forms exist only for N = 1..4 (emission)", N=N)


def _closed_terms_down(N: int, n: int, Delta: float) -> list[tuple[float, float]]:
    if n < 1:
        return []
    if N == 1:
        return [(n / (n + Delta), math.sqrt(n + Delta))]
    if N == 2:
        if n == 1:
            return [(1.0, math.sqrt(2.0))]
        d = (2 * n - 1.0) ** 2
        w = math.sqrt(n - 0.5)
        return [(8.0 * n * (n - 1) / d, w), (n / d, 2.0 * w)]
    raise CapabilityError("closed forms exist only for N = 1, 2 (absorption)", N=N)


def _closed_series(terms_fn, N, weights, gt, Delta) -> np.ndarray:
    parts = []
    for n, p in _occupied(weights):
        for amp, w in terms_fn(N, n, Delta):
            parts.append(p * amp * np.sin(w * gt) ** 2)
    return neumaier_sum(parts, gt.shape)


def s1_closed_form(N: int, weights: PhotonWeights, taus, Delta: float = 0.0, *, gamma: float = 1.0,
                   absolute: bool = False) -> TimeSeries:
    """Closed-form S1 for one to four excited molecules (N > 1 only at resonance)."""
    if N not in (1, 2, 3, 4):
        raise CapabilityError("closed forms exist only for N = 1..4 (emission)", N=N)
    if N > 1 and Delta != 0:
        raise CapabilityError("closed forms for N > 1 require resonance", N=N, Delta=Delta)
    if Delta < 0:
        raise ParameterDomainError("Delta must be non-negative", Delta=Delta)
    gt = to_gamma_t(taus, N, "up", weights.mean, Delta, gamma, absolute)
    vals = _closed_series(_closed_terms_up, N, weights, gt, Delta)
    return TimeSeries(taus, vals, "up", _meta(N, weights, "closed", "up", "absolute" if absolute else "up", Delta,
                                                 {"gamma": gamma}))


def s4_closed_form(N: int, weights: PhotonWeights, taus, Delta: float = 0.0, *, gamma: float = 1.0,
                   absolute: bool = False, time_scale: str = "down") -> TimeSeries:
    """Closed-form S4 for one or two molecules in the ground state (N = 2 only at resonance).

    ``time_scale`` picks which revival period normalizes tau; "up" reproduces the
    convention sqrt(nbar + 1 + Delta) used for the small-N formulas.
    """
    if N not in (1, 2):
        raise CapabilityError("closed forms exist only for N = 1, 2 (absorption)", N=N)
    if N == 2 and Delta != 0:
        raise CapabilityError("closed form for N = 2 requires resonance", Delta=Delta)
    gt = to_gamma_t(taus, N, time_scale, weights.mean, Delta, gamma, absolute)
    vals = _closed_series(_closed_terms_down, N, weights, gt, Delta)
    return TimeSeries(taus, vals, "down", _meta(N, weights, "closed", "down",
                                                "absolute" if absolute else time_scale, Delta, {"gamma": gamma}))


def field_intensity(series: TimeSeries, weights: PhotonWeights, params: ModelParams) -> TimeSeries:
    """<E- E+> = mu_scale * (nbar + S1) for emission, mu_scale * (nbar - S4) for absorption."""
    sign = 1.0 if series.branch == "up" else -1.0
    vals = params.mu_scale * (weights.mean + sign * series.values)
    return TimeSeries(series.taus, vals, series.branch, {**series.meta, "observable": "intensity"})
