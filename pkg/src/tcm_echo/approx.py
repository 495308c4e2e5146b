"""Approximate solvers for long-time sweeps.

* Average field approximation (AFA): few excited molecules, many photons.
* Modified two-level approximation (MTA): many ground-state molecules, few photons.
* Refined variants keep the exact block eigenvalues but replace the eigenvector
  products by binomial weights, keeping only neighbouring pairs j, j+1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import PairTerms, TimeSeries, _check_mass, _meta, _occupied, _pair_eval, to_gamma_t
from .errors import CapabilityError
from .hypergeom import hyp2f1_terminating
from .model import ModelParams, PhotonWeights
from .numerics import chunked_map, neumaier_sum
from .spectrum import spectral_block


@dataclass(frozen=True)
class AfaCoefficients:
    a1: float
    a2: float
    b1: float
    b2: float


@dataclass(frozen=True)
class MtaCoefficients:
    d1: float
    d2: float
    e1: float
    e2: float
    N0: float
    N1: float


def afa_coefficients(beta_over_sqrt_n0: float) -> AfaCoefficients:
    """Single-molecule dressed-state mixing coefficients for relative detuning beta/sqrt(n0)."""
    bb = float(beta_over_sqrt_n0)
    s = math.sqrt(4.0 + bb * bb)
    lo = 0.5 * bb - 0.5 * s
    hi = 0.5 * bb + 0.5 * s
    na = 1.0 / math.sqrt(1.0 + lo * lo)
    nb = 1.0 / math.sqrt(1.0 + hi * hi)
    return AfaCoefficients(na, -lo * na, nb, hi * nb)


def mta_coefficients(N: int, Delta: float, beta: float | None = None) -> MtaCoefficients:
    """One-photon dressed states of N ground-state molecules.

    With ``beta=None`` the ratio d2/d1 = (sqrt(Delta) + sqrt(Delta+N))/sqrt(N) is used,
    which corresponds to the field tuned below the molecules (beta = -2 sqrt(Delta)).
    Passing the signed beta gives the ratios of the exact one-photon eigenvectors.
    Both pairs are normalized directly.
    """
    if N < 1 or Delta < 0:
        raise ValueError("need N >= 1 and Delta >= 0")
    root = math.sqrt(Delta + N)
    half = -math.sqrt(Delta) if beta is None else 0.5 * beta
    rd = (root - half) / math.sqrt(N)
    re_ = (root + half) / math.sqrt(N)
    d1 = 1.0 / math.sqrt(1.0 + rd * rd)
    e1 = 1.0 / math.sqrt(1.0 + re_ * re_)
    return MtaCoefficients(d1, rd * d1, e1, re_ * e1, d1, e1)


def _root_factorial_ratio(a: int, b: int, c: int, d: int) -> float:
    """sqrt(a! b! / (c! d!)) without forming the factorials."""
    lg = math.lgamma
    return math.exp(0.5 * (lg(a + 1) + lg(b + 1) - lg(c + 1) - lg(d + 1)))


def _afa_lower(p: int, N: int, j: int, c: AfaCoefficients) -> float:
    f = math.factorial
    x = -c.b2 * c.a1 / (c.b1 * c.a2)
    return (c.b1 ** j * c.a1 ** (N - j) * (c.a2 / c.a1) ** p * _root_factorial_ratio(N - j, N - p, p, j)
            * hyp2f1_terminating(-j, -p, N + 1 - p - j, x) / f(N - j - p))


def _afa_upper(p: int, N: int, j: int, c: AfaCoefficients) -> float:
    f = math.factorial
    x = -c.b2 * c.a1 / (c.b1 * c.a2)
    return (c.b1 ** j * c.a1 ** (N - j) * (c.b2 / c.b1) ** p * (c.a1 * c.b2 / (c.a2 * c.b1)) ** (j - N)
            * (-1) ** (p + j - N) * _root_factorial_ratio(p, j, N - p, N - j)
            * hyp2f1_terminating(j - N, p - N, 1 + p + j - N, x) / f(j + p - N))


def approx_eigvec_afa(p: int, N: int, j: int, coeffs: AfaCoefficients) -> float:
    """Approximate component on photon n+p of eigenvector j of an emission block (n large).

    Two finite hypergeometric forms, for N >= j+p and N < j+p; the second mirrors the
    absorption-side form with (d, e) -> (a, b), which keeps it consistent with exact
    eigenvectors at any detuning and continuous across N = j+p.
    """
    if N >= j + p:
        return _afa_lower(p, N, j, coeffs)
    return _afa_upper(p, N, j, coeffs)


def approx_eigvec_mta(L: int, n: int, j: int, coeffs: MtaCoefficients) -> float:
    """Approximate component on photon L of eigenvector j of the absorption block reached from n photons."""
    d1, d2, e1, e2 = coeffs.d1, coeffs.d2, coeffs.e1, coeffs.e2
    x = -d1 * e2 / (d2 * e1)
    f = math.factorial
    lead = e1 ** j * d1 ** (n - j)
    if L <= n - j:
        return (lead * (d2 / d1) ** L * _root_factorial_ratio(n - j, n - L, j, L)
                * hyp2f1_terminating(-L, -j, n - j - L + 1, x) / f(n - j - L))
    return (lead * (e2 / e1) ** L * (d1 * e2 / (d2 * e1)) ** (j - n) * (-1) ** (j - n + L)
            * _root_factorial_ratio(L, j, n - j, n - L)
            * hyp2f1_terminating(j - n, L - n, j + L - n + 1, x) / f(j + L - n))


def _series(terms, gt, threads):
    def chunk(g):
        return neumaier_sum((p * _pair_eval(t, g) for p, t in terms), g.shape)
    return chunked_map(chunk, gt, threads)


def _single_freq(amp: float, w: float) -> PairTerms:
    # Sin^2(w gamma t) written as a pair term with frequency 2w
    return PairTerms(np.array([amp]), np.array([2.0 * w]))


def s1_afa(params: ModelParams, weights: PhotonWeights, taus, *, threads: int = 1) -> TimeSeries:
    """N times the single-molecule emission signal with n0 = n + 1 per photon number."""
    _check_mass(weights)
    if weights.mean < 10 * params.N:
        warnings.warn("average field approximation expects nbar >> N", RuntimeWarning)
    D = params.Delta
    terms = []
    for n, p in _occupied(weights):
        n0 = n + 1.0
        terms.append((p, _single_freq(params.N * n0 / (n0 + D), math.sqrt(n0 + D))))
    gt = to_gamma_t(taus, params.N, "up", weights.mean, D, params.gamma)
    return TimeSeries(taus, _series(terms, gt, threads), "up", _meta(params, weights, "afa", "up", "up", D))


def _binomial_weights(m: int, prob: float) -> np.ndarray:
    j = np.arange(m + 1)
    lg = math.lgamma
    logc = np.array([lg(m + 1) - lg(k + 1) - lg(m - k + 1) for k in j])
    with np.errstate(divide="ignore"):
        w = np.exp(logc + j * np.log(prob) + (m - j) * np.log1p(-prob)) if 0 < prob < 1 else None
    if w is None:
        w = np.zeros(m + 1)
        w[0 if prob <= 0 else m] = 1.0
    return w


def s1_refined(params: ModelParams, weights: PhotonWeights, taus, *, experimental: bool = False,
               threads: int = 1) -> TimeSeries:
    """Emission signal from exact neighbouring-level frequencies with binomial weights.

    Resonance only, unless ``experimental`` enables a detuned variant whose weights use the
    dressed-state populations b1^2 and the amplitude n0/(n0 + Delta).
    """
    _check_mass(weights)
    if not params.resonant and not experimental:
        raise CapabilityError("refined emission solver is defined at resonance only", Delta=params.Delta)
    N, D = params.N, params.Delta
    terms = []
    for n, p in _occupied(weights):
        blk = spectral_block(N, n, "up", params.beta_rel)
        dq = blk.q[:-1] - blk.q[1:]
        if params.resonant:
            w, amp = _binomial_weights(N - 1, 0.5), 1.0
        else:
            n0 = n + 1.0
            c = afa_coefficients(params.beta_rel / math.sqrt(n0))
            w, amp = _binomial_weights(N - 1, c.b1 ** 2), n0 / (n0 + D)
        terms.append((p, PairTerms(N * amp * w, dq)))
    gt = to_gamma_t(taus, N, "up", weights.mean, D, params.gamma)
    solver = "refined" if params.resonant else "refined-experimental"
    return TimeSeries(taus, _series(terms, gt, threads), "up", _meta(params, weights, solver, "up", "up", D))


def s4_mta(params: ModelParams, weights: PhotonWeights, taus, *, corrected: bool = False,
           threads: int = 1) -> TimeSeries:
    """Absorption with equally spaced approximate levels.

    ``corrected`` replaces N by N - n/2 per photon number, both in the amplitude and the frequency.
    """
    _check_mass(weights)
    N, D = params.N, params.Delta
    if weights.n_max >= N:
        warnings.warn("modified two-level approximation expects N > n_max", RuntimeWarning)
    terms = []
    for n, p in _occupied(weights, 1):
        Ne = N - n / 2.0 if corrected else float(N)
        terms.append((p, _single_freq(n * Ne / (Ne + D), math.sqrt(Ne + D))))
    gt = to_gamma_t(taus, N, "down", weights.mean, D, params.gamma)
    return TimeSeries(taus, _series(terms, gt, threads), "down",
                      _meta(params, weights, "mta-corrected" if corrected else "mta", "down", "down", D))


def refined_absorption_terms(params: ModelParams, weights: PhotonWeights) -> list[tuple[float, PairTerms]]:
    """Per photon number: (p_n, neighbouring-pair amplitudes and exact frequencies)."""
    N, D = params.N, params.Delta
    if not params.resonant:
        c = mta_coefficients(N, D, params.beta_rel)
        prob = c.e2 ** 2 / (c.e2 ** 2 + c.d2 ** 2)
    else:
        prob = 0.5
    out = []
    for n, p in _occupied(weights, 1):
        blk = spectral_block(N, n, "down", params.beta_rel)
        dq = blk.q[:-1] - blk.q[1:]
        m = min(N, n)
        w = _binomial_weights(n - 1, prob)[:m]
        amp = n * (2.0 * N - n + 1) / (2.0 * N + 2 * D - n + 1)
        out.append((p, PairTerms(amp * w, dq)))
    return out


def s4_refined(params: ModelParams, weights: PhotonWeights, taus, *, threads: int = 1) -> TimeSeries:
    """Absorption from exact neighbouring-level frequencies with binomial weights."""
    _check_mass(weights)
    if weights.n_max >= params.N:
        warnings.warn("refined absorption solver expects N > n_max", RuntimeWarning)
    gt = to_gamma_t(taus, params.N, "down", weights.mean, params.Delta, params.gamma)
    vals = _series(refined_absorption_terms(params, weights), gt, threads)
    return TimeSeries(taus, vals, "down", _meta(params, weights, "refined", "down", "down", params.Delta))
