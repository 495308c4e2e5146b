"""Photon-number distribution of the reduced field state and its Shannon entropy."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from .dynamics import TimeSeries, _check_mass, _occupied, to_gamma_t
from .errors import TruncationError
from .model import ModelParams, PhotonWeights, _check_branch
from .numerics import chunked_map
from .spectrum import spectral_block

MASS_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FieldDiagonal:
    """weights[m, k] = <m|rho_f(tau_k)|m> for m = 0..n_report."""

    taus: np.ndarray
    weights: np.ndarray
    branch: str
    meta: dict = field(default_factory=dict)

    @property
    def n_report(self) -> int:
        return self.weights.shape[0] - 1

    def mean_photons(self) -> np.ndarray:
        m = np.arange(self.weights.shape[0], dtype=float)
        return (m[:, None] * self.weights).sum(axis=0)


@dataclass(frozen=True)
class EntropySeries(TimeSeries):
    """Shannon entropy S(tau) with the baseline-subtracted companion S(tau) - S(0)."""

    delta: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        d = np.array(self.values if self.delta is None else self.delta, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "delta", d)


def _block_diagonal(N: int, z: int, branch: str, beta: float, gt: np.ndarray, parity: bool):
    """Populations |sum_j A_z^j A_m^j exp(i q_j gamma t)|^2 over photons m of the block reached from z.

    With ``parity`` (resonance only) the real or imaginary part vanishes identically
    according to the parity of z + m, so only the surviving part is accumulated.
    """
    blk = spectral_block(N, z, branch, beta)
    photons = blk.index.photons
    W = blk.A * blk.row(z)[None, :]
    dim = blk.index.dim
    re = np.zeros((dim, gt.size))
    im = np.zeros((dim, gt.size))
    even = ((photons + z) % 2 == 0)[:, None]
    for j in range(dim):
        ph = blk.q[j] * gt
        re += W[:, j:j + 1] * np.cos(ph)
        im += W[:, j:j + 1] * np.sin(ph)
    if parity:
        pop = np.where(even, re * re, im * im)
    else:
        pop = re * re + im * im
    return photons, pop


def field_diagonal(params: ModelParams, weights: PhotonWeights, taus, branch: str = "down", *,
                   parity_split: bool | None = None, threads: int = 1) -> FieldDiagonal:
    """Diagonal of the field density matrix after tracing out the molecules.

    Absorption (``down``) can only lower the photon number, emission (``up``) raises
    it by at most N, so the report window is n_max or n_max + N.
    """
    _check_branch(branch)
    _check_mass(weights)
    if parity_split is None:
        parity_split = params.resonant
    if parity_split and not params.resonant:
        raise ValueError("the parity shortcut holds only at resonance")
    N = params.N
    n_report = weights.n_max + (N if branch == "up" else 0)
    gt = to_gamma_t(taus, N, branch, weights.mean, params.Delta, params.gamma)
    occ = _occupied(weights)

    initial = np.zeros(n_report + 1)
    initial[:weights.n_max + 1] = weights.weights

    def chunk(g):
        out = np.zeros((n_report + 1, g.size))
        for z, p in occ:
            photons, pop = _block_diagonal(N, z, branch, params.beta_rel, g, parity_split)
            out[photons] += p * pop
        # at t = 0 the evolution is the identity; use the initial weights exactly
        out[:, g == 0] = initial[:, None]
        return out

    diag = chunked_map(chunk, gt, threads)
    mass = diag.sum(axis=0)
    if mass.size and mass.min() < 1.0 - MASS_TOLERANCE:
        raise TruncationError("reported photon distribution lost probability", min_mass=float(mass.min()))
    diag.setflags(write=False)
    taus = np.asarray(taus, dtype=float)
    return FieldDiagonal(taus, diag, branch, {"N": N, "Delta": params.Delta, "distribution": weights.describe(),
                                              "parity_split": parity_split, "n_report": n_report})


def entropy_of(p) -> np.ndarray:
    """-sum p ln p along the first axis, with 0 ln 0 = 0."""
    return entr(np.clip(np.asarray(p, dtype=float), 0.0, None)).sum(axis=0)


def shannon_entropy(diag: FieldDiagonal, initial: PhotonWeights | None = None) -> EntropySeries:
    """Entropy of the photon-number distribution; ``delta`` is measured from the tau = 0 value.

    The baseline is the tau = 0 sample when the grid starts there (so delta is exactly
    zero at tau = 0), otherwise the entropy of ``initial``.
    """
    S = entropy_of(diag.weights)
    if diag.taus.size and diag.taus[0] == 0:
        S0 = float(S[0])
    elif initial is not None:
        S0 = float(entropy_of(initial.weights))
    else:
        raise ValueError("need the initial weights or a grid starting at tau = 0 for the baseline")
    return EntropySeries(diag.taus, S, diag.branch, {**diag.meta, "observable": "entropy", "S0": S0},
                         delta=S - S0)
