"""Physical parameters, time units and initial photon distributions.

Units: hbar = 1. Times are either absolute (units of 1/gamma) or normalized
by the revival period tau_R, whose definition depends on the branch:

* ``up``   (all molecules excited):  tau_R = 2 pi sqrt(nbar + 1 + Delta) / gamma
* ``down`` (all molecules in ground): tau_R = 4 pi sqrt(N + Delta) / gamma
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .errors import ParameterDomainError, TruncationError

BRANCHES = ("up", "down")
TRUNCATION_TOLERANCE = 1e-8


def _check_branch(branch: str) -> str:
    if branch not in BRANCHES:
        raise ParameterDomainError(f"branch must be 'up' or 'down', got {branch!r}")
    return branch


@dataclass(frozen=True)
class ModelParams:
    N: int
    gamma: float
    Omega: float
    omega: float
    kappa: float
    beta_rel: float
    Delta: float
    mu_scale: float = 1.0

    @property
    def resonant(self) -> bool:
        return self.beta_rel == 0.0

    def tau_R(self, branch: str, nbar: float = 0.0) -> float:
        """Revival period in absolute time for the given branch."""
        if _check_branch(branch) == "up":
            return 2.0 * math.pi * math.sqrt(nbar + 1.0 + self.Delta) / self.gamma
        return 4.0 * math.pi * math.sqrt(self.N + self.Delta) / self.gamma

    def gamma_t(self, taus, branch: str, nbar: float = 0.0) -> np.ndarray:
        """Convert normalized times to the dimensionless product gamma*t."""
        return np.asarray(taus, dtype=float) * (self.gamma * self.tau_R(branch, nbar))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("N", "gamma", "Omega", "omega", "kappa", "beta_rel", "Delta", "mu_scale")}


def make_model(N: int, gamma: float = 1.0, Omega: float = 1.0, omega: float = 1.0,
               mu_scale: float = 1.0) -> ModelParams:
    """Build model parameters; resonance when ``omega == Omega``."""
    vals = {"gamma": gamma, "Omega": Omega, "omega": omega}
    for name, v in vals.items():
        if not (math.isfinite(v) and v > 0):
            raise ParameterDomainError(f"{name} must be finite and positive", **{name: v})
    if int(N) != N or N < 1:
        raise ParameterDomainError("N must be a positive integer", N=N)
    kappa = gamma / Omega
    beta = (omega - Omega) / (abs(kappa) * Omega)
    return ModelParams(int(N), float(gamma), float(Omega), float(omega), kappa, beta, beta * beta / 4.0, mu_scale)


def model_with_detuning(N: int, Delta: float = 0.0, gamma: float = 1.0, Omega: float = 1.0,
                        sign: int = 1) -> ModelParams:
    """Model with a prescribed detuning measure Delta = beta^2/4 (omega above Omega by default)."""
    if Delta < 0:
        raise ParameterDomainError("Delta must be non-negative", Delta=Delta)
    beta = sign * 2.0 * math.sqrt(Delta)
    return make_model(N, gamma, Omega, Omega + beta * gamma)


@dataclass(frozen=True)
class PhotonWeights:
    """Diagonal of the initial field density matrix, p_n for n = 0..n_max."""

    weights: np.ndarray
    mean: float
    variance: float
    kind: str
    tolerance: float = TRUNCATION_TOLERANCE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ParameterDomainError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterDomainError("weights must be finite and non-negative")
        total = math.fsum(w)
        if total > 1.0 + 1e-12:
            raise ParameterDomainError("weights sum above 1", total=total)
        if total < 1.0 - self.tolerance:
            raise TruncationError("photon distribution truncated with too much missing mass",
                                  missing=1.0 - total, n_max=w.size - 1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    def moments(self) -> tuple[float, float]:
        """Mean and variance recomputed from the stored weights."""
        n = np.arange(self.weights.size)
        m = math.fsum(n * self.weights)
        return m, math.fsum((n - m) ** 2 * self.weights)

    def describe(self) -> dict:
        return {"kind": self.kind, "mean": self.mean, "variance": self.variance, "n_max": self.n_max, **self.meta}


def default_truncation(kind: str, nbar: float) -> int:
    """ceil(mean + 3 sigma), at least 1."""
    if nbar < 0:
        raise ParameterDomainError("mean must be non-negative", nbar=nbar)
    if kind == "coherent":
        sigma = math.sqrt(nbar)
    elif kind == "thermal":
        sigma = math.sqrt(nbar * nbar + nbar)
    elif kind == "fock":
        sigma = 0.0
    else:
        raise ParameterDomainError(f"no truncation rule for kind {kind!r}")
    return max(1, math.ceil(nbar + 3.0 * sigma - 1e-12))


def _grow(pmf, kind: str, nbar: float, n_max: int | None, tol: float) -> np.ndarray:
    if n_max is not None:
        if n_max < 0:
            raise ParameterDomainError("n_max must be non-negative", n_max=n_max)
        return pmf(np.arange(n_max + 1))
    n = default_truncation(kind, nbar)
    w = pmf(np.arange(n + 1))
    while math.fsum(w) < 1.0 - tol:
        n += max(1, n // 8)
        w = pmf(np.arange(n + 1))
    return w


def coherent_weights(nbar: float, n_max: int | None = None, tolerance: float = TRUNCATION_TOLERANCE) -> PhotonWeights:
    """Poisson weights with mean nbar. Without n_max the 3-sigma cut is extended until the tail is below tolerance."""
    if nbar < 0:
        raise ParameterDomainError("nbar must be non-negative", nbar=nbar)
    w = _grow(lambda n: poisson.pmf(n, nbar) if nbar > 0 else (n == 0).astype(float), "coherent", nbar, n_max, tolerance)
    return PhotonWeights(w, float(nbar), float(nbar), "coherent", tolerance)


def thermal_weights(nbar_T: float, n_max: int | None = None, tolerance: float = TRUNCATION_TOLERANCE) -> PhotonWeights:
    """Geometric (Bose-Einstein) weights with mean nbar_T."""
    if nbar_T < 0:
        raise ParameterDomainError("nbar_T must be non-negative", nbar_T=nbar_T)
    ratio = nbar_T / (nbar_T + 1.0)
    w = _grow(lambda n: ratio ** n / (nbar_T + 1.0), "thermal", nbar_T, n_max, tolerance)
    return PhotonWeights(w, float(nbar_T), nbar_T * nbar_T + nbar_T, "thermal", tolerance)


def fock_weights(n0: int, n_max: int | None = None) -> PhotonWeights:
    if n0 < 0:
        raise ParameterDomainError("n0 must be non-negative", n0=n0)
    n_max = n0 if n_max is None else n_max
    if n0 > n_max:
        raise TruncationError("Fock level lies above the truncation", n0=n0, n_max=n_max)
    w = np.zeros(n_max + 1)
    w[n0] = 1.0
    return PhotonWeights(w, float(n0), 0.0, "fock")


def custom_weights(weights: Sequence[float], tolerance: float = TRUNCATION_TOLERANCE, **meta) -> PhotonWeights:
    """Plug-in seam for distributions not built here; moments are computed from the data."""
    w = np.asarray(weights, dtype=float)
    n = np.arange(w.size)
    m = float(n @ w)
    return PhotonWeights(w, m, float(((n - m) ** 2) @ w), "custom", tolerance, dict(meta))


def make_weights(kind: str, mean: float, n_max: int | None = None) -> PhotonWeights:
    if kind == "coherent":
        return coherent_weights(mean, n_max)
    if kind == "thermal":
        return thermal_weights(mean, n_max)
    if kind == "fock":
        return fock_weights(int(mean), n_max)
    raise ParameterDomainError(f"unknown distribution kind {kind!r}")
