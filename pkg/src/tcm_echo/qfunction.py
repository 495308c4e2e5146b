"""Husimi Q function of the field for an initially coherent field.

Q(alpha, t) = <alpha| rho_f(t) |alpha> is evaluated in the frame rotating with the
free field, so the trivial phase exp(-i c t) of each block is dropped. At t = 0

    Q = exp(-|alpha|^2 - nbar + 2 |alpha| sqrt(nbar) cos(psi)),   psi = arg(alpha) - theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .approx import afa_coefficients, approx_eigvec_afa, approx_eigvec_mta, mta_coefficients
from .dynamics import to_gamma_t
from .errors import CapabilityError, ParameterDomainError, TruncationError
from .model import ModelParams
from .numerics import chunked_map
from .spectrum import spectral_block

TAIL_TOLERANCE = 1e-13
OPS = ("absorption_exact", "absorption_approx", "emission_exact", "emission_approx")


@dataclass(frozen=True)
class QRaster:
    """Q sampled on a rectangular grid; values[i, k] belongs to re[k] + 1j*im[i]."""

    re: np.ndarray
    im: np.ndarray
    values: np.ndarray
    tau: float
    branch: str
    meta: dict = field(default_factory=dict)

    @property
    def alpha(self) -> np.ndarray:
        return self.re[None, :] + 1j * self.im[:, None]

    def normalization(self) -> float:
        """(1/pi) times the rectangle-rule integral of Q over the grid."""
        dre = self.re[1] - self.re[0]
        dim = self.im[1] - self.im[0]
        return float(self.values.sum() * dre * dim / math.pi)


def coherent_q(alpha, nbar: float, theta: float = 0.0) -> np.ndarray:
    """Closed-form Q of the initial coherent state."""
    alpha = np.asarray(alpha, dtype=complex)
    r = np.abs(alpha)
    return np.exp(-r * r - nbar + 2.0 * r * math.sqrt(nbar) * np.cos(np.angle(alpha) - theta))


def photon_cutoff(nbar: float) -> int:
    """Highest initial photon number kept.

    Every term carries the initial amplitude <z|beta>, so only the Poisson tail needs
    covering; |<s|alpha>| <= 1 cannot amplify what is dropped.
    """
    return int(math.ceil(nbar + 12.0 * math.sqrt(nbar) + 12.0))


def _initial_amplitudes(nbar: float, zmax: int) -> np.ndarray:
    v = np.empty(zmax + 1)
    v[0] = math.exp(-nbar / 2.0)
    for z in range(1, zmax + 1):
        v[z] = v[z - 1] * math.sqrt(nbar / z)
    tail = 1.0 - math.fsum(v * v)
    if tail > max(TAIL_TOLERANCE, 1e-15 * zmax):
        raise TruncationError("initial coherent state not covered by the photon cutoff", tail=tail, zmax=zmax)
    return v


def _overlaps(alpha: np.ndarray, theta: float, smax: int) -> np.ndarray:
    """<s|alpha~> for s = 0..smax with alpha~ = alpha exp(-i theta); shape (smax+1, len(alpha))."""
    a = alpha * np.exp(-1j * theta)
    u = np.empty((smax + 1, alpha.size), dtype=complex)
    u[0] = np.exp(-0.5 * np.abs(a) ** 2)
    for s in range(1, smax + 1):
        u[s] = u[s - 1] * a / math.sqrt(s)
    return u


@lru_cache(maxsize=None)
def _mta_block_vectors(N: int, z: int) -> np.ndarray:
    c = mta_coefficients(N, 0.0)
    return np.array([[approx_eigvec_mta(L, z, j, c) for j in range(z + 1)] for L in range(z + 1)])


@lru_cache(maxsize=None)
def _afa_block_vectors(N: int) -> np.ndarray:
    c = afa_coefficients(0.0)
    return np.array([[approx_eigvec_afa(p, N, j, c) for j in range(N + 1)] for p in range(N + 1)])


def _transition(q: np.ndarray, A: np.ndarray, src: int, gt: float) -> np.ndarray:
    """sum_j A_src^j A_m^j exp(i q_j gamma t) for every row m of A."""
    return (A * A[src][None, :]) @ np.exp(1j * q * gt)


def _absorption_table(params: ModelParams, zmax: int, gt: float, approx: bool) -> list[np.ndarray]:
    """G[z][m]: amplitude to go from z photons (molecules down) to m photons, m = 0..z."""
    table = []
    for z in range(zmax + 1):
        blk = spectral_block(params.N, z, "down", params.beta_rel)
        A = _mta_block_vectors(params.N, z) if approx else blk.A
        g = np.zeros(z + 1, dtype=complex)
        g[blk.index.alpha:] = _transition(blk.q, A, blk.index.dim - 1, gt)
        table.append(g)
    return table


def _emission_table(params: ModelParams, pmax: int, gt: float, approx: bool) -> list[np.ndarray]:
    """G[p][s]: amplitude to go from p photons (molecules up) to p + s photons, s = 0..N."""
    table = []
    A_afa = _afa_block_vectors(params.N) if approx else None
    for p in range(pmax + 1):
        blk = spectral_block(params.N, p, "up", params.beta_rel)
        table.append(_transition(blk.q, A_afa if approx else blk.A, 0, gt))
    return table


def _evaluate(op: str, params: ModelParams, nbar: float, alpha: np.ndarray, tau: float, theta: float,
              N_cap: int, threads: int) -> np.ndarray:
    if op not in OPS:
        raise ValueError(f"unknown Q operation {op!r}")
    approx = op.endswith("approx")
    if approx and not params.resonant:
        raise CapabilityError("approximate Q functions are derived at resonance only", Delta=params.Delta)
    absorption = op.startswith("absorption")
    alpha = np.asarray(alpha, dtype=complex)
    shape = alpha.shape
    flat = alpha.ravel()
    if nbar < 0:
        raise ParameterDomainError("nbar must be non-negative", nbar=nbar)
    zmax = photon_cutoff(nbar)
    v = _initial_amplitudes(nbar, zmax)
    branch = "down" if absorption else "up"
    gt = float(to_gamma_t(tau, params.N, branch, nbar, params.Delta, params.gamma))
    N = params.N
    if absorption:
        if approx and zmax > N:
            raise CapabilityError("modified two-level eigenvectors need N above the photon cutoff", N=N, zmax=zmax)
        G = _absorption_table(params, zmax, gt, approx)
        pmax = min(zmax, N, N_cap if approx else zmax)
    else:
        G = _emission_table(params, zmax, gt, approx)

    def chunk(a):
        if absorption:
            u = _overlaps(a, theta, zmax)
            out = np.zeros(a.size)
            for p in range(pmax + 1):
                acc = np.zeros(a.size, dtype=complex)
                for s in range(zmax - p + 1):
                    acc += (v[s + p] * G[s + p][s]) * u[s]
                out += acc.real ** 2 + acc.imag ** 2
            return out
        u = _overlaps(a, theta, zmax + N)
        out = np.zeros(a.size)
        for s in range(N + 1):
            acc = np.zeros(a.size, dtype=complex)
            for p in range(zmax + 1):
                acc += (v[p] * G[p][s]) * u[p + s]
            out += acc.real ** 2 + acc.imag ** 2
        return out

    return chunked_map(chunk, flat, threads, chunk=1024).reshape(shape)


def q_absorption_exact(params: ModelParams, nbar: float, alpha, tau: float, *, theta: float = 0.0,
                       threads: int = 1):
    """Q for molecules initially in the ground state, from exact block eigensystems."""
    return _evaluate("absorption_exact", params, nbar, alpha, tau, theta, 0, threads)


def q_absorption_approx(params: ModelParams, nbar: float, alpha, tau: float, N_cap: int = 30, *,
                        theta: float = 0.0, threads: int = 1):
    """Q for ground-state molecules with hypergeometric approximate eigenvectors and exact eigenvalues.

    At most ``N_cap`` absorbed photons are kept.
    """
    return _evaluate("absorption_approx", params, nbar, alpha, tau, theta, N_cap, threads)


def q_emission_exact(params: ModelParams, nbar: float, alpha, tau: float, *, theta: float = 0.0,
                     threads: int = 1):
    """Q for molecules initially excited; the free-field phase per photon number is dropped."""
    return _evaluate("emission_exact", params, nbar, alpha, tau, theta, 0, threads)


def q_emission_approx(params: ModelParams, nbar: float, alpha, tau: float, *, theta: float = 0.0,
                      threads: int = 1):
    """Q for excited molecules using average-field eigenvectors and exact eigenvalues."""
    return _evaluate("emission_approx", params, nbar, alpha, tau, theta, 0, threads)


def default_grid(nbar: float, resolution: int = 201, half_width: float | None = None) -> np.ndarray:
    h = math.sqrt(nbar) + 3.0 if half_width is None else half_width
    return np.linspace(-h, h, resolution)


def q_raster(op: str, params: ModelParams, nbar: float, tau: float, *, resolution: int = 201,
             half_width: float | None = None, theta: float = 0.0, N_cap: int = 30, threads: int = 1) -> QRaster:
    """Evaluate one of the Q operations on a square grid centred at alpha = 0 (row-major in Im alpha)."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = default_grid(nbar, resolution, half_width)
    alpha = axis[None, :] + 1j * axis[:, None]
    vals = _evaluate(op, params, nbar, alpha, tau, theta, N_cap, threads)
    branch = "down" if op.startswith("absorption") else "up"
    meta = {"op": op, "N": params.N, "nbar": nbar, "theta": theta, "psi": "arg(alpha) - theta",
            "resolution": resolution, "half_width": float(axis[-1])}
    if op == "absorption_approx":
        meta["N_cap"] = N_cap
    return QRaster(axis, axis.copy(), vals, float(tau), branch, meta)


def lobe_count(raster: QRaster, fraction: float = 0.5) -> int:
    """Connected regions where Q is at least ``fraction`` of its maximum."""
    _, count = ndimage.label(raster.values >= fraction * raster.values.max())
    return int(count)


def local_maxima(raster: QRaster, fraction: float = 0.1, size: int = 9) -> list[tuple[float, float, float]]:
    """(Re alpha, Im alpha, Q / max Q) for every local maximum above ``fraction`` of the maximum."""
    v = raster.values
    top = v.max()
    mask = (ndimage.maximum_filter(v, size=size, mode="nearest") == v) & (v >= fraction * top)
    return [(float(raster.re[k]), float(raster.im[i]), float(v[i, k] / top)) for i, k in np.argwhere(mask)]
