"""Conserved-excitation blocks of the Tavis-Cummings Hamiltonian.

Only the fully symmetric sector r = N/2 is needed. A block is labelled by the
conserved number c = n + m (photons plus spin projection); its photon index runs
over alpha..c+r with alpha = max(0, c - r). After removing a gauge phase the
eigenproblem is a real symmetric tridiagonal matrix in "q-units":

    diag_k    = -beta * k
    offdiag_k = sqrt(k + 1) * sqrt(r(r+1) - (c-k-1)(c-k))

whose eigenvalues q give the Hamiltonian eigenvalues lambda = c - |kappa| q.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DiagonalizationError, OracleError
from .model import ModelParams, _check_branch

ORACLE_DIM_CAP = 64
DEGENERACY_RTOL = 1e-9
SIGN_THRESHOLD = 1e-12


@dataclass(frozen=True)
class BlockIndex:
    N: int
    n: int
    branch: str
    r: float
    c: float
    alpha: int
    dim: int

    @property
    def photons(self) -> np.ndarray:
        return np.arange(self.alpha, self.alpha + self.dim)


def block_index(N: int, n: int, branch: str) -> BlockIndex:
    """Block reached from n photons with every molecule up (c = n + N/2) or down (c = n - N/2)."""
    _check_branch(branch)
    if n < 0:
        raise ValueError("photon number must be non-negative")
    r = N / 2.0
    c = n + r if branch == "up" else n - r
    alpha = max(0, n - N) if branch == "down" else n
    dim = N + 1 if branch == "up" else min(N, n) + 1
    return BlockIndex(int(N), int(n), branch, r, c, alpha, dim)


def coupling_squared(index: BlockIndex, k) -> np.ndarray:
    """Squared off-diagonal element linking photon k to photon k+1 (zero at the block edge)."""
    k = np.asarray(k, dtype=float)
    r, c = index.r, index.c
    return (k + 1.0) * (r * (r + 1.0) - (c - k - 1.0) * (c - k))


@dataclass(frozen=True)
class TridiagonalBlock:
    index: BlockIndex
    beta: float
    diag: np.ndarray
    offdiag: np.ndarray


def build_tridiagonal(index: BlockIndex, params: ModelParams | float) -> TridiagonalBlock:
    beta = params.beta_rel if isinstance(params, ModelParams) else float(params)
    k = index.photons.astype(float)
    diag = -beta * k
    off = np.sqrt(np.maximum(coupling_squared(index, k[:-1]), 0.0))
    for a in (diag, off):
        a.setflags(write=False)
    return TridiagonalBlock(index, beta, diag, off)


@dataclass(frozen=True)
class SpectralBlock:
    """q sorted descending (q[0] is the ground state); column j of A is eigenvector j
    expressed on photons alpha..alpha+dim-1. The first component larger than 1e-12 in
    magnitude is positive; that is the alpha component except in very large blocks."""

    index: BlockIndex
    beta: float
    q: np.ndarray
    A: np.ndarray
    phase: float = 0.0

    def row(self, m: int) -> np.ndarray:
        """Components A_m^j over j for photon number m."""
        return self.A[m - self.index.alpha]


def diagonalize(block: TridiagonalBlock) -> SpectralBlock:
    idx = block.index
    if idx.dim == 1:
        q = block.diag.copy()
        A = np.ones((1, 1))
    else:
        try:
            q, A = eigh_tridiagonal(block.diag, block.offdiag)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise DiagonalizationError(f"tridiagonal eigensolver failed: {exc}", index=idx) from exc
        q = q[::-1].copy()
        A = A[:, ::-1].copy()
        # fix signs on the first component that is well above rounding noise; in large
        # blocks the photon-alpha component of some eigenvectors underflows to zero
        lead = np.argmax(np.abs(A) > SIGN_THRESHOLD, axis=0)
        A *= np.sign(A[lead, np.arange(A.shape[1])])
        gaps = -np.diff(q)
        if np.any(gaps <= DEGENERACY_RTOL * np.maximum(1.0, np.abs(q[1:]))):
            warnings.warn(f"near-degenerate eigenvalues in block {idx}", RuntimeWarning)
    if not np.all(np.isfinite(q)) or not np.all(np.isfinite(A)):
        raise DiagonalizationError("non-finite eigensystem", index=idx)
    q.setflags(write=False)
    A.setflags(write=False)
    return SpectralBlock(idx, block.beta, q, A)


@lru_cache(maxsize=None)
def _cached_block(N: int, n: int, branch: str, beta: float) -> SpectralBlock:
    return diagonalize(build_tridiagonal(block_index(N, n, branch), beta))


def spectral_block(N: int, n: int, branch: str, beta: float = 0.0) -> SpectralBlock:
    """Cached, immutable eigensystem for the block reached from n photons."""
    return _cached_block(int(N), int(n), branch, float(beta))


def clear_cache() -> None:
    _cached_block.cache_clear()


def lambda_from_q(q, index: BlockIndex, params: ModelParams):
    return index.c - abs(params.kappa) * np.asarray(q)


def q_from_lambda(lam, index: BlockIndex, params: ModelParams):
    return (index.c - np.asarray(lam)) / abs(params.kappa)


def characteristic_polynomial(index: BlockIndex, beta, digits: int = 60) -> list:
    """Coefficients (highest degree first) of the determinant polynomial in q.

    Built with the three-term recursion B_{k+1} = (q + beta k) B_k - C_k B_{k-1},
    where C_k is the squared coupling into photon k. Exact rationals for r, c
    keep the coefficients exact up to the working precision.
    """
    with mpmath.workdps(digits):
        beta = mpmath.mpf(beta)
        r = mpmath.mpf(index.N) / 2
        c = index.n + r if index.branch == "up" else index.n - r
        a = index.alpha
        prev = [mpmath.mpf(1)]
        cur = [mpmath.mpf(1), beta * a]
        for k in range(a + 1, a + index.dim):
            ck = k * (r * (r + 1) - (c - k) * (c - k + 1))
            nxt = cur + [mpmath.mpf(0)]
            for i, x in enumerate(cur):
                nxt[i + 1] += x * beta * k
            for i, x in enumerate(prev):
                nxt[i + 2] -= x * ck
            prev, cur = cur, nxt
        return cur


def polynomial_eigenvalues(index: BlockIndex, params: ModelParams | float, digits: int = 60,
                           cap: int = ORACLE_DIM_CAP) -> list:
    """Extended-precision roots of the block's characteristic polynomial, sorted descending.

    Independent of the LAPACK path; intended as an oracle for small blocks.
    """
    if index.dim > cap:
        raise OracleError("block too large for the polynomial oracle", dim=index.dim, cap=cap)
    if digits < 30:
        raise OracleError("oracle needs at least 30 digits", digits=digits)
    beta = params.beta_rel if isinstance(params, ModelParams) else params
    coeffs = characteristic_polynomial(index, beta, digits)
    if index.dim == 1:
        with mpmath.workdps(digits):
            return [-coeffs[1]]
    with mpmath.workdps(digits):
        try:
            roots = mpmath.polyroots(coeffs, maxsteps=50 + 10 * index.dim, extraprec=8 * digits)
        except mpmath.libmp.libhyper.NoConvergence as exc:
            raise OracleError("polynomial root finder did not converge", index=index) from exc
        tol = mpmath.mpf(10) ** (-digits // 3)
        for x in roots:
            if abs(mpmath.im(x)) > tol * max(1, abs(x)):
                raise OracleError("complex root in a Hermitian block", index=index, root=x)
        roots = sorted((mpmath.re(x) for x in roots), reverse=True)
        for u, v in zip(roots, roots[1:]):
            if u - v < DEGENERACY_RTOL * max(1, abs(u)):
                warnings.warn(f"degenerate roots reported by oracle in {index}", RuntimeWarning)
        return roots


def zero_mode_vector(index: BlockIndex) -> np.ndarray:
    """Closed-form null vector of a resonant block of odd dimension.

    Odd offsets vanish; even offsets alternate in sign with ratios of the
    squared couplings. Returned normalized with positive first component.
    """
    if index.dim % 2 == 0:
        raise ValueError("a resonant block has a zero eigenvalue only for odd dimension")
    cs = coupling_squared(index, index.photons[:-1].astype(float))
    v = np.zeros(index.dim)
    v[0] = 1.0
    for t in range(2, index.dim, 2):
        v[t] = -v[t - 2] * math.sqrt(cs[t - 2] / cs[t - 1])
    return v / np.linalg.norm(v)


def dump_spectrum_csv(blocks: Iterable[SpectralBlock], path) -> None:
    """Rows n,j,q_j,A with the eigenvector column written as ';'-joined components."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "j", "q_j", "A"])
        for b in blocks:
            for j in range(b.index.dim):
                w.writerow([b.index.n, j, repr(float(b.q[j])), ";".join(repr(float(x)) for x in b.A[:, j])])
