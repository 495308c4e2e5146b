"""Fast oracle-equivalence and invariant checks run by ``tcm-echo selftest``."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import dynamics, entropy, qfunction
from .model import coherent_weights, make_model
from .spectrum import block_index, polynomial_eigenvalues, spectral_block


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float
    detail: str = ""


def _spectrum_oracle(block_source):
    worst = 0.0
    ortho = 0.0
    for N in (1, 2, 4, 9):
        for branch in ("up", "down"):
            for n in range(0, 9):
                for beta in (0.0, 2.0):
                    blk = block_source(N, n, branch, beta)
                    roots = polynomial_eigenvalues(block_index(N, n, branch), beta)
                    ref = np.array([float(r) for r in roots])
                    worst = max(worst, float(np.abs(blk.q - ref).max()))
                    ortho = max(ortho, float(np.abs(blk.A.T @ blk.A - np.eye(blk.index.dim)).max()))
    return max(worst, ortho), f"eigenvalue {worst:.2e}, orthonormality {ortho:.2e}"


def _closed_forms(_):
    taus = np.linspace(0.0, 3.0, 200)
    w = coherent_weights(5.0)
    err = 0.0
    for N in (1, 2, 3, 4):
        a = dynamics.s1_exact(make_model(N), w, taus).values
        b = dynamics.s1_closed_form(N, w, taus).values
        err = max(err, float(np.abs(a - b).max()))
    for N in (1, 2):
        a = dynamics.s4_exact(make_model(N), w, taus).values
        b = dynamics.s4_closed_form(N, w, taus).values
        err = max(err, float(np.abs(a - b).max()))
    return err, "closed forms against exact pair sums"


def _alternate(_):
    taus = np.linspace(0.0, 2.0, 100)
    p, w = make_model(9), coherent_weights(3.0)
    err = float(np.abs(dynamics.s4_exact(p, w, taus).values - dynamics.s4_alternate(p, w, taus).values).max())
    return err, "pair form against |amplitude|^2 form"


def _q_coherent(_):
    axis = np.linspace(-5.0, 5.0, 21)
    alpha = axis[None, :] + 1j * axis[:, None]
    ref = qfunction.coherent_q(alpha, 4.0)
    err = 0.0
    for N in (2, 9):
        p = make_model(N)
        err = max(err, float(np.abs(qfunction.q_absorption_exact(p, 4.0, alpha, 0.0) - ref).max()))
        err = max(err, float(np.abs(qfunction.q_emission_exact(p, 4.0, alpha, 0.0) - ref).max()))
    return err, "tau = 0 rasters against the coherent closed form"


def _parity(_):
    taus = np.linspace(0.0, 2.0, 101)
    p, w = make_model(9), coherent_weights(3.0)
    a = entropy.field_diagonal(p, w, taus, "down", parity_split=True).weights
    b = entropy.field_diagonal(p, w, taus, "down", parity_split=False).weights
    return float(np.abs(a - b).max()), "parity shortcut against full modulus"


SUITES = (
    ("spectrum-oracle", _spectrum_oracle, 1e-8),
    ("closed-forms", _closed_forms, 1e-8),
    ("s4-alternate", _alternate, 1e-10),
    ("q-coherent", _q_coherent, 1e-10),
    ("entropy-parity", _parity, 1e-12),
)


def run_selftest(block_source=spectral_block) -> list[SuiteResult]:
    """Run every suite; ``block_source`` replaces the cached eigensystems (used for fault injection)."""
    results = []
    for name, fn, tol in SUITES:
        t0 = time.perf_counter()
        try:
            err, detail = fn(block_source)
            ok = bool(np.isfinite(err) and err <= tol)
        except Exception as exc:  # a crashing suite is a failed suite
            err, detail, ok = float("nan"), f"{type(exc).__name__}: {exc}", False
        results.append(SuiteResult(name, ok, err, tol, time.perf_counter() - t0, detail))
    return results


def format_report(results: list[SuiteResult]) -> str:
    lines = [f"{'suite':<18}{'status':<8}{'max error':>12}{'tolerance':>12}{'seconds':>10}  detail"]
    for r in results:
        lines.append(f"{r.name:<18}{'PASS' if r.passed else 'FAIL':<8}{r.max_error:>12.2e}{r.tolerance:>12.1e}"
                     f"{r.seconds:>10.2f}  {r.detail}")
    return "\n".join(lines)
