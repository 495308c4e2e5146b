import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcm_echo.errors import OracleError
from tcm_echo.model import make_model, model_with_detuning
from tcm_echo.spectrum import (
    block_index, build_tridiagonal, coupling_squared, diagonalize, dump_spectrum_csv, lambda_from_q,
    SIGN_THRESHOLD, polynomial_eigenvalues, q_from_lambda, spectral_block, zero_mode_vector,
)


def test_block_index_examples():
    b = block_index(900, 10, "down")
    assert (b.c, b.dim, b.alpha) == (10 - 450, 11, 0)
    b = block_index(2, 5, "up")
    assert (b.c, b.dim) == (6, 3)
    assert block_index(1, 0, "up").dim == 2


@given(N=st.integers(1, 50), n=st.integers(0, 80), branch=st.sampled_from(["up", "down"]))
def test_block_index_dimension_rule(N, n, branch):
    b = block_index(N, n, branch)
    expected = 2 * b.r + 1 if b.c >= b.r else b.r + b.c + 1
    assert b.dim == expected
    assert b.alpha == max(0, math.floor(b.c - b.r + 1e-9))


def test_couplings_vanish_at_boundary():
    for N, n, branch in [(3, 2, "down"), (4, 7, "up"), (900, 5, "down")]:
        idx = block_index(N, n, branch)
        blk = build_tridiagonal(idx, 0.0)
        assert np.all(blk.offdiag > 0)
        assert coupling_squared(idx, idx.photons[-1]) == pytest.approx(0.0, abs=1e-9)
        assert coupling_squared(idx, idx.alpha - 1) == pytest.approx(0.0, abs=1e-9)


def test_single_molecule_one_photon():
    np.testing.assert_allclose(spectral_block(1, 1, "up").q, [math.sqrt(2), -math.sqrt(2)], rtol=1e-14)


def test_two_molecules_spectra():
    np.testing.assert_allclose(spectral_block(2, 1, "up").q, [math.sqrt(10), 0, -math.sqrt(10)], atol=1e-14)
    np.testing.assert_allclose(spectral_block(2, 2, "up").q, [math.sqrt(14), 0, -math.sqrt(14)], atol=1e-14)


def test_one_photon_down_block():
    np.testing.assert_allclose(spectral_block(900, 1, "down").q, [30.0, -30.0], rtol=1e-14)
    for Delta in (0.0, 3.0, 100.0):
        p = model_with_detuning(900, Delta)
        q = spectral_block(900, 1, "down", p.beta_rel).q
        b = p.beta_rel
        np.testing.assert_allclose(q, [-b / 2 + math.sqrt(Delta + 900), -b / 2 - math.sqrt(Delta + 900)], rtol=1e-13)


def test_vacuum_down_block():
    blk = spectral_block(1, 0, "down")
    assert blk.q.tolist() == [0.0] and blk.A.tolist() == [[1.0]]


def test_four_molecule_frequencies():
    n = 12
    q = spectral_block(4, n, "up").q
    R = math.sqrt(33 + 4 * n * (5 + n))
    expected = sorted([math.sqrt(25 + 10 * n + 3 * R), math.sqrt(25 + 10 * n - 3 * R), 0.0,
                       -math.sqrt(25 + 10 * n - 3 * R), -math.sqrt(25 + 10 * n + 3 * R)], reverse=True)
    np.testing.assert_allclose(q, expected, atol=1e-12)


def test_polynomial_oracle_examples():
    roots = polynomial_eigenvalues(block_index(2, 1, "up"), 0.0)
    with mpmath.workdps(60):
        assert abs(roots[0] - mpmath.sqrt(10)) < mpmath.mpf(10) ** -30
        assert abs(roots[1]) < mpmath.mpf(10) ** -30
    for n0 in (0, 3, 17):
        r = polynomial_eigenvalues(block_index(1, n0, "up"), 0.0)
        assert float(r[0]) == pytest.approx(math.sqrt(n0 + 1), rel=1e-15)


def test_oracle_preconditions():
    with pytest.raises(OracleError):
        polynomial_eigenvalues(block_index(900, 0, "up"), 0.0)
    with pytest.raises(OracleError):
        polynomial_eigenvalues(block_index(2, 1, "up"), 0.0, digits=20)


@pytest.mark.parametrize("N,n,branch", [(2, 3, "up"), (4, 4, "up"), (900, 6, "down"), (9, 4, "down")])
def test_zero_mode_matches_closed_form(N, n, branch):
    idx = block_index(N, n, branch)
    assert idx.dim % 2 == 1
    blk = spectral_block(N, n, branch)
    j = idx.dim // 2
    assert abs(blk.q[j]) < 1e-10
    v = zero_mode_vector(idx)
    np.testing.assert_allclose(blk.A[:, j] * np.sign(blk.A[0, j]), v, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(N=st.sampled_from([1, 2, 3, 5, 9, 30, 169]), n=st.integers(0, 30), branch=st.sampled_from(["up", "down"]),
       beta=st.floats(-3, 3))
def test_block_invariants(N, n, branch, beta):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tri = build_tridiagonal(block_index(N, n, branch), beta)
        blk = diagonalize(tri)
    d = blk.index.dim
    assert np.all(np.diff(blk.q) < 0) or d == 1
    np.testing.assert_allclose(blk.A.T @ blk.A, np.eye(d), atol=1e-12)
    np.testing.assert_allclose(blk.A @ blk.A.T, np.eye(d), atol=1e-12)
    T = np.diag(tri.diag) + np.diag(tri.offdiag, 1) + np.diag(tri.offdiag, -1)
    np.testing.assert_allclose(blk.A @ np.diag(blk.q) @ blk.A.T, T, atol=1e-10 * max(1.0, np.abs(T).max()))
    lead = np.argmax(np.abs(blk.A) > SIGN_THRESHOLD, axis=0)
    assert np.all(blk.A[lead, np.arange(d)] > 0)
    small = np.abs(blk.A[0]) > SIGN_THRESHOLD
    assert np.all(blk.A[0][small] > 0)


def test_resonant_antisymmetry():
    for N, n, branch in [(3, 8, "up"), (900, 30, "down"), (50, 10, "up")]:
        q = spectral_block(N, n, branch).q
        np.testing.assert_allclose(q[::-1], -q, atol=1e-10)


def test_large_block_columns_are_orthonormal():
    blk = spectral_block(900, 0, "up")
    np.testing.assert_allclose(blk.A.T @ blk.A, np.eye(901), atol=1e-12)


def test_lambda_round_trip():
    p = make_model(3, gamma=1.0, Omega=1.0)
    idx = block_index(3, 4, "up")
    assert float(lambda_from_q(30.0, block_index(900, 10, "down"), p)) == -470.0
    q = np.array([1.5, -0.25])
    np.testing.assert_allclose(q_from_lambda(lambda_from_q(q, idx, p), idx, p), q, rtol=1e-15)


def test_lambda_at_zero_q():
    idx = block_index(1, 5, "up")
    assert idx.c == 5.5
    assert float(lambda_from_q(0.0, idx, make_model(1))) == 5.5


def test_cache_returns_same_object():
    assert spectral_block(9, 4, "down") is spectral_block(9, 4, "down")
    with pytest.raises(ValueError):
        spectral_block(9, 4, "down").q[0] = 0.0


def test_spectrum_csv(tmp_path):
    path = tmp_path / "spec.csv"
    dump_spectrum_csv([spectral_block(1, 1, "up")], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,j,q_j,A" and len(lines) == 3
