"""Random matrix sampler and estimator tests.

Structural properties (unitarity, Hermiticity, branch handling) are exact;
the moment estimates run at small sizes with fixed seeds and are checked
against three standard errors of their known limits, plus the exact cases
where the estimator has zero variance.
"""

import numpy as np
import pytest

from ncflow import rmt
from ncflow.pathsig import GroupWord
from ncflow._util import GuardError


def test_sample_haar_is_unitary_and_reproducible():
    U = rmt.sample_haar(8, seed=101)
    assert np.max(np.abs(U @ U.conj().T - np.eye(8))) < 1e-12
    again = rmt.sample_haar(8, seed=101)
    assert np.array_equal(U, again)
    assert not np.array_equal(U, rmt.sample_haar(8, seed=102))


def test_sample_haar_phase_fix_removes_diagonal_bias():
    # without the phase correction the first column could carry an
    # arbitrary phase; with it, averages of entries vanish like 1/sqrt(k)
    acc = 0j
    for seed in range(400):
        acc += rmt.sample_haar(2, seed=seed)[0, 0]
    assert abs(acc) / 400 < 0.1


def test_sample_gue_is_hermitian_with_matching_scale():
    H = rmt.sample_gue(16, seed=103)
    assert np.max(np.abs(H - H.conj().T)) == 0.0
    # normalized trace of H^2 concentrates near 1
    vals = [np.trace(np.linalg.matrix_power(rmt.sample_gue(32, seed=s), 2)).real / 32
            for s in range(60)]
    assert abs(np.mean(vals) - 1.0) < 3.0 * np.std(vals) / np.sqrt(len(vals)) + 0.01


def test_size_guards():
    with pytest.raises(GuardError):
        rmt.sample_haar(257, seed=1)
    with pytest.raises(ValueError):
        rmt.sample_gue(0, seed=1)
    with pytest.raises(GuardError):
        rmt.gue_word_moment((1, 1), N=65, samples=4, seed=1)


def test_estimator_report_row_matches_header():
    rep = rmt.gue_word_moment((1, 1), N=8, samples=32, seed=104)
    row = rep.row()
    assert len(row) == len(rmt.REPORT_HEADER)
    assert row[0] == "gue-moments"
    assert row[1] == 8 and row[2] == 32 and row[3] == 104
    assert rep.resampled == 0
    with pytest.raises(ValueError):
        rmt.EstimatorReport("x", 0j, -1.0, 4, 2, 0)
    with pytest.raises(ValueError):
        rmt.EstimatorReport("x", 0j, 0.0, 0, 2, 0)


def test_gue_word_moments_match_limits():
    # normalized traces: Z^2 -> 1 and Z^4 -> 2 (Catalan numbers)
    r2 = rmt.gue_word_moment((1, 1), N=32, samples=400, seed=105)
    assert abs(r2.value - 1.0) < 3.0 * r2.std_error + 2.0 / 32**2
    r4 = rmt.gue_word_moment((1, 1, 1, 1), N=32, samples=400, seed=106)
    assert abs(r4.value - 2.0) < 3.0 * r4.std_error + 4.0 / 32**2
    mixed = rmt.gue_word_moment((1, 2, 1, 2), N=32, samples=400, seed=107)
    assert abs(mixed.value) < 3.0 * mixed.std_error + 4.0 / 32**2


def test_haar_coefficient_exact_cases():
    e = GroupWord(())
    rep = rmt.haar_coefficient([(e, 3.0)], e, N=8, samples=16, seed=108)
    assert rep.value == 3.0 + 0j
    assert rep.std_error == 0.0
    # f = gamma makes every sample trace the identity exactly
    g = GroupWord((1, 2, -1))
    rep = rmt.haar_coefficient(g, g, N=8, samples=16, seed=109)
    assert abs(rep.value - 1.0) < 1e-12
    assert rep.std_error < 1e-12


def test_haar_commutator_trace_is_small():
    gamma = GroupWord((1, 2, -1, -2))
    rep = rmt.haar_coefficient(GroupWord(()), gamma, N=16, samples=600, seed=110)
    # asymptotic freeness: the normalized trace decays like 1/N^2
    assert abs(rep.value) < 3.0 * rep.std_error + 0.05


def test_principal_log_unitary_round_trip():
    rng = np.random.default_rng(111)
    angles = rng.uniform(-2.8, 2.8, size=5)
    X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    Q, _ = np.linalg.qr(X)
    U = (Q * np.exp(1j * angles)) @ Q.conj().T
    H = rmt.principal_log_unitary(U)
    assert np.max(np.abs(H - H.conj().T)) == 0.0
    eigs = np.sort(np.linalg.eigvalsh(H))
    assert np.allclose(eigs, np.sort(angles), atol=1e-10)
    from ncflow.matfun import mexp
    assert np.max(np.abs(mexp(1j * H) - U)) < 1e-10


def test_principal_log_unitary_branch_cut():
    U = np.diag([np.exp(1j * (np.pi - 1e-12)), 1.0])
    with pytest.raises(rmt._BranchAmbiguity):
        rmt.principal_log_unitary(U)


def test_matrix_fourier_constant_function():
    # f = 1, gamma = e: every sample is exactly 1
    rep = rmt.matrix_fourier_coeff(lambda h: np.eye(1), GroupWord(()),
                                   N=1, samples=32, seed=112, n=1)
    assert rep.value == pytest.approx(1.0, abs=1e-14)
    assert rep.std_error < 1e-14


def test_matrix_fourier_reduces_to_circle_average():
    # at N = 1 the estimator averages f(h) e^{-ih} over a uniform angle
    rep = rmt.matrix_fourier_coeff(
        lambda h: np.exp(-h.astype(complex)**2), GroupWord((1,)),
        N=1, samples=3000, seed=113)
    target = 0.21969809805533944  # (1/2pi) int exp(-z^2) cos(z) dz, dps=40
    assert abs(rep.value - target) < 3.0 * rep.std_error


def test_jacobian_factor_values():
    assert rmt.jacobian_factor([0.4, 0.4]) == 1.0
    assert rmt.jacobian_factor([1.0]) == 1.0
    a, b = 0.3, -0.9
    expected = 2.0 * (1.0 - np.cos(a - b)) / (a - b) ** 2
    assert rmt.jacobian_factor([a, b]) == pytest.approx(expected, rel=1e-12)
    # three angles multiply pairwise factors
    c = 1.7
    expected3 = (rmt.jacobian_factor([a, b]) * rmt.jacobian_factor([a, c])
                 * rmt.jacobian_factor([b, c]))
    assert rmt.jacobian_factor([a, b, c]) == pytest.approx(expected3, rel=1e-12)


def test_volume_vn_small_sizes():
    assert rmt.volume_vn(1) == 2.0 * np.pi
    assert rmt.volume_vn(2) == pytest.approx(4.0 * np.pi**3, rel=1e-14)
    assert rmt.volume_vn(3) == pytest.approx(
        rmt.volume_vn(2) * 2.0 * np.pi**3 / 2.0, rel=1e-14)


def test_scalar_matrix_function_diagonalizes():
    rng = np.random.default_rng(114)
    H = rng.standard_normal((4, 4))
    H = (H + H.T) / 2.0
    f = rmt.scalar_matrix_function(np.exp)
    from ncflow.matfun import mexp
    assert np.max(np.abs(f(H) - mexp(H.astype(complex)))) < 1e-12


def test_parallel_estimates_are_bitwise_serial():
    a = rmt.gue_word_moment((1, 1, 2, 2), N=16, samples=300, seed=115, n_jobs=1)
    b = rmt.gue_word_moment((1, 1, 2, 2), N=16, samples=300, seed=115, n_jobs=4)
    assert a.value == b.value
    assert a.std_error == b.std_error
    c = rmt.haar_coefficient(GroupWord((1,)), GroupWord((1,)),
                             N=8, samples=200, seed=116, n_jobs=1)
    d = rmt.haar_coefficient(GroupWord((1,)), GroupWord((1,)),
                             N=8, samples=200, seed=116, n_jobs=3)
    assert c.value == d.value and c.std_error == d.std_error
