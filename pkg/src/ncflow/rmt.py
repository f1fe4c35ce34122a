"""Monte Carlo over random-matrix ensembles: Haar-distributed unitaries,
Hermitian Gaussian tuples, word-moment estimators, and fixed-size matrix
Fourier coefficients built on the principal logarithm.

Every estimator is a pure function of (seed, sample index): per-sample
generators are derived from the master seed, partial sums are accumulated
over fixed chunks in fixed order, and the report is therefore bitwise
identical whether the chunks ran serially or on a thread pool.
"""

from dataclasses import dataclass
from math import factorial, pi

import numpy as np
import scipy.linalg

from ._util import (GuardError, NumericalCheckError, chunked_monte_carlo,
                    derive_seed, make_rng, mean_and_se)
from .matfun import MatrixTuple, eval_exact, eval_word
from .pathsig import GroupWord

__all__ = [
    "EstimatorReport",
    "sample_haar",
    "sample_gue",
    "haar_coefficient",
    "gue_word_moment",
    "matrix_fourier_coeff",
    "jacobian_factor",
    "volume_vn",
    "scalar_matrix_function",
]

_N_GUARD = 64
_CHUNK = 256
_BRANCH_TOL = 1e-9
_MAX_RESAMPLE = 64

REPORT_HEADER = ("experiment", "N", "samples", "seed",
                 "value_re", "value_im", "std_error")


@dataclass(frozen=True)
class EstimatorReport:
    """Monte Carlo estimate with its standard error and full provenance.

    resampled counts draws rejected for branch ambiguity (an eigenvalue too
    close to -1 for the principal logarithm); it is diagnostic metadata and
    not part of the CSV row.
    """

    experiment: str
    value: complex
    std_error: float
    samples: int
    matrix_size: int
    seed: int
    resampled: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")

    def row(self):
        return (self.experiment, self.matrix_size, self.samples, self.seed,
                float(self.value.real), float(self.value.imag),
                float(self.std_error))


def _check_size(size, guard=_N_GUARD):
    if size < 1:
        raise ValueError("matrix size must be >= 1")
    if size > guard:
        raise GuardError(f"matrix size {size} exceeds guard {guard}")


def _ginibre(rng, size):
    return rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))


def _haar_from(rng, size):
    Z = _ginibre(rng, size) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def _gue_from(rng, size):
    G = _ginibre(rng, size)
    return (G + G.conj().T) / (2.0 * np.sqrt(size))


def sample_haar(N, seed):
    """One Haar-distributed N x N unitary.

    QR of a complex Gaussian matrix alone is not Haar: numpy's convention
    leaves a diagonal-phase bias. Multiplying each column by the phase of
    the corresponding diagonal entry of R removes it.
    """
    _check_size(N, guard=256)
    return _haar_from(make_rng(seed), N)


def sample_gue(N, seed):
    """One Hermitian Gaussian N x N matrix with entry variance 1/N, the
    scaling under which normalized trace moments converge (first even
    moments 1, 2, 5: the Catalan numbers)."""
    _check_size(N, guard=256)
    return _gue_from(make_rng(seed), N)


def _run_estimator(experiment, N, samples, seed, per_sample, n_jobs=1):
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def worker(ci, start, count):
        total = 0j
        sumsq = 0.0
        res = 0
        for idx in range(start, start + count):
            value, resampled = per_sample(idx)
            total += value
            sumsq += abs(value) ** 2
            res += resampled
        return np.complex128(total), np.float64(sumsq), np.int64(res)

    total, sumsq, res = chunked_monte_carlo(samples, _CHUNK, worker, n_jobs)
    mean, se = mean_and_se(total, sumsq, samples)
    return EstimatorReport(experiment, complex(mean), float(se),
                           samples, N, seed, int(res))


def _as_terms(f):
    if isinstance(f, GroupWord):
        return [(f, 1.0 + 0.0j)]
    terms = [(w, complex(c)) for w, c in f]
    if not terms:
        raise ValueError("empty Laurent combination")
    return terms


def haar_coefficient(f, gamma, N, samples, seed, n_jobs=1):
    """Estimate the normalized trace of f(U) U^{-gamma} over independent
    Haar tuples. f is a GroupWord or a list of (GroupWord, coefficient)
    pairs; the gamma inverse is folded into each word up front."""
    _check_size(N)
    gamma_inv = gamma.inverse()
    terms = [(w * gamma_inv, c) for w, c in _as_terms(f)]
    n = max(max(w.max_index() for w, _ in terms), 1)

    def per_sample(idx):
        rng = make_rng(derive_seed(seed, idx))
        T = MatrixTuple([_haar_from(rng, N) for _ in range(n)], unitary=True)
        value = 0j
        for w, c in terms:
            value += c * np.trace(eval_word(w, T))
        return value / N, 0

    return _run_estimator("haar-coeff", N, samples, seed, per_sample, n_jobs)


def gue_word_moment(w, N, samples, seed, n_jobs=1):
    """Estimate the normalized trace of Z_{w_1} ... Z_{w_k} over independent
    Hermitian Gaussian tuples."""
    _check_size(N)
    word = tuple(int(l) for l in w)
    if any(l < 1 for l in word):
        raise ValueError("word letters are positive indices")
    n = max(word, default=1)

    def per_sample(idx):
        rng = make_rng(derive_seed(seed, idx))
        mats = [_gue_from(rng, N) for _ in range(n)]
        prod = np.eye(N, dtype=complex)
        for letter in word:
            prod = prod @ mats[letter - 1]
        return np.trace(prod) / N, 0

    return _run_estimator("gue-moments", N, samples, seed, per_sample, n_jobs)


class _BranchAmbiguity(Exception):
    pass


def principal_log_unitary(U, tol=_BRANCH_TOL):
    """Hermitian H with exp(iH) = U and spectrum in (-pi, pi].

    Raises when an eigenvalue angle sits within tol of the cut at -pi,
    where the branch choice is numerically arbitrary.
    """
    T, Q = scipy.linalg.schur(np.asarray(U, dtype=complex), output="complex")
    angles = np.angle(np.diagonal(T))
    if np.max(np.abs(angles)) > pi - tol:
        raise _BranchAmbiguity("eigenvalue within tolerance of the branch cut")
    H = (Q * angles) @ Q.conj().T
    return (H + H.conj().T) / 2.0


def matrix_fourier_coeff(f, gamma, N, samples, seed, n=None, n_jobs=1):
    """Fourier coefficient at fixed matrix size: the Haar average of the
    normalized trace of f(H_1, ..., H_n) U^{-gamma}, where H_j is the
    principal logarithm of U_j divided by i.

    Draws whose logarithm is branch-ambiguous are rejected and redrawn from
    the same per-sample stream; the count is reported, not silently eaten.
    At N = 1 this is the classical Fourier coefficient of f on the circle.
    """
    _check_size(N)
    if n is None:
        n = max(1, gamma.max_index())
    gamma_inv = gamma.inverse()

    def per_sample(idx):
        rng = make_rng(derive_seed(seed, idx))
        for attempt in range(_MAX_RESAMPLE):
            us = [_haar_from(rng, N) for _ in range(n)]
            try:
                hs = [principal_log_unitary(U) for U in us]
            except _BranchAmbiguity:
                continue
            T = MatrixTuple(hs, hermitian=True)
            hol = eval_exact(gamma_inv, T, scale=1j)
            value = np.trace(np.asarray(f(*hs), dtype=complex) @ hol) / N
            return value, attempt
        raise NumericalCheckError(
            "persistent branch ambiguity: eigenvalues keep landing at -1")

    return _run_estimator("matrix-fourier", N, samples, seed, per_sample, n_jobs)


def jacobian_factor(eigs):
    """Density factor relating eigenvalue-space integration to the flat
    measure: the product over pairs of 2(1 - cos(a - b)) / (a - b)^2,
    written through sinc so coincident eigenvalues give exactly 1."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.ndim != 1:
        raise ValueError("expected a flat list of eigenvalue angles")
    out = 1.0
    for j in range(len(eigs)):
        for k in range(j + 1, len(eigs)):
            delta = eigs[j] - eigs[k]
            out *= float(np.sinc(delta / (2.0 * pi))) ** 2
    return out


def volume_vn(N):
    """Total volume prod_{m=0}^{N-1} 2 pi^{m+1} / m! of the unitary group
    in the normalization where N = 1 gives the circle length 2 pi."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = 1.0
    for m in range(N):
        out *= 2.0 * pi ** (m + 1) / factorial(m)
    return out


def scalar_matrix_function(g):
    """Lift a scalar function to Hermitian matrices through the spectrum."""

    def apply(H):
        w, V = np.linalg.eigh(H)
        return (V * g(w)) @ V.conj().T

    return apply
