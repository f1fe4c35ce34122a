"""Dense complex matrix kernel: exponentials, holonomy evaluation of paths
and group words on matrix tuples, truncated-series evaluation, and the
alternating standard polynomial.
"""

from itertools import permutations

import numpy as np

from ._util import GuardError
from .pathsig import GroupWord, PLPath

__all__ = [
    "MatrixTuple",
    "mexp",
    "eval_word",
    "eval_exact",
    "eval_trunc",
    "amitsur_levitsky",
    "save_matrix",
    "load_matrix",
    "save_tuple",
    "load_tuple",
]

_SIZE_GUARD = 256
_TAYLOR_TERMS = 22


def _as_square(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if M.shape[0] > _SIZE_GUARD:
        raise GuardError(f"matrix size {M.shape[0]} exceeds guard {_SIZE_GUARD}")
    if not np.all(np.isfinite(M.view(float))):
        raise ValueError("matrix has non-finite entries")
    return M


class MatrixTuple:
    """n complex N x N matrices with optional hermitian/unitary flags.

    Flags are claims validated on demand via is_hermitian / is_unitary;
    eval_word uses the unitary flag to invert by adjoint.
    """

    __slots__ = ("mats", "hermitian", "unitary")

    def __init__(self, mats, hermitian=False, unitary=False):
        mats = tuple(_as_square(M).copy() for M in mats)
        if not mats:
            raise ValueError("need at least one matrix")
        size = mats[0].shape[0]
        for M in mats:
            if M.shape[0] != size:
                raise ValueError("matrices must share a common size")
            M.setflags(write=False)
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "hermitian", bool(hermitian))
        object.__setattr__(self, "unitary", bool(unitary))

    def __setattr__(self, name, value):
        raise AttributeError("MatrixTuple is immutable")

    @property
    def n(self):
        return len(self.mats)

    @property
    def size(self):
        return self.mats[0].shape[0]

    def __getitem__(self, k):
        return self.mats[k]

    def is_hermitian(self, tol=None):
        tol = 1e-12 * self.size if tol is None else tol
        return all(np.abs(M - M.conj().T).max() <= tol for M in self.mats)

    def is_unitary(self, tol=None):
        tol = 1e-10 * self.size if tol is None else tol
        eye = np.eye(self.size)
        return all(np.abs(M.conj().T @ M - eye).max() <= tol for M in self.mats)


def mexp(M):
    """Matrix exponential by scaling and squaring around a Taylor core.

    The argument is scaled by 2^-s until its 1-norm is at most 1/2, the
    exponential of the scaled matrix is summed by Horner's rule (22 terms,
    far below double precision roundoff at that norm), and the result is
    squared s times.
    """
    M = _as_square(M)
    size = M.shape[0]
    norm = np.abs(M).sum(axis=0).max() if size else 0.0
    s = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    A = M / (2.0**s)
    eye = np.eye(size, dtype=complex)
    out = eye.copy()
    for k in range(_TAYLOR_TERMS, 0, -1):
        out = eye + (A / k) @ out
    for _ in range(s):
        out = out @ out
    return out


def _letters_in_range(letters, n):
    for letter in letters:
        if not 1 <= abs(letter) <= n:
            raise ValueError(f"letter {letter} outside the {n}-matrix tuple")


def eval_word(w, T):
    """Laurent monomial: the ordered product of T_i or its inverse.

    Negative letters use the adjoint when the tuple is flagged unitary and
    an explicit inverse otherwise.
    """
    _letters_in_range(w.letters, T.n)
    out = np.eye(T.size, dtype=complex)
    for letter in w:
        M = T[abs(letter) - 1]
        if letter < 0:
            M = M.conj().T if T.unitary else np.linalg.inv(M)
        out = out @ M
    return out


def eval_exact(p, T, scale=1.0):
    """Holonomy of a path on a matrix tuple: the ordered product over
    segments of mexp(scale * sum_i a_i T_i), first segment leftmost.

    Group words are read as their unit-step lattice paths, so each letter
    contributes mexp(+-scale * T_i). With Hermitian input and scale 1j the
    result is unitary.
    """
    scale = complex(scale)
    if isinstance(p, GroupWord):
        _letters_in_range(p.letters, T.n)
        out = np.eye(T.size, dtype=complex)
        for letter in p:
            sign = 1.0 if letter > 0 else -1.0
            out = out @ mexp(sign * scale * T[abs(letter) - 1])
        return out
    if isinstance(p, PLPath):
        if p.dim != T.n:
            raise ValueError("path dimension does not match tuple size")
        out = np.eye(T.size, dtype=complex)
        for inc in p.increments:
            gen = sum(inc[i] * T[i] for i in range(T.n))
            out = out @ mexp(scale * gen)
        return out
    raise TypeError("expected a PLPath or GroupWord")


def eval_trunc(series, T, scale=1.0):
    """Evaluate a truncated series on a matrix tuple, substituting
    scale * T_i for Z_i. Horner over the prefix tree of stored words."""
    if series.dim > T.n:
        raise ValueError("series alphabet larger than the tuple")
    scale = complex(scale)
    eye = np.eye(T.size, dtype=complex)

    def descend(entries):
        out = eye * complex(entries.get((), 0.0))
        groups = {}
        for w, c in entries.items():
            if w:
                groups.setdefault(w[0], {})[w[1:]] = c
        for letter in sorted(groups):
            out = out + (scale * T[letter - 1]) @ descend(groups[letter])
        return out

    return descend(dict(series.items()))


def _parity(perm):
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def amitsur_levitsky(mats):
    """Alternating sum over S_2N of X_{s(1)} ... X_{s(2N)} for 2N matrices
    of size N; vanishes identically on N x N matrices."""
    mats = [_as_square(M) for M in mats]
    size = mats[0].shape[0]
    if any(M.shape[0] != size for M in mats):
        raise ValueError("matrices must share a common size")
    if len(mats) != 2 * size:
        raise ValueError(f"need exactly {2 * size} matrices of size {size}")
    if size > 3:
        raise GuardError("factorial guard: N <= 3")
    total = np.zeros((size, size), dtype=complex)
    for perm in permutations(range(2 * size)):
        prod = mats[perm[0]]
        for k in perm[1:]:
            prod = prod @ mats[k]
        total = total + _parity(perm) * prod
    return total


def save_matrix(stream, M):
    """Row-major text form: a header line with N, then one line per row of
    "re,im" entries separated by spaces."""
    M = _as_square(M)
    stream.write(f"{M.shape[0]}\n")
    for row in M:
        stream.write(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")


def load_matrix(stream):
    header = stream.readline()
    if not header.strip():
        return None
    size = int(header)
    rows = []
    for _ in range(size):
        cells = stream.readline().split()
        if len(cells) != size:
            raise ValueError("matrix row has the wrong number of entries")
        row = []
        for cell in cells:
            re, _, im = cell.partition(",")
            row.append(complex(float(re), float(im)))
        rows.append(row)
    return np.array(rows, dtype=complex)


def save_tuple(stream, T):
    for M in T.mats:
        save_matrix(stream, M)


def load_tuple(stream, hermitian=False, unitary=False):
    mats = []
    while True:
        M = load_matrix(stream)
        if M is None:
            break
        mats.append(M)
    return MatrixTuple(mats, hermitian=hermitian, unitary=unitary)
