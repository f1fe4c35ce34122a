"""Free Lie algebra on Z_1..Z_n up to a degree cap, in the Lyndon basis.

Lyndon words carry their standard right factorization bracketing; expanding
a bracketing into the tensor algebra is triangular with respect to
lexicographic order (the expansion of a Lyndon word w is w plus strictly
lex-larger words of the same degree), which gives an exact rewriting of any
primitive series into basis coordinates.
"""

from functools import lru_cache

from . import ncseries
from ._util import NumericalCheckError
from .ncseries import TruncSeries

__all__ = [
    "lyndon_words",
    "lyndon_basis",
    "standard_factorization",
    "bracketing",
    "bracketing_str",
    "expand_lyndon",
    "witt_dimension",
    "LieElement",
    "generator",
    "from_series",
    "bracket",
    "bch",
]


@lru_cache(maxsize=256)
def lyndon_words(n, max_degree):
    """All Lyndon words over 1..n of length 1..max_degree, ordered by
    degree then lexicographically. Duval's generation algorithm."""
    words = []
    w = [1]
    while w:
        words.append(tuple(w))
        w = w * (max_degree // len(w)) + w[: max_degree % len(w)]
        while w and w[-1] == n:
            w.pop()
        if w:
            w[-1] += 1
    return tuple(sorted(words, key=lambda t: (len(t), t)))


@lru_cache(maxsize=65536)
def standard_factorization(word):
    """Split a Lyndon word (length >= 2) as u v with v its lexicographically
    smallest proper suffix; both halves are Lyndon."""
    if len(word) < 2:
        raise ValueError("factorization needs length >= 2")
    v = min(word[j:] for j in range(1, len(word)))
    return word[: len(word) - len(v)], v


@lru_cache(maxsize=65536)
def bracketing(word):
    """Nested-tuple bracketing of a Lyndon word via standard factorization."""
    if len(word) == 1:
        return word[0]
    u, v = standard_factorization(word)
    return (bracketing(u), bracketing(v))


def bracketing_str(b):
    if isinstance(b, int):
        return str(b)
    return f"[{bracketing_str(b[0])},{bracketing_str(b[1])}]"


@lru_cache(maxsize=65536)
def _expand_bracketing(b):
    """Expand a nested bracketing into a word -> integer coefficient map."""
    if isinstance(b, int):
        return {(b,): 1}
    left = _expand_bracketing(b[0])
    right = _expand_bracketing(b[1])
    out = {}
    for u, cu in left.items():
        for v, cv in right.items():
            out[u + v] = out.get(u + v, 0) + cu * cv
            out[v + u] = out.get(v + u, 0) - cu * cv
    return {w: c for w, c in out.items() if c != 0}


def expand_lyndon(word):
    """Tensor-algebra expansion of the standard bracketing of a Lyndon word."""
    return dict(_expand_bracketing(bracketing(tuple(word))))


@lru_cache(maxsize=256)
def lyndon_basis(n, d):
    """Ordered basis of the free Lie algebra up to degree d:
    a tuple of (lyndon word, nested bracketing) pairs."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    return tuple((w, bracketing(w)) for w in lyndon_words(n, d))


def _mobius(m):
    mu, k = 1, 2
    while k * k <= m:
        if m % k == 0:
            m //= k
            if m % k == 0:
                return 0
            mu = -mu
        k += 1
    if m > 1:
        mu = -mu
    return mu


def witt_dimension(n, d):
    """Dimension of the degree-d graded piece: (1/d) sum_{e|d} mobius(e) n^(d/e)."""
    total = sum(_mobius(e) * n ** (d // e) for e in range(1, d + 1) if d % e == 0)
    return total // d


class LieElement:
    """Sparse coordinates on the Lyndon basis, up to degree cap."""

    __slots__ = ("dim", "cap", "_coords")

    def __init__(self, dim, cap, coords=None):
        if cap < 1:
            raise ValueError("LieElement needs cap >= 1")
        self.dim = int(dim)
        self.cap = int(cap)
        store = {}
        lyndon = set(lyndon_words(dim, cap))
        if coords:
            for w, c in coords.items():
                w = tuple(int(l) for l in w)
                if w not in lyndon:
                    raise ValueError(f"{w} is not a Lyndon word within degree {cap}")
                c = complex(c)
                if c != 0:
                    store[w] = c
        self._coords = store

    def coords(self):
        return dict(self._coords)

    def items(self):
        return sorted(self._coords.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __getitem__(self, word):
        return self._coords.get(tuple(word), 0j)

    def is_zero(self, tol=0.0):
        return all(abs(c) <= tol for c in self._coords.values())

    def __add__(self, other):
        self._compat(other)
        out = dict(self._coords)
        for w, c in other._coords.items():
            out[w] = out.get(w, 0j) + c
        return LieElement(self.dim, self.cap, out)

    def __neg__(self):
        return LieElement(self.dim, self.cap, {w: -c for w, c in self._coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        c = complex(c)
        return LieElement(self.dim, self.cap, {w: c * v for w, v in self._coords.items()})

    def _compat(self, other):
        if self.dim != other.dim or self.cap != other.cap:
            raise ValueError("LieElement shape mismatch")

    def to_series(self):
        """Expand into the truncated tensor algebra; always primitive."""
        coeffs = {}
        for w, c in self._coords.items():
            for word, k in expand_lyndon(w).items():
                coeffs[word] = coeffs.get(word, 0j) + c * k
        return TruncSeries(self.dim, self.cap, coeffs)

    def distance(self, other):
        self._compat(other)
        d = 0.0
        for w in set(self._coords) | set(other._coords):
            d = max(d, abs(self[w] - other[w]))
        return d

    def __repr__(self):
        return f"LieElement(dim={self.dim}, cap={self.cap}, terms={len(self._coords)})"


def generator(n, d, i):
    return LieElement(n, d, {(i,): 1.0})


def from_series(s, tol=1e-10):
    """Rewrite a primitive series in Lyndon coordinates.

    Works degree by degree, eliminating Lyndon words in lexicographic order;
    triangularity makes this exact. A residual above tol after elimination
    means the input was not a Lie element (or the basis is broken), which is
    reported as a NumericalCheckError.
    """
    if s.constant_term() != 0:
        raise ValueError("a Lie element has zero constant term")
    if s.cap < 1:
        raise ValueError("need cap >= 1")
    residual = {w: c for w, c in s._coeffs.items() if w}
    coords = {}
    for w in lyndon_words(s.dim, s.cap):
        c = residual.get(w, 0j)
        if c == 0:
            continue
        coords[w] = c
        for word, k in expand_lyndon(w).items():
            value = residual.get(word, 0j) - c * k
            if value == 0:
                residual.pop(word, None)
            else:
                residual[word] = value
    worst = max((abs(c) for c in residual.values()), default=0.0)
    if worst > tol:
        raise NumericalCheckError(
            f"Lyndon rewriting residual {worst:.3e} exceeds {tol:.1e}; "
            "input is not primitive"
        )
    return LieElement(s.dim, s.cap, coords)


def bracket(a, b):
    """Lie bracket via the tensor algebra: expand, form ab - ba, rewrite."""
    a._compat(b)
    sa, sb = a.to_series(), b.to_series()
    return from_series(ncseries.mul(sa, sb) - ncseries.mul(sb, sa))


def bch(a, b):
    """log(exp(a) exp(b)) in Lyndon coordinates; exact at truncation level."""
    a._compat(b)
    prod = ncseries.mul(ncseries.exp(a.to_series()), ncseries.exp(b.to_series()))
    return from_series(ncseries.log(prod))
