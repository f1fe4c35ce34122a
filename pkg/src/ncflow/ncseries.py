"""Truncated noncommutative power series in letters Z_1..Z_n.

A series is a sparse map from words (tuples of letters, 1-based) to complex
coefficients, with every word of degree above the cap discarded. This module
provides the ring operations, exp/log/inv, the shuffle product on words, and
the Hopf-algebra predicates (group-like, primitive) used to recognize path
signatures and Lie elements.
"""

import cmath
from functools import lru_cache
from itertools import product

from ._util import GuardError

__all__ = [
    "TruncSeries",
    "mul",
    "add",
    "scale",
    "exp",
    "log",
    "inv",
    "shuffle",
    "is_grouplike",
    "is_primitive",
    "coproduct_pair",
    "commutativize",
    "gaussian_series",
    "words_of_degree",
    "all_words",
]

# Memory guard: at most this many words of the top degree (dim ** cap).
_WORD_BUDGET = 65536
_CAP_CEILING_WIDE = 8  # alphabets with more than two letters
_CAP_CEILING_NARROW = 12  # dim <= 2, where the word count stays small


def _check_shape(dim, cap):
    if dim < 1:
        raise GuardError(f"alphabet size must be >= 1, got {dim}")
    if cap < 0:
        raise GuardError(f"degree cap must be >= 0, got {cap}")
    ceiling = _CAP_CEILING_NARROW if dim <= 2 else _CAP_CEILING_WIDE
    if cap > ceiling:
        raise GuardError(f"degree cap {cap} exceeds ceiling {ceiling} for dim {dim}")
    if dim**cap > _WORD_BUDGET:
        raise GuardError(f"dim**cap = {dim**cap} exceeds word budget {_WORD_BUDGET}")


class TruncSeries:
    """Immutable sparse series over words of degree <= cap.

    Absent words have coefficient zero. Indexing with any word (tuple of
    letters) returns its coefficient; words beyond the cap read as zero.
    """

    __slots__ = ("dim", "cap", "_coeffs")

    def __init__(self, dim, cap, coeffs=None):
        _check_shape(dim, cap)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "cap", int(cap))
        store = {}
        if coeffs:
            for word, value in coeffs.items():
                word = tuple(int(l) for l in word)
                if len(word) > cap:
                    raise ValueError(f"word {word} exceeds cap {cap}")
                for letter in word:
                    if not 1 <= letter <= dim:
                        raise ValueError(f"letter {letter} outside 1..{dim}")
                value = complex(value)
                if value != 0:
                    store[word] = store.get(word, 0j) + value
        object.__setattr__(self, "_coeffs", store)

    def __setattr__(self, name, value):
        raise AttributeError("TruncSeries is immutable")

    @classmethod
    def zero(cls, dim, cap):
        return cls(dim, cap)

    @classmethod
    def unit(cls, dim, cap):
        return cls(dim, cap, {(): 1.0})

    @classmethod
    def letter(cls, dim, cap, i):
        return cls(dim, cap, {(i,): 1.0})

    def __getitem__(self, word):
        return self._coeffs.get(tuple(word), 0j)

    def items(self):
        """Stored (word, coefficient) pairs in degree-then-lexicographic order."""
        return sorted(self._coeffs.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def support(self):
        return set(self._coeffs)

    def constant_term(self):
        return self._coeffs.get((), 0j)

    def __len__(self):
        return len(self._coeffs)

    def __add__(self, other):
        self._compat(other)
        out = dict(self._coeffs)
        for w, c in other._coeffs.items():
            out[w] = out.get(w, 0j) + c
        return TruncSeries(self.dim, self.cap, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return TruncSeries(self.dim, self.cap, {w: -c for w, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, c):
        return scale(self, c)

    def _compat(self, other):
        if not isinstance(other, TruncSeries):
            raise TypeError("expected a TruncSeries")
        if self.dim != other.dim or self.cap != other.cap:
            raise ValueError(
                f"shape mismatch: ({self.dim},{self.cap}) vs ({other.dim},{other.cap})"
            )

    def distance(self, other):
        """Max absolute coefficient difference over the union of supports."""
        self._compat(other)
        d = 0.0
        for w in self.support() | other.support():
            d = max(d, abs(self[w] - other[w]))
        return d

    def approx_eq(self, other, tol=1e-12):
        return self.distance(other) <= tol

    def __repr__(self):
        return f"TruncSeries(dim={self.dim}, cap={self.cap}, terms={len(self._coeffs)})"

    def to_text(self):
        """One line per stored word: "i1 i2 ... ik : re im", empty word as "e"."""
        lines = []
        for w, c in self.items():
            name = " ".join(str(l) for l in w) if w else "e"
            lines.append(f"{name} : {c.real!r} {c.imag!r}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text, dim=None, cap=None):
        """Parse the to_text format. dim/cap are inferred when not given."""
        coeffs = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            head, _, tail = line.partition(":")
            if not tail:
                raise ValueError(f"malformed series line: {raw!r}")
            head = head.strip()
            word = () if head == "e" else tuple(int(t) for t in head.split())
            parts = tail.split()
            if len(parts) != 2:
                raise ValueError(f"malformed coefficient in line: {raw!r}")
            coeffs[word] = complex(float(parts[0]), float(parts[1]))
        if dim is None:
            dim = max((max(w) for w in coeffs if w), default=1)
        if cap is None:
            cap = max((len(w) for w in coeffs), default=0)
        return cls(dim, cap, coeffs)


def words_of_degree(dim, degree):
    """All words of the given degree in lexicographic order."""
    return product(range(1, dim + 1), repeat=degree)


def all_words(dim, cap):
    """All words of degree 0..cap, by degree then lexicographically."""
    for d in range(cap + 1):
        yield from words_of_degree(dim, d)


def mul(a, b):
    """Concatenation product; degrees above the cap are discarded."""
    a._compat(b)
    cap = a.cap
    out = {}
    for u, cu in a._coeffs.items():
        room = cap - len(u)
        for v, cv in b._coeffs.items():
            if len(v) <= room:
                w = u + v
                out[w] = out.get(w, 0j) + cu * cv
    return TruncSeries(a.dim, cap, out)


def add(a, b):
    return a + b


def scale(a, c):
    c = complex(c)
    return TruncSeries(a.dim, a.cap, {w: c * v for w, v in a._coeffs.items()})


def exp(a):
    """exp(a) = sum a^k / k!, which terminates at k = cap.

    Requires zero constant term, so every power raises the minimum degree.
    """
    if a.constant_term() != 0:
        raise ValueError("exp requires zero constant term")
    result = TruncSeries.unit(a.dim, a.cap)
    term = TruncSeries.unit(a.dim, a.cap)
    for k in range(1, a.cap + 1):
        term = scale(mul(term, a), 1.0 / k)
        if not term._coeffs:
            break
        result = result + term
    return result


def log(a):
    """Principal logarithm: log(c) + sum (-1)^(k+1) u^k / k with u = a/c - 1."""
    c = a.constant_term()
    if c == 0:
        raise ValueError("log requires nonzero constant term")
    u = scale(a, 1.0 / c) - TruncSeries.unit(a.dim, a.cap)
    result = TruncSeries(a.dim, a.cap, {(): cmath.log(c)})
    power = TruncSeries.unit(a.dim, a.cap)
    for k in range(1, a.cap + 1):
        power = mul(power, u)
        if not power._coeffs:
            break
        result = result + scale(power, (-1.0) ** (k + 1) / k)
    return result


def inv(a):
    """Multiplicative inverse via the geometric series in 1 - a/c."""
    c = a.constant_term()
    if c == 0:
        raise ValueError("inv requires nonzero constant term")
    u = TruncSeries.unit(a.dim, a.cap) - scale(a, 1.0 / c)
    result = TruncSeries.unit(a.dim, a.cap)
    power = TruncSeries.unit(a.dim, a.cap)
    for k in range(1, a.cap + 1):
        power = mul(power, u)
        if not power._coeffs:
            break
        result = result + power
    return scale(result, 1.0 / c)


@lru_cache(maxsize=65536)
def _shuffle_words(u, v):
    if not u:
        return (v,)
    if not v:
        return (u,)
    first = tuple((u[0],) + w for w in _shuffle_words(u[1:], v))
    second = tuple((v[0],) + w for w in _shuffle_words(u, v[1:]))
    return first + second


def shuffle(u, v):
    """All interleavings of u and v (with multiplicity), as a list of words."""
    return list(_shuffle_words(tuple(u), tuple(v)))


def coproduct_pair(a, u, v):
    """Coefficient of u (x) v in the unshuffle coproduct of a.

    Each letter is primitive for this coproduct, which makes the coefficient
    the sum of a over all shuffles of u and v.
    """
    u, v = tuple(u), tuple(v)
    if len(u) + len(v) > a.cap:
        raise ValueError("degree overflow: |u| + |v| exceeds cap")
    return sum((a[w] for w in _shuffle_words(u, v)), 0j)


def is_grouplike(a, tol=1e-10):
    """Shuffle-factorization test for group-likeness.

    a is group-like iff a[empty] = 1 and for every pair of words u, v with
    |u| + |v| <= cap the shuffle sum of a equals a[u] * a[v]. Letters of the
    n-letter alphabet are checked exhaustively, so the cost grows like
    (2n)^cap; fine at desk scale.
    """
    if abs(a.constant_term() - 1) > tol:
        return False
    for du in range(1, a.cap):
        for dv in range(1, a.cap - du + 1):
            for u in words_of_degree(a.dim, du):
                for v in words_of_degree(a.dim, dv):
                    lhs = sum((a[w] for w in _shuffle_words(u, v)), 0j)
                    if abs(lhs - a[u] * a[v]) > tol:
                        return False
    return True


@lru_cache(maxsize=65536)
def _dynkin_expand(word):
    """Left-to-right bracketing [..[[Z_i1, Z_i2], Z_i3].., Z_ik] as a word map."""
    out = {word[:1]: 1}
    for letter in word[1:]:
        nxt = {}
        for w, c in out.items():
            right = w + (letter,)
            nxt[right] = nxt.get(right, 0) + c
            left = (letter,) + w
            nxt[left] = nxt.get(left, 0) - c
        out = nxt
    return out


def is_primitive(a, tol=1e-10):
    """Dynkin criterion: the degree-m part x_m is a Lie element iff the
    left-to-right bracketing map sends x_m to m * x_m."""
    if a.constant_term() != 0:
        raise ValueError("is_primitive requires zero constant term")
    by_degree = {}
    for w, c in a._coeffs.items():
        by_degree.setdefault(len(w), {})[w] = c
    for m, part in by_degree.items():
        if m == 0:
            continue
        image = {}
        for w, c in part.items():
            for ww, k in _dynkin_expand(w).items():
                image[ww] = image.get(ww, 0j) + c * k
        for w in set(image) | set(part):
            if abs(image.get(w, 0j) - m * part.get(w, 0j)) > tol:
                return False
    return True


def commutativize(a):
    """Push down to commutative variables: bucket words by letter counts.

    Returns a dict from multidegree (count of each letter, a length-dim
    tuple) to the summed coefficient; exact zeros are dropped.
    """
    out = {}
    for w, c in a._coeffs.items():
        alpha = tuple(w.count(i) for i in range(1, a.dim + 1))
        out[alpha] = out.get(alpha, 0j) + c
    return {alpha: c for alpha, c in out.items() if c != 0}


def gaussian_series(n, cap):
    """exp(-(1/2) sum Z_i^2) truncated at cap; odd degrees vanish."""
    quad = {(i, i): -0.5 for i in range(1, n + 1)} if cap >= 2 else {}
    return exp(TruncSeries(n, cap, quad))
