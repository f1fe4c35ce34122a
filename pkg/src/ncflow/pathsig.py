"""Paths and signatures: reduced free-group words, piecewise-linear paths,
the signature map into the truncated tensor algebra, and a Riemann-sum
iterated-integral oracle independent of the algebraic route.

Order convention, pinned by regression tests: concatenation multiplies the
first-traversed factor on the left, sig(concat(p, q)) = sig(p) * sig(q).
"""

import numpy as np

from . import ncseries
from .ncseries import TruncSeries

__all__ = [
    "GroupWord",
    "reduce",
    "PLPath",
    "concat",
    "invert",
    "endpoint",
    "signature",
    "signature_word",
    "iterated_integral",
]


class GroupWord:
    """Freely reduced word in the free group; letters are signed indices
    (k means generator k, -k its inverse)."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        stack = []
        for raw in letters:
            letter = int(raw)
            if letter == 0:
                raise ValueError("letters are nonzero signed indices")
            if stack and stack[-1] == -letter:
                stack.pop()
            else:
                stack.append(letter)
        object.__setattr__(self, "letters", tuple(stack))

    def __setattr__(self, name, value):
        raise AttributeError("GroupWord is immutable")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, GroupWord) and self.letters == other.letters

    def __hash__(self):
        return hash(("GroupWord", self.letters))

    def __mul__(self, other):
        return GroupWord(self.letters + other.letters)

    def inverse(self):
        return GroupWord(tuple(-l for l in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    def max_index(self):
        return max((abs(l) for l in self.letters), default=0)

    def to_text(self):
        return " ".join(str(l) for l in self.letters) if self.letters else "e"

    @classmethod
    def from_text(cls, text):
        text = text.strip()
        if text in ("", "e"):
            return cls()
        return cls(int(t) for t in text.split())

    def __repr__(self):
        return f"GroupWord({self.to_text()!r})"


def reduce(letters):
    """Freely reduce a raw signed-letter sequence. Idempotent."""
    return GroupWord(letters)


class PLPath:
    """Piecewise-linear path from the origin, stored as its increment list.

    Zero increments are dropped on construction; translation invariance is
    structural because only increments are kept.
    """

    __slots__ = ("increments",)

    def __init__(self, increments, dim=None):
        arr = np.asarray(increments, dtype=float)
        if arr.size == 0:
            if dim is None:
                raise ValueError("an empty path needs an explicit dim")
            arr = np.zeros((0, int(dim)))
        if arr.ndim != 2:
            raise ValueError("increments must be a list of equal-length vectors")
        keep = np.any(arr != 0.0, axis=1)
        arr = arr[keep].copy()
        arr.setflags(write=False)
        object.__setattr__(self, "increments", arr)

    def __setattr__(self, name, value):
        raise AttributeError("PLPath is immutable")

    @property
    def dim(self):
        return self.increments.shape[1]

    def __len__(self):
        return self.increments.shape[0]

    def points(self):
        """Vertices of the path, starting at the origin."""
        pts = np.zeros((len(self) + 1, self.dim))
        np.cumsum(self.increments, axis=0, out=pts[1:])
        return pts

    def to_text(self):
        return "; ".join(",".join(repr(float(x)) for x in inc) for inc in self.increments)

    @classmethod
    def from_text(cls, text, dim=None):
        text = text.strip()
        if not text:
            return cls([], dim=dim if dim is not None else 1)
        incs = []
        for part in text.split(";"):
            incs.append([float(x) for x in part.strip().split(",")])
        return cls(incs)

    def __repr__(self):
        return f"PLPath(dim={self.dim}, segments={len(self)})"


def concat(p, q):
    """Run p, then q (translated to start at p's endpoint)."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    return PLPath(np.vstack([p.increments, q.increments]), dim=p.dim)


def invert(p):
    return PLPath(-p.increments[::-1], dim=p.dim)


def endpoint(p):
    if len(p) == 0:
        return np.zeros(p.dim)
    return p.increments.sum(axis=0)


def _segment_exp(inc, dim, cap):
    """Signature of one segment: exp(sum_i inc_i Z_i).

    Coefficient at a word w is prod(inc_{w_j}) / |w|!; built degree by
    degree, pruning letters with zero increment.
    """
    active = [i for i in range(1, dim + 1) if inc[i - 1] != 0.0]
    coeffs = {(): 1.0}
    level = {(): 1.0}
    for d in range(1, cap + 1):
        nxt = {}
        for w, c in level.items():
            for i in active:
                nxt[w + (i,)] = c * inc[i - 1] / d
        if not nxt:
            break
        coeffs.update(nxt)
        level = nxt
    return TruncSeries(dim, cap, coeffs)


def signature(p, cap):
    """Chen signature: the product of segment exponentials, first segment
    leftmost. Group-like by construction."""
    s = TruncSeries.unit(p.dim, cap)
    for inc in p.increments:
        s = ncseries.mul(s, _segment_exp(inc, p.dim, cap))
    return s


def signature_word(w, cap, dim=None):
    """Signature of the unit-step lattice path of a group word:
    the ordered product of exp(+-Z_i)."""
    if dim is None:
        dim = max(w.max_index(), 1)
    s = TruncSeries.unit(dim, cap)
    for letter in w:
        inc = np.zeros(dim)
        inc[abs(letter) - 1] = 1.0 if letter > 0 else -1.0
        s = ncseries.mul(s, _segment_exp(inc, dim, cap))
    return s


def _sample_positions(p, mesh):
    """Positions of p at mesh+1 equally spaced times (each segment takes
    equal time; iterated integrals are parametrization invariant)."""
    pts = p.points()
    k = len(p)
    if k == 0:
        return np.zeros((mesh + 1, p.dim))
    breaks = np.linspace(0.0, 1.0, k + 1)
    times = np.linspace(0.0, 1.0, mesh + 1)
    out = np.empty((mesh + 1, p.dim))
    for j in range(p.dim):
        out[:, j] = np.interp(times, breaks, pts[:, j])
    return out


def iterated_integral(p, word, mesh):
    """Midpoint Riemann approximation of the iterated integral of p over
    the order simplex for the given word.

    Evaluated by nested cumulative sums: each inner integral is a piecewise
    linear function of time, and its midpoint value on a cell is the average
    of the endpoint values, so the O(|w| * mesh) prefix-sum form computes
    the same midpoint-rule sum as literal cell enumeration.
    """
    word = tuple(word)
    if len(word) > 4:
        raise ValueError("oracle capped at |word| <= 4")
    if mesh < 1:
        raise ValueError("mesh must be >= 1")
    for letter in word:
        if not 1 <= letter <= p.dim:
            raise ValueError(f"letter {letter} outside 1..{p.dim}")
    if not word:
        return 1.0
    pos = _sample_positions(p, mesh)
    deltas = np.diff(pos, axis=0)
    level = np.ones(mesh + 1)
    for letter in word:
        mid = 0.5 * (level[:-1] + level[1:])
        level = np.concatenate([[0.0], np.cumsum(mid * deltas[:, letter - 1])])
    return float(level[-1])
