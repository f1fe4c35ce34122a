"""Dense word tables shared by the compiled kernel and the numpy fallback.

Words of the n-letter alphabet up to the cap are enumerated by degree then
lexicographically; index 0 is the empty word. Two flat structures drive the
kernels: a prefix/letter table for building segment-exponential coefficients
by the recurrence E[w] = E[w[:-1]] * inc[last] / deg(w), and a splitting
table listing, for every word w, all factorizations w = u v in order of
increasing |u|.
"""

from functools import lru_cache
from itertools import product

import numpy as np


class SigTables:
    __slots__ = (
        "dim",
        "cap",
        "words",
        "index",
        "deg",
        "prefix",
        "letter",
        "split_offsets",
        "split_left",
        "split_right",
    )

    def __init__(self, dim, cap):
        self.dim = dim
        self.cap = cap
        words = [()]
        for d in range(1, cap + 1):
            words.extend(product(range(1, dim + 1), repeat=d))
        self.words = words
        self.index = {w: k for k, w in enumerate(words)}
        count = len(words)
        self.deg = np.array([len(w) for w in words], dtype=np.int64)
        self.prefix = np.zeros(count, dtype=np.int64)
        self.letter = np.zeros(count, dtype=np.int64)
        for k, w in enumerate(words):
            if w:
                self.prefix[k] = self.index[w[:-1]]
                self.letter[k] = w[-1] - 1
        offsets = [0]
        left, right = [], []
        for w in words:
            for cut in range(len(w) + 1):
                left.append(self.index[w[:cut]])
                right.append(self.index[w[cut:]])
            offsets.append(len(left))
        self.split_offsets = np.array(offsets, dtype=np.int64)
        self.split_left = np.array(left, dtype=np.int64)
        self.split_right = np.array(right, dtype=np.int64)

    def __len__(self):
        return len(self.words)


@lru_cache(maxsize=64)
def sig_tables(dim, cap):
    return SigTables(dim, cap)


def batch_mul(states_a, states_b, tables):
    """Row-wise truncated concatenation product of two (B, W) coefficient
    arrays. Split terms are accumulated in table order."""
    out = np.empty_like(states_a)
    off = tables.split_offsets
    left, right = tables.split_left, tables.split_right
    for w in range(len(tables)):
        acc = states_a[:, left[off[w]]] * states_b[:, right[off[w]]]
        for j in range(off[w] + 1, off[w + 1]):
            acc = acc + states_a[:, left[j]] * states_b[:, right[j]]
        out[:, w] = acc
    return out
