"""Pure-numpy implementation of the hot signature kernel.

Vectorized over the path batch; per-coefficient arithmetic follows the same
operation order as the compiled kernel (segment exponential by the prefix
recurrence, then split-table accumulation), so the two backends agree to the
last few ulps and each is bitwise deterministic on its own.
"""

import numpy as np

BACKEND = "fallback"


def chord_sig_chunk(incs, tables):
    """Signatures of a batch of chord paths.

    incs: (B, S, n) float64 segment increments. Returns (B, W) coefficients
    of each path's truncated signature, words in table order.
    """
    B, S, n = incs.shape
    W = len(tables)
    deg = tables.deg
    prefix = tables.prefix
    letter = tables.letter
    off = tables.split_offsets
    left, right = tables.split_left, tables.split_right

    state = np.zeros((B, W))
    state[:, 0] = 1.0
    seg_exp = np.empty((B, W))
    seg_exp[:, 0] = 1.0
    nxt = np.empty((B, W))
    for s in range(S):
        seg = incs[:, s, :]
        for w in range(1, W):
            seg_exp[:, w] = seg_exp[:, prefix[w]] * seg[:, letter[w]] / deg[w]
        for w in range(W):
            acc = state[:, left[off[w]]] * seg_exp[:, right[off[w]]]
            for j in range(off[w] + 1, off[w + 1]):
                acc = acc + state[:, left[j]] * seg_exp[:, right[j]]
            nxt[:, w] = acc
        state, nxt = nxt, state
    return state.copy()
