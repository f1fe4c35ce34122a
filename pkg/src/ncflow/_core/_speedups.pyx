# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch signature kernel: per-path segment-exponential products
over the dense word table. Mirrors fallback.chord_sig_chunk."""

from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "speedups"


def chord_sig_chunk(double[:, :, ::1] incs,
                    long[::1] deg,
                    long[::1] prefix,
                    long[::1] letter,
                    long[::1] split_offsets,
                    long[::1] split_left,
                    long[::1] split_right):
    cdef Py_ssize_t B = incs.shape[0]
    cdef Py_ssize_t S = incs.shape[1]
    cdef Py_ssize_t n = incs.shape[2]
    cdef Py_ssize_t W = deg.shape[0]
    out_np = np.zeros((B, W), dtype=np.float64)
    cdef double[:, ::1] out = out_np

    cdef double *state = <double *> malloc(W * sizeof(double))
    cdef double *nxt = <double *> malloc(W * sizeof(double))
    cdef double *seg_exp = <double *> malloc(W * sizeof(double))
    cdef double *swap
    if state == NULL or nxt == NULL or seg_exp == NULL:
        free(state); free(nxt); free(seg_exp)
        raise MemoryError()

    cdef Py_ssize_t b, s, w, j
    cdef double acc
    try:
        with nogil:
            for b in range(B):
                for w in range(W):
                    state[w] = 0.0
                state[0] = 1.0
                seg_exp[0] = 1.0
                for s in range(S):
                    for w in range(1, W):
                        seg_exp[w] = seg_exp[prefix[w]] * incs[b, s, letter[w]] / deg[w]
                    for w in range(W):
                        acc = 0.0
                        for j in range(split_offsets[w], split_offsets[w + 1]):
                            acc = acc + state[split_left[j]] * seg_exp[split_right[j]]
                        nxt[w] = acc
                    swap = state
                    state = nxt
                    nxt = swap
                for w in range(W):
                    out[b, w] = state[w]
    finally:
        free(state)
        free(nxt)
        free(seg_exp)
    return out_np
