"""Backend selection for the hot kernels.

The compiled extension is used when it imported cleanly; setting
NCFLOW_DISABLE_SPEEDUPS=1 (or a failed build) selects the numpy fallback.
Both expose the same chord_sig_chunk contract and are individually
deterministic; see benchmarks/bench_core.py for the speed comparison.
"""

import os

import numpy as np

from . import fallback
from .tables import SigTables, batch_mul, sig_tables

_backends = {"fallback": fallback}
try:
    from . import _speedups

    _backends["speedups"] = _speedups
except ImportError:
    pass

if os.environ.get("NCFLOW_DISABLE_SPEEDUPS") or "speedups" not in _backends:
    BACKEND = "fallback"
else:
    BACKEND = "speedups"

HAVE_SPEEDUPS = "speedups" in _backends

__all__ = [
    "BACKEND",
    "HAVE_SPEEDUPS",
    "SigTables",
    "sig_tables",
    "batch_mul",
    "chord_sig_chunk",
    "chord_sig_sums",
]


def chord_sig_chunk(incs, tables, backend=None):
    """Batch chord-path signatures: (B, S, n) increments -> (B, W) coefficients."""
    incs = np.ascontiguousarray(incs, dtype=np.float64)
    name = backend or BACKEND
    impl = _backends.get(name)
    if impl is None:
        raise ValueError(f"backend {name!r} is not available in this install")
    if impl is fallback:
        return fallback.chord_sig_chunk(incs, tables)
    return impl.chord_sig_chunk(
        incs,
        tables.deg,
        tables.prefix,
        tables.letter,
        tables.split_offsets,
        tables.split_left,
        tables.split_right,
    )


def chord_sig_sums(incs, tables, backend=None):
    """Per-word running sums over a chunk: returns (sum, sum of squares, count).

    The reductions use numpy's deterministic pairwise summation over the
    chunk axis; chunk boundaries are fixed by the caller, so serial and
    parallel runs reduce identical blocks in identical order.
    """
    states = chord_sig_chunk(incs, tables, backend=backend)
    return states.sum(axis=0), (states * states).sum(axis=0), states.shape[0]
