"""Shared plumbing: errors, seed derivation, deterministic Monte Carlo driver,
and table output helpers used by the CLI and the experiment modules."""

import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = [
    "GuardError",
    "ConfigError",
    "NumericalCheckError",
    "splitmix64",
    "derive_seed",
    "make_rng",
    "chunked_monte_carlo",
    "format_float",
    "write_table",
]


class GuardError(Exception):
    """A resource guard (cap/N/q ceiling or work budget) was violated."""


class ConfigError(Exception):
    """Invalid experiment configuration."""


class NumericalCheckError(Exception):
    """An internal numerical cross-check failed (quadrature, basis residual)."""


_MASK = (1 << 64) - 1


def splitmix64(state):
    """One splitmix64 step; returns (new_state, output). All arithmetic mod 2^64."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def derive_seed(master, *indices):
    """Derive a stream seed from a master seed and integer indices.

    Pure function of its arguments, so any worker can compute the seed for
    any chunk; this is what makes parallel and serial runs identical.
    """
    state = (int(master) & _MASK) ^ 0x5851F42D4C957F2D
    for ix in indices:
        state ^= (int(ix) & _MASK) * 0xD1342543DE82EF95 & _MASK
        state, _ = splitmix64(state)
    _, out = splitmix64(state)
    return out


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK))


def chunked_monte_carlo(total, chunk_size, worker, n_jobs=1):
    """Accumulate Monte Carlo partial sums over fixed chunks in fixed order.

    worker(chunk_index, start, count) must be a pure function returning a
    tuple of numpy arrays (or scalars) to be summed componentwise. Chunk
    boundaries depend only on (total, chunk_size), and partial results are
    combined in chunk order, so the reduction is bitwise identical for any
    n_jobs.
    """
    if total < 1:
        raise ValueError("total must be >= 1")
    chunks = []
    start = 0
    index = 0
    while start < total:
        count = min(chunk_size, total - start)
        chunks.append((index, start, count))
        start += count
        index += 1

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            futures = [pool.submit(worker, *c) for c in chunks]
            partials = [f.result() for f in futures]
    else:
        partials = [worker(*c) for c in chunks]

    acc = list(partials[0])
    for part in partials[1:]:
        for k, term in enumerate(part):
            acc[k] = acc[k] + term
    return tuple(acc)


def mean_and_se(total_sum, total_sumsq, count):
    """Sample mean and standard error of the mean from running sums.

    Works elementwise on arrays; complex sums pair with real |x|^2 sums.
    """
    mean = total_sum / count
    if count < 2:
        return mean, np.zeros_like(np.real(mean))
    var = (total_sumsq - count * np.abs(mean) ** 2) / (count - 1)
    var = np.maximum(np.real(var), 0.0)
    return mean, np.sqrt(var / count)


def format_float(x):
    """Shortest round-trip decimal form; deterministic for a given double."""
    x = float(x)
    if x == 0.0:  # normalize -0.0 so serial/parallel text output can't differ
        x = 0.0
    return repr(x)


def write_table(stream_or_path, meta, header, rows, fmt="csv"):
    """Write a table with a '#' metadata block as CSV, or mirror it as JSON.

    meta is an ordered mapping written one "# key = value" line at a time;
    rows are sequences matching header. Floats are rendered via
    format_float so identical data gives identical bytes.
    """

    def render(cell):
        if isinstance(cell, float):
            return format_float(cell)
        if isinstance(cell, (np.floating,)):
            return format_float(float(cell))
        if isinstance(cell, (int, np.integer)):
            return str(int(cell))
        return str(cell)

    own = isinstance(stream_or_path, (str, bytes))
    stream = open(stream_or_path, "w", encoding="utf-8") if own else stream_or_path
    try:
        if fmt == "csv":
            for key, value in meta.items():
                stream.write(f"# {key} = {render(value)}\n")
            stream.write(",".join(header) + "\n")
            for row in rows:
                cells = [render(c) for c in row]
                quoted = []
                for cell in cells:
                    if "," in cell or '"' in cell:
                        cell = '"' + cell.replace('"', '""') + '"'
                    quoted.append(cell)
                stream.write(",".join(quoted) + "\n")
        elif fmt == "json":
            body = {
                "meta": {k: render(v) for k, v in meta.items()},
                "header": list(header),
                "rows": [[render(c) for c in row] for row in rows],
            }
            json.dump(body, stream, indent=1, sort_keys=False)
            stream.write("\n")
        else:
            raise ConfigError(f"unknown output format: {fmt!r}")
    finally:
        if own:
            stream.close()


def capture_table(meta, header, rows, fmt="csv"):
    buf = io.StringIO()
    write_table(buf, meta, header, rows, fmt)
    return buf.getvalue()


def print_err(msg):
    print(msg, file=sys.stderr)
