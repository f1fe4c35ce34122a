"""Experiment runner: every subcommand reads flags (optionally seeded from
a key = value config file, flags winning), runs one experiment, and writes a
CSV or JSON table with a '#'-metadata block recording the configuration and
library version. Identical configuration gives byte-identical output; the
execution knobs (output path, format, thread count) stay out of the
metadata for exactly that reason.

Exit codes: 0 success, 1 bad configuration, 2 resource-guard violation,
3 failed numerical cross-check.
"""

import argparse
import sys
from math import factorial

import numpy as np

from . import __version__, freelie, matfun, ncmeasure, ncseries, pathsig, rmt, wiener
from ._util import (ConfigError, GuardError, NumericalCheckError, make_rng,
                    print_err, write_table)

_EXECUTION_KEYS = ("config", "out", "format", "jobs", "command", "func",
                   "needs")


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage as a ConfigError instead of exiting
    with status 2 (which is reserved for guard violations)."""

    def error(self, message):
        raise ConfigError(message)


def _word(text):
    text = text.strip()
    if text in ("", "e"):
        return ()
    return tuple(int(t) for t in text.split())


def _word_str(w):
    return " ".join(str(l) for l in w) if w else "e"


def _group_word(text):
    return pathsig.GroupWord(_word(text))


def _floats(text):
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _laurent_terms(text):
    """Parse "3|e; 2|1 -2; -1|2 1" into (GroupWord, coefficient) pairs."""
    terms = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coeff, sep, word = chunk.partition("|")
        if not sep:
            raise ConfigError(f"term {chunk!r} needs the form coeff|word")
        try:
            c = complex(coeff.strip().replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"bad coefficient in {chunk!r}") from exc
        terms.append((_group_word(word), c))
    if not terms:
        raise ConfigError("empty Laurent combination")
    return terms


def _load_config(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"config line {raw.rstrip()!r} is not key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fmt(value):
    if isinstance(value, float):
        return value
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return value


def _meta(args, extra=None):
    meta = {"experiment": args.command, "version": __version__}
    for key, value in sorted(vars(args).items()):
        if key in _EXECUTION_KEYS or value is None:
            continue
        if isinstance(value, list) and value and isinstance(value[0], tuple):
            continue  # parsed term lists are echoed through their flag string
        meta[key.replace("_", "-")] = _fmt(value)
    for key, value in (extra or {}).items():
        meta[key] = _fmt(value)
    return meta


def _emit(args, meta, header, rows):
    if args.out and args.out != "-":
        write_table(args.out, meta, header, rows, args.format)
    else:
        write_table(sys.stdout, meta, header, rows, args.format)


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("seed is mandatory for this experiment")


def _report_rows(reports, trailing=()):
    rows = []
    for rep, tail in zip(reports, trailing or [()] * len(reports)):
        rows.append(rep.row() + tuple(tail))
    return rows


# ---------------------------------------------------------------- commands


def _cmd_sig(args):
    with open(args.path, encoding="utf-8") as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.startswith("#")]
    if not lines:
        raise ConfigError(f"no paths in {args.path}")
    rows = []
    for k, line in enumerate(lines):
        p = pathsig.PLPath.from_text(line)
        sig = pathsig.signature(p, args.cap)
        for w, c in sig.items():
            rows.append((k, _word_str(w), float(c.real), float(c.imag)))
    _emit(args, _meta(args), ("path", "word", "re", "im"), rows)


def _cmd_bch(args):
    if args.n < 2:
        raise ConfigError("the bracket table needs n >= 2")
    x = freelie.generator(args.n, args.degree, 1)
    y = freelie.generator(args.n, args.degree, 2)
    z = freelie.bch(x, y)
    rows = [(len(w), _word_str(w),
             freelie.bracketing_str(freelie.bracketing(w)),
             float(c.real), float(c.imag))
            for w, c in z.items()]
    _emit(args, _meta(args),
          ("degree", "lyndon_word", "bracketing", "re", "im"), rows)


def _cmd_lyndon_basis(args):
    rows = [(len(w), _word_str(w), freelie.bracketing_str(b))
            for w, b in freelie.lyndon_basis(args.n, args.degree)]
    _emit(args, _meta(args), ("degree", "lyndon_word", "bracketing"), rows)


def _cmd_shuffle_check(args):
    _require_seed(args)
    rng = make_rng(args.seed)
    rows = []
    worst = 0.0
    for t in range(args.trials):
        p = pathsig.PLPath(rng.standard_normal((5, args.n)))
        q = pathsig.PLPath(rng.standard_normal((4, args.n)))
        dj = int(rng.integers(1, args.cap))
        dk = int(rng.integers(1, args.cap - dj + 1))
        J = tuple(int(l) for l in rng.integers(1, args.n + 1, size=dj))
        K = tuple(int(l) for l in rng.integers(1, args.n + 1, size=dk))
        lhs, rhs = ncmeasure.shuffle_eval(J, K, p, args.cap)
        res = abs(lhs - rhs)
        rows.append(("shuffle", t, _word_str(J), _word_str(K), res))
        worst = max(worst, res)
        lhs, rhs = ncmeasure.deconcat_eval(J, p, q)
        res = abs(lhs - rhs)
        rows.append(("deconcat", t, _word_str(J), "", res))
        worst = max(worst, res)
    _emit(args, _meta(args, {"max-residual": worst}),
          ("check", "trial", "J", "K", "residual"), rows)


def _cmd_wiener_expsig(args):
    _require_seed(args)
    est = wiener.expected_signature(args.n, args.cap, args.q, args.paths,
                                    args.seed, n_jobs=args.jobs)
    target = wiener.gaussian_target(args.n, args.cap)
    rows = []
    for w, c in est.series.items():
        rows.append((_word_str(w), float(c.real), float(c.imag),
                     float(target[w].real), est.std_error(w)))
    _emit(args, _meta(args), ("word", "estimate_re", "estimate_im", "target",
                              "std_error"), rows)


def _cmd_heis_heat(args):
    _require_seed(args)
    res = wiener.heisenberg_heat_check(args.lambdas, args.paths, args.q,
                                       args.seed, quad_T=args.quad_T,
                                       quad_steps=args.quad_steps,
                                       n_jobs=args.jobs)
    extra = {"fitted-scale": res.scale, "kernel-mass": res.mass}
    _emit(args, _meta(args, extra), ("lambda", "empirical", "kernel", "se"),
          [tuple(row) for row in res.rows])


def _cmd_folland(args):
    pts = [(1, 0, 0), (0, 1, 0), (1, 1, 0.3), (0.5, -0.7, 0.2),
           (-1, 0.4, -0.5), (2, 0, 0.1), (0, 0, 1), (0.3, 0.3, 0.9)]
    rows = []
    worst = 0.0
    for p in pts:
        r = wiener.folland_residual(p, args.h)
        r_half = wiener.folland_residual(p, args.h / 2)
        rows.append((p[0], p[1], p[2], r, r_half, r / r_half))
        worst = max(worst, r)
    _emit(args, _meta(args, {"max-residual": worst}),
          ("y1", "y2", "v", "residual", "residual_half", "ratio"), rows)


def _cmd_haar_coeff(args):
    _require_seed(args)
    terms = _laurent_terms(args.f)
    gammas = [_group_word(g) for g in args.gamma] if args.gamma else \
        [w for w, _ in terms]
    reports, words = [], []
    for k, gamma in enumerate(gammas):
        rep = rmt.haar_coefficient(terms, gamma, args.N, args.samples,
                                   args.seed, n_jobs=args.jobs)
        reports.append(rep)
        words.append((gamma.to_text(),))
    _emit(args, _meta(args), rmt.REPORT_HEADER + ("gamma",),
          _report_rows(reports, words))


def _cmd_haar_orth(args):
    _require_seed(args)
    gamma = _group_word(args.gamma)
    reports = []
    for N in args.sizes:
        reports.append(rmt.haar_coefficient(gamma, pathsig.GroupWord(()),
                                            N, args.samples, args.seed,
                                            n_jobs=args.jobs))
    _emit(args, _meta(args), rmt.REPORT_HEADER, _report_rows(reports))


def _cmd_gue_moments(args):
    _require_seed(args)
    words = [_word(w) for w in args.words.split(";")]
    free_sc = ncmeasure.free_product(
        [ncmeasure.semicircle_component()
         for _ in range(max(max(w, default=1) for w in words))])
    literal = ncmeasure.free_gaussian(free_sc.n)
    reports, tails = [], []
    for w in words:
        rep = rmt.gue_word_moment(w, args.N, args.samples, args.seed,
                                  n_jobs=args.jobs)
        reports.append(rep)
        tails.append((_word_str(w), float(free_sc.eval(w).real),
                      float(literal.eval(w).real)))
    note = ("single-variable even moments follow the Catalan numbers; the "
            "free product of classical Gaussians printed alongside differs "
            "from the large-N limit at (1,1,1,1): 3 vs 2")
    _emit(args, _meta(args, {"note": note}),
          rmt.REPORT_HEADER + ("word", "free_prediction", "classical_free_prediction"),
          _report_rows(reports, tails))


def _cmd_free_moments(args):
    tau = ncmeasure.parse_rule(args.rule)
    words = [_word(w) for w in args.words.split(";")]
    rows = []
    for w in words:
        value = tau.eval(w)
        rows.append((_word_str(w), float(value.real), float(value.imag)))
    if args.dump_table is not None:
        with open(args.dump_table, "w", encoding="utf-8") as fh:
            ncmeasure.save_moments(fh, tau, args.max_degree)
    _emit(args, _meta(args), ("word", "re", "im"), rows)


_MATRIX_FUNCTIONS = {
    "expsq": lambda: rmt.scalar_matrix_function(lambda z: np.exp(-z**2)),
    "cos": lambda: rmt.scalar_matrix_function(np.cos),
}


def _cmd_matrix_fourier(args):
    _require_seed(args)
    if args.function not in _MATRIX_FUNCTIONS:
        raise ConfigError(f"unknown test function {args.function!r}; "
                          f"choose from {sorted(_MATRIX_FUNCTIONS)}")
    g = _MATRIX_FUNCTIONS[args.function]()
    gamma = _group_word(args.gamma)

    def f(*mats):
        return g(mats[0])

    rep = rmt.matrix_fourier_coeff(f, gamma, args.N, args.samples, args.seed,
                                   n=args.n, n_jobs=args.jobs)
    extra = {"resampled": rep.resampled,
             "volume-vn": rmt.volume_vn(args.N)}
    _emit(args, _meta(args, extra), rmt.REPORT_HEADER, _report_rows([rep]))


def _cmd_al_identity(args):
    _require_seed(args)
    rng = make_rng(args.seed)
    rows = []
    worst = 0.0
    for t in range(args.trials):
        mats = [rng.standard_normal((args.size, args.size))
                + 1j * rng.standard_normal((args.size, args.size))
                for _ in range(2 * args.size)]
        value = matfun.amitsur_levitsky(mats)
        scale = 1.0
        for M in mats:
            scale *= np.linalg.norm(M, 2)
        scale *= factorial(2 * args.size)
        rel = float(np.abs(value).max() / scale)
        rows.append((t, rel, scale))
        worst = max(worst, rel)
    _emit(args, _meta(args, {"max-residual": worst}),
          ("trial", "residual", "input_scale"), rows)


# ------------------------------------------------------------------ parser


def _add_common(sub, seeded=True):
    sub.add_argument("--config", type=str, default=None,
                     help="key = value file; flags override it")
    sub.add_argument("--out", type=str, default="-",
                     help="output path ('-' for stdout)")
    sub.add_argument("--format", type=str, choices=("csv", "json"),
                     default="csv")
    sub.add_argument("--jobs", type=int, default=1,
                     help="Monte Carlo worker threads (results identical)")
    if seeded:
        sub.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = _Parser(prog="ncflow",
                     description="signature, free-probability, and "
                                 "random-matrix experiments")
    parser.add_argument("--version", action="version",
                        version=f"ncflow {__version__}")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    s = subs.add_parser("sig", help="signatures of the paths in a file")
    s.add_argument("--path", type=str, required=False, default=None)
    s.add_argument("--cap", type=int, default=4)
    _add_common(s, seeded=False)
    s.set_defaults(func=_cmd_sig, needs=("path",))

    s = subs.add_parser("bch", help="Lyndon-coordinate table of log(exp exp)")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--degree", type=int, default=3)
    _add_common(s, seeded=False)
    s.set_defaults(func=_cmd_bch)

    s = subs.add_parser("lyndon-basis", help="Lyndon words with bracketings")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--degree", type=int, default=5)
    _add_common(s, seeded=False)
    s.set_defaults(func=_cmd_lyndon_basis)

    s = subs.add_parser("shuffle-check",
                        help="shuffle/deconcatenation residuals on random paths")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--cap", type=int, default=4)
    s.add_argument("--trials", type=int, default=20)
    _add_common(s)
    s.set_defaults(func=_cmd_shuffle_check)

    s = subs.add_parser("wiener-expsig",
                        help="expected chord signature vs the Gaussian target")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--cap", type=int, default=4)
    s.add_argument("--q", type=int, default=10)
    s.add_argument("--paths", type=int, default=100000)
    _add_common(s)
    s.set_defaults(func=_cmd_wiener_expsig)

    s = subs.add_parser("heis-heat",
                        help="heat-kernel characteristic function check")
    s.add_argument("--lambdas", type=_floats, default=[0.5, 1.0, 2.0])
    s.add_argument("--paths", type=int, default=100000)
    s.add_argument("--q", type=int, default=10)
    s.add_argument("--quad-T", type=float, default=8.0)
    s.add_argument("--quad-steps", type=int, default=4096)
    _add_common(s)
    s.set_defaults(func=_cmd_heis_heat)

    s = subs.add_parser("folland", help="sub-Laplacian residuals of the kernel")
    s.add_argument("--h", type=float, default=1e-3)
    _add_common(s, seeded=False)
    s.set_defaults(func=_cmd_folland)

    s = subs.add_parser("haar-coeff",
                        help="Fourier coefficients of a Laurent combination")
    s.add_argument("--f", type=str, default="3|e; 2|1 -2",
                   help='terms "coeff|word; ..." with "e" the empty word')
    s.add_argument("--gamma", type=str, action="append", default=None,
                   help="word to test (repeatable; default: the words of f)")
    s.add_argument("--N", type=int, default=32)
    s.add_argument("--samples", type=int, default=10000)
    _add_common(s)
    s.set_defaults(func=_cmd_haar_coeff)

    s = subs.add_parser("haar-orth",
                        help="trace decay of a reduced word across sizes")
    s.add_argument("--gamma", type=str, default="1 2 -1 -2")
    s.add_argument("--sizes", type=_ints, default=[4, 8, 16])
    s.add_argument("--samples", type=int, default=10000)
    _add_common(s)
    s.set_defaults(func=_cmd_haar_orth)

    s = subs.add_parser("gue-moments",
                        help="word moments of Hermitian Gaussian tuples")
    s.add_argument("--words", type=str, default="1 1; 1 1 1 1; 1 1 2 2; 1 2 1 2")
    s.add_argument("--N", type=int, default=64)
    s.add_argument("--samples", type=int, default=200)
    _add_common(s)
    s.set_defaults(func=_cmd_gue_moments)

    s = subs.add_parser("free-moments", help="moments of a named measure rule")
    s.add_argument("--rule", type=str, default="free(gauss,gauss)")
    s.add_argument("--words", type=str, default="1 1; 1 1 1 1; 1 2 1 2")
    s.add_argument("--max-degree", type=int, default=6)
    s.add_argument("--dump-table", type=str, default=None,
                   help="also write the moments as a 'word : re im' table")
    _add_common(s, seeded=False)
    s.set_defaults(func=_cmd_free_moments)

    s = subs.add_parser("matrix-fourier",
                        help="fixed-size Fourier coefficient of a test function")
    s.add_argument("--function", type=str, default="expsq")
    s.add_argument("--gamma", type=str, default="1")
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--n", type=int, default=None,
                   help="number of Haar factors (default: from gamma)")
    s.add_argument("--samples", type=int, default=20000)
    _add_common(s)
    s.set_defaults(func=_cmd_matrix_fourier)

    s = subs.add_parser("al-identity",
                        help="standard-polynomial residuals on random tuples")
    s.add_argument("--size", type=int, default=2)
    s.add_argument("--trials", type=int, default=100)
    _add_common(s)
    s.set_defaults(func=_cmd_al_identity)

    return parser, {name: sp for name, sp in subs.choices.items()}


def _apply_config(parser, subparsers, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        sub = subparsers[args.command]
        defaults = {}
        for action in sub._actions:
            if action.dest in cfg:
                raw = cfg.pop(action.dest)
                convert = action.type or str
                if isinstance(action, argparse._AppendAction):
                    defaults[action.dest] = [convert(part.strip())
                                             for part in raw.split(";")]
                else:
                    defaults[action.dest] = convert(raw)
        if cfg:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(cfg))}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def run(argv=None):
    parser, subparsers = build_parser()
    args = _apply_config(parser, subparsers, argv)
    needs = getattr(args, "needs", ())
    for key in needs:
        if getattr(args, key, None) is None:
            raise ConfigError(f"--{key} is required for {args.command}")
    args.func(args)


def main(argv=None):
    try:
        run(argv)
    except ConfigError as exc:
        print_err(f"config error: {exc}")
        return 1
    except GuardError as exc:
        print_err(f"guard violation: {exc}")
        return 2
    except NumericalCheckError as exc:
        print_err(f"numerical check failed: {exc}")
        return 3
    except (ValueError, TypeError, OSError) as exc:
        print_err(f"config error: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
