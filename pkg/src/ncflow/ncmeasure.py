"""Moment functionals on noncommutative words: free products through the
centering recursion, named measure rules, the dual Fourier transform of a
path, coefficient pairings, and convolution of functionals.

A functional is a normalized linear map on words; everything here stays at
the moment level, so a measure is its rule plus a memo table. Free products
follow the alternating-centering recursion: group a word into maximal
same-component blocks, split each block into mean plus centered part,
expand, and use that alternating products of centered elements vanish.
"""

from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

from . import ncseries, pathsig
from ._util import ConfigError

__all__ = [
    "Component",
    "MomentFunctional",
    "eval",
    "free_product",
    "free_gaussian",
    "haar_free_product",
    "delta_free_product",
    "gaussian_component",
    "semicircle_component",
    "haar_circle_component",
    "point_mass_component",
    "table_component",
    "from_table",
    "dual_ft",
    "delta_J",
    "pair",
    "convolve",
    "shuffle_eval",
    "deconcat_eval",
    "save_moments",
    "load_moments",
    "parse_rule",
]

_DEGREE_DEFAULT = 8


@dataclass(frozen=True)
class Component:
    """Single-variable moment rule for one leg of a free product.

    moments(e) returns the e-th moment; laurent components accept negative
    exponents. A component must be normalized (zeroth moment 1) to enter a
    free product.
    """

    name: str
    moments: object
    laurent: bool = False
    max_degree: object = None

    def moment(self, e):
        e = int(e)
        if e < 0 and not self.laurent:
            raise ValueError(f"component {self.name} has no inverse moments")
        if self.max_degree is not None and abs(e) > self.max_degree:
            raise ValueError(
                f"degree {abs(e)} beyond component table ({self.max_degree})")
        return complex(self.moments(e))


def gaussian_component():
    def moments(e):
        if e % 2:
            return 0.0
        out = 1.0
        for j in range(1, e, 2):
            out *= j
        return out

    return Component("gauss", moments)


def semicircle_component():
    def moments(e):
        if e % 2:
            return 0.0
        k = e // 2
        return comb(2 * k, k) / (k + 1)

    return Component("semicircle", moments)


def haar_circle_component():
    return Component("haar", lambda e: 1.0 if e == 0 else 0.0, laurent=True)


def point_mass_component(a):
    a = complex(a)
    return Component(f"delta({a})", lambda e: a**e)


def table_component(moments, name="table"):
    """Component from an explicit {exponent: moment} table; absent entries
    within the table's degree range are zero."""
    table = {int(e): complex(c) for e, c in moments.items()}
    if table.get(0, None) != 1:
        raise ValueError("component tables must be normalized (moment 0 is 1)")
    top = max(abs(e) for e in table)
    laurent = any(e < 0 for e in table)
    return Component(name, lambda e: table.get(e, 0.0), laurent=laurent,
                     max_degree=top)


def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            out[e1 + e2] = out.get(e1 + e2, 0j) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def _normalize_blocks(seq):
    """Collapse a block sequence: multiply adjacent same-component
    polynomials, absorb constants into a scalar prefactor, short-circuit
    on a zero factor. Returns (scalar, blocks) with blocks None for zero."""
    scalar = 1.0 + 0j
    stack = []
    for item in seq:
        pending = (item[0], {e: complex(c) for e, c in dict(item[1]).items()
                             if c != 0})
        while pending is not None:
            ci, poly = pending
            pending = None
            if not poly:
                return 0j, None
            if set(poly) == {0}:
                scalar *= poly[0]
            elif stack and stack[-1][0] == ci:
                prev = stack.pop()
                pending = (ci, _poly_mul(prev[1], poly))
            else:
                stack.append((ci, poly))
    frozen = tuple((ci, tuple(sorted(poly.items()))) for ci, poly in stack)
    return scalar, frozen


def _poly_moment(component, poly):
    total = 0j
    for e, c in poly:
        total += c * component.moment(e)
    return total


def _eval_blocks(blocks, components, memo):
    """Centering recursion on an alternating block sequence.

    Each block is split as mean + centered part and the product expanded
    over subsets; the all-centered term is an alternating product of
    centered elements and vanishes, and every other term has strictly
    fewer blocks after deletions and merges.
    """
    if blocks is None:
        return 0j
    if not blocks:
        return 1.0 + 0j
    if len(blocks) == 1:
        ci, poly = blocks[0]
        return _poly_moment(components[ci], poly)
    hit = memo.get(blocks)
    if hit is not None:
        return hit
    k = len(blocks)
    means = [_poly_moment(components[ci], poly) for ci, poly in blocks]
    centered = []
    for (ci, poly), mu in zip(blocks, means):
        d = dict(poly)
        d[0] = d.get(0, 0j) - mu
        centered.append((ci, d))
    total = 0j
    for mask in range(1, 1 << k):
        coeff = 1.0 + 0j
        rest = []
        for i in range(k):
            if mask >> i & 1:
                coeff *= means[i]
            else:
                rest.append(centered[i])
        if coeff == 0:
            continue
        scalar, sub = _normalize_blocks(rest)
        if sub is None or scalar == 0:
            continue
        total += coeff * scalar * _eval_blocks(sub, components, memo)
    memo[blocks] = total
    return total


class MomentFunctional:
    """Normalized linear functional on words over n letters.

    kind "Z" takes words of positive letters (polynomial alphabet); kind
    "X" takes signed letters (Laurent alphabet, negative meaning inverse).
    Evaluation is memoized; functionals are immutable after construction.
    """

    __slots__ = ("kind", "n", "normalized", "max_degree", "description",
                 "_rule", "_memo")

    def __init__(self, kind, n, rule, normalized=True, max_degree=None,
                 description=""):
        if kind not in ("Z", "X"):
            raise ValueError("kind must be 'Z' or 'X'")
        if n < 1:
            raise ValueError("arity must be >= 1")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "_rule", rule)
        object.__setattr__(self, "normalized", bool(normalized))
        object.__setattr__(self, "max_degree", max_degree)
        object.__setattr__(self, "description", description)
        object.__setattr__(self, "_memo", {})
        if self.normalized and self.eval(()) != 1:
            raise ValueError("normalized functional must send the empty word to 1")

    def __setattr__(self, name, value):
        raise AttributeError("MomentFunctional is immutable")

    def _check_word(self, word):
        for letter in word:
            if self.kind == "Z":
                if not 1 <= letter <= self.n:
                    raise ValueError(f"letter {letter} outside Z alphabet of arity {self.n}")
            else:
                if letter == 0 or abs(letter) > self.n:
                    raise ValueError(f"letter {letter} outside X alphabet of arity {self.n}")
        if self.max_degree is not None and len(word) > self.max_degree:
            raise ValueError(
                f"degree {len(word)} beyond supported degree {self.max_degree}")

    def eval(self, word):
        word = tuple(int(l) for l in word)
        self._check_word(word)
        hit = self._memo.get(word)
        if hit is None:
            hit = complex(self._rule(word))
            self._memo[word] = hit
        return hit

    def __repr__(self):
        return (f"MomentFunctional({self.description or 'custom'}, "
                f"kind={self.kind}, n={self.n})")


def eval(tau, w):
    return tau.eval(w)


def _word_to_blocks(word, laurent):
    seq = []
    for letter in word:
        e = 1 if letter > 0 else -1
        if e < 0 and not laurent:
            raise ValueError("negative letters need a Laurent alphabet")
        seq.append((abs(letter) - 1, {e: 1.0 + 0j}))
    return _normalize_blocks(seq)


def free_product(components, description=None):
    """Free product of normalized single-variable components; the unique
    functional restricting to each component and killing alternating
    products of centered elements."""
    components = tuple(components)
    if not components:
        raise ValueError("need at least one component")
    for comp in components:
        if comp.moment(0) != 1:
            raise ValueError(f"component {comp.name} is not normalized")
    laurent = any(comp.laurent for comp in components)
    degrees = [comp.max_degree for comp in components]
    max_degree = None if all(d is None for d in degrees) else \
        min(d for d in degrees if d is not None)
    memo = {}

    def rule(word):
        scalar, blocks = _word_to_blocks(word, laurent)
        if blocks is None:
            return 0j
        return scalar * _eval_blocks(blocks, components, memo)

    if description is None:
        description = "free(" + ",".join(c.name for c in components) + ")"
    return MomentFunctional("X" if laurent else "Z", len(components), rule,
                            normalized=True, max_degree=max_degree,
                            description=description)


def free_gaussian(n):
    """Free product of n standard Gaussian rules: single-letter powers keep
    the classical moments (1, 3, 15 doubled factorials), mixed alternating
    words vanish."""
    return free_product([gaussian_component() for _ in range(n)])


def haar_free_product(n):
    """Constant-term functional on the Laurent alphabet: 1 exactly when
    the word reduces to the identity in the free group. Coincides with the
    free product of circle-uniform components (the engine cross-check)."""
    if n < 1:
        raise ValueError("arity must be >= 1")

    def rule(word):
        return 1.0 + 0j if pathsig.GroupWord(word).is_identity() else 0j

    return MomentFunctional("X", n, rule, normalized=True,
                            description=f"haar({n})")


def delta_free_product(a):
    """Point evaluation: a word maps to the product of the coordinates'
    powers, depending only on the commutative image."""
    a = [complex(x) for x in np.atleast_1d(a)]
    if not a:
        raise ValueError("need at least one coordinate")

    def rule(word):
        out = 1.0 + 0j
        for letter in word:
            out *= a[letter - 1]
        return out

    values = ",".join(str(x) for x in a)
    return MomentFunctional("Z", len(a), rule, normalized=True,
                            description=f"delta({values})")


def from_table(table, n, kind="Z", max_degree=_DEGREE_DEFAULT,
               description="table"):
    """Functional from an explicit word -> moment table; absent words
    within the degree bound evaluate to 0."""
    table = {tuple(int(l) for l in w): complex(c) for w, c in table.items()}
    normalized = table.get((), 0) == 1

    def rule(word):
        return table.get(word, 0j)

    return MomentFunctional(kind, n, rule, normalized=normalized,
                            max_degree=max_degree, description=description)


def _series_for(tau, p, cap):
    if isinstance(p, pathsig.GroupWord):
        return pathsig.signature_word(p, cap, dim=tau.n)
    if isinstance(p, pathsig.PLPath):
        if p.dim > tau.n:
            raise ValueError("path dimension exceeds the functional's arity")
        return pathsig.signature(p, cap)
    raise TypeError("expected a PLPath or GroupWord")


def dual_ft(tau, p, cap, scale=1j):
    """Apply the functional to the truncated signature with each letter
    scaled (by i in the Fourier convention): sum over words of
    sig[w] * scale^|w| * tau(w). Truncated by construction; the tail is
    not quantified."""
    if tau.kind != "Z":
        raise ValueError("dual transform needs a polynomial-alphabet functional")
    if tau.max_degree is not None and cap > tau.max_degree:
        raise ValueError(
            f"cap {cap} exceeds the functional's degree bound {tau.max_degree}")
    sig = _series_for(tau, p, cap)
    scale = complex(scale)
    total = 0j
    for w, c in sig.items():
        total += c * scale ** len(w) * tau.eval(w)
    return total


def delta_J(J):
    """Coefficient extractor at the word J (an iterated-integral functional
    under the duality pairing); unnormalized unless J is empty."""
    J = tuple(int(l) for l in J)
    if any(l < 1 for l in J):
        raise ValueError("J is a word of positive letters")

    def rule(word):
        return 1.0 + 0j if word == J else 0j

    return MomentFunctional("Z", max(J) if J else 1, rule,
                            normalized=(J == ()),
                            description=f"delta_J{J}")


def pair(f, s):
    """Bilinear coefficient pairing sum_I f[I] * s[I] of two truncated
    series; words pair orthonormally, so this realizes derivatives of the
    point mass at the identity paired against signatures."""
    total = 0j
    for w, c in f.items():
        total += c * s[w]
    return total


def convolve(tau, sigma):
    """Convolution on the polynomial alphabet: each letter of the word is
    routed to one of the two legs, order preserved within each leg, and
    the two leg words are evaluated independently and summed over the
    2^|w| routings."""
    if tau.kind != "Z" or sigma.kind != "Z":
        raise ValueError("convolution is defined for polynomial alphabets")
    if tau.n != sigma.n:
        raise ValueError("convolution needs matching arities")
    degrees = [d for d in (tau.max_degree, sigma.max_degree) if d is not None]
    max_degree = min(degrees) if degrees else None

    def rule(word):
        k = len(word)
        total = 0j
        for mask in range(1 << k):
            left = tuple(word[i] for i in range(k) if mask >> i & 1)
            right = tuple(word[i] for i in range(k) if not mask >> i & 1)
            total += tau.eval(left) * sigma.eval(right)
        return total

    return MomentFunctional("Z", tau.n, rule,
                            normalized=tau.normalized and sigma.normalized,
                            max_degree=max_degree,
                            description=f"({tau.description})*({sigma.description})")


def shuffle_eval(J, K, p, cap):
    """Both sides of the shuffle identity on iterated integrals: lhs is
    W_J(p) * W_K(p), rhs sums W over all interleavings of J and K."""
    J = tuple(int(l) for l in J)
    K = tuple(int(l) for l in K)
    if len(J) + len(K) > cap:
        raise ValueError("cap too small for the shuffle degree")
    sig = _sig_any(p, cap)
    lhs = sig[J] * sig[K]
    rhs = sum(sig[w] for w in ncseries.shuffle(J, K))
    return lhs, rhs


def deconcat_eval(J, p, q):
    """Both sides of the deconcatenation identity: W_J of the concatenated
    path against the sum over splittings J = J[:v] + J[v:] with the first
    part integrated along the first leg."""
    J = tuple(int(l) for l in J)
    cap = max(len(J), 1)
    sig_p = _sig_any(p, cap)
    sig_q = _sig_any(q, cap)
    joined = pathsig.concat(_as_pl(p), _as_pl(q))
    lhs = pathsig.signature(joined, cap)[J]
    rhs = sum(sig_p[J[:v]] * sig_q[J[v:]] for v in range(len(J) + 1))
    return lhs, rhs


def _as_pl(p):
    if isinstance(p, pathsig.PLPath):
        return p
    raise TypeError("expected a PLPath")


def _sig_any(p, cap):
    if isinstance(p, pathsig.GroupWord):
        return pathsig.signature_word(p, cap)
    return pathsig.signature(_as_pl(p), cap)


def save_moments(stream, tau, max_degree, nonzero_only=True):
    """Dump moments as "word : re im" lines up to max_degree, the same
    line shape the series text format uses ("e" is the empty word)."""
    if tau.kind == "Z":
        letters = range(1, tau.n + 1)
    else:
        letters = [l for i in range(1, tau.n + 1) for l in (i, -i)]
    stream.write(f"# kind = {tau.kind}\n# n = {tau.n}\n")
    for d in range(max_degree + 1):
        for word in product(letters, repeat=d):
            value = tau.eval(word)
            if nonzero_only and value == 0:
                continue
            name = " ".join(str(l) for l in word) if word else "e"
            stream.write(f"{name} : {value.real!r} {value.imag!r}\n")


def load_moments(stream, n=None, kind=None, max_degree=_DEGREE_DEFAULT):
    """Read a moment table written by save_moments (or by hand); kind and
    arity are taken from the header when present."""
    table = {}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                key = key.strip()
                if key == "kind" and kind is None:
                    kind = value.strip()
                elif key == "n" and n is None:
                    n = int(value)
            continue
        name, _, payload = line.partition(":")
        name = name.strip()
        word = () if name == "e" else tuple(int(t) for t in name.split())
        re_s, im_s = payload.split()
        table[word] = complex(float(re_s), float(im_s))
    if kind is None:
        kind = "X" if any(l < 0 for w in table for l in w) else "Z"
    if n is None:
        n = max((abs(l) for w in table for l in w), default=1)
    return from_table(table, n, kind=kind, max_degree=max_degree,
                      description="loaded table")


def parse_rule(text):
    """Parse a named-rule string: "free(gauss,semicircle,...)", "haar(2)",
    or "delta(1.5,-2)"."""
    text = text.strip()
    name, sep, rest = text.partition("(")
    if not sep or not rest.endswith(")"):
        raise ConfigError(f"malformed measure rule: {text!r}")
    args = [a.strip() for a in rest[:-1].split(",") if a.strip()]
    if name == "free":
        comps = []
        for a in args:
            if a == "gauss":
                comps.append(gaussian_component())
            elif a == "semicircle":
                comps.append(semicircle_component())
            else:
                raise ConfigError(f"unknown free-product component: {a!r}")
        if not comps:
            raise ConfigError("free(...) needs at least one component")
        return free_product(comps)
    if name == "haar":
        if len(args) != 1:
            raise ConfigError("haar takes a single arity")
        return haar_free_product(int(args[0]))
    if name == "delta":
        try:
            values = [float(a) for a in args]
        except ValueError as exc:
            raise ConfigError(f"bad delta coordinates: {rest[:-1]!r}") from exc
        if not values:
            raise ConfigError("delta(...) needs at least one coordinate")
        return delta_free_product(values)
    raise ConfigError(f"unknown measure rule: {name!r}")
