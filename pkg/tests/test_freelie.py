"""Free Lie algebra tests.

Witt dimensions are recomputed from the Mobius sum inside the test, the
Lyndon property is checked literally against all proper suffixes, and the
BCH series is compared with a dense level-by-level tensor implementation
written independently of the library's sparse one.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from ncflow import freelie, ncseries
from ncflow.freelie import LieElement
from ncflow.ncseries import TruncSeries
from ncflow._util import NumericalCheckError


# -- dense tensor reference (levels as flat numpy arrays) --------------------

def dense_mul(a, b, dim):
    """Concatenation product on level lists a[0..cap], a[d] has dim**d entries."""
    cap = len(a) - 1
    out = [np.zeros(dim**d, dtype=complex) for d in range(cap + 1)]
    for da in range(cap + 1):
        for db in range(cap + 1 - da):
            out[da + db] += np.outer(a[da], b[db]).ravel()
    return out


def dense_exp(a, dim):
    cap = len(a) - 1
    out = [lvl.copy() for lvl in a]
    out[0] = out[0] + 1.0
    power = [lvl.copy() for lvl in a]
    for k in range(2, cap + 1):
        power = dense_mul(power, a, dim)
        for d in range(cap + 1):
            out[d] += power[d] / math.factorial(k)
    return out


def dense_log(g, dim):
    cap = len(g) - 1
    u = [lvl.copy() for lvl in g]
    u[0] = u[0] - 1.0
    out = [np.zeros(dim**d, dtype=complex) for d in range(cap + 1)]
    power = None
    for k in range(1, cap + 1):
        power = u if power is None else dense_mul(power, u, dim)
        sign = (-1.0) ** (k + 1) / k
        for d in range(cap + 1):
            out[d] += sign * power[d]
    return out


def dense_from_series(s):
    out = [np.zeros(s.dim**d, dtype=complex) for d in range(s.cap + 1)]
    for w, c in s.items():
        idx = 0
        for letter in w:
            idx = idx * s.dim + (letter - 1)
        out[len(w)][idx] += c
    return out


def dense_coefficient(levels, word, dim):
    idx = 0
    for letter in word:
        idx = idx * dim + (letter - 1)
    return levels[len(word)][idx]


# -- Lyndon machinery ---------------------------------------------------------

def is_lyndon(w):
    return all(w < w[j:] for j in range(1, len(w)))


def test_lyndon_words_are_lyndon_and_complete():
    words = freelie.lyndon_words(2, 6)
    assert all(is_lyndon(w) for w in words)
    # completeness: every Lyndon word found by filtering all words appears
    from itertools import product
    for d in range(1, 7):
        brute = {w for w in product((1, 2), repeat=d) if is_lyndon(w)}
        assert {w for w in words if len(w) == d} == brute


def test_lyndon_order_is_degree_then_lexicographic():
    words = freelie.lyndon_words(2, 5)
    assert list(words) == sorted(words, key=lambda w: (len(w), w))
    assert words[:3] == ((1,), (2,), (1, 2))


def test_witt_dimension_against_mobius_recount():
    def mobius(m):
        out, k = 1, 2
        while k * k <= m:
            if m % k == 0:
                m //= k
                if m % k == 0:
                    return 0
                out = -out
            k += 1
        return -out if m > 1 else out

    for n in (1, 2, 3):
        for d in range(1, 7):
            expected = sum(mobius(e) * n ** (d // e)
                           for e in range(1, d + 1) if d % e == 0) // d
            assert freelie.witt_dimension(n, d) == expected


def test_lyndon_counts_match_witt_dimensions():
    words = freelie.lyndon_words(2, 6)
    counts = [sum(1 for w in words if len(w) == d) for d in range(1, 7)]
    assert counts == [2, 1, 2, 3, 6, 9]
    assert counts == [freelie.witt_dimension(2, d) for d in range(1, 7)]


def test_standard_factorization_minimal_suffix():
    for w in freelie.lyndon_words(2, 6):
        if len(w) < 2:
            continue
        u, v = freelie.standard_factorization(w)
        assert u + v == w
        assert is_lyndon(u) and is_lyndon(v)
        assert v == min(w[j:] for j in range(1, len(w)))


def test_bracketing_shapes():
    assert freelie.bracketing((1, 2)) == (1, 2)
    assert freelie.bracketing((1, 1, 2)) == (1, (1, 2))
    assert freelie.bracketing((1, 2, 2)) == ((1, 2), 2)
    assert freelie.bracketing_str(freelie.bracketing((1, 1, 2))) == "[1,[1,2]]"


def test_expand_lyndon_small_cases():
    assert freelie.expand_lyndon((1, 2)) == {(1, 2): 1, (2, 1): -1}
    # [1,[1,2]] = Z1Z1Z2 - 2 Z1Z2Z1 + Z2Z1Z1
    assert freelie.expand_lyndon((1, 1, 2)) == {
        (1, 1, 2): 1, (1, 2, 1): -2, (2, 1, 1): 1}


def test_lyndon_expansions_are_primitive():
    for w in freelie.lyndon_words(2, 5):
        coeffs = {word: c for word, c in freelie.expand_lyndon(w).items()}
        assert ncseries.is_primitive(TruncSeries(2, 5, coeffs), tol=1e-12)


# -- LieElement arithmetic ----------------------------------------------------

def random_lie(rng, dim, cap):
    coords = {w: complex(rng.standard_normal(), rng.standard_normal())
              for w in freelie.lyndon_words(dim, cap)}
    return LieElement(dim, cap, coords)


def test_lie_element_rejects_non_lyndon_coordinates():
    with pytest.raises(ValueError):
        LieElement(2, 3, {(2, 1): 1.0})


def test_series_round_trip_on_random_lie_elements():
    rng = np.random.default_rng(21)
    for _ in range(6):
        ell = random_lie(rng, 2, 5)
        back = freelie.from_series(ell.to_series())
        assert back.distance(ell) < 1e-12


def test_from_series_rejects_non_primitive_input():
    s = TruncSeries(2, 3, {(1, 2): 1.0})
    with pytest.raises(NumericalCheckError):
        freelie.from_series(s)
    with pytest.raises(ValueError):
        freelie.from_series(TruncSeries.unit(2, 3))


def test_bracket_antisymmetry_and_jacobi():
    rng = np.random.default_rng(22)
    a = random_lie(rng, 2, 4)
    b = random_lie(rng, 2, 4)
    c = random_lie(rng, 2, 4)
    ab = freelie.bracket(a, b)
    assert (ab + freelie.bracket(b, a)).is_zero(tol=1e-10)
    jacobi = (freelie.bracket(a, freelie.bracket(b, c))
              + freelie.bracket(b, freelie.bracket(c, a))
              + freelie.bracket(c, freelie.bracket(a, b)))
    assert jacobi.is_zero(tol=1e-9)


def test_bracket_of_generators():
    x = freelie.generator(2, 3, 1)
    y = freelie.generator(2, 3, 2)
    xy = freelie.bracket(x, y)
    assert abs(xy[(1, 2)] - 1.0) < 1e-14
    s = xy.to_series()
    assert abs(s[(1, 2)] - 1.0) < 1e-14
    assert abs(s[(2, 1)] + 1.0) < 1e-14


# -- BCH ----------------------------------------------------------------------

def test_bch_low_degree_coefficients():
    x = freelie.generator(2, 5, 1)
    y = freelie.generator(2, 5, 2)
    z = freelie.bch(x, y)
    assert abs(z[(1,)] - 1.0) < 1e-12
    assert abs(z[(2,)] - 1.0) < 1e-12
    assert abs(z[(1, 2)] - 0.5) < 1e-12
    # degree 3 and 4 rational values on the Lyndon basis
    assert abs(z[(1, 1, 2)] - Fraction(1, 12)) < 1e-12
    assert abs(z[(1, 2, 2)] - Fraction(1, 12)) < 1e-12
    assert abs(z[(1, 1, 1, 2)]) < 1e-12
    assert abs(z[(1, 1, 2, 2)] - Fraction(1, 24)) < 1e-12
    assert abs(z[(1, 2, 2, 2)]) < 1e-12


def test_bch_matches_dense_log_exp_oracle():
    rng = np.random.default_rng(23)
    for _ in range(4):
        a = random_lie(rng, 2, 5)
        b = random_lie(rng, 2, 5)
        z = freelie.bch(a, b).to_series()
        ea = dense_exp(dense_from_series(a.to_series()), 2)
        eb = dense_exp(dense_from_series(b.to_series()), 2)
        oracle = dense_log(dense_mul(ea, eb, 2), 2)
        worst = 0.0
        for w, c in z.items():
            worst = max(worst, abs(c - dense_coefficient(oracle, w, 2)))
        # every oracle word must be covered too
        for d in range(6):
            total = np.abs(oracle[d]).sum()
            covered = sum(abs(z[w]) for w in ncseries.words_of_degree(2, d))
            assert covered == pytest.approx(total, abs=1e-9) or total < 1e-9
        assert worst < 1e-10


def test_bch_degree_truncation_consistency():
    # the same coefficients fall out at every cap that contains them
    x3 = freelie.bch(freelie.generator(2, 3, 1), freelie.generator(2, 3, 2))
    x5 = freelie.bch(freelie.generator(2, 5, 1), freelie.generator(2, 5, 2))
    for w in freelie.lyndon_words(2, 3):
        assert abs(x3[w] - x5[w]) < 1e-12


def test_bch_exponential_identity():
    # exp(bch(a, b)) equals exp(a) exp(b) back in the tensor algebra
    rng = np.random.default_rng(24)
    a = random_lie(rng, 2, 4)
    b = random_lie(rng, 2, 4)
    lhs = ncseries.exp(freelie.bch(a, b).to_series())
    rhs = ncseries.mul(ncseries.exp(a.to_series()), ncseries.exp(b.to_series()))
    assert lhs.distance(rhs) < 1e-10
