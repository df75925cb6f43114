from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import rslab as rl
from rslab import NEGATIVE, POSITIVE, ZERO, DimForm

from conftest import bernoulli_structure, cherry, k4, single_edge, triangle


def test_delta_examples(sig7):
    empty = rl.FiniteStructure(sig7, 0, [[]])
    assert rl.delta(empty).is_zero and rl.delta(empty).sign() == ZERO
    d = rl.delta(single_edge(sig7))
    assert (d.c0, d.coeffs) == (2, (-1,))
    d4 = rl.delta(k4(sig7))
    assert (d4.c0, d4.coeffs) == (4, (-6,))
    assert d4.sign() == NEGATIVE
    assert abs(d4.value - (-0.2)) < 1e-12


def test_delta_rel_examples(sig7):
    assert rl.delta_rel(single_edge(sig7), [0]).coeffs == (-1,)
    assert rl.delta_rel(single_edge(sig7), [0]).c0 == 1
    assert rl.delta_rel(triangle(sig7), [0, 1, 2]).is_zero
    d = rl.delta_rel(cherry(sig7), [0, 1])
    assert (d.c0, d.coeffs) == (1, (-2,)) and d.sign() == NEGATIVE


def test_sign_examples(sig7):
    assert rl.zero_form(sig7).sign() == ZERO
    assert DimForm(1, (-1,), sig7).sign() == POSITIVE
    assert DimForm(1, (-2,), sig7).sign() == NEGATIVE


def test_sign_tie_break_under_independence():
    sig = rl.binary_signature("0.7", independence=True)
    tied = DimForm(7, (-10,), sig)  # 7 - 10*(7/10) == 0 nominally
    assert tied.exact() == 0
    assert tied.sign() == NEGATIVE  # infinitesimal bump of alpha decides
    assert DimForm(-7, (10,), sig).sign() == POSITIVE
    no_ind = rl.binary_signature("0.7", independence=False)
    assert DimForm(7, (-10,), no_ind).sign() == ZERO


def test_e_rel_examples(sig7):
    e = rl.e_rel(single_edge(sig7), [0])
    assert (e.c0, e.coeffs) == (0, (1,))
    assert rl.e_rel(single_edge(sig7), [0, 1]).is_zero
    assert rl.e_rel(cherry(sig7), [0, 1]).coeffs == (2,)


def test_delta_e_identity(sig55):
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        B = bernoulli_structure(rng, sig55, n, 0.5)
        base = [v for v in range(n) if rng.random() < 0.5]
        lhs = rl.delta_rel(B, base)
        rhs = DimForm(B.n - len(base), (0,) * sig55.p, sig55) - rl.e_rel(B, base)
        assert lhs == rhs


def test_gamma_prod():
    sig = rl.binary_signature("0.7", gamma="0.5")
    assert rl.gamma_prod(single_edge(sig), [0, 1]) == 1.0
    assert rl.gamma_prod(single_edge(sig), []) == 0.5
    assert rl.gamma_prod(cherry(sig), [0, 1]) == 0.25


def test_d_cap_examples(sig7):
    tri = triangle(sig7)
    assert rl.d_cap(tri, [0, 1, 2], 3) == rl.delta(tri)
    best = rl.d_cap(k4(sig7), [], 4)
    assert (best.c0, best.coeffs) == (4, (-6,))
    edge = single_edge(sig7)
    assert (rl.d_cap(edge, [0], 1).c0, rl.d_cap(edge, [0], 1).coeffs) == (1, (0,))


def test_d_cap_brute_force_oracle(sig55):
    rng = np.random.default_rng(9)
    for _ in range(25):
        n = int(rng.integers(1, 8))
        N = bernoulli_structure(rng, sig55, n, 0.55)
        A = [v for v in range(n) if rng.random() < 0.4]
        got = rl.d_cap(N, A, n)
        best = None
        for size in range(0, n - len(A) + 1):
            for extra in combinations([v for v in range(n) if v not in A], size):
                cand = rl.delta_of_subset(N, set(A) | set(extra))
                if best is None or cand < best:
                    best = cand
        assert got == best


def test_d_cap_refuses_explosive_enumerations(sig55):
    big = rl.FiniteStructure(sig55, 64, [[]])
    with pytest.raises(ValueError, match="candidate sets"):
        rl.d_cap(big, [], 6)


def test_d_cap_antitone_in_cap(sig55):
    rng = np.random.default_rng(14)
    for _ in range(25):
        n = int(rng.integers(1, 9))
        N = bernoulli_structure(rng, sig55, n, 0.5)
        A = [v for v in range(n) if rng.random() < 0.3]
        caps = [rl.d_cap(N, A, c) for c in range(0, n + 1)]
        for small, big in zip(caps, caps[1:]):
            assert big <= small


def test_additivity_identity(sig55):
    # delta(AB/C) = delta(A/BC) + delta(B/C) as exact forms
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        N = bernoulli_structure(rng, sig55, n, 0.5)
        A = {v for v in range(n) if rng.random() < 0.4}
        B = {v for v in range(n) if rng.random() < 0.4}
        C = {v for v in range(n) if rng.random() < 0.4}
        lhs = rl.delta_of_subset(N, A | B | C) - rl.delta_of_subset(N, C)
        rhs = (rl.delta_of_subset(N, A | B | C) - rl.delta_of_subset(N, B | C)) + (
            rl.delta_of_subset(N, B | C) - rl.delta_of_subset(N, C)
        )
        assert lhs == rhs


def test_monotonicity_disjoint_contexts(sig55):
    # delta(A/B) >= delta(A/BC) for disjoint A, B, C
    rng = np.random.default_rng(6)
    checked = 0
    for _ in range(60):
        n = int(rng.integers(3, 9))
        N = bernoulli_structure(rng, sig55, n, 0.5)
        labels = rng.integers(0, 4, size=n)
        A = {v for v in range(n) if labels[v] == 0}
        B = {v for v in range(n) if labels[v] == 1}
        C = {v for v in range(n) if labels[v] == 2}
        if not A:
            continue
        dAB = rl.delta_of_subset(N, A | B) - rl.delta_of_subset(N, B)
        dABC = rl.delta_of_subset(N, A | B | C) - rl.delta_of_subset(N, B | C)
        assert (dAB - dABC).sign() != NEGATIVE
        checked += 1
    assert checked > 20


def test_form_arithmetic(sig55):
    a = DimForm(3, (-2,), sig55)
    b = DimForm(1, (4,), sig55)
    assert (a + b) == DimForm(4, (2,), sig55)
    assert (a - b) == DimForm(2, (-6,), sig55)
    assert (-a) == DimForm(-3, (2,), sig55)
    other = rl.binary_signature("0.7")
    with pytest.raises(ValueError):
        a + DimForm(0, (0,), other)
    with pytest.raises(ValueError):
        DimForm(0, (0, 0), sig55)


def test_form_json(sig7):
    d = rl.delta(k4(sig7))
    assert d.to_json_dict() == {"c0": 4, "coeffs": [-6], "value": d.value}
    assert "a[R]" in str(d)


@settings(max_examples=80, deadline=None)
@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30))
def test_form_group_laws(c0a, ca, c0b, cb):
    sig = rl.binary_signature("0.55")
    a, b = DimForm(c0a, (ca,), sig), DimForm(c0b, (cb,), sig)
    assert (a + b) - b == a
    assert (a - b).sign() == -(b - a).sign()
