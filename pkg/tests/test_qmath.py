from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalchan.qmath import (
    DomainError,
    hamming_ball_volume,
    lemma1_margin,
    plotkin_bound,
    q_entropy,
    q_entropy_inverse,
    q_entropy_inverse_array,
)

from oracles import ball_bruteforce, entropy_mp

GOLD = json.loads((Path(__file__).parent / "golden" / "derived.json").read_text())


def test_entropy_examples():
    assert q_entropy(0.0, 3) == 0.0
    assert q_entropy(0.5, 2) == pytest.approx(1.0, abs=1e-15)
    assert q_entropy(0.25, 2) == pytest.approx(GOLD["entropy_2_0.25"], abs=1e-14)
    assert GOLD["entropy_2_0.25"] == pytest.approx(0.811278, abs=1e-6)


@pytest.mark.parametrize("q", [2, 3, 5, 16, 257])
def test_entropy_matches_mpmath(q):
    for x in np.linspace(0, 1 - 1 / q, 37):
        assert q_entropy(float(x), q) == pytest.approx(float(entropy_mp(float(x), q)), abs=1e-13)


def test_entropy_top_is_one():
    for q in range(2, 9):
        assert q_entropy(1 - 1 / q, q) == pytest.approx(1.0, abs=1e-14)


def test_entropy_domain():
    with pytest.raises(DomainError):
        q_entropy(0.6, 2)
    with pytest.raises(DomainError):
        q_entropy(-1e-9, 2)
    with pytest.raises(DomainError):
        q_entropy(0.1, 1)
    # inside tolerance is clipped
    assert q_entropy(0.5 + 1e-13, 2) == pytest.approx(1.0)


def test_entropy_vectorized():
    xs = np.array([0.0, 0.1, 0.5])
    np.testing.assert_allclose(q_entropy(xs, 2), [q_entropy(float(x), 2) for x in xs])


@pytest.mark.parametrize("q", range(2, 9))
def test_entropy_monotone_and_bounded_grid(q):
    h = q_entropy(np.linspace(0, 1 - 1 / q, 10_000), q)
    assert np.all(h >= 0) and np.all(h <= 1 + 1e-15)
    assert np.all(np.diff(h) >= -1e-15)


@settings(max_examples=200, deadline=None)
@given(q=st.integers(2, 64), a=st.floats(0, 1), b=st.floats(0, 1))
def test_entropy_concave(q, a, b):
    top = 1 - 1 / q
    a, b = a * top, b * top
    assert q_entropy((a + b) / 2, q) >= (q_entropy(a, q) + q_entropy(b, q)) / 2 - 1e-12


@settings(max_examples=200, deadline=None)
@given(q=st.integers(2, 64), h=st.floats(0, 1))
def test_entropy_inverse_roundtrip(q, h):
    x = q_entropy_inverse(h, q)
    assert 0 <= x <= 1 - 1 / q
    assert q_entropy(x, q) == pytest.approx(h, abs=1e-10)


def test_entropy_inverse_array_matches_scalar():
    hs = np.array([-0.5, 0.0, 0.2, 0.7, 1.0, 1.5])
    got = q_entropy_inverse_array(hs, 3)
    assert np.isnan(got[0]) and np.isnan(got[-1])
    for h, g in zip(hs[1:-1], got[1:-1]):
        assert g == pytest.approx(q_entropy_inverse(float(h), 3), abs=1e-14)


def test_ball_examples():
    assert hamming_ball_volume(4, 0, 3) == 1
    assert hamming_ball_volume(4, 1, 3) == GOLD["ball_4_1_3"] == 9
    assert hamming_ball_volume(3, 3, 2) == 8


@pytest.mark.parametrize("n,q", [(1, 2), (4, 2), (5, 3), (3, 4)])
def test_ball_bruteforce(n, q):
    for r in range(n + 1):
        assert hamming_ball_volume(n, r, q) == ball_bruteforce(n, r, q)


def test_ball_is_exact_for_large_n():
    assert hamming_ball_volume(200, 200, 7) == 7**200


@settings(max_examples=150, deadline=None)
@given(q=st.integers(2, 9), n=st.integers(1, 300), f=st.floats(0.001, 1))
def test_ball_entropy_bound(q, n, f):
    r = max(1, int(f * (1 - 1 / q) * n))
    if r / n > 1 - 1 / q:
        return
    lhs = math.log(hamming_ball_volume(n, r, q), q)
    assert lhs <= n * q_entropy(r / n, q) + 1e-9


def test_ball_domain():
    with pytest.raises(DomainError):
        hamming_ball_volume(3, 4, 2)


def test_plotkin_examples():
    assert plotkin_bound(3, 3, 2) == 2
    assert plotkin_bound(4, 3, 2) == 3
    assert plotkin_bound(4, 3, 3) == 9
    with pytest.raises(DomainError):
        plotkin_bound(4, 2, 2)


def _max_code(n, d, q):
    words = list(itertools.product(range(q), repeat=n))
    best = 0

    def grow(code, start):
        nonlocal best
        best = max(best, len(code))
        for i in range(start, len(words)):
            w = words[i]
            if all(sum(a != b for a, b in zip(w, c)) >= d for c in code):
                grow(code + [w], i + 1)

    grow([], 0)
    return best


@pytest.mark.parametrize("n,d,q", [(3, 3, 2), (4, 3, 2), (3, 3, 3), (5, 4, 2)])
def test_plotkin_not_beaten_by_exhaustive_search(n, d, q):
    assert _max_code(n, d, q) <= plotkin_bound(n, d, q)


def test_lemma1_examples():
    lhs, rhs = lemma1_margin(0.0, 0.25, 2)
    assert lhs == pytest.approx(GOLD["entropy_2_0.25"])
    assert rhs == pytest.approx(1.0 / math.log(2))
    assert lhs < rhs
    lhs, rhs = lemma1_margin(0.4, 0.1, 2)
    assert lhs == pytest.approx(1.0) and rhs > 1
    with pytest.raises(DomainError):
        lemma1_margin(0.1, 0.5, 2)


def test_lemma1_grid_q4():
    for x in np.linspace(0, 0.75 - 0.01, 10_000):
        lhs, rhs = lemma1_margin(float(x), 0.01, 4)
        assert lhs < rhs


@settings(max_examples=300, deadline=None)
@given(q=st.integers(2, 32), x=st.floats(0, 1), d=st.floats(1e-9, 0.4999))
def test_lemma1_property(q, x, d):
    top = 1 - 1 / q
    if d > top:
        return
    x = x * (top - d)
    lhs, rhs = lemma1_margin(x, d, q)
    assert lhs < rhs
