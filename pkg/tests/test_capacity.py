from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalchan.capacity import (
    alpha_q,
    capacity,
    grid_oracle,
    rate_term,
    rate_term_array,
    special_case_capacity,
)
from causalchan.params import ChannelParams
from causalchan.capacity import capacity_of

from oracles import capacity_mp, rate_mp

GOLD = json.loads((Path(__file__).parent / "golden" / "derived.json").read_text())


def test_alpha_examples():
    assert alpha_q(0.0, 2, 1 / 8, 0.0) == pytest.approx(0.5)
    assert alpha_q(0.1, 3, 0.1, 0.0) == pytest.approx(1.0)
    assert alpha_q(0.0, 2, 0.0, 0.1) == pytest.approx(0.8)


def test_rate_term_examples():
    assert rate_term(0.0, 2, 0.1, 0.0) == pytest.approx(0.6)
    assert rate_term(0.0, 2, 0.25, 0.0) in (0.0, None)
    v = rate_term(0.05, 2, 0.1, 0.0)
    assert v > 0
    assert v == pytest.approx(GOLD["rate_term_2_0.1_0_at_0.05"], abs=1e-13)


def test_rate_term_excluded():
    # alpha <= 0
    assert rate_term(0.0, 2, 0.3, 0.0) is None
    assert np.isnan(rate_term_array(np.array([0.0]), 2, 0.3, 0.0))[0]


def test_rate_term_array_matches_scalar():
    xs = np.linspace(0, 0.2, 41)
    arr = rate_term_array(xs, 3, 0.2, 0.1)
    for x, a in zip(xs, arr):
        s = rate_term(float(x), 3, 0.2, 0.1)
        assert (s is None and np.isnan(a)) or a == pytest.approx(s)


@pytest.mark.parametrize("key", sorted(GOLD["capacity"]))
def test_capacity_matches_frozen_oracle(key):
    q, p, ps = key.split(",")
    res = capacity(int(q), float(p), float(ps))
    g = GOLD["capacity"][key]
    assert res.value == pytest.approx(g["value"], abs=1e-9)
    if g["argmin_pbar"] is not None and g["value"] > 0:
        assert res.argmin_pbar == pytest.approx(g["argmin_pbar"], abs=1e-6)


def test_capacity_examples():
    r = capacity(2, 0.0, 0.1)
    assert r.value == pytest.approx(0.8) and r.argmin_pbar == 0.0
    assert capacity(2, 0.25, 0.0).value == 0.0
    assert capacity(2, 0.3, 0.0).zero_region
    for q in (2, 3, 7, 256):
        assert capacity(q, 0.0, 0.0).value == 1.0


def test_special_cases():
    assert special_case_capacity("erasure_only", 3, p_star=0.2) == pytest.approx(0.7)
    assert special_case_capacity("large_q", 2, 0.1, 0.05) == pytest.approx(0.75)
    assert special_case_capacity("error_only", 2, 0.0) == 1.0
    with pytest.raises(ValueError):
        special_case_capacity("nope", 2)


def test_capacity_of_params():
    P = ChannelParams(q=2, p=0.1, n=10)
    assert capacity_of(P) == capacity(2, 0.1, 0.0)


@pytest.mark.parametrize("q", [2, 3, 4, 8])
def test_monotone_in_p_and_pstar(q):
    c = (q - 1) / q
    ps = np.linspace(0, c / 2, 25)
    pss = np.linspace(0, c, 25)
    caps = np.array([[capacity(q, float(p), float(s)).value for s in pss] for p in ps])
    assert np.all(np.diff(caps, axis=0) <= 1e-9)
    assert np.all(np.diff(caps, axis=1) <= 1e-9)


@settings(max_examples=100, deadline=None)
@given(q=st.integers(2, 32), u=st.floats(0, 1), w=st.floats(0, 1))
def test_zero_iff_boundary(q, u, w):
    c = (q - 1) / q
    ps = w * c
    p = u * (c - ps) / 2 * 1.2  # straddle the boundary 2p + p* = c
    v = capacity(q, p, ps).value
    if 2 * p + ps >= c:
        assert v == 0.0
    elif 2 * p + ps < c - 1e-12:
        assert v > 0.0
    else:
        # within rounding of the boundary the true value is itself ~1e-16
        assert 0.0 <= v <= 1e-9


def test_golden_section_matches_grid_sample():
    rng = np.random.default_rng(5)
    for _ in range(5):
        q = int(rng.integers(2, 10))
        c = (q - 1) / q
        ps = float(rng.uniform(0, c * 0.8))
        p = float(rng.uniform(0, (c - ps) / 2))
        gv, _ = grid_oracle(q, p, ps, points=10**5)
        assert capacity(q, p, ps).value == pytest.approx(gv, abs=1e-6)


def test_mpmath_oracle_agrees_on_random_points():
    rng = np.random.default_rng(8)
    for _ in range(5):
        q = int(rng.integers(2, 6))
        c = (q - 1) / q
        ps = float(rng.uniform(0, c * 0.5))
        p = float(rng.uniform(0, (c - ps) / 2))
        v, _ = capacity_mp(q, p, ps, iters=120)
        assert capacity(q, p, ps).value == pytest.approx(float(v), abs=1e-9)


def test_argmin_is_a_minimum():
    r = capacity(3, 0.15, 0.1)
    base = rate_term(r.argmin_pbar, 3, 0.15, 0.1)
    for dx in (-1e-4, 1e-4):
        v = rate_mp(r.argmin_pbar + dx, 3, 0.15, 0.1)
        assert float(v) >= base - 1e-12
