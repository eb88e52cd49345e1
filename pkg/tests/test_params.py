from __future__ import annotations

import math

import pytest

from causalchan.params import ChannelParams, ParameterError, chunk_len_from_theta, default_theta


def test_default_theta_arithmetic():
    P = ChannelParams.build(q=2, p=0.125, p_star=0.0, epsilon=0.3, n=4000, message_count=4)
    assert P.theta == pytest.approx(0.0025)
    assert P.chunk_len == 10
    assert P.n_chunks == 400
    assert list(P.chunk_ends())[:2] == [10, 20] and list(P.chunk_ends())[-1] == 3990


def test_theta_must_divide():
    with pytest.raises(ParameterError) as ei:
        chunk_len_from_theta(1000, 0.003)
    assert "does not divide" in str(ei.value)
    with pytest.raises(ParameterError):
        chunk_len_from_theta(1000, 0.0011)
    with pytest.raises(ParameterError):
        chunk_len_from_theta(1000, 0.0)


def test_every_violation_reported():
    with pytest.raises(ParameterError) as ei:
        ChannelParams(q=1, p=2.0, p_star=-1.0, epsilon=0.0, n=10, chunk_len=3)
    assert len(ei.value.violations) == 5


def test_rate_and_message_count_derive_each_other():
    P = ChannelParams(q=2, p=0.1, n=16, chunk_len=4, rate=0.25)
    assert P.message_count == 16
    Q = ChannelParams(q=3, p=0.1, n=8, chunk_len=4, message_count=9)
    assert Q.rate == pytest.approx(math.log(9, 3) / 8)


def test_caps_and_margin():
    P = ChannelParams(q=4, p=0.1, p_star=0.25, epsilon=0.2, n=100, chunk_len=10)
    assert P.error_cap == 10 and P.erasure_cap == 25
    assert P.margin == pytest.approx(0.04 / 144)
    assert P.half_gap == pytest.approx(3 / 8)


def test_region_and_coding_checks():
    assert ChannelParams(q=2, p=0.3, n=10).region_violations()
    P = ChannelParams(q=2, p=0.2, epsilon=0.2, n=10, message_count=2)
    assert not P.region_violations()
    assert any("2p + p* + eps" in v for v in P.coding_violations())
    assert "message count" in ChannelParams(q=2, p=0.1, n=10).coding_violations()[0]


def test_theoretical_mode():
    P = ChannelParams.theoretical(2, 0.05, 0.0, 0.3, 4000)
    assert P.theoretical_mode and P.chunk_len == 10
    assert P.theta == pytest.approx(default_theta(2, 0.3))
    assert P.secret_count == max(1, math.ceil(2 ** (4000 * P.theta**3 / 4)))
    with pytest.raises(ParameterError):
        ChannelParams.theoretical(2, 0.24, 0.0, 0.3, 4000)


def test_to_dict_roundtrip_keys():
    d = ChannelParams(q=2, p=0.1, n=8, chunk_len=2, message_count=4).to_dict()
    assert d["theta"] == 0.25 and d["message_count"] == 4
