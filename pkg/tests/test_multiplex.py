"""Multiplexing laws, delay-network routing, and relative-time matching."""

import numpy as np
import pytest

from ballistic.errors import SpecError
from ballistic.multiplex import (
    DelayNetwork,
    DtpParams,
    MatchedPair,
    PhotonStream,
    SwitchModel,
    delivered_pairs,
    dtp_herald_prob,
    dtp_success_prob,
    extinction_to_z_error,
    matching_rmux,
    pair_yield,
    route_with_delays,
    sliding_window_match,
    standard_mux_pair_yield,
    standard_mux_prob,
    stream_from_rle,
    stream_to_rle,
    yield_curve,
    yield_curve_csv,
)
from ballistic.rng import trial_rng


def stream(bins, n=None):
    n = (max(bins) + 1) if n is None and bins else (n or 1)
    occ = [False] * n
    for b in bins:
        occ[b] = True
    return PhotonStream(tuple(occ), 0.2)


def test_standard_mux_prob():
    assert standard_mux_prob(0.2, 0) == pytest.approx(0.2)
    assert standard_mux_prob(0.2, 2) == pytest.approx(1 - 0.8**4)
    with pytest.raises(SpecError):
        standard_mux_prob(1.5, 1)
    with pytest.raises(SpecError):
        standard_mux_prob(0.2, -1)


def test_standard_pair_yield_curve_values():
    expected = [0.0400, 0.0648, 0.08714304, 0.08657539720888319, 0.059031080392688215]
    got = [standard_mux_pair_yield(0.2, S) for S in range(5)]
    assert got == pytest.approx(expected, abs=1e-12)
    # the curve rises then falls: delay budget beats dilution early on only
    assert got[2] > got[0] and got[4] < got[3]


def test_dtp_closed_forms():
    assert dtp_success_prob(DtpParams(0.2, 5)) == pytest.approx(0.67232, abs=1e-15)
    assert dtp_success_prob(DtpParams(0.2, 6)) == pytest.approx(0.737856, abs=1e-15)
    # with unit pass transmission, success equals the herald probability
    p = DtpParams(0.2, 5)
    assert dtp_success_prob(p) == pytest.approx(dtp_herald_prob(p))
    # lossy transit strictly reduces delivery
    lossy = DtpParams(0.2, 5, per_crystal_pass_transmission=0.9)
    assert dtp_success_prob(lossy) < dtp_success_prob(p)


def test_dtp_validation():
    with pytest.raises(SpecError):
        DtpParams(1.2, 5)
    with pytest.raises(SpecError):
        DtpParams(0.2, 0)


def test_extinction_mapping():
    assert extinction_to_z_error(-50.0) == pytest.approx(1e-5, rel=1e-12)
    assert extinction_to_z_error(-65.0) == pytest.approx(3.162e-7, rel=1e-3)
    with pytest.raises(SpecError):
        extinction_to_z_error(2.0)


def test_switch_model_validation():
    with pytest.raises(SpecError):
        SwitchModel(loss_db_per_pass=-1.0)
    with pytest.raises(SpecError):
        SwitchModel(extinction_db=5.0)


def test_delay_network_geometry():
    net = DelayNetwork(3)
    assert net.stage_delays == (1, 2, 4)
    assert net.max_delay == 7
    assert net.switch_passes == 4
    lossy = DelayNetwork(3, SwitchModel(loss_db_per_pass=1.0))
    assert lossy.transmission() == pytest.approx(10 ** (-0.4))


def test_photon_stream_sampling():
    s = PhotonStream.sample(1000, 0.3, trial_rng(1, 0))
    assert s.bin_count == 1000
    assert 200 < len(s.photon_bins) < 400
    with pytest.raises(SpecError):
        PhotonStream((True,), p=1.5)


def test_route_with_delays_no_collision():
    s = stream([0, 5], n=8)
    out, collisions = route_with_delays(s, {0: 3}, DelayNetwork(2))
    assert collisions == []
    assert out.photon_bins == (3, 5)


def test_route_with_delays_output_collision():
    s = stream([0, 3], n=6)
    out, collisions = route_with_delays(s, {0: 3}, DelayNetwork(2))
    assert len(collisions) == 1
    assert collisions[0][0] == "output"
    assert out.photon_bins == ()


def test_route_with_delays_branch_collision():
    # both photons take the length-1 delay line in the same time slot
    s = stream([0], n=4)
    s2 = stream([0, 1], n=4)
    _out, collisions = route_with_delays(s2, {0: 1, 1: 0}, DelayNetwork(1))
    # photon 0 delayed to t=1 meets photon 1 at the output
    assert collisions


def test_route_with_delays_validation_and_discard():
    s = stream([0, 2], n=4)
    with pytest.raises(SpecError):
        route_with_delays(s, {0: 9}, DelayNetwork(2))
    out, collisions = route_with_delays(s, {0: None}, DelayNetwork(2))
    assert collisions == [] and out.photon_bins == (2,)


def test_sliding_window_match_examples():
    pairs = sliding_window_match(stream([0, 5], n=8), stream([2, 3], n=8), 2)
    assert pairs == [MatchedPair(0, 2)]
    # a photon of the undelayed stream arriving first is discarded
    pairs = sliding_window_match(stream([4], n=8), stream([1, 4], n=8), 3)
    assert pairs == [MatchedPair(4, 4)]
    with pytest.raises(SpecError):
        sliding_window_match(stream([0]), stream([0]), -1)


def test_sliding_window_delayed_stream_flag():
    a, b = stream([2], n=6), stream([0, 3], n=6)
    pairs = sliding_window_match(a, b, 2, delayed_stream=1)
    # now b carries the delay network: b's 0 can wait for a's 2
    assert pairs == [MatchedPair(2, 0)]


def test_matched_pair_delay():
    assert MatchedPair(3, 7).delay == 4


def test_delivered_pairs_prunes_collisions():
    a = stream([0, 3], n=8)
    pairs = [MatchedPair(0, 3), MatchedPair(3, 3)]
    kept, collisions = delivered_pairs(a, pairs, DelayNetwork(2))
    # both delayed photons land on bin 3: output collision kills both
    assert kept == [] and collisions


def test_matching_dominates_sliding_fuzz():
    net = DelayNetwork(3)
    for t in range(30):
        r = trial_rng(13, t)
        a = PhotonStream.sample(64, 0.2, r, "A")
        b = PhotonStream.sample(64, 0.2, r, "B")
        sliding = sliding_window_match(a, b, 7)
        kept, _ = delivered_pairs(a, sliding, net)
        matched = matching_rmux(a, b, 7, network=net)
        assert len(matched) >= len(kept)
        # the matched plan routes collision-free as promised
        again, coll = delivered_pairs(a, matched, net)
        assert len(again) == len(matched)


def test_pair_yield():
    assert pair_yield([MatchedPair(0, 0)], 10) == pytest.approx(0.1)
    with pytest.raises(SpecError):
        pair_yield([], 0)


def test_rle_round_trip():
    s = PhotonStream.sample(200, 0.15, trial_rng(3, 0), "B")
    assert stream_from_rle(stream_to_rle(s)) == s
    with pytest.raises(SpecError):
        stream_from_rle("bogus header\n1x3\n")
    with pytest.raises(SpecError):
        stream_from_rle("photonstream v1 A 5 0.1\n1x3\n")  # length mismatch


def test_yield_curve_rows_and_csv():
    rows = yield_curve(0.2, range(3), 2000, trial_rng(5, 0))
    assert [r["S"] for r in rows] == [0, 1, 2]
    for r in rows:
        assert set(r) == {
            "S", "standard_yield", "sliding_yield", "matching_yield", "collisions"
        }
        assert r["matching_yield"] >= r["sliding_yield"]
    text = yield_curve_csv(rows)
    assert text.splitlines()[0] == (
        "S,standard_yield,sliding_yield,matching_yield,collisions"
    )
    assert len(text.splitlines()) == 4
