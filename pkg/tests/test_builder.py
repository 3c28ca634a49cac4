"""Unit-cell wiring and wafer assembly."""

import numpy as np
import pytest

from ballistic.builder import (
    UnitCellSpec,
    WaferSpec,
    apply_plus_filter,
    build_wafer,
    db_to_probability,
    load_cell_config,
    make_ghz3,
    optical_depth_report,
    probability_to_db,
)
from ballistic.errors import SpecError
from ballistic.fusion import FusionParams
from ballistic.graphstate import GraphRegister
from ballistic.percolation import crossing_exists
from ballistic.rng import trial_rng

BOOSTED = FusionParams(kind="BoostedTypeII", success_prob=0.75)


def test_default_cell_validates():
    cell = UnitCellSpec()
    cell.validate()
    assert cell.photons_per_cell == 18
    assert cell.intra_fusions == 6
    assert cell.boundary_fusions == 4
    assert cell.fusions_per_cell == 8
    assert len(cell.delayed_slots) == 2


def test_cell_wiring_validation_errors():
    with pytest.raises(SpecError):
        UnitCellSpec(computational_slots={0: "primal", 4: "dual"}).validate()
    with pytest.raises(SpecError):
        UnitCellSpec(formation_pairs=((0, 7), (0, 13), (3, 10), (5, 16))).validate()
    bad_bonds = (
        (6, 9, (0, 0, 0)),
        (17, 14, (0, 0, 1)),
        (8, 12, (1, 0, 0)),
        (11, 15, (0, 1, 0)),
    )
    with pytest.raises(SpecError):
        UnitCellSpec(bond_pairs=bad_bonds).validate()


def test_cell_config_round_trip():
    cell = UnitCellSpec()
    text = __import__("json").dumps(cell.to_config())
    back = load_cell_config(text)
    assert back == cell


def test_make_ghz3_is_linear_cluster():
    g = GraphRegister(0)
    a, b, c = make_ghz3(g)
    assert g.has_edge(a, b) and g.has_edge(b, c) and not g.has_edge(a, c)


def _fragment(reg, start):
    seen = {start}
    stack = [start]
    while stack:
        for w in reg.neighbors(stack.pop()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def test_deterministic_limit_joins_layers():
    # the z bond fuses one layer's primal qubit to the next layer's dual
    # qubit (and vice versa), so each fragment spans both layers
    spec = WaferSpec(1, 1, 2, fusion_params=FusionParams("TypeII", success_prob=1.0))
    lat = build_wafer(spec, rng=trial_rng(0, 0), graph_level=True)
    reg = lat.register
    p0, d0 = lat.computational_vertices[(0, 0, 0)]
    p1, d1 = lat.computational_vertices[(0, 0, 1)]
    assert all(reg.is_alive(v) for v in (p0, d0, p1, d1))
    assert d1 in _fragment(reg, p0)
    assert p1 in _fragment(reg, d0)


def test_single_cell_deterministic_limit():
    spec = WaferSpec(1, 1, 1, fusion_params=FusionParams("TypeII", success_prob=1.0))
    lat = build_wafer(spec, rng=trial_rng(0, 0), graph_level=True)
    comp_ids = next(iter(lat.computational_vertices.values()))
    reg = lat.register
    assert all(reg.is_alive(v) for v in comp_ids)
    # each computational photon anchors a non-trivial fused fragment
    for v in comp_ids:
        assert len(_fragment(reg, v)) >= 3


def test_resource_report_counts():
    lat = build_wafer(
        WaferSpec(2, 2, 2, fusion_params=BOOSTED),
        rng=trial_rng(1, 0),
        graph_level=False,
    )
    rep = lat.resource_report
    assert rep["cells"] == 8
    assert rep["photons_emitted"] == 8 * 18
    assert rep["photons_per_computational_no_ancilla"] == 9
    assert rep["photons_per_computational_with_ancilla"] == 17
    assert rep["photons_per_computational_with_ancilla"] <= 20
    assert rep["expected_source_attempts_per_ghz"] == 32


def test_build_modes_agree():
    spec = WaferSpec(3, 3, 4, fusion_params=BOOSTED, photon_loss=0.02)
    graph = build_wafer(spec, rng=trial_rng(5, 1), graph_level=True)
    bond = build_wafer(spec, rng=trial_rng(5, 1), graph_level=False)
    assert (graph.comp.alive == bond.comp.alive).all()
    assert (graph.comp.alive_punched == bond.comp.alive_punched).all()
    ge = {tuple(sorted(e)) for e in graph.comp.edges.tolist()}
    be = {tuple(sorted(e)) for e in bond.comp.edges.tolist()}
    assert ge == be


def test_wafer_spanning_probabilistic():
    spec = WaferSpec(12, 6, 20, fusion_params=BOOSTED)
    hits = sum(
        crossing_exists(
            build_wafer(spec, rng=trial_rng(9, t), graph_level=False), "z"
        )
        for t in range(20)
    )
    assert hits == 20


def test_zero_success_prob_gives_no_bonds():
    spec = WaferSpec(2, 2, 2, fusion_params=FusionParams("TypeII", success_prob=0.0))
    lat = build_wafer(spec, rng=trial_rng(3, 0), graph_level=False)
    assert len(lat.comp.edges) == 0


def test_filter_limits():
    rng = trial_rng(4, 0)
    g = GraphRegister(2)
    g.apply_cz(0, 1)
    assert apply_plus_filter(g, 0, 1.0, rng) is True
    assert g.is_alive(0)
    assert apply_plus_filter(g, 1, 0.0, rng) is False
    assert not g.is_alive(1)


def test_filter_reduces_alive_fraction():
    base = WaferSpec(4, 4, 4, fusion_params=BOOSTED)
    filt = WaferSpec(
        4, 4, 4, fusion_params=BOOSTED, filter_fidelity=0.8, filter_enabled=True
    )
    a = build_wafer(base, rng=trial_rng(6, 0), graph_level=False).comp.alive.mean()
    b = build_wafer(filt, rng=trial_rng(6, 0), graph_level=False).comp.alive.mean()
    assert b < a


def test_optical_depth_report():
    rep = optical_depth_report(UnitCellSpec())
    assert rep["max"] <= 12
    assert rep["mean"] <= rep["max"]
    shifters = {
        s for s, e in rep["per_slot"].items() if e["phase_shifter"] == 1
    }
    assert shifters == {1, 4}


def test_db_conversions():
    assert db_to_probability(0.0) == pytest.approx(1.0)
    assert db_to_probability(-10.0) == pytest.approx(0.1)
    assert probability_to_db(db_to_probability(-0.5)) == pytest.approx(-0.5)
    with pytest.raises(SpecError):
        db_to_probability(1.0)


def test_invalid_wafer_spec():
    with pytest.raises(SpecError):
        WaferSpec(0, 1, 1)
    with pytest.raises(SpecError):
        WaferSpec(1, 1, 1, photon_loss=1.0)
