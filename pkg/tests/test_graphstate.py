"""Graph-state engine: unit behavior plus dense-oracle agreement."""

import numpy as np
import pytest

from ballistic import clifford as cl
from ballistic.acceptance import dense_mirror, fuzz_case, subsystem_canonical
from ballistic.dense import DenseStabilizerState, from_graph_register
from ballistic.errors import CapacityError, VertexStateError
from ballistic.graphstate import GraphRegister, lc_equivalent, load_edges


def rng():
    return np.random.default_rng(7)


def test_cz_builds_edges():
    g = GraphRegister(3)
    g.apply_cz(0, 1).apply_cz(1, 2)
    assert g.has_edge(0, 1) and g.has_edge(1, 2) and not g.has_edge(0, 2)
    assert sorted(g.edges()) == [(0, 1), (1, 2)]


def test_cz_twice_cancels():
    g = GraphRegister(2)
    g.apply_cz(0, 1)
    g.apply_cz(0, 1)
    assert not g.has_edge(0, 1)
    assert dense_mirror(g).canonical_rows() == DenseStabilizerState(2).canonical_rows()


def test_local_complement_toggles_neighborhood():
    g = GraphRegister(4)
    for v in (1, 2, 3):
        g.apply_cz(0, v)
    before = dense_mirror(g).canonical_rows()
    g.local_complement(0)
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            if a < b:
                assert g.has_edge(a, b)
    # local complementation is implemented with compensating single-qubit
    # Cliffords, so the physical state is unchanged
    assert dense_mirror(g).canonical_rows() == before


def test_measure_z_removes_vertex():
    g = GraphRegister(3)
    g.apply_cz(0, 1).apply_cz(1, 2)
    out = g.measure_pauli(1, "Z", rng())
    assert out in (1, -1)
    assert not g.is_alive(1)
    assert sorted(g.alive_vertices()) == [0, 2]
    assert not g.has_edge(0, 2)


def test_measure_dead_vertex_raises():
    g = GraphRegister(2)
    g.measure_pauli(0, "Z", rng())
    with pytest.raises(VertexStateError):
        g.measure_pauli(0, "X", rng())


def test_lose_degree0_vertex_keeps_adjacency():
    g = GraphRegister(3)
    g.apply_cz(0, 1)
    g.remove_lost(2)
    assert sorted(g.edges()) == [(0, 1)]


def test_lose_star_center_isolates_leaves():
    g = GraphRegister(6)
    for v in range(1, 6):
        g.apply_cz(0, v)
    g.remove_lost(0)
    assert list(g.edges()) == []
    assert g.alive_count() == 5
    assert g.loss_log and g.loss_log[-1][0] == 0


def test_forced_outcome_consistency():
    g = GraphRegister(2)
    g.apply_cz(0, 1)
    out = g.measure_pauli(0, "Z", forced=-1)
    assert out == -1
    # partner collapses to |->: an X measurement is now deterministic -1
    d = dense_mirror(g)
    sign, axis = d.single_qubit_stabilizer(0)
    assert axis == 1 and sign == -1


def test_edge_list_round_trip():
    g = GraphRegister(5)
    g.apply_cz(0, 4).apply_cz(2, 3).apply_cz(0, 2)
    text = g.export_edges()
    assert text.splitlines()[0] == "graphstate v1 5"
    g2 = load_edges(text)
    assert sorted(g2.edges()) == sorted(g.edges())


def test_lc_equivalent_examples():
    # star and complete graph on 4 vertices are one local complementation apart
    star = GraphRegister(4)
    for v in (1, 2, 3):
        star.apply_cz(0, v)
    complete = GraphRegister(4)
    for a in range(4):
        for b in range(a + 1, 4):
            complete.apply_cz(a, b)
    assert lc_equivalent(star, complete)
    # a path and an edgeless graph are not equivalent
    path = GraphRegister(4)
    path.apply_cz(0, 1).apply_cz(1, 2).apply_cz(2, 3)
    assert not lc_equivalent(path, GraphRegister(4))


def test_lc_equivalent_vertex_count_mismatch():
    assert not lc_equivalent(GraphRegister(3), GraphRegister(4))


def test_lc_equivalent_capacity():
    big = GraphRegister(25)
    with pytest.raises(CapacityError):
        lc_equivalent(big, GraphRegister(25))


def test_vop_composition_matches_dense():
    r = rng()
    for _ in range(50):
        g = GraphRegister(2)
        g.apply_cz(0, 1)
        d = DenseStabilizerState(2)
        d.apply_cz(0, 1)
        for _ in range(4):
            v = int(r.integers(2))
            c = int(r.integers(24))
            g.apply_local_clifford(v, c)
            d.apply_clifford(v, c)
        assert dense_mirror(g).canonical_rows() == d.canonical_rows()


def test_measurement_agreement_small_fuzz():
    bad = [s for s in range(500) if not fuzz_case(s, max_qubits=6, ops=15)]
    assert bad == []


def test_from_graph_register_orders_alive_vertices():
    g = GraphRegister(4)
    g.apply_cz(0, 1).apply_cz(1, 2).apply_cz(2, 3)
    g.measure_pauli(1, "Z", rng())
    d = from_graph_register(g)
    assert d.n == 3
    mirror = dense_mirror(g)
    assert d.canonical_rows() == mirror.canonical_rows()


def test_subsystem_canonical_matches_direct_build():
    g = GraphRegister(5)
    g.apply_cz(0, 1).apply_cz(1, 2).apply_cz(3, 4)
    d = DenseStabilizerState(5)
    for a, b in ((0, 1), (1, 2), (3, 4)):
        d.apply_cz(a, b)
    o = g.measure_pauli(2, "X", rng())
    d.measure(2, "X", forced=o)
    assert dense_mirror(g).canonical_rows() == subsystem_canonical(d, [0, 1, 3, 4])


def test_pauli_frame_tracked_after_measurement():
    g = GraphRegister(3)
    g.apply_cz(0, 1).apply_cz(1, 2)
    g.measure_pauli(1, "X", forced=1)
    # byproduct operators land on the neighbors but never change the
    # stabilizer group modulo signs tracked in the frame
    assert all(g.get_frame(v) in (0, 1, 2, 3) for v in g.alive_vertices())


def test_clifford_group_tables():
    assert cl.ID == 0 or isinstance(cl.ID, int)
    assert len(set(cl.PAULI_IDX)) == 4
