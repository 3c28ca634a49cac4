"""Desk-scale simulator of a ballistic photonic cluster-state architecture.

Modules:
  graphstate  — sparse graph-state engine with per-vertex local Cliffords
  dense       — brute-force stabilizer oracle for <= 12 qubits
  clifford    — the 24 single-qubit Clifford operators and their tables
  fock        — small-photon-number linear-optics oracle
  fusion      — probabilistic fusion operations on graph states
  builder     — unit-cell wiring and wafer assembly into a 3D lattice
  percolation — crossing checks, threshold estimation, windowed pathfinding
  multiplex   — photon streams, delay networks, matching and yields
  losstol     — loss-tolerant encoded wires and spliceable gadgets
  cli         — seeded, parallel, deterministic experiment harness
"""

from .errors import (
    BallisticError,
    CapacityError,
    ConvergenceError,
    GadgetRejectedError,
    ShapeError,
    SpecError,
    VertexStateError,
)
from .graphstate import GraphRegister, lc_equivalent, load_edges
from .dense import DenseStabilizerState, from_graph_register
from .fock import (
    FockState,
    Interferometer,
    apply_interferometer,
    detection_probability,
    type2_fusion_success_probability,
)
from .fusion import FusionOutcome, FusionParams, expected_bond_probability, fuse
from .builder import (
    BuiltLattice,
    UnitCellSpec,
    WaferSpec,
    apply_plus_filter,
    build_wafer,
    db_to_probability,
    optical_depth_report,
)
from .percolation import (
    PathfindingState,
    crossing_exists,
    estimate_threshold,
    find_paths_windowed,
    largest_component_fraction,
    punch_out,
    square_lattice_family,
    sustained_layers,
)
from .multiplex import (
    DelayNetwork,
    DtpParams,
    MatchedPair,
    PhotonStream,
    SwitchModel,
    delivered_pairs,
    dtp_success_prob,
    extinction_to_z_error,
    matching_rmux,
    route_with_delays,
    sliding_window_match,
    standard_mux_prob,
    standard_mux_pair_yield,
    yield_curve,
)
from .losstol import (
    CrazyGraphSpec,
    GadgetGraph,
    build_crazy_graph,
    build_ring_block,
    build_s_gadget,
    prepare_gadget,
    simulate_teleport,
    teleport_success_prob,
    verify_ring_block_equivalence,
    verify_s_gadget,
)
from .rng import run_rng, trial_rng

__version__ = "0.1.0"
