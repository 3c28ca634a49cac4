"""Loss-tolerant encoded wires and measurement gadgets.

A logical wire qubit is replaced by a column of L physical qubits with
complete connections to the neighboring columns; teleportation along the
wire survives as long as every column keeps at least one qubit, giving the
closed-form success law (1 - eps^L)^N.  Pauli-Z noise on survivors is
suppressed by a per-column majority vote.  The module also provides a
spliceable phase-gate (S) gadget with its non-loss-protected central qubit
measured in Y before attachment, and the bounded-degree ring construction
whose two X measurements produce a complete-bipartite column block.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.stats import binom

from .dense import from_graph_register
from .errors import CapacityError, GadgetRejectedError, SpecError
from .graphstate import GraphRegister, lc_equivalent, load_edges


# -- encoded wire -----------------------------------------------------------


@dataclass(frozen=True)
class CrazyGraphSpec:
    """Loss-tolerant wire: N columns of L qubits each."""

    columns: int
    column_size: int
    loss: float = 0.0
    z_flip: float = 0.0

    def __post_init__(self):
        if self.columns < 1 or self.column_size < 1:
            raise SpecError("need at least one column of one qubit")
        for p in (self.loss, self.z_flip):
            if not 0.0 <= p <= 1.0:
                raise SpecError("probabilities must lie in [0, 1]")


def build_crazy_graph(spec: CrazyGraphSpec) -> GraphRegister:
    """N columns of L vertices, complete bipartite between adjacent columns.

    Vertex ids are column-major: column c holds c*L .. c*L + L - 1.  No
    intra-column edges; L = 1 degenerates to a linear cluster.
    """
    N, L = spec.columns, spec.column_size
    g = GraphRegister(N * L)
    for c in range(N - 1):
        for i in range(L):
            for j in range(L):
                g.apply_cz(c * L + i, (c + 1) * L + j)
    return g


def teleport_success_prob(spec: CrazyGraphSpec) -> float:
    """(1 - eps^L)^N: every column must keep at least one qubit."""
    return (1.0 - spec.loss**spec.column_size) ** spec.columns


@dataclass(frozen=True)
class TeleportReport:
    trials: int
    success_rate: float
    flip_rate: float
    tie_frequency: float


def simulate_teleport(
    spec: CrazyGraphSpec, rng, trials: int
) -> TeleportReport:
    """Monte Carlo loss + Z-noise teleportation at the combinatorial level.

    Per trial each qubit is lost independently with probability `loss`;
    success means every column keeps a survivor.  Each survivor's X outcome
    flips independently with probability `z_flip` and the column value is
    the majority vote among survivors (even splits resolved by a fair
    coin).  The flip rate is the fraction of successful trials where any
    column votes wrong; tie_frequency is the fraction of successful trials
    containing at least one coin-resolved column.
    """
    if trials < 1:
        raise SpecError("trials must be >= 1")
    N, L = spec.columns, spec.column_size
    lost = rng.random((trials, N, L)) < spec.loss
    survivors = (~lost).sum(axis=2)
    success = (survivors > 0).all(axis=1)
    flips = ((rng.random((trials, N, L)) < spec.z_flip) & ~lost).sum(axis=2)
    wrong = 2 * flips > survivors
    tie = (2 * flips == survivors) & (survivors > 0)
    coin = rng.random((trials, N)) < 0.5
    col_wrong = wrong | (tie & coin)
    n_success = int(success.sum())
    if n_success == 0:
        return TeleportReport(trials, 0.0, 0.0, 0.0)
    flip = col_wrong.any(axis=1) & success
    tied = tie.any(axis=1) & success
    return TeleportReport(
        trials,
        n_success / trials,
        int(flip.sum()) / n_success,
        int(tied.sum()) / n_success,
    )


def exact_flip_prob(L: int, loss: float, z_flip: float) -> float:
    """Exact single-column majority-vote flip rate (analytic oracle).

    Survivor-count-conditioned binomial mixture: condition on s >= 1
    survivors, flip iff more than half flip, plus half the even-split
    probability for the fair-coin tie.
    """
    if L < 1:
        raise SpecError("column size must be >= 1")
    norm = 1.0 - loss**L
    if norm == 0.0:
        return 0.0
    total = 0.0
    for s in range(1, L + 1):
        p_s = math.comb(L, s) * (1 - loss) ** s * loss ** (L - s)
        flip = 1.0 - binom.cdf(s // 2, s, z_flip)
        if s % 2 == 0:
            flip += 0.5 * binom.pmf(s // 2, s, z_flip)
        total += p_s * flip
    return total / norm


# -- spliceable gadgets -----------------------------------------------------


@dataclass
class GadgetGraph:
    """A pre-built cluster fragment with splice points and pre-measurements.

    `inputs`/`outputs` are the vertices fused or CZ-attached to the
    surrounding wire; `premeasure` lists (vertex, basis) measurements to
    perform before attachment (their loss is heralded early).
    """

    register: GraphRegister
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    premeasure: tuple[tuple[int, str], ...] = ()

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(self.register.export_edges())
        for v in self.inputs:
            out.write(f"# in: {v}\n")
        for v in self.outputs:
            out.write(f"# out: {v}\n")
        for v, basis in self.premeasure:
            out.write(f"# premeasure: {v} {basis}\n")
        return out.getvalue()

    @staticmethod
    def from_text(text: str) -> "GadgetGraph":
        reg = load_edges(text)
        ins, outs, pre = [], [], []
        for ln in text.splitlines():
            if ln.startswith("# in:"):
                ins.append(int(ln.split(":")[1]))
            elif ln.startswith("# out:"):
                outs.append(int(ln.split(":")[1]))
            elif ln.startswith("# premeasure:"):
                v, basis = ln.split(":")[1].split()
                pre.append((int(v), basis))
        return GadgetGraph(reg, tuple(ins), tuple(outs), tuple(pre))


def build_s_gadget(L: int) -> GadgetGraph:
    """Phase-gate gadget: three columns of width L plus a central Y qubit.

    The central qubit attaches to every qubit of the middle column; its Y
    measurement (performed before splicing) bakes the S correction into the
    column so that teleporting through the piece applies S to the logical
    qubit.  The first/last columns are the splice points.
    """
    if L < 1:
        raise SpecError("column width must be >= 1")
    cols = [list(range(c * L, (c + 1) * L)) for c in range(3)]
    central = 3 * L
    g = GraphRegister(3 * L + 1)
    for c in range(2):
        for i in cols[c]:
            for j in cols[c + 1]:
                g.apply_cz(i, j)
    for i in cols[1]:
        g.apply_cz(central, i)
    return GadgetGraph(
        g, tuple(cols[0]), tuple(cols[2]), ((central, "Y"),)
    )


def load_s_gadget(L: int) -> GadgetGraph:
    """Load the shipped phase-gate gadget template for width L."""
    path = resources.files("ballistic").joinpath(f"data/s_gadget_{L}.txt")
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise SpecError(f"no shipped gadget for width {L}") from exc
    return GadgetGraph.from_text(text)


def prepare_gadget(gadget: GadgetGraph, rng) -> GraphRegister:
    """Apply the gadget's pre-measurements on a copy of its template.

    Raises GadgetRejectedError if any pre-measured vertex is dead (e.g.
    marked lost): the whole piece is discarded before attachment.
    """
    for v, _basis in gadget.premeasure:
        if not gadget.register.is_alive(v):
            raise GadgetRejectedError(
                f"pre-measured vertex {v} is lost; gadget discarded"
            )
    reg = gadget.register.copy()
    for v, basis in gadget.premeasure:
        reg.measure_pauli(v, basis, rng)
    return reg


# Single-qubit local Cliffords preparing the six Pauli eigenstates from |+>.
_EIGENSTATE_VOPS = {
    (1, 1): 0,  # |+>
    (-1, 1): 5,  # |->
    (1, 2): 2,  # |+i>
    (-1, 2): 3,  # |-i>
    (1, 3): 1,  # |0>
    (-1, 3): 7,  # |1>
}

# Axis images under conjugation by S: X -> Y, Y -> X (sign dropped), Z -> Z.
_S_AXIS = {1: 2, 2: 1, 3: 3}


def verify_s_gadget(L: int, rng=None, trials: int = 8) -> bool:
    """Check the gadget teleports each Pauli eigenstate to S(state).

    Splices the pre-measured gadget into a single-qubit wire (input qubit
    CZ-attached to the first column, output to the last), X-measures the
    input and all columns, and verifies in the dense oracle that the output
    is the S image of the input axis up to the tracked Pauli frame (sign).
    """
    n = 3 * L + 3
    if n > 12:
        raise CapacityError("gadget exceeds the dense-oracle bound")
    rng = rng if rng is not None else np.random.default_rng(0)
    gadget = build_s_gadget(L)
    for (sign, axis), vop in _EIGENSTATE_VOPS.items():
        for _ in range(trials):
            reg = prepare_gadget(gadget, rng)
            base = reg.vertex_count
            u, v = base, base + 1
            reg.add_vertices(2)
            reg.apply_local_clifford(u, vop)
            for i in gadget.inputs:
                reg.apply_cz(u, i)
            for i in gadget.outputs:
                reg.apply_cz(i, v)
            reg.measure_pauli(u, "X", rng)
            for i in range(3 * L):
                reg.measure_pauli(i, "X", rng)
            dense = from_graph_register(reg)
            q = sorted(reg.alive_vertices()).index(v)
            _out_sign, out_axis = dense.single_qubit_stabilizer(q)
            if out_axis != _S_AXIS[axis]:
                return False
    return True


# -- bounded-degree ring construction of a column block ---------------------


def build_ring_block(L: int) -> tuple[GraphRegister, tuple[int, int]]:
    """Low-degree graph whose two X measurements leave a K_{L,L} block.

    A 4-ring 0-1-2-3 where the adjacent pair (0, 1) is X-measured; each
    measured vertex carries a pendant star of L - 1 vertices (centers 4
    and 5, leaves 6 .. 2L+1).  Every vertex has degree <= max(3, L - 1),
    far below the 2L of the complete-bipartite block it unpacks into, and
    degree <= 3 for every L <= 4.  One family serves every width L >= 2.
    """
    if L < 2:
        raise SpecError("column width must be >= 2")
    n = 2 * L + 2
    g = GraphRegister(n)
    for a, b in ((0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 5)):
        g.apply_cz(a, b)
    for x in range(6, 4 + L):
        g.apply_cz(4, x)
    for x in range(4 + L, n):
        g.apply_cz(5, x)
    return g, (0, 1)


def _block_parts(L: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Bipartition of the survivors carrying the two crazy-graph columns."""
    part_a = (2, 4) + tuple(range(6, 4 + L))
    part_b = (3, 5) + tuple(range(4 + L, 2 * L + 2))
    return part_a, part_b


def column_block(L: int) -> GraphRegister:
    """K_{L,L} target on the ring block's surviving vertex labels."""
    part_a, part_b = _block_parts(L)
    g = GraphRegister(2 * L + 2)
    for a in part_a:
        for b in part_b:
            g.apply_cz(a, b)
    dead_rng = np.random.default_rng(0)
    g.measure_pauli(0, "Z", dead_rng)
    g.measure_pauli(1, "Z", dead_rng)
    return g


def verify_ring_block_equivalence(L: int, rng=None) -> bool:
    """X-measure the indicated ring pair; check the remainder is locally
    equivalent (by local complementations) to the K_{L,L} column block."""
    rng = rng if rng is not None else np.random.default_rng(0)
    g, (x1, x2) = build_ring_block(L)
    g.measure_pauli(x1, "X", rng)
    g.measure_pauli(x2, "X", rng)
    return lc_equivalent(g, column_block(L))
