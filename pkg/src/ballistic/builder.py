"""Wafer assembly: per-cell GHZ resources, fusion wiring, loss and filter.

A unit cell holds 6 three-photon sources (18 photon slots).  Four multiplexed
"formation" fusions shape the cell into two degree-4 computational qubits
(one primal, one dual); the remaining four fusions are ballistic bonds that
tie cells together in x, y and (via two delayed photons) z.  The surviving
bonds form the percolated 3D lattice consumed by the percolation module.

Two build modes share one stream of random draws:
  * graph mode — every photon is a GraphRegister vertex and every fusion a
    register operation (exact, used for validation and small lattices);
  * bond mode  — the computational-qubit lattice is derived directly from
    the draws with vectorized boolean algebra (identical distribution,
    desk-scale fast).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError, VertexStateError
from .fusion import FAILURE, LOSS_HERALD, SUCCESS, FusionParams, fuse
from .graphstate import GraphRegister

PRIMAL, DUAL = 0, 1

_DEFAULT_COMP = {1: "primal", 4: "dual"}
_DEFAULT_FORMATION = ((0, 7), (2, 13), (3, 10), (5, 16))
# (local slot, remote slot, cell offset): the local slot fuses with the
# remote slot of the cell at +offset.  z offsets are realized by delaying
# the local photon one layer.
_DEFAULT_BONDS = (
    (6, 9, (0, 0, 1)),
    (17, 14, (0, 0, 1)),
    (8, 12, (1, 0, 0)),
    (11, 15, (0, 1, 0)),
)
def _derive_stub_maps(cell: "UnitCellSpec"):
    """(stub -> formation index, stub -> computational slot) from wiring.

    Valid for the default wiring family: each formation fuses an end photon
    of a computational source onto the middle photon of a stub source.
    """
    ps = cell.photons_per_source
    if ps != 3:
        raise SpecError("bond-level mode requires 3-photon sources")
    stub_formation: dict[int, int] = {}
    stub_comp: dict[int, int] = {}
    for ls, rs, _off in cell.bond_pairs:
        for s in (ls, rs):
            middle = 3 * (s // 3) + 1
            fi = next(
                (
                    i
                    for i, p in enumerate(cell.formation_pairs)
                    if middle in p
                ),
                None,
            )
            if fi is None:
                raise SpecError(
                    "bond-level mode: stub source middle is not fused by a"
                    " formation pair"
                )
            a, b = cell.formation_pairs[fi]
            end = a if b == middle else b
            comp = 3 * (end // 3) + 1
            if comp not in cell.computational_slots:
                raise SpecError(
                    "bond-level mode: formation does not attach the stub to"
                    " a computational qubit"
                )
            stub_formation[s] = fi
            stub_comp[s] = comp
    return stub_formation, stub_comp
# Default static-element layout: waveguide crossings per slot (<=1 each).
_DEFAULT_CROSSINGS = (14, 17)


@dataclass(frozen=True)
class UnitCellSpec:
    sources_per_cell: int = 6
    photons_per_source: int = 3
    computational_slots: dict = field(
        default_factory=lambda: dict(_DEFAULT_COMP)
    )
    formation_pairs: tuple = _DEFAULT_FORMATION
    bond_pairs: tuple = _DEFAULT_BONDS
    crossing_slots: tuple = _DEFAULT_CROSSINGS
    ghz_source_success_prob: float = 1.0 / 32.0

    @property
    def photons_per_cell(self) -> int:
        return self.sources_per_cell * self.photons_per_source

    @property
    def delayed_slots(self) -> tuple:
        return tuple(
            ls for ls, _rs, off in self.bond_pairs if off[2] != 0
        )

    @property
    def intra_fusions(self) -> int:
        """Fusion pairs both of whose slots the cell owns (z via delay)."""
        return len(self.formation_pairs) + sum(
            1 for _ls, _rs, off in self.bond_pairs if off[2] != 0
        )

    @property
    def boundary_fusions(self) -> int:
        """Slots given to fusions shared with x/y neighbor cells."""
        return 2 * sum(
            1 for _ls, _rs, off in self.bond_pairs if off[2] == 0
        )

    @property
    def fusions_per_cell(self) -> int:
        return len(self.formation_pairs) + len(self.bond_pairs)

    def validate(self) -> None:
        n = self.photons_per_cell
        comp = set(self.computational_slots)
        if not comp or any(not 0 <= s < n for s in comp):
            raise SpecError("computational slots out of range")
        used: list[int] = []
        for a, b in self.formation_pairs:
            used += [a, b]
        for ls, rs, off in self.bond_pairs:
            used += [ls, rs]
            if off == (0, 0, 0):
                raise SpecError("bond pair with zero offset")
            if off[2] not in (0, 1):
                raise SpecError("z bonds must target the next layer")
        if any(not 0 <= s < n for s in used):
            raise SpecError("wiring slot out of range")
        if comp & set(used):
            raise SpecError("computational slots must not be fused")
        if len(used) != len(set(used)):
            raise SpecError("a slot appears in more than one fusion pair")
        if set(used) | comp != set(range(n)):
            missing = sorted(set(range(n)) - set(used) - comp)
            raise SpecError(f"slots not covered by wiring: {missing}")
        if 2 * self.intra_fusions + self.boundary_fusions != n - len(comp):
            raise SpecError("intra/boundary fusion counts inconsistent")

    # -- config round-trip -------------------------------------------------

    def to_config(self) -> dict:
        return {
            "schema": "cellspec v1",
            "sources_per_cell": self.sources_per_cell,
            "photons_per_source": self.photons_per_source,
            "computational_slots": {
                str(k): v for k, v in self.computational_slots.items()
            },
            "formation_pairs": [list(p) for p in self.formation_pairs],
            "bond_pairs": [
                [ls, rs, list(off)] for ls, rs, off in self.bond_pairs
            ],
            "crossing_slots": list(self.crossing_slots),
            "ghz_source_success_prob": self.ghz_source_success_prob,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "UnitCellSpec":
        if cfg.get("schema") != "cellspec v1":
            raise SpecError(
                f"unsupported cell schema {cfg.get('schema')!r}"
            )
        try:
            spec = cls(
                sources_per_cell=int(cfg["sources_per_cell"]),
                photons_per_source=int(cfg["photons_per_source"]),
                computational_slots={
                    int(k): str(v)
                    for k, v in cfg["computational_slots"].items()
                },
                formation_pairs=tuple(
                    (int(a), int(b)) for a, b in cfg["formation_pairs"]
                ),
                bond_pairs=tuple(
                    (int(ls), int(rs), tuple(int(x) for x in off))
                    for ls, rs, off in cfg["bond_pairs"]
                ),
                crossing_slots=tuple(
                    int(s) for s in cfg.get("crossing_slots", ())
                ),
                ghz_source_success_prob=float(
                    cfg.get("ghz_source_success_prob", 1.0 / 32.0)
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed cell config: {exc}") from exc
        spec.validate()
        return spec


@dataclass(frozen=True)
class WaferSpec:
    nx: int
    ny: int
    nz: int
    fusion_params: FusionParams = field(default_factory=FusionParams)
    photon_loss: float = 0.0
    filter_fidelity: float = 1.0
    filter_enabled: bool = False

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise SpecError("wafer dimensions must be >= 1")
        if not 0.0 <= self.photon_loss < 1.0:
            raise SpecError("photon_loss outside [0, 1)")
        if not 0.0 <= self.filter_fidelity <= 1.0:
            raise SpecError("filter_fidelity outside [0, 1]")

    @property
    def cells(self) -> int:
        return self.nx * self.ny * self.nz


class CompLattice:
    """Computational-qubit lattice: 2 nodes per cell plus surviving bonds.

    Node flat id = ((x * ny + y) * nz + z) * 2 + parity, parity 0 = primal,
    1 = dual.  `alive` is raw survival (loss + filter on the qubit itself);
    `alive_punched` additionally removes qubits damaged by an adjacent
    photon loss (the punch-out rule).
    """

    def __init__(self, nx, ny, nz, alive, alive_punched, edges):
        self.nx, self.ny, self.nz = nx, ny, nz
        self.alive = alive
        self.alive_punched = alive_punched
        self.edges = edges  # (m, 2) int array of flat node ids

    @property
    def node_count(self) -> int:
        return self.nx * self.ny * self.nz * 2

    def flat(self, x, y, z, parity):
        return ((x * self.ny + y) * self.nz + z) * 2 + parity

    def coords(self, i):
        parity = i % 2
        i //= 2
        z = i % self.nz
        i //= self.nz
        return i // self.ny, i % self.ny, z, parity

    def alive_flat(self, punched: bool = False) -> np.ndarray:
        a = self.alive_punched if punched else self.alive
        return a.reshape(-1)


@dataclass
class BuiltLattice:
    register: GraphRegister | None
    computational_vertices: dict
    fusion_log: list
    resource_report: dict
    comp: CompLattice

    def export_comp_csv(self, fileobj=None) -> str:
        """Side table of computational vertex coordinates."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["x", "y", "z", "primal_id", "dual_id"])
        for (x, y, z), (p, d) in sorted(self.computational_vertices.items()):
            w.writerow([x, y, z, p, d])
        text = buf.getvalue()
        if fileobj is not None:
            fileobj.write(text)
        return text


def make_ghz3(reg: GraphRegister) -> tuple[int, int, int]:
    """Append one 3-photon resource as a linear cluster a-b-c."""
    a, b, c = reg.add_vertices(3)
    reg.apply_cz(a, b)
    reg.apply_cz(b, c)
    return a, b, c


def apply_plus_filter(reg: GraphRegister, vertex: int, fidelity: float, rng) -> bool:
    """Filter an imperfect qubit: keep (ideal thereafter) or Z-measure out."""
    if not reg.is_alive(vertex):
        raise VertexStateError(f"vertex {vertex} is dead")
    if rng.random() < fidelity:
        return True
    reg.measure_pauli(vertex, "Z", rng)
    return False


# -- shared draw sampling ---------------------------------------------------


def _sample_draws(spec: WaferSpec, cell: UnitCellSpec, rng):
    """All structured randomness of one build, in a fixed order.

    Both build modes consume exactly these arrays, so their lattices agree
    draw-for-draw.
    """
    shape = (spec.nx, spec.ny, spec.nz)
    nslots = cell.photons_per_cell
    lost = rng.random(shape + (nslots,)) < spec.photon_loss
    if spec.filter_enabled:
        kept = rng.random(shape + (nslots,)) < spec.filter_fidelity
    else:
        kept = np.ones(shape + (nslots,), dtype=bool)
    success = (
        rng.random(shape + (len(cell.bond_pairs),))
        < spec.fusion_params.success_prob
    )
    return lost, kept, success


def _slot_masks(cell: UnitCellSpec, lost, kept):
    """Per-slot survival / damage / usability from the emission draws."""
    n = cell.photons_per_cell
    damaged = np.zeros_like(lost)
    for s in range(n):
        src, pos = divmod(s, cell.photons_per_source)
        if pos == 1:  # chain middle: damaged if either end is lost
            mates = (3 * src, 3 * src + 2)
        else:  # chain end: damaged if the middle is lost
            mates = (3 * src + 1,)
        for m in mates:
            damaged[..., s] |= lost[..., m]
    usable = ~lost & kept & ~damaged
    return usable, damaged


def _shift_ok(arr, off):
    """arr value at cell + off, False outside the wafer."""
    out = np.zeros_like(arr)
    dx, dy, dz = off
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    for axis, d in enumerate((dx, dy, dz)):
        if d == 0:
            continue
        src[axis] = slice(d, None)
        dst[axis] = slice(None, -d)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def build_wafer(
    spec: WaferSpec,
    cell: UnitCellSpec | None = None,
    rng=None,
    graph_level: bool = True,
) -> BuiltLattice:
    cell = cell or UnitCellSpec()
    cell.validate()
    draws = _sample_draws(spec, cell, rng)
    if graph_level:
        return _build_graph_level(spec, cell, draws, rng)
    return _build_bond_level(spec, cell, draws)


def _comp_pair(cell: UnitCellSpec) -> tuple[int, int]:
    items = sorted(cell.computational_slots.items())
    primal = next(s for s, t in items if t == "primal")
    dual = next(s for s, t in items if t == "dual")
    return primal, dual


def _resource_report(spec: WaferSpec, cell: UnitCellSpec) -> dict:
    cells = spec.cells
    photons = cells * cell.photons_per_cell
    fusions = cells * cell.fusions_per_cell
    ancillas = fusions * spec.fusion_params.ancillas_per_fusion
    comp_qubits = cells * len(cell.computational_slots)
    boosted_ancillas = fusions * spec.fusion_params.ancilla_cost
    return {
        "cells": cells,
        "photons_emitted": photons,
        "fusions_attempted": fusions,
        "ancillas_consumed": ancillas,
        "photons_emitted_total": photons + ancillas,
        "computational_qubits": comp_qubits,
        "photons_per_computational_no_ancilla": photons / comp_qubits,
        "photons_per_computational_with_ancilla": (
            (photons + boosted_ancillas) / comp_qubits
        ),
        "expected_source_attempts_per_ghz": (
            1.0 / cell.ghz_source_success_prob
        ),
    }


def _build_bond_level(spec, cell, draws) -> BuiltLattice:
    lost, kept, success = draws
    usable, _damaged = _slot_masks(cell, lost, kept)
    primal, dual = _comp_pair(cell)
    stub_formation, stub_comp = _derive_stub_maps(cell)

    # Raw survival of a computational qubit: not lost, passed the filter.
    # (Frame damage from adjacent losses only matters for the punched view.)
    comp_alive = {
        primal: ~lost[..., primal] & kept[..., primal],
        dual: ~lost[..., dual] & kept[..., dual],
    }
    formation_ok = {
        i: usable[..., a] & usable[..., b]
        for i, (a, b) in enumerate(cell.formation_pairs)
    }
    # Stub is attached to its computational qubit iff its photon is usable,
    # its formation succeeded, and the qubit itself survived raw.
    attached = {}
    present = {}
    for s, fi in stub_formation.items():
        present[s] = usable[..., s]
        attached[s] = (
            present[s] & formation_ok[fi] & comp_alive[stub_comp[s]]
        )

    edges = []
    # Damage from ballistic loss heralds: a surviving attached stub whose
    # fusion partner never arrived is dropped as lost, wounding its qubit.
    herald_damage = {primal: np.zeros(usable.shape[:3], dtype=bool),
                     dual: np.zeros(usable.shape[:3], dtype=bool)}
    nxa, nya, nza = usable.shape[:3]
    for bi, (ls, rs, off) in enumerate(cell.bond_pairs):
        in_range = np.zeros(usable.shape[:3], dtype=bool)
        sl = [slice(None)] * 3
        for axis, d in enumerate(off):
            if d:
                sl[axis] = slice(None, -d)
        in_range[tuple(sl)] = True
        p_remote = _shift_ok(present[rs], off)
        a_remote = _shift_ok(attached[rs], off)
        both = present[ls] & p_remote & in_range
        bond = both & success[..., bi] & attached[ls] & a_remote
        # local stub present, partner missing -> local loss herald
        lh_local = in_range & present[ls] & ~p_remote & attached[ls]
        herald_damage[stub_comp[ls]] |= lh_local
        # remote stub present, local missing -> remote loss herald
        lh_remote = in_range & ~present[ls] & p_remote & a_remote
        rd = np.zeros_like(lh_remote)
        dsl = [slice(None)] * 3
        ssl = [slice(None)] * 3
        for axis, d in enumerate(off):
            if d:
                dsl[axis] = slice(d, None)
                ssl[axis] = slice(None, -d)
        rd[tuple(dsl)] = lh_remote[tuple(ssl)]
        herald_damage[stub_comp[rs]] |= rd
        edges.append((bond, ls, rs, off))

    # Raw node survival and punched survival.
    chain_damage = {}
    for slot in (primal, dual):
        src = slot // cell.photons_per_source
        ends = (3 * src, 3 * src + 2)
        dmg = np.zeros(usable.shape[:3], dtype=bool)
        for e in ends:
            dmg |= lost[..., e]
        chain_damage[slot] = dmg
    alive = np.stack([comp_alive[primal], comp_alive[dual]], axis=-1)
    alive_punched = np.stack(
        [
            comp_alive[primal]
            & ~chain_damage[primal]
            & ~herald_damage[primal],
            comp_alive[dual] & ~chain_damage[dual] & ~herald_damage[dual],
        ],
        axis=-1,
    )

    lattice = CompLattice(
        spec.nx, spec.ny, spec.nz, alive, alive_punched,
        _edges_to_flat(spec, cell, edges, stub_comp),
    )
    return BuiltLattice(
        register=None,
        computational_vertices={},
        fusion_log=[],
        resource_report=_resource_report(spec, cell),
        comp=lattice,
    )


def _edges_to_flat(spec, cell, edges, stub_comp) -> np.ndarray:
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    xs, ys, zs = np.meshgrid(
        np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
    )
    flat = ((xs * ny + ys) * nz + zs) * 2
    out = []
    primal, _dual = _comp_pair(cell)
    for bond, ls, rs, off in edges:
        par_l = PRIMAL if stub_comp[ls] == primal else DUAL
        par_r = PRIMAL if stub_comp[rs] == primal else DUAL
        sel = np.nonzero(bond)
        a = flat[sel] + par_l
        bx = xs[sel] + off[0]
        by = ys[sel] + off[1]
        bz = zs[sel] + off[2]
        b = ((bx * ny + by) * nz + bz) * 2 + par_r
        out.append(np.stack([a, b], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out, axis=0)


def _build_graph_level(spec, cell, draws, rng) -> BuiltLattice:
    lost, kept, success = draws
    if rng is None:  # pragma: no cover - defensive
        raise SpecError("graph-level build requires an rng")
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    nslots = cell.photons_per_cell
    reg = GraphRegister(0)
    base = {}
    log = []
    primal, dual = _comp_pair(cell)

    def vid(x, y, z, slot):
        return base[(x, y, z)] + slot

    def usable(v):
        return reg.is_alive(v) and reg.frame_is_known(v)

    coords = [
        (x, y, z)
        for z in range(nz)
        for x in range(nx)
        for y in range(ny)
    ]
    for (x, y, z) in coords:
        start = reg.vertex_count
        base[(x, y, z)] = start
        for _ in range(cell.sources_per_cell):
            make_ghz3(reg)
        # Emission-time loss, then the |+> filter on the survivors.
        for s in range(nslots):
            if lost[x, y, z, s]:
                reg.remove_lost(start + s)
        for s in range(nslots):
            v = start + s
            if reg.is_alive(v) and not kept[x, y, z, s]:
                reg.measure_pauli(v, "Z", rng)

    forced_success = FusionParams(
        kind=spec.fusion_params.kind,
        success_prob=1.0,
        ancilla_cost=spec.fusion_params.ancilla_cost,
    )

    def attempt(a, b, params, branch, kind, where):
        alive_pair = [v for v in (a, b) if reg.is_alive(v)]
        if len(alive_pair) == 2 and usable(a) and usable(b):
            out = fuse(reg, a, b, params, rng, forced=branch)
            log.append((where, kind, (a, b), out.result))
            return
        # A participant is missing or carries an unknown byproduct.
        if kind == "formation":
            # Multiplexed stage: absence is heralded, survivors are cleanly
            # switched out (Z-measured).
            for v in alive_pair:
                reg.measure_pauli(v, "Z", rng)
        else:
            # Ballistic stage: no herald, survivors are dropped as lost.
            for v in alive_pair:
                reg.remove_lost(v)
        log.append((where, kind, (a, b), LOSS_HERALD))

    for (x, y, z) in coords:
        for (a, b) in cell.formation_pairs:
            attempt(
                vid(x, y, z, a), vid(x, y, z, b),
                forced_success, SUCCESS, "formation", (x, y, z),
            )
    for (x, y, z) in coords:
        for bi, (ls, rs, off) in enumerate(cell.bond_pairs):
            tx, ty, tz = x + off[0], y + off[1], z + off[2]
            va = vid(x, y, z, ls)
            if not (0 <= tx < nx and 0 <= ty < ny and 0 <= tz < nz):
                # Wafer edge: the photon meets no partner and is measured
                # out at a monitor detector.
                if reg.is_alive(va):
                    reg.measure_pauli(va, "Z", rng)
                continue
            branch = SUCCESS if success[x, y, z, bi] else FAILURE
            attempt(
                va, vid(tx, ty, tz, rs),
                spec.fusion_params, branch, "bond", (x, y, z),
            )

    comp_vertices = {
        (x, y, z): (vid(x, y, z, primal), vid(x, y, z, dual))
        for (x, y, z) in coords
    }
    lattice = _comp_from_register(spec, cell, reg, comp_vertices)
    return BuiltLattice(
        register=reg,
        computational_vertices=comp_vertices,
        fusion_log=log,
        resource_report=_resource_report(spec, cell),
        comp=lattice,
    )


def _comp_from_register(spec, cell, reg, comp_vertices) -> CompLattice:
    nx, ny, nz = spec.nx, spec.ny, spec.nz
    alive = np.zeros((nx, ny, nz, 2), dtype=bool)
    punched = np.zeros((nx, ny, nz, 2), dtype=bool)
    vert_to_node = {}
    for (x, y, z), (p, d) in comp_vertices.items():
        for parity, v in ((PRIMAL, p), (DUAL, d)):
            a = reg.is_alive(v)
            alive[x, y, z, parity] = a
            punched[x, y, z, parity] = a and reg.frame_is_known(v)
            vert_to_node[v] = ((x * ny + y) * nz + z) * 2 + parity
    edges = []
    for u, v in reg.edges():
        if u in vert_to_node and v in vert_to_node:
            edges.append((vert_to_node[u], vert_to_node[v]))
    arr = (
        np.array(sorted(edges), dtype=np.int64)
        if edges
        else np.zeros((0, 2), dtype=np.int64)
    )
    return CompLattice(nx, ny, nz, alive, punched, arr)


# -- static optics accounting ----------------------------------------------

_SOURCE_ELEMENTS = 3  # on-chip source circuit depth per photon
_FUSION_ELEMENTS = 3  # rotate / combine / rotate of a Type-II network
_DETECTOR_ELEMENTS = 1


def optical_depth_report(cell: UnitCellSpec) -> dict:
    cell.validate()
    fused = set()
    for a, b in cell.formation_pairs:
        fused |= {a, b}
    for ls, rs, _off in cell.bond_pairs:
        fused |= {ls, rs}
    delayed = set(cell.delayed_slots)
    crossings = set(cell.crossing_slots)
    per_slot = {}
    for s in range(cell.photons_per_cell):
        comp = s in cell.computational_slots
        elements = {
            "source": _SOURCE_ELEMENTS,
            "fusion": _FUSION_ELEMENTS if s in fused else 0,
            "delay": 1 if s in delayed else 0,
            "crossing": 1 if s in crossings else 0,
            "phase_shifter": 1 if comp else 0,
            "detector": _DETECTOR_ELEMENTS,
        }
        elements["depth"] = sum(elements.values())
        per_slot[s] = elements
    depths = [e["depth"] for e in per_slot.values()]
    return {
        "per_slot": per_slot,
        "max": max(depths),
        "mean": sum(depths) / len(depths),
    }


def db_to_probability(db: float) -> float:
    """Attenuation in dB (<= 0) to transmission probability."""
    if db > 0:
        raise SpecError("attenuation must be expressed as dB <= 0")
    return 10.0 ** (db / 10.0)


def probability_to_db(p: float) -> float:
    if not 0.0 < p <= 1.0:
        raise SpecError("transmission probability must be in (0, 1]")
    return 10.0 * np.log10(p)


def load_cell_config(text: str) -> UnitCellSpec:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"cell config is not valid JSON: {exc}") from exc
    return UnitCellSpec.from_config(cfg)
