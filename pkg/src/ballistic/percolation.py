"""Connectivity analytics on built lattices.

Crossing/spanning checks, bond-threshold estimation by bisection, punch-out
loss recovery, and windowed pathfinding of logical wires through the layered
lattice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .builder import BuiltLattice, CompLattice
from .errors import ConvergenceError, SpecError
from .graphstate import GraphRegister

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass
class PercolationReport:
    seed: int
    spec_hash: str
    trials: int
    crossing: dict
    largest_component_fraction: float
    spanning_probability: float
    standard_error: float
    sustained_layers: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "spec_hash": self.spec_hash,
                "trials": self.trials,
                "crossing": self.crossing,
                "largest_component_fraction": self.largest_component_fraction,
                "spanning_probability": self.spanning_probability,
                "standard_error": self.standard_error,
                "sustained_layers": self.sustained_layers,
            },
            sort_keys=True,
        )


def standard_error(p_hat: float, trials: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)


def _comp_of(lattice) -> CompLattice:
    if isinstance(lattice, BuiltLattice):
        return lattice.comp
    if isinstance(lattice, CompLattice):
        return lattice
    raise SpecError("expected a BuiltLattice or CompLattice")


def _labels(comp: CompLattice, punched: bool):
    alive = comp.alive_flat(punched)
    n = comp.node_count
    e = comp.edges
    if len(e):
        keep = alive[e[:, 0]] & alive[e[:, 1]]
        e = e[keep]
    if len(e):
        m = coo_matrix(
            (np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])),
            shape=(n, n),
        )
        _, labels = connected_components(m, directed=False)
    else:
        labels = np.arange(n)
    labels = labels.copy()
    labels[~alive] = -1
    return labels, alive


def crossing_exists(lattice, axis: str, punched: bool = False) -> bool:
    comp = _comp_of(lattice)
    if axis not in _AXES:
        raise SpecError(f"unknown axis {axis!r}")
    labels, _alive = _labels(comp, punched)
    lab = labels.reshape(comp.nx, comp.ny, comp.nz, 2)
    ax = _AXES[axis]
    lo = np.moveaxis(lab, ax, 0)[0]
    hi = np.moveaxis(lab, ax, 0)[-1]
    lo_set = set(lo[lo >= 0].ravel().tolist())
    hi_set = set(hi[hi >= 0].ravel().tolist())
    return bool(lo_set & hi_set)


def largest_component_fraction(lattice, punched: bool = False) -> float:
    comp = _comp_of(lattice)
    labels, alive = _labels(comp, punched)
    total = int(alive.sum())
    if total == 0:
        return 0.0
    counts = np.bincount(labels[labels >= 0])
    return float(counts.max()) / total


def punch_out(reg: GraphRegister, lost=None, rng=None) -> GraphRegister:
    """Excise loss damage: Z-measure every alive neighbor of a lost vertex.

    `lost` defaults to everything in the register's loss log; neighbor sets
    are the ones recorded at the moment of loss.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if lost is None:
        targets = [ns for _v, ns in reg.loss_log]
    else:
        lost = set(lost)
        targets = [ns for v, ns in reg.loss_log if v in lost]
    for ns in targets:
        for u in ns:
            if reg.is_alive(u):
                reg.measure_pauli(u, "Z", rng)
    return reg


# -- threshold estimation ---------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float = 2.5758):
    """Wilson score interval (default 99% two-sided)."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (
        z
        * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
        / denom
    )
    return center - half, center + half


def estimate_threshold(
    family,
    rng,
    trials: int = 1000,
    tolerance: float = 0.02,
    lo: float = 0.0,
    hi: float = 1.0,
    max_iterations: int = 40,
):
    """Bisect the bond probability at which crossing probability is 1/2.

    `family(p, rng)` samples one lattice at bond probability p and returns
    whether it crosses.  Returns (lo, hi) of width <= tolerance whose probe
    estimates bracket 1/2 (Wilson-interval test at the final bracket).
    """
    def probe(p):
        hits = sum(bool(family(p, rng)) for _ in range(trials))
        return hits, wilson_interval(hits, trials)

    hits_lo, w_lo = probe(lo)
    hits_hi, w_hi = probe(hi)
    diagnostics = {"probes": [(lo, hits_lo), (hi, hits_hi)]}
    if w_lo[0] > 0.5 or w_hi[1] < 0.5:
        raise ConvergenceError(
            "family does not bracket crossing probability 1/2",
            diagnostics=diagnostics,
        )
    it = 0
    while hi - lo > tolerance:
        it += 1
        if it > max_iterations:
            raise ConvergenceError(
                "bisection did not converge", diagnostics=diagnostics
            )
        mid = 0.5 * (lo + hi)
        hits, _w = probe(mid)
        diagnostics["probes"].append((mid, hits))
        if hits / trials >= 0.5:
            hi = mid
        else:
            lo = mid
    return lo, hi


def square_lattice_family(n: int):
    """2D n x n square-lattice bond percolation, left-right crossing.

    Returns a callable (p, rng) -> bool for estimate_threshold.  The exact
    threshold is 1/2 by self-duality.
    """
    if n < 2:
        raise SpecError("degenerate lattice family (need n >= 2 sites)")
    idx = np.arange(n * n).reshape(n, n)
    h_a = idx[:, :-1].ravel()
    h_b = idx[:, 1:].ravel()
    v_a = idx[:-1, :].ravel()
    v_b = idx[1:, :].ravel()
    ea = np.concatenate([h_a, v_a])
    eb = np.concatenate([h_b, v_b])

    def sample(p, rng):
        keep = rng.random(len(ea)) < p
        m = coo_matrix(
            (
                np.ones(int(keep.sum()), dtype=np.int8),
                (ea[keep], eb[keep]),
            ),
            shape=(n * n, n * n),
        )
        _, labels = connected_components(m, directed=False)
        left = labels[idx[:, 0]]
        right = labels[idx[:, -1]]
        return bool(np.isin(left, right).any())

    return sample


# -- windowed pathfinding ---------------------------------------------------


@dataclass
class PathfindingState:
    window: int
    paths: list = field(default_factory=list)
    sustained: list = field(default_factory=list)
    frontier_layer: int = 0


def _adjacency_lists(comp: CompLattice, punched: bool):
    alive = comp.alive_flat(punched)
    adj: dict[int, list[int]] = {}
    for a, b in comp.edges:
        a, b = int(a), int(b)
        if alive[a] and alive[b]:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
    for v in adj:
        adj[v].sort()
    return adj, alive


def _layer_of(comp: CompLattice, v: int) -> int:
    return (v // 2) % comp.nz


def _reach_score(adj, comp, start, z_lo, z_hi, used):
    """Highest layer reachable from `start` inside [z_lo, z_hi]."""
    best = _layer_of(comp, start)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w in seen or w in used:
                continue
            zw = _layer_of(comp, w)
            if not z_lo <= zw <= z_hi:
                continue
            if zw > best:
                best = zw
                if best >= z_hi:
                    return best
            seen.add(w)
            stack.append(w)
    return best


def find_paths_windowed(
    lattice,
    window: int,
    rng=None,
    wires: int = 1,
    punched: bool = False,
) -> PathfindingState:
    """Route logical wires layer by layer with a bounded lookahead.

    Each wire starts at the lowest-id usable node of layer 0 and advances one
    layer at a time.  The step choice uses only layers <= current + window:
    among the layer-(t+1) nodes reachable inside the window, take the one
    whose window component reaches the farthest layer (ties: lowest id).
    Wires are vertex-disjoint.  The state's `frontier_layer` for each path is
    the highest layer reached; a wire that spans all nz layers "sustains" nz.
    """
    if window < 1:
        raise SpecError("window must be >= 1")
    comp = _comp_of(lattice)
    adj, alive = _adjacency_lists(comp, punched)
    nz = comp.nz
    used: set[int] = set()
    state = PathfindingState(window=window)

    layer0 = [
        v
        for v in range(comp.node_count)
        if alive[v] and _layer_of(comp, v) == 0
    ]
    for _wire in range(wires):
        start = None
        start_score = -1
        for v in layer0:
            if v in used:
                continue
            score = _reach_score(adj, comp, v, 0, min(window, nz - 1), used)
            if score > start_score:
                start, start_score = v, score
                if score >= min(window, nz - 1):
                    break
        if start is None:
            state.paths.append([])
            state.sustained.append(0)
            continue
        path = [start]
        used.add(start)
        cur = start
        z = 0
        while z < nz - 1:
            z_hi = min(z + window, nz - 1)
            z_lo = max(0, z - window)
            # BFS inside the window for nodes of layer z+1, keeping parents
            # so the committed hop extends the path explicitly.
            parents = {cur: None}
            frontier = [cur]
            best = None
            best_score = -1
            # Expand depth by depth; a candidate whose window component
            # reaches the window edge ends the search immediately, so the
            # full sweep only happens near dead ends.
            while frontier and best_score < z_hi:
                nxt = []
                new_candidates = []
                for u in frontier:
                    for w in adj.get(u, ()):
                        if w in parents or w in used:
                            continue
                        zw = _layer_of(comp, w)
                        if not z_lo <= zw <= z_hi:
                            continue
                        parents[w] = u
                        nxt.append(w)
                        if zw == z + 1:
                            new_candidates.append(w)
                for v in sorted(new_candidates):
                    # Score with the would-be hop chain excluded, so the
                    # reach cannot double back through vertices the commit
                    # is about to consume.
                    hop_used = set(used)
                    node = v
                    while node is not None:
                        hop_used.add(node)
                        node = parents[node]
                    score = _reach_score(adj, comp, v, z_lo, z_hi, hop_used)
                    if score > best_score:
                        best, best_score = v, score
                        if score >= z_hi:
                            break
                frontier = nxt
            if best is None:
                break
            hop = []
            node = best
            while node is not None and node != cur:
                hop.append(node)
                node = parents[node]
            for v in reversed(hop):
                path.append(v)
                used.add(v)
            cur = best
            z += 1
        state.paths.append(path)
        state.sustained.append(z)
        state.frontier_layer = max(state.frontier_layer, z)
    return state


def sustained_layers(state: PathfindingState, wire: int = 0) -> int:
    """Number of layer steps the wire survived (nz-1 when it spans)."""
    return state.sustained[wire]
