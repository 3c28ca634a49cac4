"""Acceptance checks: one function per shipped guarantee.

Each check is self-seeded and deterministic; `run_all` executes the suite
and returns structured results.  The same functions back the CLI `verify`
command and the acceptance test module.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import clifford as cl
from .builder import UnitCellSpec, WaferSpec, build_wafer
from .dense import DenseStabilizerState, _row_mul
from .fock import (
    FockState,
    Interferometer,
    apply_interferometer,
    detection_probability,
    type2_fusion_success_probability,
)
from .fusion import FusionParams
from .graphstate import GraphRegister
from .losstol import (
    CrazyGraphSpec,
    simulate_teleport,
    teleport_success_prob,
    verify_ring_block_equivalence,
    verify_s_gadget,
)
from .multiplex import (
    DtpParams,
    dtp_success_prob,
    extinction_to_z_error,
    standard_mux_pair_yield,
    standard_mux_prob,
    yield_curve,
)
from .percolation import (
    crossing_exists,
    estimate_threshold,
    find_paths_windowed,
    square_lattice_family,
    sustained_layers,
)
from .rng import run_rng, trial_rng


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    details: str
    seconds: float


# -- oracle-comparison helpers ----------------------------------------------


def dense_mirror(g: GraphRegister) -> DenseStabilizerState:
    """Rebuild the graph register's state in the dense oracle."""
    alive = sorted(g.alive_vertices())
    idx = {v: i for i, v in enumerate(alive)}
    d = DenseStabilizerState(len(alive))
    for u, v in g.edges():
        d.apply_cz(idx[u], idx[v])
    for v in alive:
        f = g.get_frame(v)
        if f:
            d.apply_clifford(idx[v], cl.PAULI_IDX[f])
    for v in alive:
        c = g.get_vop(v)
        if c != cl.ID:
            d.apply_clifford(idx[v], c)
    return d


def subsystem_canonical(d: DenseStabilizerState, keep) -> tuple:
    """Canonical stabilizer rows of the group restricted to `keep` qubits."""
    n = d.n
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    work = [list(r) for r in d.rows]
    r = 0
    for sel in (1, 2):
        for j in drop:
            bit = 1 << j
            piv = next((i for i in range(r, n) if work[i][sel] & bit), None)
            if piv is None:
                continue
            work[r], work[piv] = work[piv], work[r]
            for i in range(n):
                if i != r and work[i][sel] & bit:
                    work[i][:] = _row_mul(*work[r], *work[i])
            r += 1
    dropmask = sum(1 << j for j in drop)
    sub = [row for row in work if not (row[1] & dropmask or row[2] & dropmask)]
    pos = {q: i for i, q in enumerate(keep)}
    out = []
    for row in sub:
        x2 = z2 = 0
        for q in keep:
            if row[1] & (1 << q):
                x2 |= 1 << pos[q]
            if row[2] & (1 << q):
                z2 |= 1 << pos[q]
        out.append([row[0], x2, z2])
    dd = DenseStabilizerState(len(keep))
    dd.rows = out[: len(keep)]
    return dd.canonical_rows()


def fuzz_case(seed: int, max_qubits: int = 10, ops: int = 20) -> bool:
    """One random op sequence replayed in both engines; True iff they agree."""
    rng = np.random.default_rng(seed)
    nq = int(rng.integers(2, max_qubits + 1))
    g = GraphRegister(nq)
    d = DenseStabilizerState(nq)
    alive = list(range(nq))
    for _ in range(ops):
        if len(alive) <= 1:
            break
        r = rng.random()
        if r < 0.35 and len(alive) >= 2:
            a, b = rng.choice(alive, size=2, replace=False)
            g.apply_cz(int(a), int(b))
            d.apply_cz(int(a), int(b))
        elif r < 0.50:
            g.local_complement(int(rng.choice(alive)))
        elif r < 0.80:
            a = int(rng.choice(alive))
            c = int(rng.integers(24))
            g.apply_local_clifford(a, c)
            d.apply_clifford(a, c)
        else:
            a = int(rng.choice(alive))
            basis = "XYZ"[int(rng.integers(3))]
            o = g.measure_pauli(a, basis, rng)
            d.measure(a, basis, forced=o)
            alive.remove(a)
    return dense_mirror(g).canonical_rows() == subsystem_canonical(d, alive)


# -- individual criteria ----------------------------------------------------


def check_hom() -> tuple[bool, str]:
    state = FockState.basis((1, 1))
    itf = Interferometer(2).beamsplitter(0, 1, math.pi / 4)
    out = apply_interferometer(state, itf)
    p = detection_probability(out, {0: 1, 1: 1})
    return p < 1e-12, f"coincidence probability {p:.3e}"


def check_fusion_oracle() -> tuple[bool, str]:
    p = type2_fusion_success_probability()
    pd = type2_fusion_success_probability(distinguishable=True)
    ok = abs(p - 0.5) < 1e-9 and abs(pd - 0.25) < 1e-9
    return ok, f"indistinguishable {p:.12f}, distinguishable {pd:.12f}"


def check_engine_fuzz(cases: int = 10_000) -> tuple[bool, str]:
    failures = [s for s in range(cases) if not fuzz_case(s)]
    return not failures, f"{cases} sequences, {len(failures)} disagreements"


def check_mux_block_mc(blocks: int = 1_000_000) -> tuple[bool, str]:
    p, S = 0.2, 3
    rng = trial_rng(1004, 0)
    hits = (rng.random((blocks, 1 << S)) < p).any(axis=1).mean()
    exact = standard_mux_prob(p, S)
    sigma = math.sqrt(exact * (1 - exact) / blocks)
    ok = abs(hits - exact) < 3 * sigma
    return ok, f"MC {hits:.5f} vs closed form {exact:.5f} (3s = {3*sigma:.5f})"


def check_yield_curve(bins: int = 100_000) -> tuple[bool, str]:
    stated = [0.0400, 0.0648, 0.0872, 0.0866, 0.0590]
    closed = [standard_mux_pair_yield(0.2, S) for S in range(5)]
    if any(abs(c - s) > 1e-4 for c, s in zip(closed, stated)):
        return False, f"closed-form mismatch: {closed}"
    if not (closed[2] > closed[0] and closed[4] < closed[3]):
        return False, "closed-form shape violated"
    rows = yield_curve(0.2, range(7), bins, trial_rng(1005, 0))
    for row in rows:
        slack = 3 * math.sqrt(max(row["standard_yield"], 1e-9) / bins)
        if row["sliding_yield"] < row["standard_yield"] - slack:
            return False, f"sliding below standard at S={row['S']}: {row}"
        if row["matching_yield"] < row["sliding_yield"] - 1e-12:
            return False, f"matching below sliding at S={row['S']}: {row}"
    return True, f"closed {closed}; MC dominance over S=0..6 holds"


def check_crazy_graph_law(trials: int = 100_000) -> tuple[bool, str]:
    spec = CrazyGraphSpec(50, 3, loss=0.1)
    rep = simulate_teleport(spec, trial_rng(1006, 0), trials)
    exact = teleport_success_prob(spec)
    sigma = math.sqrt(exact * (1 - exact) / trials)
    if abs(rep.success_rate - exact) > 3 * sigma:
        return False, f"headline point off: {rep.success_rate} vs {exact}"
    grid_trials = 20_000
    for i, eps in enumerate((0.05, 0.1, 0.2)):
        for j, L in enumerate((2, 3, 4)):
            s = CrazyGraphSpec(50, L, loss=eps)
            r = simulate_teleport(s, trial_rng(1006, 1 + 3 * i + j), grid_trials)
            e = teleport_success_prob(s)
            sg = math.sqrt(max(e * (1 - e), 1e-9) / grid_trials)
            if abs(r.success_rate - e) > 3 * sg:
                return False, f"grid point eps={eps} L={L} off: {r.success_rate} vs {e}"
    return True, f"headline {rep.success_rate:.5f} vs {exact:.5f}; 3x3 grid within 3s"


def check_majority_vote(trials: int = 1_000_000) -> tuple[bool, str]:
    spec = CrazyGraphSpec(1, 7, z_flip=0.1)
    rep = simulate_teleport(spec, trial_rng(1007, 0), trials)
    exact = 0.002728
    sigma = math.sqrt(exact * (1 - exact) / trials)
    ok = abs(rep.flip_rate - exact) < 3 * sigma
    return ok, f"flip rate {rep.flip_rate:.6f} vs binomial tail {exact}"


def check_bond_threshold() -> tuple[bool, str]:
    family = square_lattice_family(128)
    rng = run_rng(1008)
    lo, hi = estimate_threshold(
        family, rng, trials=400, tolerance=0.02, lo=0.3, hi=0.7
    )
    mid = 0.5 * (lo + hi)
    ok = 0.48 <= mid <= 0.52
    return ok, f"threshold bracket [{lo:.4f}, {hi:.4f}], midpoint {mid:.4f}"


_BOOSTED = FusionParams(kind="BoostedTypeII", success_prob=0.75)


def _spanning_fraction(
    spec: WaferSpec, trials: int, seed: int, punched: bool = False
) -> float:
    hits = 0
    for t in range(trials):
        lat = build_wafer(spec, rng=trial_rng(seed, t), graph_level=False)
        hits += crossing_exists(lat, "z", punched=punched)
    return hits / trials


def check_wafer_spanning(trials: int = 100) -> tuple[bool, str]:
    spec = WaferSpec(12, 6, 50, fusion_params=_BOOSTED)
    frac = _spanning_fraction(spec, trials, 1009)
    ok = frac >= 0.99
    return ok, f"z-crossing in {frac:.0%} of {trials} trials"


def check_filter_critical(trials: int = 60) -> tuple[bool, str]:
    def frac(f, seed):
        spec = WaferSpec(
            12, 6, 50,
            fusion_params=_BOOSTED,
            filter_fidelity=f,
            filter_enabled=True,
        )
        return _spanning_fraction(spec, trials, seed)

    lo, hi = 0.90, 0.99
    f_lo, f_hi = frac(lo, 1010), frac(hi, 1011)
    if not (f_lo < 0.5 < f_hi):
        return False, f"no bracket: spanning {f_lo:.2f}@{lo}, {f_hi:.2f}@{hi}"
    for k in range(5):
        mid = 0.5 * (lo + hi)
        if frac(mid, 1012 + k) >= 0.5:
            hi = mid
        else:
            lo = mid
    crit = 0.5 * (lo + hi)
    ok = 0.90 <= crit <= 0.99
    return ok, f"critical filter fidelity = {crit:.3f}"


def check_punchout_threshold(trials: int = 60) -> tuple[bool, str]:
    def frac(eps, seed):
        spec = WaferSpec(12, 6, 50, fusion_params=_BOOSTED, photon_loss=eps)
        return _spanning_fraction(spec, trials, seed, punched=True)

    lo, hi = 0.005, 0.08
    f_lo, f_hi = frac(lo, 1020), frac(hi, 1021)
    if not (f_lo > 0.5 > f_hi):
        return False, f"no bracket: recovered spanning {f_lo:.2f}@{lo}, {f_hi:.2f}@{hi}"
    for k in range(5):
        mid = 0.5 * (lo + hi)
        if frac(mid, 1022 + k) >= 0.5:
            lo = mid
        else:
            hi = mid
    crit = 0.5 * (lo + hi)
    ok = 0.005 <= crit <= 0.08
    return ok, f"recovered-spanning loss threshold = {crit:.4f}"


def check_dtp(trials: int = 100_000) -> tuple[bool, str]:
    vals = {}
    for K, stated in ((5, 0.67232), (6, 0.73786)):
        params = DtpParams(per_crystal_emission=0.2, crystal_count=K)
        closed = dtp_success_prob(params)
        if abs(closed - stated) > 5e-6:
            return False, f"closed form K={K}: {closed} vs {stated}"
        rng = trial_rng(1012, K)
        emits = rng.random((trials, K)) < 0.2
        mc = emits.any(axis=1).mean()
        sigma = math.sqrt(closed * (1 - closed) / trials)
        if abs(mc - closed) > 3 * sigma:
            return False, f"MC K={K}: {mc} vs {closed}"
        vals[K] = closed
    ok = all(2 / 3 - 0.01 < v < 3 / 4 + 0.01 for v in vals.values())
    return ok, f"K=5: {vals[5]:.5f}, K=6: {vals[6]:.5f} (MC within 3s)"


def check_extinction() -> tuple[bool, str]:
    a = extinction_to_z_error(-50.0)
    b = extinction_to_z_error(-65.0)
    ok = a == 1e-5 and abs(b - 3.162e-7) / 3.162e-7 < 1e-3
    return ok, f"-50 dB -> {a}, -65 dB -> {b:.4e}"


def check_resource_report() -> tuple[bool, str]:
    lat = build_wafer(
        WaferSpec(1, 1, 1, fusion_params=_BOOSTED),
        rng=trial_rng(1014, 0),
        graph_level=False,
    )
    rep = lat.resource_report
    no_anc = rep["photons_per_computational_no_ancilla"]
    with_anc = rep["photons_per_computational_with_ancilla"]
    ok = no_anc == 9 and with_anc <= 20
    return ok, f"photons per computational qubit: {no_anc} bare, {with_anc} with ancillas"


def check_gadgets() -> tuple[bool, str]:
    rng = run_rng(1015)
    s_ok = [verify_s_gadget(L, rng) for L in (1, 2, 3)]
    r_ok = [verify_ring_block_equivalence(L, rng) for L in (2, 3, 4)]
    ok = all(s_ok) and all(r_ok)
    return ok, f"phase gadget L=1..3: {s_ok}; ring block L=2..4: {r_ok}"


def pathfinding_trial(trial: int, seed: int = 1016) -> int:
    spec = WaferSpec(12, 6, 600, fusion_params=_BOOSTED)
    lat = build_wafer(spec, rng=trial_rng(seed, trial), graph_level=False)
    state = find_paths_windowed(lat, window=15, wires=1)
    return sustained_layers(state)


def check_pathfinding(trials: int = 100) -> tuple[bool, str]:
    sustained = [pathfinding_trial(t) for t in range(trials)]
    good = sum(s >= 500 for s in sustained)
    ok = good >= 0.95 * trials
    return ok, (
        f"{good}/{trials} trials sustained >= 500 layers "
        f"(min {min(sustained)}, max {max(sustained)})"
    )


def check_determinism() -> tuple[bool, str]:
    from . import cli  # deferred: cli imports this module for `verify`

    return cli.determinism_check()


CHECKS = [
    (1, "balanced-beamsplitter coincidence suppression", check_hom),
    (2, "fusion success probability via photon-level oracle", check_fusion_oracle),
    (3, "sparse engine vs dense oracle fuzz", check_engine_fuzz),
    (4, "multiplexed block success closed form vs MC", check_mux_block_mc),
    (5, "pair-yield curve values and dominance", check_yield_curve),
    (6, "encoded-wire success law", check_crazy_graph_law),
    (7, "majority-vote flip rate", check_majority_vote),
    (8, "square-lattice bond threshold", check_bond_threshold),
    (9, "wafer z-spanning", check_wafer_spanning),
    (10, "filter critical fidelity", check_filter_critical),
    (11, "punch-out loss threshold", check_punchout_threshold),
    (12, "cascaded-source delivery probability", check_dtp),
    (13, "extinction-ratio error mapping", check_extinction),
    (14, "per-qubit photon resource counts", check_resource_report),
    (15, "phase gadget and ring-block equivalence", check_gadgets),
    (16, "windowed pathfinding sustained layers", check_pathfinding),
    (17, "parallelism-independent outputs", check_determinism),
]


def run_all(criteria=None) -> list[CheckResult]:
    results = []
    for num, name, fn in CHECKS:
        if criteria is not None and num not in criteria:
            continue
        t0 = time.perf_counter()
        try:
            passed, details = fn()
        except Exception as exc:  # surface, don't hide, broken checks
            passed, details = False, f"raised {type(exc).__name__}: {exc}"
        results.append(
            CheckResult(num, name, passed, details, time.perf_counter() - t0)
        )
    return results
