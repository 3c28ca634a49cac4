"""Sparse stabilizer engine for graph states with local Clifford decorations.

A register stores a plain graph plus, per vertex, a local Clifford (``vop``)
and a byproduct Pauli (``pauli_frame``).  The represented state is always

    (prod_v  VOP_v) (prod_v FRAME_v) |G>

where |G> is the pure graph state of the adjacency.  Graph updates follow the
standard local-complementation discipline; measurement byproducts are split
into an outcome-independent Clifford part (folded into vops, so the adjacency
evolution is outcome-independent) and an outcome-dependent Pauli part (folded
into the frame, tracked but never applied).

Scales to millions of vertices: adjacency is a sparse map of neighbor sets,
vops/frames are sparse maps holding only non-identity entries.
"""

from __future__ import annotations

import io

import numpy as np

from . import clifford as cl
from .errors import CapacityError, VertexStateError

_B = {"X": 1, "Y": 2, "Z": 3}

# Local complementation at a is realized by sqrt(-iX) on a and sqrt(+iZ) on
# each neighbor; the inverse factors below are what each LC multiplies onto
# the existing vops so the physical state is unchanged.
_LC_A = cl.SQRT_IX
_LC_B = cl.SQRT_MIZ
_WORDS = cl.factor_words(_LC_A, _LC_B)

Z_DIAG = cl.Z_DIAGONAL

_CZ_TABLES: tuple[dict, dict] | None = None


def _build_cz_tables():
    """CZ update tables for the irreducible case.

    After vop reduction, any vertex still carrying a non-Z-diagonal vop has no
    neighbor besides the CZ partner, i.e. its graph factor is |+> (with the
    partner edge made explicit as CZ^e); the partner may carry any (then
    necessarily diagonal) vop and stay entangled with the rest.  Each entry
    (e, va, vb) -> (e', va', vb') satisfies

        CZ (Va x Vb) CZ^e  ==  phase * (Va' x Vb') CZ^e'

    as operators on the input subspace that can actually occur:
    |+> x C^2 when only a is pinned (table "a"), C^2 x |+> when only b is
    pinned (table "b"), and the single vector |+>|+> when both vops are
    non-diagonal (both vertices then isolated as a pair).
    """
    czm = np.diag([1.0, 1, 1, -1]).astype(complex)
    s2 = 1 / np.sqrt(2)
    plus2 = np.full((4, 1), 0.5, dtype=complex)
    wa = np.array([[s2, 0], [0, s2], [s2, 0], [0, s2]], dtype=complex)  # |+0>,|+1>
    wb_ = np.array([[s2, 0], [s2, 0], [0, s2], [0, s2]], dtype=complex)  # |0+>,|1+>

    triples = []
    mats = []
    for e in (0, 1):
        for va in range(24):
            ka = cl.CLIFFORD_MATS[va]
            for vb in range(24):
                m = np.kron(ka, cl.CLIFFORD_MATS[vb])
                triples.append((e, va, vb))
                mats.append(m @ czm if e else m)
    m2 = np.stack(mats)  # (1152, 4, 4)
    m2h = m2.conj().transpose(0, 2, 1)

    def solve(m1, w):
        c = (m2h @ (czm @ m1)) @ w
        lam = np.einsum("i,ni->n", w[:, 0].conj(), c[:, :, 0])
        resid = np.abs(c - lam[:, None, None] * w).max(axis=(1, 2))
        k = int(np.argmax(resid < 1e-8))
        assert resid[k] < 1e-8
        return triples[k]

    table_a, table_b = {}, {}
    for triple, m1 in zip(triples, mats):
        _, va, vb = triple
        table_a[triple] = solve(m1, wa if vb in Z_DIAG else plus2)
        table_b[triple] = solve(m1, wb_ if va in Z_DIAG else plus2)
    return table_a, table_b


class GraphRegister:
    """Graph state of up to millions of qubits with per-vertex local Cliffords."""

    def __init__(self, n: int = 0):
        self._status = bytearray(n)  # 0 alive, 1 dead
        self._adj: dict[int, set[int]] = {}
        self._vop: dict[int, int] = {}  # non-identity entries only
        self._frame: dict[int, int] = {}  # non-identity entries only; 1=X 2=Y 3=Z
        self._frame_unknown: set[int] = set()
        self.loss_log: list[tuple[int, tuple[int, ...]]] = []

    # -- basic structure ---------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self._status)

    def add_vertices(self, k: int) -> range:
        n0 = len(self._status)
        self._status.extend(b"\x00" * k)
        return range(n0, n0 + k)

    def is_alive(self, v: int) -> bool:
        return 0 <= v < len(self._status) and self._status[v] == 0

    def alive_vertices(self):
        return (v for v, s in enumerate(self._status) if s == 0)

    def alive_count(self) -> int:
        return self._status.count(0)

    def _require_alive(self, v: int):
        if not self.is_alive(v):
            raise VertexStateError(f"vertex {v} is dead or out of range")

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self._adj.get(v, ())))

    def neighbor_set(self, v: int) -> set[int]:
        return self._adj.get(v, set())

    def degree(self, v: int) -> int:
        return len(self._adj.get(v, ()))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def edges(self):
        for u, nbrs in self._adj.items():
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def get_vop(self, v: int) -> int:
        return self._vop.get(v, cl.ID)

    def get_frame(self, v: int) -> int:
        """Byproduct Pauli index (0=I,1=X,2=Y,3=Z), sign not tracked."""
        return self._frame.get(v, 0)

    def frame_is_known(self, v: int) -> bool:
        return v not in self._frame_unknown

    def copy(self) -> "GraphRegister":
        g = GraphRegister.__new__(GraphRegister)
        g._status = bytearray(self._status)
        g._adj = {v: set(nb) for v, nb in self._adj.items()}
        g._vop = dict(self._vop)
        g._frame = dict(self._frame)
        g._frame_unknown = set(self._frame_unknown)
        g.loss_log = list(self.loss_log)
        return g

    # -- internal edge/vop/frame plumbing ----------------------------------

    def _add_edge(self, u: int, v: int):
        self._adj.setdefault(u, set()).add(v)
        self._adj.setdefault(v, set()).add(u)

    def _del_edge(self, u: int, v: int):
        for a, b in ((u, v), (v, u)):
            s = self._adj.get(a)
            if s is not None:
                s.discard(b)
                if not s:
                    del self._adj[a]

    def _toggle_edge(self, u: int, v: int):
        if v in self._adj.get(u, ()):
            self._del_edge(u, v)
        else:
            self._add_edge(u, v)

    def toggle_edge(self, u: int, v: int) -> "GraphRegister":
        """Direct edge toggle between alive vertices.

        Used by fusion transformations, whose post-state is defined at the
        adjacency level (the fused photons' measurement record is classical).
        """
        self._require_alive(u)
        self._require_alive(v)
        if u == v:
            raise VertexStateError("cannot toggle a self-loop")
        self._toggle_edge(u, v)
        return self

    def _isolate(self, v: int):
        for b in list(self._adj.get(v, ())):
            self._del_edge(v, b)

    def _set_vop(self, v: int, c: int):
        if c == cl.ID:
            self._vop.pop(v, None)
        else:
            self._vop[v] = c

    def _mul_vop(self, v: int, c: int):
        self._set_vop(v, int(cl.MUL[self.get_vop(v), c]))

    def _set_frame(self, v: int, p: int):
        if p == 0:
            self._frame.pop(v, None)
        else:
            self._frame[v] = p

    def _xor_frame(self, v: int, p: int):
        self._set_frame(v, self.get_frame(v) ^ p)

    def _conj_frame(self, v: int, c: int):
        """frame_v <- C^dag frame_v C (sign dropped)."""
        f = self.get_frame(v)
        if f:
            self._set_frame(v, int(cl.CONJ_P[cl.ADJ[c], f]))

    def _fold_frame_into_vop(self, v: int):
        f = self.get_frame(v)
        if f:
            self._mul_vop(v, cl.PAULI_IDX[f])
            self._set_frame(v, 0)

    def apply_local_clifford(self, v: int, c: int) -> "GraphRegister":
        """Apply single-qubit Clifford C_c to vertex v (absorbs the frame)."""
        self._require_alive(v)
        self._fold_frame_into_vop(v)
        self._set_vop(v, int(cl.MUL[c, self.get_vop(v)]))
        return self

    # -- local complementation --------------------------------------------

    def _lc_adjacency(self, a: int):
        nbrs = sorted(self._adj.get(a, ()))
        for i, u in enumerate(nbrs):
            for v in nbrs[i + 1 :]:
                self._toggle_edge(u, v)

    def local_complement(self, a: int) -> "GraphRegister":
        """Complement the neighborhood of a; physical state unchanged."""
        self._require_alive(a)
        nbrs = self.neighbors(a)
        self._lc_adjacency(a)
        self._mul_vop(a, _LC_A)
        self._conj_frame(a, _LC_A)
        for b in nbrs:
            self._mul_vop(b, _LC_B)
            self._conj_frame(b, _LC_B)
        return self

    def _remove_vop(self, a: int, avoid: int):
        """Reduce vop_a to identity via local complementations, using a
        swapping partner in N(a) \\ {avoid} (caller guarantees one exists)."""
        others = self._adj.get(a, set()) - {avoid}
        c = min(others)
        for letter in _WORDS[int(cl.ADJ[self.get_vop(a)])]:
            self.local_complement(a if letter == _LC_A else c)
        assert self.get_vop(a) == cl.ID

    # -- CZ ----------------------------------------------------------------

    def _cz_reducible(self, x: int, y: int) -> bool:
        return self.get_vop(x) not in cl.Z_DIAGONAL and bool(
            self._adj.get(x, set()) - {y}
        )

    def apply_cz(self, a: int, b: int) -> "GraphRegister":
        self._require_alive(a)
        self._require_alive(b)
        if a == b:
            raise VertexStateError("CZ needs two distinct vertices")
        # Peel non-diagonal vops off wherever a swapping partner exists.  The
        # second reduction can re-entangle a (LCs at b touch a's edges), hence
        # the third call; b only ever gains diagonal factors from it.
        if self._cz_reducible(a, b):
            self._remove_vop(a, b)
        if self._cz_reducible(b, a):
            self._remove_vop(b, a)
        if self._cz_reducible(a, b):
            self._remove_vop(a, b)
        if self.get_vop(a) in cl.Z_DIAGONAL and self.get_vop(b) in cl.Z_DIAGONAL:
            self._cz_diag(a, b)
        else:
            # Any remaining non-diagonal vop sits on a vertex with no
            # neighbor besides the partner; the subspace table is exact here.
            self._cz_pair_table(a, b)
        return self

    def _cz_diag(self, a: int, b: int):
        # Both vops map Z to +/-Z; CZ commutes through up to Z byproducts.
        fa, fb = self.get_frame(a), self.get_frame(b)
        if fa in (1, 2):  # X component on a: CZ X_a CZ = X_a Z_b
            self._xor_frame(b, 3)
        if fb in (1, 2):
            self._xor_frame(a, 3)
        if cl.CONJ_S[cl.ADJ[self.get_vop(a)], 3] < 0:
            self._xor_frame(b, 3)
        if cl.CONJ_S[cl.ADJ[self.get_vop(b)], 3] < 0:
            self._xor_frame(a, 3)
        self._toggle_edge(a, b)

    def _cz_pair_table(self, a: int, b: int):
        global _CZ_TABLES
        if _CZ_TABLES is None:
            _CZ_TABLES = _build_cz_tables()
        self._fold_frame_into_vop(a)
        self._fold_frame_into_vop(b)
        table = _CZ_TABLES[0] if self.get_vop(a) not in Z_DIAG else _CZ_TABLES[1]
        e = 1 if self.has_edge(a, b) else 0
        e2, va2, vb2 = table[(e, self.get_vop(a), self.get_vop(b))]
        if e2 != e:
            self._toggle_edge(a, b)
        self._set_vop(a, va2)
        self._set_vop(b, vb2)

    # -- measurement -------------------------------------------------------

    def measure_pauli(self, a: int, basis: str, rng=None, forced: int | None = None) -> int:
        """Projective Pauli measurement; vertex dies; returns the +/-1 outcome."""
        self._require_alive(a)
        p = _B[basis]
        va = self.get_vop(a)
        s0, q = int(cl.CONJ_S[cl.ADJ[va], p]), int(cl.CONJ_P[cl.ADJ[va], p])
        fa = self.get_frame(a)
        s1 = -1 if (fa and fa != q) else 1  # distinct non-identity Paulis anticommute
        eps = s0 * s1
        nbrs = self.neighbors(a)

        if q == 1 and not nbrs:
            # X on an isolated graph vertex: deterministic +1
            if forced is not None and forced != eps:
                raise ValueError("forced outcome has probability zero")
            self._kill(a)
            return eps

        if forced is not None:
            sg = eps * forced
        else:
            sg = 1 if rng.random() < 0.5 else -1

        if q == 3:
            if sg < 0:
                for b in nbrs:
                    self._xor_frame(b, 3)
        elif q == 2:
            # complement neighborhood, sqrt(-iZ) byproduct (extra Z when -1)
            self._lc_adjacency(a)
            for b in nbrs:
                self._mul_vop(b, cl.SQRT_MIZ)
                self._conj_frame(b, cl.SQRT_MIZ)
                if sg < 0:
                    self._xor_frame(b, 3)
        else:
            b0 = nbrs[0]
            na = set(nbrs)
            nb0 = set(self._adj.get(b0, ()))
            self._lc_adjacency(b0)
            self._lc_adjacency(a)
            self._lc_adjacency(b0)
            self._mul_vop(b0, cl.SQRT_IY)
            self._conj_frame(b0, cl.SQRT_IY)
            if sg > 0:
                zset = na - nb0 - {b0}
            else:
                self._xor_frame(b0, 2)
                zset = nb0 - na - {a}
            for b in zset:
                self._xor_frame(b, 3)
        self._kill(a)
        return eps * sg

    def _kill(self, a: int):
        self._isolate(a)
        self._status[a] = 1
        self._vop.pop(a, None)
        self._frame.pop(a, None)
        self._frame_unknown.discard(a)

    def remove_lost(self, a: int) -> "GraphRegister":
        """Erase a lost vertex: Z-measurement with unrecorded outcome.

        Neighbors keep the right graph but their byproduct frame becomes
        unknown; the loss and its neighborhood are logged for punch-out.
        """
        self._require_alive(a)
        nbrs = self.neighbors(a)
        self.loss_log.append((a, nbrs))
        for b in nbrs:
            self._frame_unknown.add(b)
        self._kill(a)
        return self

    # -- serialization -----------------------------------------------------

    def export_edges(self, fileobj=None) -> str:
        """Edge-list text: header `graphstate v1 <n>`, then `u v` (u<v) lines."""
        out = fileobj or io.StringIO()
        out.write(f"graphstate v1 {self.vertex_count}\n")
        for u, v in sorted(self.edges()):
            out.write(f"{u} {v}\n")
        return out.getvalue() if fileobj is None else ""


def load_edges(text: str) -> GraphRegister:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if head[:2] != ["graphstate", "v1"]:
        raise ValueError(f"unsupported edge-list header: {lines[0]!r}")
    g = GraphRegister(int(head[2]))
    for ln in lines[1:]:
        u, v = map(int, ln.split())
        g._add_edge(u, v)
    return g


# -- local-complementation equivalence ------------------------------------

_LC_ORBIT_CAP = 500_000


def _canon_adj(g: GraphRegister) -> tuple[frozenset, dict]:
    alive = sorted(g.alive_vertices())
    idx = {v: i for i, v in enumerate(alive)}
    edges = frozenset(
        (idx[u], idx[v]) for u, v in g.edges() if u in idx and v in idx
    )
    return edges, idx


def _lc_at(edges: frozenset, n: int, a: int) -> frozenset:
    nbrs = [b for b in range(n) if (min(a, b), max(a, b)) in edges]
    out = set(edges)
    for i, u in enumerate(nbrs):
        for v in nbrs[i + 1 :]:
            e = (min(u, v), max(u, v))
            if e in out:
                out.discard(e)
            else:
                out.add(e)
    return frozenset(out)


def lc_equivalent(g1: GraphRegister, g2: GraphRegister) -> bool:
    """True iff the graphs (on alive vertices, relabeled in sorted-id order)
    are connected by a sequence of local complementations."""
    n1, n2 = g1.alive_count(), g2.alive_count()
    if n1 > 20 or n2 > 20:
        raise CapacityError("lc_equivalent bounded to 20 alive vertices")
    if n1 != n2:
        return False
    e1, _ = _canon_adj(g1)
    e2, _ = _canon_adj(g2)
    if e1 == e2:
        return True
    seen = {e1}
    frontier = [e1]
    while frontier:
        nxt = []
        for e in frontier:
            for a in range(n1):
                e_new = _lc_at(e, n1, a)
                if e_new == e2:
                    return True
                if e_new not in seen:
                    if len(seen) >= _LC_ORBIT_CAP:
                        raise CapacityError("LC orbit search exceeded cap")
                    seen.add(e_new)
                    nxt.append(e_new)
        frontier = nxt
    return False
