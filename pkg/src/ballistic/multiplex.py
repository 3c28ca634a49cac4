"""Source multiplexing models.

Covers the standard block-multiplexing law, a binary switched-delay network
with collision accounting, relative-time multiplexing (sliding-window and
matching variants), cascaded heralded-source ("dump the pump") success
probability, and the switch noise cost model mapping extinction ratio to a
worst-case Pauli-Z rate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError


# -- domain types -----------------------------------------------------------


@dataclass(frozen=True)
class PhotonStream:
    """A clocked stream of time bins, each holding at most one photon."""

    occupancy: tuple[bool, ...]
    p: float = 0.0
    stream_id: str = "A"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise SpecError("generation probability outside [0, 1]")

    @property
    def bin_count(self) -> int:
        return len(self.occupancy)

    @property
    def photon_bins(self) -> tuple[int, ...]:
        return tuple(i for i, o in enumerate(self.occupancy) if o)

    @staticmethod
    def sample(bin_count: int, p: float, rng, stream_id: str = "A"):
        occ = rng.random(bin_count) < p
        return PhotonStream(tuple(bool(x) for x in occ), p, stream_id)


@dataclass(frozen=True)
class SwitchModel:
    """Per-pass cost figures of a 2x2 optical switch."""

    loss_db_per_pass: float = 0.0
    extinction_db: float = -50.0
    phase_jitter_variance: float = 0.0

    def __post_init__(self):
        if self.loss_db_per_pass < 0:
            raise SpecError("switch loss must be >= 0 dB")
        if self.extinction_db > 0:
            raise SpecError("extinction ratio must be <= 0 dB")
        if self.phase_jitter_variance < 0:
            raise SpecError("phase jitter variance must be >= 0")


@dataclass(frozen=True)
class DelayNetwork:
    """Cascade of switched delay lines of length 1, 2, 4, ..., 2^(S-1).

    Each stage also has a bypass branch, so any integer delay in
    {0, ..., 2^S - 1} is reachable by binary decomposition.
    """

    stage_count: int
    switch_model: SwitchModel = field(default_factory=SwitchModel)

    def __post_init__(self):
        if self.stage_count < 0:
            raise SpecError("stage count must be >= 0")

    @property
    def stage_delays(self) -> tuple[int, ...]:
        return tuple(1 << s for s in range(self.stage_count))

    @property
    def max_delay(self) -> int:
        return (1 << self.stage_count) - 1

    @property
    def switch_passes(self) -> int:
        """Switches traversed end to end (one per stage plus the output)."""
        return self.stage_count + 1

    def transmission(self) -> float:
        """End-to-end intensity transmission through all switch passes."""
        total_db = self.switch_model.loss_db_per_pass * self.switch_passes
        return 10.0 ** (-total_db / 10.0)


@dataclass(frozen=True)
class DtpParams:
    """Cascaded heralded-source parameters.

    A pump passes K crystals in sequence; each emits (and heralds) with
    probability q, and an emitted photon transits the remaining crystals
    with per-crystal transmission t.
    """

    per_crystal_emission: float
    crystal_count: int
    per_crystal_pass_transmission: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.per_crystal_emission <= 1.0:
            raise SpecError("emission probability outside [0, 1]")
        if not 0.0 <= self.per_crystal_pass_transmission <= 1.0:
            raise SpecError("pass transmission outside [0, 1]")
        if self.crystal_count < 1:
            raise SpecError("need at least one crystal")


@dataclass(frozen=True)
class MatchedPair:
    """A pair of photons brought to the same bin by delaying the earlier."""

    bin_a: int
    bin_b: int

    @property
    def delay(self) -> int:
        return abs(self.bin_b - self.bin_a)


# -- closed-form laws -------------------------------------------------------


def standard_mux_prob(p: float, S: int) -> float:
    """Per-block success of standard multiplexing over 2^S bins."""
    if not 0.0 <= p <= 1.0:
        raise SpecError("p outside [0, 1]")
    if S < 0:
        raise SpecError("S must be >= 0")
    return 1.0 - (1.0 - p) ** (1 << S)


def standard_mux_pair_yield(p: float, S: int) -> float:
    """Per-input-bin rate of blocks where both streams deliver a photon."""
    return standard_mux_prob(p, S) ** 2 / (1 << S)


def dtp_herald_prob(params: DtpParams) -> float:
    """Probability that at least one crystal heralds an emission."""
    q, K = params.per_crystal_emission, params.crystal_count
    return 1.0 - (1.0 - q) ** K


def dtp_success_prob(params: DtpParams) -> float:
    """Probability a heralded photon is emitted and survives transit.

    The first crystal to emit is crystal k with probability q(1-q)^(k-1);
    its photon then passes the remaining K-k crystals, each with
    transmission t.
    """
    q = params.per_crystal_emission
    K = params.crystal_count
    t = params.per_crystal_pass_transmission
    return sum(q * (1.0 - q) ** (k - 1) * t ** (K - k) for k in range(1, K + 1))


def extinction_to_z_error(extinction_db: float) -> float:
    """Worst-case Pauli-Z rate if all leaked power becomes phase noise."""
    if extinction_db > 0:
        raise SpecError("extinction ratio must be <= 0 dB")
    return 10.0 ** (extinction_db / 10.0)


# -- delay-network transit --------------------------------------------------


def route_with_delays(stream: PhotonStream, assignments, network: DelayNetwork):
    """Send photons through the binary delay cascade and detect collisions.

    `assignments` maps input bin -> integer delay (bins without an entry
    take delay 0; a value of None discards the photon at the input).  Two
    photons collide when they enter the same branch of the same stage at
    the same time, or land on the same output bin; all photons in a
    collision are dropped and the event logged.

    Returns (output_stream, collisions) where collisions is a list of
    (stage_label, time_bin, input_bins_involved).
    """
    for b, d in assignments.items():
        if d is None:
            continue
        if not 0 <= d <= network.max_delay:
            raise SpecError(
                f"delay {d} at bin {b} outside [0, {network.max_delay}]"
            )
    # (input_bin, current_time, remaining-delay bits) per live photon
    live = {}
    discarded = 0
    for b in stream.photon_bins:
        d = assignments.get(b, 0)
        if d is None:
            discarded += 1
            continue
        live[b] = (b, d)
    collisions = []

    for s in range(network.stage_count):
        seg = 1 << s
        occupancy: dict[tuple[int, int], list[int]] = {}
        for b, (t, d) in live.items():
            branch = 1 if d & seg else 0
            occupancy.setdefault((branch, t), []).append(b)
        for (branch, t), members in occupancy.items():
            if len(members) > 1:
                collisions.append((f"stage-{s}-{'delay' if branch else 'pass'}",
                                   t, tuple(sorted(members))))
                for b in members:
                    del live[b]
        for b in list(live):
            t, d = live[b]
            if d & seg:
                live[b] = (t + seg, d & ~seg)

    out_bins: dict[int, list[int]] = {}
    for b, (t, _d) in live.items():
        out_bins.setdefault(t, []).append(b)
    for t, members in out_bins.items():
        if len(members) > 1:
            collisions.append(("output", t, tuple(sorted(members))))
            for b in members:
                del live[b]

    n_out = max(
        [stream.bin_count] + [t + 1 for t, _ in (v for v in live.values())]
    )
    occ = [False] * n_out
    for _b, (t, _d) in live.items():
        occ[t] = True
    out = PhotonStream(tuple(occ), stream.p, stream.stream_id)
    dropped = sum(len(m) for _lbl, _t, m in collisions)
    assert len(stream.photon_bins) == len(live) + dropped + discarded
    return out, collisions


# -- relative-time multiplexing ---------------------------------------------


def sliding_window_match(
    stream_a: PhotonStream,
    stream_b: PhotonStream,
    max_delay: int,
    delayed_stream: int = 0,
) -> list[MatchedPair]:
    """Pair photons by repeatedly taking the earliest unmatched one.

    Only the designated stream carries a delay network, so a pair needs its
    photon to arrive no later than the partner and at most `max_delay` bins
    earlier.  The earliest unmatched photon overall is paired with the
    earliest in-range partner if one exists, otherwise discarded; photons
    of the undelayed stream that come up first have no one left to meet
    them and are discarded in turn.
    """
    if max_delay < 0:
        raise SpecError("max_delay must be >= 0")
    if delayed_stream not in (0, 1):
        raise SpecError("delayed_stream must be 0 or 1")
    delayed, other = (
        (stream_a, stream_b) if delayed_stream == 0 else (stream_b, stream_a)
    )
    a = list(delayed.photon_bins)
    b = list(other.photon_bins)
    ia = ib = 0
    pairs = []
    while ia < len(a) and ib < len(b):
        ta, tb = a[ia], b[ib]
        if ta <= tb:
            if tb - ta <= max_delay:
                pairs.append(MatchedPair(ta, tb))
                ia += 1
                ib += 1
            else:
                ia += 1  # no partner in range: discard
        else:
            ib += 1  # cannot be delayed backwards: discard
    if delayed_stream == 1:
        pairs = [MatchedPair(pr.bin_b, pr.bin_a) for pr in pairs]
    return pairs


def delivered_pairs(
    delayed: PhotonStream,
    pairs,
    network: DelayNetwork,
    delayed_stream: int = 0,
):
    """Route a pair set's delays and drop pairs destroyed by collisions.

    The pair list stores the delayed photon's bin in `bin_a` when
    delayed_stream is 0, in `bin_b` otherwise.  Returns the surviving pairs
    and the collision events.
    """
    key = (lambda pr: pr.bin_a) if delayed_stream == 0 else (lambda pr: pr.bin_b)
    assignments: dict[int, int | None] = {
        b: None for b in delayed.photon_bins
    }
    assignments.update({key(pr): pr.delay for pr in pairs})
    _out, collisions = route_with_delays(delayed, assignments, network)
    destroyed = set()
    for _lbl, _t, members in collisions:
        destroyed.update(members)
    kept = [pr for pr in pairs if key(pr) not in destroyed]
    return kept, collisions


def _greedy_interval_matching(a_bins, b_bins, max_delay):
    """Maximum matching for pairs with 0 <= t_b - t_a <= max_delay.

    Sweep the b photons in time order and give each the earliest compatible
    unmatched a photon.  Compatibility windows are intervals with a common
    width, so the exchange argument applies: any matching can be reordered
    so the earliest b takes the earliest compatible a without losing pairs,
    hence the greedy sweep attains maximum cardinality.
    """
    pairs = []
    ia = 0
    a_bins = sorted(a_bins)
    for tb in sorted(b_bins):
        while ia < len(a_bins) and a_bins[ia] < tb - max_delay:
            ia += 1
        if ia < len(a_bins) and a_bins[ia] <= tb:
            pairs.append(MatchedPair(a_bins[ia], tb))
            ia += 1
    return pairs


def matching_rmux(
    stream_a: PhotonStream,
    stream_b: PhotonStream,
    max_delay: int,
    delayed_stream: int = 0,
    network: DelayNetwork | None = None,
) -> list[MatchedPair]:
    """Maximum matching with delays on one designated stream only.

    A photon of the delayed stream at t_a may pair with an undelayed photon
    at t_b iff 0 <= t_b - t_a <= max_delay.  Collisions are a planning
    problem here — the matcher controls every switch before any photon is
    sent — so the pair plan is pruned and regrown until it routes
    collision-free: start from whichever of the greedy maximum matching or
    the sliding-window plan delivers more after collision pruning, then
    greedily re-match the still-unpaired photons and keep any additions
    that survive routing.  The returned set is deliverable as-is and never
    smaller than the delivered sliding-window set.
    """
    if max_delay < 0:
        raise SpecError("max_delay must be >= 0")
    if delayed_stream not in (0, 1):
        raise SpecError("delayed_stream must be 0 or 1")
    delayed, other = (
        (stream_a, stream_b) if delayed_stream == 0 else (stream_b, stream_a)
    )
    if network is None:
        network = DelayNetwork(max(max_delay.bit_length(), 0))

    def survivors(plan):
        kept, _collisions = delivered_pairs(delayed, plan, network)
        return kept

    greedy = _greedy_interval_matching(
        delayed.photon_bins, other.photon_bins, max_delay
    )
    sliding = sliding_window_match(delayed, other, max_delay)
    plan = max(survivors(greedy), survivors(sliding), key=len)

    while True:
        used_a = {pr.bin_a for pr in plan}
        used_b = {pr.bin_b for pr in plan}
        pool_a = [t for t in delayed.photon_bins if t not in used_a]
        pool_b = [t for t in other.photon_bins if t not in used_b]
        extra = _greedy_interval_matching(pool_a, pool_b, max_delay)
        if not extra:
            break
        candidate = survivors(plan + extra)
        if len(candidate) <= len(plan):
            break
        plan = candidate

    plan = survivors(plan)
    if delayed_stream == 1:
        plan = [MatchedPair(pr.bin_b, pr.bin_a) for pr in plan]
    return plan


def pair_yield(pairs, bin_count: int) -> float:
    """Matched pairs per original time bin."""
    if bin_count <= 0:
        raise SpecError("bin_count must be positive")
    return len(pairs) / bin_count


# -- stream serialization ---------------------------------------------------


def stream_to_rle(stream: PhotonStream) -> str:
    """Run-length-encoded text form, stable for golden tests."""
    runs = []
    occ = stream.occupancy
    i = 0
    while i < len(occ):
        j = i
        while j < len(occ) and occ[j] == occ[i]:
            j += 1
        runs.append(f"{int(occ[i])}x{j - i}")
        i = j
    header = (
        f"photonstream v1 {stream.stream_id} {stream.bin_count} {stream.p!r}"
    )
    return header + "\n" + " ".join(runs) + "\n"


def stream_from_rle(text: str) -> PhotonStream:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SpecError("empty stream text")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "photonstream" or head[1] != "v1":
        raise SpecError(f"bad stream header: {lines[0]!r}")
    stream_id, bin_count, p = head[2], int(head[3]), float(head[4])
    occ: list[bool] = []
    for token in " ".join(lines[1:]).split():
        val, _, cnt = token.partition("x")
        if val not in ("0", "1") or not cnt.isdigit():
            raise SpecError(f"bad run token {token!r}")
        occ.extend([val == "1"] * int(cnt))
    if len(occ) != bin_count:
        raise SpecError(
            f"run lengths sum to {len(occ)}, header says {bin_count}"
        )
    return PhotonStream(tuple(occ), p, stream_id)


# -- yield curves -----------------------------------------------------------


def yield_curve(p: float, s_values, bin_count: int, rng) -> list[dict]:
    """Standard vs relative-time pair yields across delay budgets.

    One row per S with the closed-form standard yield and Monte Carlo
    delivered sliding-window / matching yields at max delay 2^S - 1, plus
    the collision events hit while routing the sliding assignment (the
    matching pair set is collision-free by construction).
    """
    rows = []
    for S in s_values:
        a = PhotonStream.sample(bin_count, p, rng, "A")
        b = PhotonStream.sample(bin_count, p, rng, "B")
        D = (1 << S) - 1
        network = DelayNetwork(S)
        sliding = sliding_window_match(a, b, D)
        sliding_kept, collisions = delivered_pairs(a, sliding, network)
        matched = matching_rmux(a, b, D, network=network)
        rows.append(
            {
                "S": S,
                "standard_yield": standard_mux_pair_yield(p, S),
                "sliding_yield": pair_yield(sliding_kept, bin_count),
                "matching_yield": pair_yield(matched, bin_count),
                "collisions": len(collisions),
            }
        )
    return rows


def yield_curve_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=[
            "S",
            "standard_yield",
            "sliding_yield",
            "matching_yield",
            "collisions",
        ],
        lineterminator="\n",
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
