"""Community life cycles across snapshots and resurgence detection.

Adjacent snapshots are matched with binary Jaccard similarity; matched pairs
form a bipartite graph whose shapes classify into continuation / growth /
contraction / split / merge, with unmatched sides yielding births and
deaths. Resurgence then re-examines each birth against every community two
or more snapshots back, with either binary Jaccard or the
neighborhood-weighted variant that spreads each member cell's influence over
its surrounding rings (weight kappa / 2^k at ring k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .community import Partition
from .grid import GridSpec, chebyshev_ring

DEFAULT_MATCH_THETA = 0.3
DEFAULT_THETA = 0.9
DEFAULT_KAPPA = 0.8
DEFAULT_K_MAX = 4


class EventKind(str, Enum):
    BIRTH = "birth"
    CONTINUATION = "continuation"
    GROWTH = "growth"
    CONTRACTION = "contraction"
    SPLIT = "split"
    MERGE = "merge"
    DEATH = "death"
    RESURGENCE = "resurgence"


class CommunityRef(NamedTuple):
    snapshot: int
    community: int


@dataclass(frozen=True)
class LifecycleEvent:
    """One transition in a community's life.

    ``snapshot`` is the later snapshot of the transition (for a death, the
    snapshot where the community is first missing). Split events have one
    predecessor and two or more successors, merges the reverse.
    """

    kind: EventKind
    snapshot: int
    predecessors: tuple[CommunityRef, ...]
    successors: tuple[CommunityRef, ...]
    similarity: float | None = None


@dataclass
class CommunityTimeline:
    """A chain of matched communities, one per consecutive snapshot."""

    chain_id: int
    entries: list[CommunityRef] = field(default_factory=list)

    @property
    def birth_snapshot(self) -> int:
        return self.entries[0].snapshot


@dataclass
class TrackingResult:
    timelines: list[CommunityTimeline]
    events: list[LifecycleEvent]
    chain_of: dict[CommunityRef, int]


@dataclass(frozen=True)
class ResurgenceLink:
    """A birth community matched to one seen two or more snapshots earlier.

    ``gap`` is birth snapshot minus matched snapshot; ``period`` is birth
    snapshot minus the first snapshot of the matched community's chain (the
    start-to-start recurrence interval).
    """

    snapshot: int
    community: int
    chain: int
    matched_snapshot: int
    matched_community: int
    matched_chain: int
    gap: int
    period: int
    similarity: float


# ---------------------------------------------------------------------------
# Similarity primitives
# ---------------------------------------------------------------------------


def binary_jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    """|a and b| / |a or b| over node-id sets."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        raise ValueError("similarity undefined for two empty communities")
    inter = len(sa & sb)
    return inter / (len(sa) + len(sb) - inter)


def _weight_map(members: Iterable[int], grid: GridSpec, kappa: float, k_max: int) -> dict[int, float]:
    """Sparse neighborhood-weighted membership: members at 1, ring k at kappa/2^k.

    Keys are inserted in sorted order so float reductions over the map are
    reproducible regardless of how the member set was built.
    """
    weights = {cell: 1.0 for cell in sorted(members)}
    if not weights:
        raise ValueError("empty member set")
    for cell in list(weights):
        coord = grid.coord(cell)
        for k in range(1, k_max + 1):
            w_k = kappa / 2**k
            for ring_coord in sorted(chebyshev_ring(coord, k, grid)):
                rid = grid.cell_id(ring_coord)
                if weights.get(rid, 0.0) < w_k:
                    weights[rid] = w_k
    return dict(sorted(weights.items()))


def membership_weights(
    members: Iterable[int],
    grid: GridSpec,
    kappa: float = DEFAULT_KAPPA,
    k_max: int = DEFAULT_K_MAX,
) -> np.ndarray:
    """Dense length-n_cells membership vector with ring weighting.

    Member positions are exactly 1; any other position takes the maximum
    kappa/2^k over members whose ring k <= k_max reaches it, else 0.
    k_max = 0 reduces to the binary membership vector.
    """
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must be in (0, 1], got {kappa}")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    vec = np.zeros(grid.n_cells)
    for cell, w in _weight_map(members, grid, kappa, k_max).items():
        vec[cell] = w
    return vec


def weighted_jaccard(u: np.ndarray, v: np.ndarray) -> float:
    """Sum of elementwise minima over sum of elementwise maxima."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"vector length mismatch: {u.shape} vs {v.shape}")
    denom = np.maximum(u, v).sum()
    if denom == 0:
        raise ValueError("similarity undefined for two all-zero vectors")
    return float(np.minimum(u, v).sum() / denom)


# ---------------------------------------------------------------------------
# Adjacent-snapshot matching
# ---------------------------------------------------------------------------


def _match_graph(prev: Partition, nxt: Partition, theta_match: float) -> dict[tuple[int, int], float]:
    """(prev id, next id) -> similarity, for all pairs with Jaccard >= theta."""
    node_owner: dict[int, int] = {}
    for b, nodes in enumerate(nxt.communities):
        for node in nodes:
            node_owner[node] = b
    matches: dict[tuple[int, int], float] = {}
    for a, nodes in enumerate(prev.communities):
        inter: dict[int, int] = {}
        for node in nodes:
            b = node_owner.get(node)
            if b is not None:
                inter[b] = inter.get(b, 0) + 1
        for b, common in inter.items():
            sim = common / (len(nodes) + len(nxt.communities[b]) - common)
            if sim >= theta_match:
                matches[(a, b)] = sim
    return matches


def match_adjacent(
    prev: Partition, nxt: Partition, theta_match: float = DEFAULT_MATCH_THETA
) -> list[LifecycleEvent]:
    """Classify the transition between two consecutive partitions."""
    if prev.snapshot_index + 1 != nxt.snapshot_index:
        raise ValueError(
            f"partitions are not adjacent: {prev.snapshot_index} -> {nxt.snapshot_index}"
        )
    matches = _match_graph(prev, nxt, theta_match)
    i, j = prev.snapshot_index, nxt.snapshot_index

    succ: dict[int, list[int]] = {a: [] for a in range(len(prev.communities))}
    pred: dict[int, list[int]] = {b: [] for b in range(len(nxt.communities))}
    for (a, b) in sorted(matches):
        succ[a].append(b)
        pred[b].append(a)

    events: list[LifecycleEvent] = []
    for a in range(len(prev.communities)):
        if not succ[a]:
            events.append(LifecycleEvent(EventKind.DEATH, j, (CommunityRef(i, a),), ()))
        elif len(succ[a]) >= 2:
            events.append(
                LifecycleEvent(
                    EventKind.SPLIT,
                    j,
                    (CommunityRef(i, a),),
                    tuple(CommunityRef(j, b) for b in succ[a]),
                )
            )
    for b in range(len(nxt.communities)):
        if not pred[b]:
            events.append(LifecycleEvent(EventKind.BIRTH, j, (), (CommunityRef(j, b),)))
        elif len(pred[b]) >= 2:
            events.append(
                LifecycleEvent(
                    EventKind.MERGE,
                    j,
                    tuple(CommunityRef(i, a) for a in pred[b]),
                    (CommunityRef(j, b),),
                )
            )
        elif len(succ[pred[b][0]]) == 1:
            a = pred[b][0]
            size_prev, size_next = len(prev.communities[a]), len(nxt.communities[b])
            if size_next > size_prev:
                kind = EventKind.GROWTH
            elif size_next < size_prev:
                kind = EventKind.CONTRACTION
            else:
                kind = EventKind.CONTINUATION
            events.append(
                LifecycleEvent(
                    kind, j, (CommunityRef(i, a),), (CommunityRef(j, b),), matches[(a, b)]
                )
            )
    return events


def build_timelines(
    partitions: Sequence[Partition], theta_match: float = DEFAULT_MATCH_THETA
) -> TrackingResult:
    """Fold adjacent matches into chains; every community joins exactly one chain.

    Matched (prev, next) pairs link greedily by descending similarity (ties:
    lower prev id, then lower next id); a chain extends through at most one
    successor per snapshot, and any community left unlinked starts a new
    chain.
    """
    timelines: list[CommunityTimeline] = []
    chain_of: dict[CommunityRef, int] = {}
    events: list[LifecycleEvent] = []

    def new_chain(ref: CommunityRef) -> None:
        timelines.append(CommunityTimeline(chain_id=len(timelines), entries=[ref]))
        chain_of[ref] = timelines[-1].chain_id

    if not partitions:
        return TrackingResult([], [], {})

    first = partitions[0]
    for b in range(len(first.communities)):
        ref = CommunityRef(first.snapshot_index, b)
        new_chain(ref)
        events.append(LifecycleEvent(EventKind.BIRTH, first.snapshot_index, (), (ref,)))

    for prev, nxt in zip(partitions, partitions[1:]):
        events.extend(match_adjacent(prev, nxt, theta_match))
        matches = _match_graph(prev, nxt, theta_match)
        extended: set[int] = set()
        attached: set[int] = set()
        for (a, b) in sorted(matches, key=lambda ab: (-matches[ab], ab[0], ab[1])):
            if a in extended or b in attached:
                continue
            extended.add(a)
            attached.add(b)
            ref = CommunityRef(nxt.snapshot_index, b)
            chain = chain_of[CommunityRef(prev.snapshot_index, a)]
            timelines[chain].entries.append(ref)
            chain_of[ref] = chain
        for b in range(len(nxt.communities)):
            if b not in attached:
                new_chain(CommunityRef(nxt.snapshot_index, b))

    return TrackingResult(timelines, events, chain_of)


# ---------------------------------------------------------------------------
# Resurgence
# ---------------------------------------------------------------------------


def _bbox(members: Iterable[int], grid: GridSpec) -> tuple[int, int, int, int]:
    coords = [grid.coord(c) for c in members]
    rows = [c.row for c in coords]
    cols = [c.col for c in coords]
    return min(rows), max(rows), min(cols), max(cols)


def _boxes_within(a: tuple[int, int, int, int], b: tuple[int, int, int, int], pad: int) -> bool:
    return not (
        a[1] + pad < b[0] or b[1] + pad < a[0] or a[3] + pad < b[2] or b[3] + pad < a[2]
    )


def find_resurgences(
    tracking: TrackingResult,
    partitions: Sequence[Partition],
    grid: GridSpec,
    theta: float = DEFAULT_THETA,
    mode: str = "binary",
    kappa: float = DEFAULT_KAPPA,
    k_max: int = DEFAULT_K_MAX,
) -> list[ResurgenceLink]:
    """Match each birth against every community two or more snapshots back.

    The best candidate at similarity >= theta wins; ties break toward the
    most recent snapshot, then the lowest community id. The weighted mode
    compares ring-weighted membership vectors, which lets small communities
    that merely sit near each other on the grid register as similar.
    """
    if mode not in ("binary", "weighted"):
        raise ValueError(f"unknown jaccard mode {mode!r}")
    by_index = {p.snapshot_index: p for p in partitions}

    members: dict[CommunityRef, frozenset[int]] = {}
    for p in partitions:
        for cid, nodes in enumerate(p.communities):
            members[CommunityRef(p.snapshot_index, cid)] = frozenset(nodes)

    weighted: dict[CommunityRef, dict[int, float]] = {}
    sums: dict[CommunityRef, float] = {}
    boxes: dict[CommunityRef, tuple[int, int, int, int]] = {}

    def weights_for(ref: CommunityRef) -> dict[int, float]:
        if ref not in weighted:
            weighted[ref] = _weight_map(members[ref], grid, kappa, k_max)
            sums[ref] = sum(weighted[ref].values())
        return weighted[ref]

    def box_for(ref: CommunityRef) -> tuple[int, int, int, int]:
        if ref not in boxes:
            boxes[ref] = _bbox(members[ref], grid)
        return boxes[ref]

    births = sorted(
        ev.successors[0]
        for ev in tracking.events
        if ev.kind is EventKind.BIRTH and ev.snapshot >= 2
    )
    ordered_refs = sorted(members)
    pad = 2 * k_max if mode == "weighted" else 0

    links: list[ResurgenceLink] = []
    for birth in births:
        birth_set = members[birth]
        if mode == "weighted":
            birth_w = weights_for(birth)
            birth_sum = sums[birth]
        best: tuple[float, int, int] | None = None
        for ref in ordered_refs:
            if ref.snapshot > birth.snapshot - 2:
                break
            if not _boxes_within(box_for(birth), box_for(ref), pad):
                continue
            if mode == "binary":
                cand = members[ref]
                lo, hi = sorted((len(birth_set), len(cand)))
                if lo / hi < theta:
                    continue
                inter = len(birth_set & cand)
                sim = inter / (len(birth_set) + len(cand) - inter)
            else:
                cand_w = weights_for(ref)
                s_u, s_v = birth_sum, sums[ref]
                if min(s_u, s_v) / max(s_u, s_v) < theta:
                    continue
                small, large = (birth_w, cand_w) if len(birth_w) <= len(cand_w) else (cand_w, birth_w)
                # sparse maps are key-sorted, so this sum is order-stable
                inter_sum = sum(min(w, large[c]) for c, w in small.items() if c in large)
                sim = inter_sum / (s_u + s_v - inter_sum)
            if sim < theta:
                continue
            if (
                best is None
                or sim > best[0]
                or (sim == best[0] and ref.snapshot > best[1])
            ):
                best = (sim, ref.snapshot, ref.community)
        if best is None:
            continue
        sim, j, k = best
        matched = CommunityRef(j, k)
        matched_chain = tracking.chain_of[matched]
        links.append(
            ResurgenceLink(
                snapshot=birth.snapshot,
                community=birth.community,
                chain=tracking.chain_of[birth],
                matched_snapshot=j,
                matched_community=k,
                matched_chain=matched_chain,
                gap=birth.snapshot - j,
                period=birth.snapshot - tracking.timelines[matched_chain].birth_snapshot,
                similarity=sim,
            )
        )
    _ = by_index
    return links


def resurgent_threads(
    tracking: TrackingResult, links: Sequence[ResurgenceLink]
) -> list[list[int]]:
    """Groups of chain ids connected by resurgence links, one list per thread.

    Only threads with at least one link are returned, ordered by their
    smallest chain id; chain ids within a thread are ascending.
    """
    parent = {tl.chain_id: tl.chain_id for tl in tracking.timelines}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    linked: set[int] = set()
    for link in links:
        linked.add(link.chain)
        linked.add(link.matched_chain)
        ra, rb = find(link.chain), find(link.matched_chain)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for chain in sorted(linked):
        groups.setdefault(find(chain), []).append(chain)
    return [groups[root] for root in sorted(groups)]
