"""Per-snapshot community detection by greedy modularity optimization.

The detector is a Louvain-style two-phase loop (local moves, then graph
aggregation) made fully deterministic: node visit order is a seeded
permutation (seed 0 = ascending cell id) and modularity-gain ties break
toward the lowest community id. Identical snapshot + seed always produce an
identical partition.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .chronnet import Snapshot

DEFAULT_Q_THRESHOLD = 0.3

Adjacency = dict[int, dict[int, float]]


@dataclass(frozen=True)
class Partition:
    """Communities of one snapshot's non-isolated nodes, with modularity q.

    Communities are disjoint, cover exactly the non-isolated nodes, and are
    numbered 0..k-1 in order of their smallest member cell. ``q`` is None
    only for edgeless snapshots.
    """

    snapshot_index: int
    communities: tuple[frozenset[int], ...]
    q: float | None

    @property
    def assignment(self) -> dict[int, int]:
        return {node: cid for cid, nodes in enumerate(self.communities) for node in nodes}

    def sizes(self) -> list[int]:
        return [len(c) for c in self.communities]


def adjacency(snapshot: Snapshot) -> Adjacency:
    """Weighted adjacency over non-isolated nodes; self-loops kept at adj[v][v]."""
    adj: Adjacency = {}
    for (u, v), w in snapshot.edges.items():
        adj.setdefault(u, {})[v] = adj.get(u, {}).get(v, 0) + w
        if u != v:
            adj.setdefault(v, {})[u] = adj.get(v, {}).get(u, 0) + w
    return adj


def _degrees(adj: Adjacency) -> dict[int, float]:
    # A self-loop of weight w contributes 2w to its node's degree.
    return {
        v: sum(w for u, w in nbrs.items() if u != v) + 2 * nbrs.get(v, 0)
        for v, nbrs in adj.items()
    }


def _total_weight(adj: Adjacency) -> float:
    return sum(_degrees(adj).values()) / 2.0


def modularity(snapshot: Snapshot, communities: Iterable[Iterable[int]]) -> float:
    """Newman-Girvan weighted modularity of a node grouping.

    Q = sum over communities of [e_c/m - (d_c/2m)^2] with e_c the intra
    weight (self-loops once), d_c the total degree (self-loops twice) and m
    the total edge weight.
    """
    adj = adjacency(snapshot)
    m = _total_weight(adj)
    if m <= 0:
        raise ValueError("modularity undefined: snapshot has no edges")
    degrees = _degrees(adj)
    q = 0.0
    for comm in communities:
        nodes = set(comm)
        e_c = 0.0
        # sorted iteration keeps float accumulation order-stable across
        # differently-built (e.g. unpickled) node sets
        for v in sorted(nodes):
            for u, w in adj.get(v, {}).items():
                if u == v:
                    e_c += w
                elif u in nodes and u > v:
                    e_c += w
        d_c = sum(degrees.get(v, 0.0) for v in sorted(nodes))
        q += e_c / m - (d_c / (2 * m)) ** 2
    return q


def _visit_order(nodes: Sequence[int], seed: int, rng: random.Random) -> list[int]:
    order = sorted(nodes)
    if seed != 0:
        rng.shuffle(order)
    return order


def _one_level(adj: Adjacency, m: float, order: Sequence[int]) -> tuple[dict[int, int], bool]:
    """Local-move phase: greedily reassign nodes until no move helps.

    Only strictly positive modularity gains move a node; on equal gain the
    lowest community id wins, so a node never leaves a community for an
    equally good higher-numbered one.
    """
    comm = {v: v for v in adj}
    degree = _degrees(adj)
    comm_total = dict(degree)
    moved_any = False

    while True:
        moved = False
        for v in order:
            k_v = degree[v]
            links: dict[int, float] = {}
            for u, w in adj[v].items():
                if u != v:
                    c = comm[u]
                    links[c] = links.get(c, 0.0) + w
            c_old = comm[v]
            comm_total[c_old] -= k_v

            best_c = c_old
            best_gain = links.get(c_old, 0.0) - comm_total[c_old] * k_v / (2 * m)
            for c in sorted(links):
                if c == c_old:
                    continue
                gain = links[c] - comm_total[c] * k_v / (2 * m)
                if gain > best_gain or (gain == best_gain and c < best_c):
                    best_c, best_gain = c, gain

            comm[v] = best_c
            comm_total[best_c] += k_v
            if best_c != c_old:
                moved = True
                moved_any = True
        if not moved:
            return comm, moved_any


def _aggregate(adj: Adjacency, comm: Mapping[int, int]) -> tuple[Adjacency, dict[int, int]]:
    """Collapse communities into super-nodes; returns (new adjacency, relabeling)."""
    labels = {c: i for i, c in enumerate(sorted(set(comm.values())))}
    new_adj: Adjacency = {labels[c]: {} for c in labels}
    for v, nbrs in adj.items():
        cv = labels[comm[v]]
        for u, w in nbrs.items():
            if u < v:
                continue
            cu = labels[comm[u]]
            a, b = (cv, cu) if cv <= cu else (cu, cv)
            new_adj[a][b] = new_adj[a].get(b, 0) + w
            if a != b:
                new_adj[b][a] = new_adj[b].get(a, 0) + w
    return new_adj, labels


def detect_communities(snapshot: Snapshot, order_seed: int = 0) -> Partition:
    """Greedy modularity optimization over one snapshot.

    Edgeless snapshots yield an empty partition with q = None. Isolated
    cells never appear in any community.
    """
    adj = adjacency(snapshot)
    if not adj:
        return Partition(snapshot_index=snapshot.index, communities=(), q=None)
    m = _total_weight(adj)
    rng = random.Random(order_seed)

    membership = {v: v for v in adj}
    level_adj = adj
    while True:
        order = _visit_order(list(level_adj), order_seed, rng)
        comm, improved = _one_level(level_adj, m, order)
        if not improved:
            break
        level_adj, labels = _aggregate(level_adj, comm)
        membership = {v: labels[comm[c]] for v, c in membership.items()}
        if len(level_adj) == 1:
            break

    groups: dict[int, set[int]] = {}
    for node, c in membership.items():
        groups.setdefault(c, set()).add(node)
    communities = tuple(frozenset(g) for g in sorted(groups.values(), key=min))
    return Partition(
        snapshot_index=snapshot.index,
        communities=communities,
        q=modularity(snapshot, communities),
    )


def validate_partition(partition: Partition, threshold: float = DEFAULT_Q_THRESHOLD) -> bool:
    """True iff q is defined and strictly exceeds the threshold."""
    return partition.q is not None and partition.q > threshold
