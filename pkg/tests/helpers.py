"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the library's computation paths: the
pairwise modularity sums over ordered node pairs, and the exhaustive search
enumerates every set partition.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from chrontrack.chronnet import Snapshot

T0 = datetime(2003, 1, 1, tzinfo=timezone.utc)
WEEK = timedelta(days=7)


def make_snapshot(edges, index=0, n_cells=900, event_count=None):
    edges = {tuple(sorted(e)): w for e, w in dict(edges).items()}
    if event_count is None:
        event_count = sum(edges.values()) + 1 if edges else 0
    return Snapshot(
        index=index,
        start=T0 + index * WEEK,
        end=T0 + (index + 1) * WEEK,
        n_cells=n_cells,
        edges=edges,
        event_count=event_count,
    )


def modularity_pairwise(edges, communities):
    """Independent oracle: Q = (1/2m) * sum_{ij in same community} (A_ij - k_i k_j / 2m).

    A is the symmetric weight matrix with A_ii = 2 * self-loop weight; the
    double sum runs over ordered pairs including i == j.
    """
    nodes = sorted({n for e in edges for n in e})
    a = {u: {} for u in nodes}
    for (u, v), w in edges.items():
        if u == v:
            a[u][u] = a[u].get(u, 0) + 2 * w
        else:
            a[u][v] = a[u].get(v, 0) + w
            a[v][u] = a[v].get(u, 0) + w
    k = {u: sum(a[u].values()) for u in nodes}
    two_m = sum(k.values())
    q = 0.0
    for comm in communities:
        comm = list(comm)
        for i in comm:
            for j in comm:
                q += a.get(i, {}).get(j, 0) - k.get(i, 0) * k.get(j, 0) / two_m
    return q / two_m


def set_partitions(items):
    """Every partition of ``items`` into non-empty blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def best_partition_exhaustive(edges):
    """(best Q, best partition) over every set partition of the non-isolated nodes."""
    nodes = sorted({n for e in edges for n in e})
    best_q, best_p = float("-inf"), None
    for part in set_partitions(nodes):
        q = modularity_pairwise(edges, part)
        if q > best_q:
            best_q, best_p = q, part
    return best_q, best_p


def ring_of_cliques(n_cliques, clique_size=3, bridged=True):
    """n cliques in a cycle, consecutive ones joined by a single bridge edge."""
    edges = {}
    for t in range(n_cliques):
        base = clique_size * t
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                edges[(base + i, base + j)] = 1
    if bridged:
        for t in range(n_cliques):
            u = clique_size * t + 1
            v = clique_size * ((t + 1) % n_cliques)
            edges[tuple(sorted((u, v)))] = 1
    return edges


def random_graph(rng, n_nodes, n_edges, max_weight=3, self_loops=True):
    """Random weighted multigraph edges over node ids 0..n_nodes-1."""
    edges = {}
    for _ in range(n_edges):
        u = int(rng.integers(0, n_nodes))
        v = int(rng.integers(0, n_nodes))
        if u > v:
            u, v = v, u
        if u == v and not self_loops:
            continue
        edges[(u, v)] = edges.get((u, v), 0) + int(rng.integers(1, max_weight + 1))
    return edges
