"""Percolation clusters, clusterwise coin flips, connecting factor edges,
and connection-cost upper bounds.

A subset of window vertices (the "in" class of a 2-colouring) decomposes
into clusters: connected components of the induced subgraph.  The cheapest
way to join all clusters into one component is a minimum spanning tree over
the cluster quotient with inter-cluster graph distances as weights; the
retained witness pairs realize those distances exactly.  From the induced
degrees plus the connecting pairs one gets an empirical upper bound on the
connection cost per vertex,

    empirical = 1 + (1/2) * (avg induced degree + 2 |extra| / n_in) * iota - iota,

to compare against the coarse ceiling 1 + iota * |S| (iota = subset
intensity, |S| = degree bound).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from .colourings import Colouring, subset_colouring, subset_mask
from .graphs import WindowGraph
from .rng import derive_rng


class DisconnectedClustersError(ValueError):
    """Clusters sit in different window components; lists the grouping."""

    def __init__(self, components: dict[int, list[int]]):
        self.components = components
        parts = "; ".join(f"component {k}: clusters {v}" for k, v in sorted(components.items()))
        super().__init__(f"clusters span multiple window components ({parts})")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True, eq=False)
class ClusterDecomposition:
    """Connected components of the subset-induced subgraph.

    Cluster ids are contiguous 0..count-1, ordered by each cluster's
    smallest vertex; cluster_id is -1 outside the subset.
    """

    window: WindowGraph
    mask: np.ndarray
    cluster_id: np.ndarray
    count: int
    sizes: tuple[int, ...]

    @property
    def size_histogram(self) -> dict[int, int]:
        return dict(Counter(self.sizes))

    def vertices_of(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_id == cluster)


def decompose(w: WindowGraph, subset: Colouring) -> ClusterDecomposition:
    """Union-find over in-vertices along induced edges."""
    mask = subset_mask(subset)
    uf = _UnionFind(w.n)
    src, dst = w.edge_arrays
    induced = mask[src] & mask[dst]
    for u, v in zip(src[induced], dst[induced]):
        uf.union(int(u), int(v))
    roots: dict[int, list[int]] = {}
    for v in np.flatnonzero(mask):
        roots.setdefault(uf.find(int(v)), []).append(int(v))
    ordered = sorted(roots.values(), key=min)
    cluster_id = np.full(w.n, -1, dtype=np.int64)
    for cid, members in enumerate(ordered):
        cluster_id[members] = cid
    return ClusterDecomposition(
        window=w,
        mask=mask,
        cluster_id=cluster_id,
        count=len(ordered),
        sizes=tuple(len(m) for m in ordered),
    )


# ----------------------------------------------------------------------
# Clusterwise coins
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClusterBernoulli:
    """One iid coin per cluster, copied to all its vertices.

    ``colouring`` is a 2-colouring of the window: colour 1 on the vertices
    of heads clusters, colour 2 elsewhere (including outside the subset).
    """

    coins: np.ndarray  # 0/1 per cluster id
    colouring: Colouring


def clusterwise_bernoulli(dec: ClusterDecomposition, eps: float, seed: int) -> ClusterBernoulli:
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0, 1]")
    rng = derive_rng(seed, "cluster-coins")
    coins = (rng.random(dec.count) < eps).astype(np.int64)
    heads = np.zeros(dec.window.n, dtype=bool)
    if dec.count:
        inside = dec.cluster_id >= 0
        heads[inside] = coins[dec.cluster_id[inside]] == 1
    return ClusterBernoulli(coins=coins, colouring=subset_colouring(dec.window, heads))


def uniform_cluster_select(dec: ClusterDecomposition, seed: int) -> Colouring:
    """One full cluster, chosen uniformly; strictly sparser when count >= 2."""
    if dec.count < 1:
        raise ValueError("no clusters to select from")
    rng = derive_rng(seed, "cluster-select")
    chosen = int(rng.integers(dec.count))
    return subset_colouring(dec.window, dec.cluster_id == chosen)


# ----------------------------------------------------------------------
# Connecting factor edges
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FactorGraphEdges:
    """Extra vertex pairs joining distinct clusters; distances are the true
    inter-cluster graph distances of the pairs they retain."""

    pairs: tuple[tuple[int, int], ...]
    distances: tuple[int, ...]
    cluster_pairs: tuple[tuple[int, int], ...]


def connect_clusters(w: WindowGraph, dec: ClusterDecomposition) -> FactorGraphEdges:
    """Minimum spanning tree over the cluster quotient graph.

    Runs a multi-source BFS from all in-vertices to partition the window
    into nearest-cluster regions, collects one candidate pair per adjacent
    region pair (weight = realized path length through the boundary edge),
    and keeps a Kruskal tree.  Every retained pair realizes the true
    distance between its clusters: a retained overestimate would force the
    tree total above the optimum, which spanning-tree optimality of the
    candidate graph rules out.
    """
    if dec.count <= 1:
        return FactorGraphEdges((), (), ())

    n = w.n
    dist = np.full(n, -1, dtype=np.int64)
    anchor = np.full(n, -1, dtype=np.int64)  # nearest in-vertex
    queue: deque[int] = deque()
    for v in map(int, np.flatnonzero(dec.mask)):
        dist[v] = 0
        anchor[v] = v
        queue.append(v)
    while queue:
        x = queue.popleft()
        for y, _ in w.adjacency[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                anchor[y] = anchor[x]
                queue.append(y)

    best: dict[tuple[int, int], tuple[int, int, int]] = {}
    src, dst = w.edge_arrays
    for x, y in zip(src, dst):
        x, y = int(x), int(y)
        if dist[x] < 0 or dist[y] < 0:
            continue
        ca = int(dec.cluster_id[anchor[x]])
        cb = int(dec.cluster_id[anchor[y]])
        if ca == cb:
            continue
        u, v = int(anchor[x]), int(anchor[y])
        if ca > cb:
            ca, cb, u, v = cb, ca, v, u
        cand = (int(dist[x] + 1 + dist[y]), u, v)
        if (ca, cb) not in best or cand < best[(ca, cb)]:
            best[(ca, cb)] = cand

    # reachability across clusters: all clusters must share a window component
    comp = _component_of_clusters(w, dec)
    if len(set(comp)) > 1:
        grouping: dict[int, list[int]] = {}
        for cid, comp_id in enumerate(comp):
            grouping.setdefault(comp_id, []).append(cid)
        raise DisconnectedClustersError(grouping)

    uf = _UnionFind(dec.count)
    pairs: list[tuple[int, int]] = []
    distances: list[int] = []
    cluster_pairs: list[tuple[int, int]] = []
    for (ca, cb), (d, u, v) in sorted(best.items(), key=lambda kv: (kv[1][0], kv[0], kv[1][1:])):
        if uf.union(ca, cb):
            pairs.append((u, v))
            distances.append(d)
            cluster_pairs.append((ca, cb))
    assert len(pairs) == dec.count - 1
    return FactorGraphEdges(tuple(pairs), tuple(distances), tuple(cluster_pairs))


def _component_of_clusters(w: WindowGraph, dec: ClusterDecomposition) -> list[int]:
    comp = np.full(w.n, -1, dtype=np.int64)
    next_id = 0
    for start in range(w.n):
        if comp[start] >= 0:
            continue
        comp[start] = next_id
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y, _ in w.adjacency[x]:
                if comp[y] < 0:
                    comp[y] = next_id
                    queue.append(y)
        next_id += 1
    return [int(comp[dec.vertices_of(cid)[0]]) for cid in range(dec.count)]


# ----------------------------------------------------------------------
# Cost bounds
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CostBound:
    intensity: float
    half_degree: float  # (1/2) E[factor-graph degree at a uniform root]
    lemma_bound: float  # 1 + intensity * |S|
    empirical_bound: float  # 1 + half_degree - intensity
    n_subset: int
    extra_pairs: int

    def __post_init__(self):
        if self.lemma_bound < 1.0:
            raise ValueError("ceiling bound cannot drop below 1")


def cost_upper_bound(
    w: WindowGraph,
    subset: Colouring,
    dec: ClusterDecomposition,
    extra: FactorGraphEdges,
) -> CostBound:
    """Both cost bounds for the factor graph (induced edges + extra pairs).

    Requires ``extra`` to actually connect the decomposition; the factor
    graph degree of an in-vertex is its induced degree plus its incident
    extra pairs, and the root expectation rescales by the intensity.
    """
    mask = subset_mask(subset)
    if not np.array_equal(mask, dec.mask):
        raise ValueError("decomposition does not belong to this subset")
    if dec.count >= 1:
        uf = _UnionFind(dec.count)
        merged = sum(1 for ca, cb in extra.cluster_pairs if uf.union(ca, cb))
        if merged != dec.count - 1:
            raise ValueError("extra pairs do not connect the clusters")

    n_in = int(mask.sum())
    iota = n_in / w.n
    lemma = 1.0 + iota * w.degree_bound
    if n_in == 0:
        return CostBound(0.0, 0.0, lemma, 1.0, 0, 0)
    src, dst = w.edge_arrays
    induced_directed = int(np.count_nonzero(mask[src] & mask[dst]))
    avg_induced_degree = induced_directed / n_in
    half_degree = 0.5 * (avg_induced_degree + 2.0 * len(extra.pairs) / n_in) * iota
    empirical = 1.0 + half_degree - iota
    return CostBound(iota, half_degree, lemma, empirical, n_in, len(extra.pairs))


def gaboriau_induction(cost_restricted: float, mu_A: float) -> float:
    """Full-space cost bound from a restricted one: 1 + mu_A * (cost_restricted - 1)."""
    if mu_A <= 0.0 or mu_A > 1.0:
        raise ValueError("mu_A must lie in (0, 1]")
    if cost_restricted < 1.0:
        raise ValueError("restricted cost must be at least 1")
    return 1.0 + mu_A * (cost_restricted - 1.0)
