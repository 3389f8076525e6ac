"""Density-based hierarchical clustering with noise (full pipeline).

Stages, all deterministic:

1. core distances: for each point, the ``min_samples``-th smallest
   distance to the data including the point itself (duplicates count, so
   exact duplicates can have core distance zero);
2. mutual reachability: max(core(a), core(b), dist(a, b));
3. minimum spanning tree of the mutual-reachability graph (Prim);
4. single-linkage hierarchy from the sorted MST edges;
5. condensation: walking the hierarchy top-down, a merge is a true split
   only if both sides hold at least ``min_cluster_size`` points and the
   merge distance is positive; otherwise small sides fall out of the
   current cluster as individual points at that level (lambda = 1/distance,
   infinite for exact duplicates, which are never separated);
6. selection by excess of mass: a cluster is kept when its stability
   (sum over members of their exit lambda minus the cluster's birth
   lambda) is at least the total stability of its selected descendants.

The hierarchy root is not a candidate cluster, with one exception: when
condensation produces no splits at all and the dataset itself reaches
``min_cluster_size``, the root is returned as a single all-points cluster
(this is what makes a pure-duplicate dataset one cluster instead of
noise). Points belonging to no selected cluster get label -1. Cluster ids
are canonical: sorted by each cluster's smallest member index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, InvalidSpecError


@dataclass(frozen=True)
class HdbscanParams:
    min_cluster_size: int = 15
    min_samples: int | None = None  # defaults to min_cluster_size

    def validate(self):
        if self.min_cluster_size < 2:
            raise InvalidSpecError("min_cluster_size must be at least 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise InvalidSpecError("min_samples must be at least 1")

    @property
    def effective_min_samples(self) -> int:
        return self.min_cluster_size if self.min_samples is None else self.min_samples


@dataclass(frozen=True)
class ClusterLabeling:
    labels: np.ndarray      # (n,) int, -1 = noise
    n_clusters: int
    stability: np.ndarray   # (n_clusters,) selected-cluster stabilities

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "stability", np.asarray(self.stability, dtype=float))
        if labels.size and (labels.min() < -1 or labels.max() >= self.n_clusters):
            raise DataError("labels must lie in {-1} U [0, n_clusters)")

    @property
    def n_noise(self) -> int:
        return int((self.labels == -1).sum())


@dataclass
class CondensedTree:
    """Cluster hierarchy after condensation, plus selection bookkeeping.

    Cluster 0 is the root. ``member_*`` rows say at which lambda each point
    left which cluster; ``child_*`` rows are the true splits.
    """

    parent: np.ndarray          # (n_clusters,) parent id, -1 for root
    birth_lambda: np.ndarray    # (n_clusters,)
    member_cluster: np.ndarray  # (n,) cluster each point fell out of
    member_lambda: np.ndarray   # (n,) lambda at which it fell out
    stability: np.ndarray       # (n_clusters,)
    selected: np.ndarray        # (n_clusters,) bool
    children: list[list[int]] = field(default_factory=list)


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sq = (X ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    k = min(min_samples, dist.shape[0])
    return np.partition(dist, k - 1, axis=1)[:, k - 1]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    mr = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def minimum_spanning_tree(weights: np.ndarray) -> np.ndarray:
    """Prim's algorithm on a dense symmetric matrix -> (n-1, 3) edge rows
    (a, b, weight), in insertion order."""
    n = weights.shape[0]
    if n == 1:
        return np.zeros((0, 3))
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    source = np.zeros(n, dtype=int)
    edges = np.empty((n - 1, 3))
    for i in range(n - 1):
        u = int(np.argmin(np.where(in_tree, np.inf, best)))
        edges[i] = (source[u], u, best[u])
        in_tree[u] = True
        better = ~in_tree & (weights[u] < best)
        best[better] = weights[u][better]
        source[better] = u
    return edges


def single_linkage(edges: np.ndarray, n: int) -> np.ndarray:
    """Merge rows (left id, right id, distance, size); new node n + i.

    Edges are processed in ascending weight (stable on ties). Component
    roots in the union structure are always dendrogram node ids."""
    order = np.argsort(edges[:, 2], kind="stable")
    parent = np.arange(2 * n - 1)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    size = np.ones(2 * n - 1)
    merges = np.empty((len(order), 4))
    for i, e in enumerate(order):
        a, b, w = int(edges[e, 0]), int(edges[e, 1]), edges[e, 2]
        ra, rb = find(a), find(b)
        node = n + i
        merges[i] = (ra, rb, w, size[ra] + size[rb])
        size[node] = size[ra] + size[rb]
        parent[ra] = node
        parent[rb] = node
    return merges


def condense(merges: np.ndarray, n: int, min_cluster_size: int) -> CondensedTree:
    if n == 1:
        return CondensedTree(parent=np.array([-1]), birth_lambda=np.zeros(1),
                             member_cluster=np.zeros(1, dtype=int),
                             member_lambda=np.full(1, np.inf),
                             stability=np.zeros(1),
                             selected=np.zeros(1, dtype=bool), children=[[]])
    n_merges = merges.shape[0]
    left = merges[:, 0].astype(int)
    right = merges[:, 1].astype(int)
    dist = merges[:, 2]

    def subtree_size(node: int) -> int:
        return 1 if node < n else int(merges[node - n, 3])

    def leaves_under(node: int):
        stack = [node]
        while stack:
            v = stack.pop()
            if v < n:
                yield v
            else:
                stack.append(left[v - n])
                stack.append(right[v - n])

    parent = [-1]
    birth = [0.0]
    children: list[list[int]] = [[]]
    member_cluster = np.zeros(n, dtype=int)
    member_lambda = np.zeros(n)

    root = n + n_merges - 1
    stack = [(root, 0)]
    while stack:
        node, cluster = stack.pop()
        i = node - n  # stack entries are merge nodes: both push sites require size >= 2
        lam = np.inf if dist[i] <= 0.0 else 1.0 / dist[i]
        kids = (left[i], right[i])
        sizes = (subtree_size(kids[0]), subtree_size(kids[1]))
        if np.isinf(lam):
            # exact duplicates are inseparable: everything stays put
            for pt in leaves_under(node):
                member_cluster[pt] = cluster
                member_lambda[pt] = np.inf
            continue
        if min(sizes) >= min_cluster_size:
            for kid in kids:
                child_id = len(parent)
                parent.append(cluster)
                birth.append(lam)
                children.append([])
                children[cluster].append(child_id)
                stack.append((kid, child_id))
            continue
        for kid, sz in zip(kids, sizes):
            if sz >= min_cluster_size:
                stack.append((kid, cluster))
            else:
                for pt in leaves_under(kid):
                    member_cluster[pt] = cluster
                    member_lambda[pt] = lam

    n_clusters = len(parent)
    stability = np.zeros(n_clusters)
    birth_arr = np.array(birth)
    for pt in range(n):
        c = member_cluster[pt]
        stability[c] += member_lambda[pt] - birth_arr[c]
    for c in range(1, n_clusters):
        stability[parent[c]] += (birth_arr[c] - birth_arr[parent[c]]) * _cluster_points(
            c, children, member_cluster, n)
    return CondensedTree(parent=np.array(parent), birth_lambda=birth_arr,
                         member_cluster=member_cluster, member_lambda=member_lambda,
                         stability=stability,
                         selected=np.zeros(n_clusters, dtype=bool), children=children)


def _cluster_points(cluster: int, children: list[list[int]],
                    member_cluster: np.ndarray, n: int) -> int:
    """Number of points inside a cluster or any of its descendants."""
    total = 0
    stack = [cluster]
    direct = np.bincount(member_cluster, minlength=len(children))
    while stack:
        c = stack.pop()
        total += int(direct[c])
        stack.extend(children[c])
    return total


def select_excess_of_mass(tree: CondensedTree) -> None:
    """Mark selected clusters in place; the root is never a candidate here."""
    n_clusters = tree.parent.shape[0]
    subtree_stability = tree.stability.copy()
    tree.selected[:] = True
    tree.selected[0] = False
    for c in range(n_clusters - 1, 0, -1):
        if tree.children[c]:
            child_total = sum(subtree_stability[k] for k in tree.children[c])
            if tree.stability[c] >= child_total:
                subtree_stability[c] = tree.stability[c]
                _deselect_descendants(tree, c)
            else:
                subtree_stability[c] = child_total
                tree.selected[c] = False


def _deselect_descendants(tree: CondensedTree, cluster: int) -> None:
    stack = list(tree.children[cluster])
    while stack:
        c = stack.pop()
        tree.selected[c] = False
        stack.extend(tree.children[c])


def labels_from_tree(tree: CondensedTree, n: int) -> ClusterLabeling:
    def nearest_selected(cluster: int) -> int:
        walk = cluster
        while walk != -1 and not tree.selected[walk]:
            walk = tree.parent[walk]
        return walk

    raw = np.empty(n, dtype=int)
    for pt in range(n):
        raw[pt] = nearest_selected(tree.member_cluster[pt])

    chosen = [c for c in np.unique(raw) if c != -1]
    if not chosen:
        return ClusterLabeling(labels=np.full(n, -1), n_clusters=0,
                               stability=np.zeros(0))
    first_member = {c: int(np.flatnonzero(raw == c)[0]) for c in chosen}
    canonical = sorted(chosen, key=lambda c: first_member[c])
    remap = {c: i for i, c in enumerate(canonical)}
    labels = np.array([-1 if c == -1 else remap[c] for c in raw])
    return ClusterLabeling(labels=labels, n_clusters=len(canonical),
                           stability=tree.stability[np.array(canonical)])


def condensed_tree(X: np.ndarray, params: HdbscanParams) -> CondensedTree:
    """The condensed hierarchy with stabilities and selection applied."""
    params.validate()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n < 1:
        raise DataError("need at least one point")
    dist = pairwise_distances(X)
    core = core_distances(dist, params.effective_min_samples)
    mr = mutual_reachability(dist, core)
    mst = minimum_spanning_tree(mr)
    merges = single_linkage(mst, n)
    tree = condense(merges, n, params.min_cluster_size)
    select_excess_of_mass(tree)
    if not tree.children[0] and n >= params.min_cluster_size:
        # no split survived condensation: the whole dataset is one cluster
        tree.selected[0] = True
    return tree


def hdbscan(X: np.ndarray, params: HdbscanParams = HdbscanParams()) -> ClusterLabeling:
    """Cluster rows of X; label -1 marks noise."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    params.validate()
    if n < params.min_cluster_size:
        return ClusterLabeling(labels=np.full(n, -1), n_clusters=0,
                               stability=np.zeros(0))
    tree = condensed_tree(X, params)
    return labels_from_tree(tree, n)
