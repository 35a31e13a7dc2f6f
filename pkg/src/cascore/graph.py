"""Undirected weighted graphs, partitions and covers.

Nodes carry opaque string labels externally and dense integer ids
internally. Adjacency is stored in CSR form with neighbours sorted by id,
so every traversal order is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse


class GraphFormatError(ValueError):
    """Raised when graph or community input is malformed."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class Graph:
    """Immutable simple undirected graph with non-negative edge weights."""

    def __init__(self, labels: Sequence[str], src, dst, weight=None):
        labels = tuple(str(x) for x in labels)
        n = len(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        if len(index) != n:
            raise GraphFormatError("node labels must be unique")
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if weight is None:
            weight = np.ones(len(src), dtype=np.float64)
        weight = np.asarray(weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(weight)):
            raise GraphFormatError("edge arrays differ in length")
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise GraphFormatError("edge endpoint out of range")
        if np.any(src == dst):
            raise GraphFormatError("self-loops are not allowed")
        if np.any(weight < 0) or not np.all(np.isfinite(weight)):
            raise GraphFormatError("edge weights must be finite and non-negative")
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        key = lo * max(n, 1) + hi
        if len(np.unique(key)) != len(key):
            raise GraphFormatError("duplicate edges are not allowed")

        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        vals = np.concatenate([weight, weight])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

        self.labels = labels
        self.index = index
        self.indptr = _frozen(indptr)
        self.indices = _frozen(cols)
        self.weights = _frozen(vals)
        self.degrees = _frozen(np.bincount(rows, weights=vals, minlength=n).astype(np.float64))
        self.total_volume = float(self.degrees.sum())

    # -- basic shape -----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def __len__(self) -> int:
        return self.n_nodes

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def _check(self, v: int) -> int:
        if not 0 <= int(v) < self.n_nodes:
            raise IndexError(f"invalid node id {v}")
        return int(v)

    def _check_set(self, nodes: Iterable[int]) -> np.ndarray:
        arr = np.fromiter((int(x) for x in nodes), dtype=np.int64)
        if len(arr) and (arr.min() < 0 or arr.max() >= self.n_nodes):
            raise IndexError("node set contains an invalid id")
        return np.unique(arr)

    def neighbors(self, v: int) -> np.ndarray:
        v = self._check(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        v = self._check(v)
        return self.weights[self.indptr[v]:self.indptr[v + 1]]

    def edges(self):
        """Return ``(src, dst, weight)`` arrays with ``src < dst``, sorted."""
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        keep = rows < self.indices
        return rows[keep], self.indices[keep], self.weights[keep]

    def adjacency(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.weights, self.indices, self.indptr),
                                 shape=(self.n_nodes, self.n_nodes))

    def with_weights(self, weight) -> "Graph":
        """Same topology, new weights aligned with :meth:`edges` order."""
        src, dst, _ = self.edges()
        return Graph(self.labels, src, dst, weight)

    # -- degree and volume primitives -----------------------------------

    def degree(self, v: int) -> float:
        return float(self.degrees[self._check(v)])

    def community_degree(self, v: int, community: Iterable[int]) -> float:
        """Total weight of edges joining ``v`` to nodes of ``community``."""
        v = self._check(v)
        members = self._check_set(community)
        nbrs = self.neighbors(v)
        mask = np.isin(nbrs, members, assume_unique=False)
        return float(self.neighbor_weights(v)[mask].sum())

    def volume(self, community: Iterable[int]) -> float:
        return float(self.degrees[self._check_set(community)].sum())

    def relative_volume(self, community: Iterable[int]) -> float:
        if self.total_volume <= 0:
            raise ValueError("relative volume is undefined on a graph with no edge weight")
        return self.volume(community) / self.total_volume

    # -- subgraphs --------------------------------------------------------

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        keep = self._check_set(nodes)
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        src, dst, w = self.edges()
        mask = (remap[src] >= 0) & (remap[dst] >= 0)
        return Graph([self.labels[i] for i in keep], remap[src[mask]], remap[dst[mask]], w[mask])

    def ego_net(self, v: int, include_ego: bool = True) -> "Graph":
        v = self._check(v)
        nodes = list(self.neighbors(v))
        if include_ego:
            nodes.append(v)
        return self.subgraph(nodes)


@dataclass(frozen=True)
class Partition:
    """Total assignment of every node to one community id in ``0..k-1``."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise ValueError("partition labels must be one-dimensional")
        if len(lab) and lab.min() < 0:
            raise ValueError("community ids must be non-negative")
        object.__setattr__(self, "labels", _frozen(lab))

    @classmethod
    def canonical(cls, labels) -> "Partition":
        """Relabel communities densely in order of first appearance."""
        lab = np.asarray(labels)
        _, first, inv = np.unique(lab, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        return cls(rank[inv.ravel()])

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_communities(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def communities(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.n_communities + 1))
        return [order[bounds[c]:bounds[c + 1]] for c in range(self.n_communities)]

    def to_cover(self) -> "Cover":
        return Cover(self.n_nodes, self.communities())

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())


class Cover:
    """A family of node sets over ``n_nodes`` nodes; overlaps and outliers allowed.

    Community ``i`` is ``communities[i]``, a sorted array of node ids.
    """

    def __init__(self, n_nodes: int, communities: Iterable[Iterable[int]]):
        self.n_nodes = int(n_nodes)
        comms = []
        for c in communities:
            arr = np.unique(np.fromiter((int(x) for x in c), dtype=np.int64))
            if len(arr) and (arr[0] < 0 or arr[-1] >= self.n_nodes):
                raise ValueError("cover references a node outside the graph")
            comms.append(_frozen(arr))
        self.communities = comms

    @classmethod
    def from_memberships(cls, memberships: Sequence[Iterable[int]], n_communities: int | None = None) -> "Cover":
        sets = [sorted(set(int(c) for c in m)) for m in memberships]
        k = max((s[-1] + 1 for s in sets if s), default=0)
        k = k if n_communities is None else max(k, n_communities)
        members: list[list[int]] = [[] for _ in range(k)]
        for v, s in enumerate(sets):
            for c in s:
                members[c].append(v)
        return cls(len(sets), members)

    @property
    def n_communities(self) -> int:
        return len(self.communities)

    def __len__(self) -> int:
        return len(self.communities)

    def memberships(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for c, members in enumerate(self.communities):
            for v in members:
                out[v].append(c)
        return out

    def membership_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_nodes, dtype=np.int64)
        for members in self.communities:
            counts[members] += 1
        return counts

    def indicator(self) -> sparse.csr_matrix:
        """Sparse ``n_nodes x n_communities`` 0/1 membership matrix."""
        if not self.communities:
            return sparse.csr_matrix((self.n_nodes, 0))
        rows = np.concatenate(self.communities)
        cols = np.repeat(np.arange(len(self.communities)), [len(c) for c in self.communities])
        return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)),
                                 shape=(self.n_nodes, len(self.communities)))

    def outliers(self) -> np.ndarray:
        return np.flatnonzero(self.membership_counts() == 0)

    def is_partition(self) -> bool:
        return bool(np.all(self.membership_counts() == 1))

    def to_partition(self) -> Partition:
        if not self.is_partition():
            raise ValueError("cover is not a partition")
        labels = np.empty(self.n_nodes, dtype=np.int64)
        for c, members in enumerate(self.communities):
            labels[members] = c
        return Partition(labels)

    def drop_small(self, min_size: int) -> "Cover":
        return Cover(self.n_nodes, [c for c in self.communities if len(c) >= min_size])

    def __eq__(self, other):
        return (isinstance(other, Cover) and self.n_nodes == other.n_nodes
                and len(self.communities) == len(other.communities)
                and all(np.array_equal(a, b) for a, b in zip(self.communities, other.communities)))

    def __repr__(self) -> str:
        return f"Cover(n_nodes={self.n_nodes}, n_communities={self.n_communities})"


def as_cover(communities, n_nodes: int | None = None) -> Cover:
    if isinstance(communities, Cover):
        return communities
    if isinstance(communities, Partition):
        return communities.to_cover()
    if n_nodes is None:
        raise TypeError("n_nodes is required when passing raw community lists")
    return Cover(n_nodes, communities)
