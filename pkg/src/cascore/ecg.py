"""Ensemble clustering for graphs (ECG) and its CAS-weighted variants.

``k`` level-1 Louvain runs produce an ensemble of partitions. Every edge
is then reweighted by how strongly the ensemble ties its endpoints
together, and a final multilevel Louvain runs on the reweighted graph.

With scheme ``ecg`` the tie strength is the co-membership indicator. With
``or`` and ``and`` it combines the CAS scores ``f(u, C_v)`` and
``f(v, C_u)`` by a probabilistic OR or a product.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition
from .louvain import louvain, louvain_level1
from .scores import ScoreKind, score_from_counts


class Scheme(str, enum.Enum):
    ECG = "ecg"
    OR = "or"
    AND = "and"


@dataclass(frozen=True)
class EcgConfig:
    k: int = 16
    scheme: Scheme = Scheme.ECG
    kind: ScoreKind = ScoreKind.P
    floor: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(str(getattr(self.scheme, "value", self.scheme)).lower()))
        object.__setattr__(self, "kind", ScoreKind.parse(self.kind))
        if self.k < 1:
            raise ValueError("ensemble size k must be at least 1")
        if not 0.0 <= self.floor < 1.0:
            raise ValueError("weight floor must lie in [0, 1)")


def ecg_indicator(partition: Partition, u: int, v: int) -> int:
    return int(partition.labels[u] == partition.labels[v])


def f_or(a, b):
    return a + b - a * b


def f_and(a, b):
    return a * b


def ensemble(graph: Graph, k: int, seed: int, threads: int = 1) -> list[Partition]:
    """``k`` level-1 partitions with seeds ``seed + i``, in run order."""
    seeds = [seed + i for i in range(k)]
    if threads > 1 and k > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda s: louvain_level1(graph, s), seeds))
    return [louvain_level1(graph, s) for s in seeds]


def cross_scores(graph: Graph, partition: Partition, kind) -> tuple[np.ndarray, np.ndarray]:
    """For each edge ``(u, v)`` of ``graph.edges()``: ``f(u, C_v)`` and ``f(v, C_u)``."""
    src, dst, w = graph.edges()
    labels = partition.labels
    k = int(labels.max()) + 1
    # deg_C(x) for every (node, community) pair touched by an edge
    rows = np.repeat(np.arange(graph.n_nodes), np.diff(graph.indptr))
    key = rows * k + labels[graph.indices]
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv.ravel(), weights=graph.weights)
    vol = np.bincount(labels, weights=graph.degrees, minlength=k)
    rel = vol / graph.total_volume

    def lookup(x, c):
        pos = np.searchsorted(uniq, x * k + c)
        return sums[pos]

    deg = graph.degrees
    f_u = score_from_counts(kind, lookup(src, labels[dst]), deg[src], rel[labels[dst]])
    f_v = score_from_counts(kind, lookup(dst, labels[src]), deg[dst], rel[labels[src]])
    return np.asarray(f_u, dtype=np.float64), np.asarray(f_v, dtype=np.float64)


def raw_weights(graph: Graph, partitions: list[Partition], scheme=Scheme.ECG, kind=ScoreKind.P) -> np.ndarray:
    """Mean per-edge tie strength over the ensemble, aligned with ``graph.edges()``."""
    scheme = Scheme(getattr(scheme, "value", scheme))
    src, dst, _ = graph.edges()
    total = np.zeros(len(src))
    for part in partitions:
        if part.n_nodes != graph.n_nodes:
            raise ValueError("partition does not cover every node of the graph")
        if scheme is Scheme.ECG:
            total += part.labels[src] == part.labels[dst]
        else:
            a, b = cross_scores(graph, part, kind)
            total += f_or(a, b) if scheme is Scheme.OR else f_and(a, b)
    return total / len(partitions)


def edge_weights(graph: Graph, partitions: list[Partition], config: EcgConfig) -> Graph:
    """Reweighted copy of ``graph`` with weights ``floor + (1 - floor) * raw`` in [floor, 1]."""
    if len(partitions) != config.k:
        raise ValueError(f"expected {config.k} partitions, got {len(partitions)}")
    raw = np.clip(raw_weights(graph, partitions, config.scheme, config.kind), 0.0, 1.0)
    return graph.with_weights(config.floor + (1.0 - config.floor) * raw)


def cas_ecg(graph: Graph, config: EcgConfig, threads: int = 1, return_weighted: bool = False):
    parts = ensemble(graph, config.k, config.seed, threads)
    weighted = edge_weights(graph, parts, config)
    result = louvain(weighted, config.seed)
    return (result, weighted) if return_weighted else result
