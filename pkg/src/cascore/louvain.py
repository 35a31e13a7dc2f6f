"""Modularity and the Louvain method (single level and multilevel).

The local-moving sweep runs under numba; everything else is numpy. A
sweep visits nodes in a freshly shuffled order drawn from a seeded
``numpy.random.Generator``, so a (graph, seed) pair always yields the same
partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy import sparse

from .graph import Graph, Partition

#: multilevel runs stop once a level improves modularity by no more than this
MIN_IMPROVEMENT = 1e-9
# gains are compared in units of edge weight; this guards against float ties
_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class _Level:
    """Weighted graph with self-loop weights, the working form of one level."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    loops: np.ndarray  # internal edge weight carried by each (super-)node

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def strength(self) -> np.ndarray:
        row = np.bincount(np.repeat(np.arange(self.n), np.diff(self.indptr)),
                          weights=self.weights, minlength=self.n)
        return row + 2.0 * self.loops

    @classmethod
    def from_graph(cls, graph: Graph) -> "_Level":
        return cls(graph.indptr, graph.indices, graph.weights, np.zeros(graph.n_nodes))

    def aggregate(self, comm: np.ndarray) -> "_Level":
        k = int(comm.max()) + 1
        adj = sparse.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))
        member = sparse.csr_matrix((np.ones(self.n), (np.arange(self.n), comm)), shape=(self.n, k))
        coarse = (member.T @ adj @ member).tocsr()
        coarse.sort_indices()
        diag = coarse.diagonal()
        loops = 0.5 * diag + np.bincount(comm, weights=self.loops, minlength=k)
        coarse = (coarse - sparse.diags(diag)).tocsr()
        coarse.eliminate_zeros()
        coarse.sort_indices()
        return _Level(coarse.indptr.astype(np.int64), coarse.indices.astype(np.int64),
                      coarse.data.astype(np.float64), loops)


@numba.njit(cache=True, nogil=True)
def _sweep(indptr, indices, weights, strength, m2, comm, tot, order, buf, touched):
    """One local-moving pass; returns the number of nodes that changed community."""
    moves = 0
    for idx in range(len(order)):
        i = order[idx]
        ci = comm[i]
        ki = strength[i]
        ntouched = 0
        for e in range(indptr[i], indptr[i + 1]):
            c = comm[indices[e]]
            if buf[c] < 0.0:
                buf[c] = 0.0
                touched[ntouched] = c
                ntouched += 1
            buf[c] += weights[e]
        tot[ci] -= ki
        own = buf[ci] if buf[ci] > 0.0 else 0.0
        best = ci
        best_gain = own - ki * tot[ci] / m2
        for t in range(ntouched):
            c = touched[t]
            gain = buf[c] - ki * tot[c] / m2
            if gain > best_gain + _GAIN_EPS:
                best_gain = gain
                best = c
        tot[best] += ki
        if best != ci:
            comm[i] = best
            moves += 1
        for t in range(ntouched):
            buf[touched[t]] = -1.0
    return moves


def _local_moving(level: _Level, rng: np.random.Generator, max_sweeps: int | None = None) -> np.ndarray:
    n = level.n
    strength = level.strength
    m2 = float(strength.sum())
    if m2 <= 0:
        raise ValueError("modularity is undefined on a graph without edge weight")
    comm = np.arange(n, dtype=np.int64)
    tot = strength.copy()
    buf = np.full(n, -1.0)
    touched = np.empty(n, dtype=np.int64)
    sweeps = 0
    while True:
        order = rng.permutation(n).astype(np.int64)
        moved = _sweep(level.indptr, level.indices, level.weights, strength, m2, comm, tot,
                       order, buf, touched)
        sweeps += 1
        if moved == 0 or (max_sweeps is not None and sweeps >= max_sweeps):
            break
    return Partition.canonical(comm).labels


def _level_modularity(level: _Level, comm: np.ndarray) -> float:
    strength = level.strength
    m2 = strength.sum()
    rows = np.repeat(np.arange(level.n), np.diff(level.indptr))
    same = comm[rows] == comm[level.indices]
    k = int(comm.max()) + 1
    internal = level.weights[same].sum() + 2.0 * level.loops.sum()
    vol = np.bincount(comm, weights=strength, minlength=k)
    return float(internal / m2 - np.sum((vol / m2) ** 2))


def modularity(graph: Graph, partition: Partition) -> float:
    """Newman modularity at resolution 1."""
    if graph.total_volume <= 0:
        raise ValueError("modularity is undefined on a graph without edge weight")
    labels = np.asarray(partition.labels)
    if len(labels) != graph.n_nodes:
        raise ValueError("partition does not match graph size")
    return _level_modularity(_Level.from_graph(graph), labels)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.uint64(int(seed) % 2**64))


def louvain_level1(graph: Graph, seed: int = 0, max_sweeps: int | None = None) -> Partition:
    """First Louvain level: local moving from singletons until no node moves."""
    if graph.total_volume <= 0:
        raise ValueError("modularity is undefined on a graph without edge weight")
    return Partition(_local_moving(_Level.from_graph(graph), _rng(seed), max_sweeps))


def louvain_levels(graph: Graph, seed: int = 0) -> list[Partition]:
    """Flattened partition after each accepted level of multilevel Louvain."""
    if graph.total_volume <= 0:
        raise ValueError("modularity is undefined on a graph without edge weight")
    rng = _rng(seed)
    level = _Level.from_graph(graph)
    flat = np.arange(graph.n_nodes)
    out: list[Partition] = []
    current_q = _level_modularity(level, np.arange(level.n))
    while True:
        comm = _local_moving(level, rng)
        q = _level_modularity(level, comm)
        k = int(comm.max()) + 1
        if out and (k == level.n or q - current_q <= MIN_IMPROVEMENT):
            break
        flat = comm[flat]
        out.append(Partition.canonical(flat))
        if k == level.n or q - current_q <= MIN_IMPROVEMENT:
            break
        current_q = q
        level = level.aggregate(comm)
    return out


def louvain(graph: Graph, seed: int = 0) -> Partition:
    """Multilevel Louvain; returns the partition of the last improving level."""
    return louvain_levels(graph, seed)[-1]
