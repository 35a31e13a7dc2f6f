"""Community association strength (CAS) scores.

Three scores map a node ``v`` and a node set ``C`` into [0, 1]:

* IEF, the fraction of ``v``'s degree that lands in ``C``;
* NIEF, IEF minus the relative volume of ``C``, floored at zero;
* P, the binomial CDF ``F(deg_C(v) - 1; deg(v), w(C))``.

Nodes without edges score 0 everywhere. The P score rounds weighted
degrees to the nearest integer since the binomial needs integer trials.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np
from scipy import sparse

from .graph import Graph, as_cover


class ScoreKind(str, enum.Enum):
    IEF = "ief"
    NIEF = "nief"
    P = "p"

    @classmethod
    def parse(cls, value) -> "ScoreKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown score kind {value!r}; expected one of ief, nief, p") from None


# -- binomial CDF -----------------------------------------------------------

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@numba.njit(cache=True, nogil=True)
def _stirlerr(n):
    # log(n!) - log(sqrt(2 pi n) (n/e)^n)
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _HALF_LOG_2PI
    nn = n * n
    s0, s1, s2, s3, s4 = 1.0 / 12, 1.0 / 360, 1.0 / 1260, 1.0 / 1680, 1.0 / 1188
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


@numba.njit(cache=True, nogil=True)
def _bd0(x, m):
    # x log(x/m) + m - x, without cancellation when x is near m
    if abs(x - m) < 0.1 * (x + m):
        v = (x - m) / (x + m)
        s = (x - m) * v
        ej = 2.0 * x * v
        v = v * v
        j = 1
        while True:
            ej *= v
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / m) + m - x


@numba.njit(cache=True, nogil=True)
def _binom_pmf(x, n, p):
    """Saddle-point binomial pmf (Loader 2000), relative error near 1e-15."""
    q = 1.0 - p
    if x == 0:
        return math.exp(n * math.log1p(-p))
    if x == n:
        return math.exp(n * math.log(p))
    lc = (_stirlerr(float(n)) - _stirlerr(float(x)) - _stirlerr(float(n - x))
          - _bd0(float(x), n * p) - _bd0(float(n - x), n * q))
    lf = 2.0 * _HALF_LOG_2PI + math.log(float(x)) + math.log1p(-x / n)
    return math.exp(lc - 0.5 * lf)


@numba.njit(cache=True, nogil=True)
def _binom_cdf(k, n, p):
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    ratio = p / (1.0 - p)
    # sum the tail on the far side of the mean, walking away from it;
    # terms shrink geometrically so the loop stops early
    if k < n * p:
        i = k
        term = _binom_pmf(i, n, p)
        total = term
        while i > 0 and term > total * 1e-18:
            term *= i / ((n - i + 1) * ratio)
            i -= 1
            total += term
    else:
        i = k + 1
        term = _binom_pmf(i, n, p)
        total = term
        while i < n and term > total * 1e-18:
            term *= (n - i) * ratio / (i + 1)
            i += 1
            total += term
        total = 1.0 - total
    if total < 0.0:
        return 0.0
    if total > 1.0:
        return 1.0
    return total


@numba.njit(cache=True, nogil=True)
def _binom_cdf_many(k, n, p, out):
    for i in range(len(k)):
        out[i] = _binom_cdf(k[i], n[i], p[i])
    return out


def binomial_cdf(k: int, n: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(n, p)."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError(f"number of trials must be non-negative, got {n}")
    return float(_binom_cdf(int(k), int(n), float(p)))


def _round_half_up(x):
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(np.int64)


def p_from_counts(deg_c, deg, w) -> np.ndarray:
    """Vectorized P score from (community degree, degree, relative volume)."""
    deg_c, deg, w = np.broadcast_arrays(_round_half_up(deg_c), _round_half_up(deg),
                                        np.clip(np.asarray(w, dtype=np.float64), 0.0, 1.0))
    out = np.empty(deg_c.size, dtype=np.float64)
    _binom_cdf_many(np.ascontiguousarray(deg_c - 1).ravel(), np.ascontiguousarray(deg).ravel(),
                    np.ascontiguousarray(w).ravel(), out)
    out[deg.ravel() <= 0] = 0.0
    return out.reshape(deg_c.shape)


def ief_from_counts(deg_c, deg) -> np.ndarray:
    deg_c = np.asarray(deg_c, dtype=np.float64)
    deg = np.asarray(deg, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(deg > 0, deg_c / np.where(deg > 0, deg, 1.0), 0.0)
    return np.clip(out, 0.0, 1.0)


def nief_from_counts(deg_c, deg, w) -> np.ndarray:
    return np.maximum(ief_from_counts(deg_c, deg) - np.asarray(w, dtype=np.float64), 0.0)


def score_from_counts(kind: ScoreKind, deg_c, deg, w) -> np.ndarray:
    kind = ScoreKind.parse(kind)
    if kind is ScoreKind.IEF:
        return ief_from_counts(deg_c, deg)
    if kind is ScoreKind.NIEF:
        return nief_from_counts(deg_c, deg, w)
    return p_from_counts(deg_c, deg, w)


# -- single (node, set) scores ------------------------------------------------

def _counts(graph: Graph, v: int, community: Iterable[int]):
    members = list(community)
    deg_c = graph.community_degree(v, members)
    deg = graph.degree(v)
    w = graph.relative_volume(members) if graph.total_volume > 0 else 0.0
    return deg_c, deg, w


def ief(graph: Graph, v: int, community: Iterable[int]) -> float:
    deg_c, deg, _ = _counts(graph, v, community)
    return float(ief_from_counts(deg_c, deg))


def nief(graph: Graph, v: int, community: Iterable[int]) -> float:
    return float(nief_from_counts(*_counts(graph, v, community)))


def p_score(graph: Graph, v: int, community: Iterable[int]) -> float:
    return float(p_from_counts(*_counts(graph, v, community)))


def score(graph: Graph, v: int, community: Iterable[int], kind) -> float:
    return float(score_from_counts(kind, *_counts(graph, v, community)))


# -- batch evaluation ---------------------------------------------------------

def community_degrees(graph: Graph, communities) -> sparse.csr_matrix:
    """Sparse ``n x k`` matrix of ``deg_C(v)`` for every node and community."""
    cover = as_cover(communities, graph.n_nodes)
    return (graph.adjacency() @ cover.indicator()).tocsr()


def relative_volumes(graph: Graph, communities) -> np.ndarray:
    cover = as_cover(communities, graph.n_nodes)
    if graph.total_volume <= 0:
        return np.zeros(cover.n_communities)
    vols = np.array([graph.degrees[c].sum() for c in cover.communities], dtype=np.float64)
    return vols / graph.total_volume


@dataclass
class ScoreTable:
    """Rows of (node, community, ief, nief, p), sorted by (node, community)."""

    node: np.ndarray
    community: np.ndarray
    ief: np.ndarray
    nief: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.node)

    def column(self, kind) -> np.ndarray:
        return getattr(self, ScoreKind.parse(kind).value)

    def rows(self):
        return zip(self.node.tolist(), self.community.tolist(),
                   self.ief.tolist(), self.nief.tolist(), self.p.tolist())

    def select(self, mask) -> "ScoreTable":
        return ScoreTable(*(a[mask] for a in (self.node, self.community, self.ief, self.nief, self.p)))

    def top(self, n: int, kind) -> "ScoreTable":
        """Keep each node's ``n`` best rows under ``kind`` (ties by community id)."""
        col = self.column(kind)
        order = np.lexsort((self.community, -col, self.node))
        node_sorted = self.node[order]
        starts = np.searchsorted(node_sorted, node_sorted, side="left")
        rank = np.arange(len(order)) - starts
        keep = np.sort(order[rank < n])
        return self.select(keep)

    def to_csv(self, labels=None) -> str:
        buf = io.StringIO()
        buf.write("node,community,ief,nief,p\n")
        for v, c, a, b, d in self.rows():
            name = labels[v] if labels is not None else v
            buf.write(f"{name},{c},{a:.6f},{b:.6f},{d:.6f}\n")
        return buf.getvalue()


def score_all(graph: Graph, communities) -> ScoreTable:
    """Score every (node, community) pair touched by an edge or a membership."""
    cover = as_cover(communities, graph.n_nodes)
    if cover.n_communities == 0:
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0)
        return ScoreTable(empty_i, empty_i, empty_f, empty_f, empty_f)
    degc = community_degrees(graph, cover)
    member = cover.indicator()
    pattern = (degc != 0).astype(np.int8) + (member != 0).astype(np.int8)
    pattern = pattern.tocoo()
    order = np.lexsort((pattern.col, pattern.row))
    node = pattern.row[order].astype(np.int64)
    comm = pattern.col[order].astype(np.int64)
    dc = np.asarray(degc[node, comm]).ravel()
    deg = graph.degrees[node]
    w = relative_volumes(graph, cover)[comm]
    return ScoreTable(node, comm, ief_from_counts(dc, deg), nief_from_counts(dc, deg, w),
                      p_from_counts(dc, deg, w))


def node_scores(graph: Graph, v: int, communities, kind) -> np.ndarray:
    """Scores of node ``v`` against every community of the collection."""
    cover = as_cover(communities, graph.n_nodes)
    v = graph._check(v)
    comm_of = cover.indicator()
    nbrs, wts = graph.neighbors(v), graph.neighbor_weights(v)
    deg_c = np.asarray(comm_of[nbrs].T @ wts).ravel() if len(nbrs) else np.zeros(cover.n_communities)
    w = relative_volumes(graph, cover)
    return score_from_counts(kind, deg_c, np.full(cover.n_communities, graph.degrees[v]), w)


def rank_communities(graph: Graph, v: int, communities, kind) -> list[tuple[int, float]]:
    """Communities ordered by score descending, ties by ascending id."""
    s = node_scores(graph, v, communities, kind)
    order = np.lexsort((np.arange(len(s)), -s))
    return [(int(c), float(s[c])) for c in order]


def max_score(graph: Graph, v: int, communities, kind) -> tuple[int, float]:
    cover = as_cover(communities, graph.n_nodes)
    if cover.n_communities == 0:
        raise ValueError("cannot take a maximum over an empty community collection")
    return rank_communities(graph, v, cover, kind)[0]


def max_scores(graph: Graph, communities, kind) -> tuple[np.ndarray, np.ndarray]:
    """Per-node best community and its score (ties by smallest id).

    Nodes whose scores are all zero report community 0 with score 0.
    """
    cover = as_cover(communities, graph.n_nodes)
    if cover.n_communities == 0:
        raise ValueError("cannot take a maximum over an empty community collection")
    table = score_all(graph, cover)
    col = table.column(kind)
    best_c = np.zeros(graph.n_nodes, dtype=np.int64)
    best_s = np.zeros(graph.n_nodes)
    order = np.lexsort((table.community, -col, table.node))
    node_sorted = table.node[order]
    first = order[np.r_[True, node_sorted[1:] != node_sorted[:-1]]] if len(order) else order
    hit = col[first] > 0
    best_c[table.node[first][hit]] = table.community[first][hit]
    best_s[table.node[first][hit]] = col[first][hit]
    return best_c, best_s
