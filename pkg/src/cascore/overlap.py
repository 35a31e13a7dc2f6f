"""Threshold refinement of covers and a connected-components ego-split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .graph import Cover, Graph, as_cover
from .louvain import louvain
from .scores import ScoreKind, community_degrees, relative_volumes, score_from_counts

DEFAULT_TAU_GRID = (0.05, 0.075, 0.1, 0.15, 0.2, 0.25)


@dataclass(frozen=True)
class RefineConfig:
    kind: ScoreKind = ScoreKind.NIEF
    tau: float = 0.1
    min_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ScoreKind.parse(self.kind))
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.min_size < 1:
            raise ValueError("min_size must be at least 1")


def cover_scores(graph: Graph, cover, kind) -> sparse.csr_matrix:
    """Sparse ``n x k`` matrix of ``f(v, C_i)``; absent entries are zero."""
    cover = as_cover(cover, graph.n_nodes)
    degc = community_degrees(graph, cover).tocoo()
    w = relative_volumes(graph, cover)
    vals = score_from_counts(kind, degc.data, graph.degrees[degc.row], w[degc.col])
    return sparse.csr_matrix((np.ravel(vals), (degc.row, degc.col)), shape=degc.shape)


def refine_by_scores(scores: sparse.csr_matrix, tau: float, min_size: int = 1) -> Cover:
    """Admit ``v`` into refined community ``i`` when ``scores[v, i] >= tau``."""
    coo = scores.tocoo()
    keep = coo.data >= tau
    rows, cols = coo.row[keep], coo.col[keep]
    members = [[] for _ in range(scores.shape[1])]
    order = np.lexsort((rows, cols))
    for v, c in zip(rows[order].tolist(), cols[order].tolist()):
        members[c].append(v)
    if min_size > 1:
        members = [m if len(m) >= min_size else [] for m in members]
    return Cover(scores.shape[0], members)


def refine_cover(graph: Graph, cover, config: RefineConfig) -> Cover:
    """One pass of threshold refinement against the ORIGINAL communities.

    Community indexing is preserved; communities that fall below
    ``min_size`` are emptied rather than removed.
    """
    return refine_by_scores(cover_scores(graph, cover, config.kind), config.tau, config.min_size)


def refine_grid(graph: Graph, cover, kind, taus=DEFAULT_TAU_GRID, min_size: int = 1) -> list[tuple[float, Cover]]:
    scores = cover_scores(graph, cover, kind)
    return [(float(t), refine_by_scores(scores, t, min_size)) for t in taus]


def count_outliers(cover: Cover, graph: Graph | None = None) -> int:
    if graph is not None and graph.n_nodes != cover.n_nodes:
        raise ValueError("cover and graph disagree on the number of nodes")
    return int(np.sum(cover.membership_counts() == 0))


def personas(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Split each node by the connected components of its ego-net (ego removed).

    Returns ``(owner, persona_of_edge)``: ``owner[p]`` is the node behind
    persona ``p``, and ``persona_of_edge[e]`` is the persona of
    ``graph.indices`` entry ``e``'s source node that holds that edge.
    """
    n = graph.n_nodes
    adj = graph.adjacency()
    owner: list[int] = []
    persona_of_edge = np.empty(len(graph.indices), dtype=np.int64)
    for v in range(n):
        lo, hi = graph.indptr[v], graph.indptr[v + 1]
        nbrs = graph.indices[lo:hi]
        if len(nbrs) == 0:
            owner.append(v)
            continue
        sub = adj[nbrs][:, nbrs]
        k, comp = connected_components(sub, directed=False)
        base = len(owner)
        owner.extend([v] * k)
        persona_of_edge[lo:hi] = base + comp
    return np.array(owner, dtype=np.int64), persona_of_edge


def persona_graph(graph: Graph) -> tuple[Graph, np.ndarray]:
    owner, pe = personas(graph)
    rows = np.repeat(np.arange(graph.n_nodes), np.diff(graph.indptr))
    # the persona of the other endpoint that holds the reverse entry
    key_fwd = rows * graph.n_nodes + graph.indices
    key_rev = graph.indices * graph.n_nodes + rows
    order = np.argsort(key_fwd)
    rev_pos = order[np.searchsorted(key_fwd[order], key_rev)]
    a, b = pe, pe[rev_pos]
    keep = rows < graph.indices
    labels = [f"{graph.labels[o]}#{p}" for p, o in enumerate(owner.tolist())]
    return Graph(labels, a[keep], b[keep], graph.weights[keep]), owner


def ego_split(graph: Graph, seed: int = 0, min_size: int = 1) -> Cover:
    """Overlapping communities from Louvain on the persona graph."""
    pgraph, owner = persona_graph(graph)
    if pgraph.total_volume <= 0:
        communities = [[v] for v in range(graph.n_nodes)]
    else:
        part = louvain(pgraph, seed)
        communities = [np.unique(owner[members]) for members in part.communities()]
    return Cover(graph.n_nodes, communities).drop_small(min_size)
