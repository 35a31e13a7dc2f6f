"""Similarity metrics for partitions and covers, ROC analysis, and the two
score-quality experiments (community ranking and outlier detection)."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import sparse

from .graph import Graph, Partition, as_cover
from .scores import ScoreKind, community_degrees, max_scores, relative_volumes, score_from_counts


# -- adjusted mutual information -------------------------------------------------

def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ai, bi = ai.ravel(), bi.ravel()
    m = sparse.coo_matrix((np.ones(len(ai)), (ai, bi)), shape=(ai.max() + 1, bi.max() + 1))
    return m.toarray()


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


@numba.njit(cache=True)
def _expected_mi(a, b, n):
    lg = np.empty(n + 2)
    for i in range(n + 2):
        lg[i] = math.lgamma(i + 1.0)  # lg[i] = log(i!)
    emi = 0.0
    for i in range(len(a)):
        for j in range(len(b)):
            ai = a[i]
            bj = b[j]
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            base = lg[ai] + lg[bj] + lg[n - ai] + lg[n - bj] - lg[n]
            for nij in range(lo, hi + 1):
                term = nij / n * (math.log(n * nij) - math.log(ai * bj))
                logp = base - lg[nij] - lg[ai - nij] - lg[bj - nij] - lg[n - ai - bj + nij]
                emi += term * math.exp(logp)
    return emi


def mutual_information(p1, p2) -> float:
    table = _contingency(_labels(p1), _labels(p2))
    n = table.sum()
    pij = table[table > 0] / n
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    rows, cols = np.nonzero(table)
    return float((pij * (np.log(pij) - np.log(pi[rows]) - np.log(pj[cols]))).sum())


def _labels(p) -> np.ndarray:
    return np.asarray(p.labels if isinstance(p, Partition) else p)


def ami(p1, p2) -> float:
    """Adjusted mutual information with arithmetic-mean normalization.

    Comparisons where either side has a single community return 0.
    """
    a, b = _labels(p1), _labels(p2)
    if len(a) != len(b):
        raise ValueError("partitions cover different node sets")
    table = _contingency(a, b)
    if table.shape[0] < 2 or table.shape[1] < 2:
        return 0.0
    n = int(table.sum())
    rs = table.sum(axis=1).astype(np.int64)
    cs = table.sum(axis=0).astype(np.int64)
    mi = mutual_information(a, b)
    emi = _expected_mi(rs, cs, n)
    h = 0.5 * (_entropy(rs) + _entropy(cs))
    denom = h - emi
    if abs(denom) < 1e-15:
        return 1.0 if abs(mi - h) < 1e-12 else 0.0
    return float((mi - emi) / denom)


# -- overlapping NMI ----------------------------------------------------------------

def _h(p):
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def _conditional_entropies(x: sparse.csr_matrix, y: sparse.csr_matrix, n: int):
    """``H(X_k | Y)`` for each column ``k`` of ``x`` (best valid match in ``y``)."""
    sx = np.asarray(x.sum(axis=0)).ravel()
    sy = np.asarray(y.sum(axis=0)).ravel()
    both = (x.T @ y).toarray()
    p11 = both / n
    p10 = (sx[:, None] - both) / n
    p01 = (sy[None, :] - both) / n
    p00 = 1.0 - p11 - p10 - p01
    hx = _h(sx / n) + _h(1 - sx / n)
    hy = _h(sy / n) + _h(1 - sy / n)
    joint = _h(p11) + _h(p10) + _h(p01) + _h(p00)
    cond = joint - hy[None, :]
    valid = _h(p11) + _h(p00) >= _h(p01) + _h(p10)
    cond = np.where(valid, cond, np.inf)
    best = cond.min(axis=1) if cond.shape[1] else np.full(len(hx), np.inf)
    best = np.where(np.isfinite(best), np.minimum(best, hx), hx)
    return best, hx


def onmi(a, b, n_nodes: int | None = None, variant: str = "max") -> float:
    """Overlapping NMI between two covers.

    ``variant="max"`` gives the mutual information normalized by the larger
    cover entropy; ``variant="lfk"`` averages the per-community normalized
    conditional entropies instead.
    """
    a = as_cover(a, n_nodes)
    b = as_cover(b, n_nodes)
    if a.n_nodes != b.n_nodes:
        raise ValueError("covers are defined over different node sets")
    if a.n_communities == 0 or b.n_communities == 0:
        raise ValueError("oNMI is undefined for a cover with no communities")
    n = a.n_nodes
    xa = a.indicator().tocsc()
    xb = b.indicator().tocsc()
    hab, ha = _conditional_entropies(xa, xb, n)
    hba, hb = _conditional_entropies(xb, xa, n)
    if variant == "max":
        total_a, total_b = ha.sum(), hb.sum()
        if max(total_a, total_b) <= 0:
            return 1.0 if a == b else 0.0
        mi = 0.5 * (total_a - hab.sum() + total_b - hba.sum())
        return float(np.clip(mi / max(total_a, total_b), 0.0, 1.0))
    if variant == "lfk":
        ra = np.where(ha > 0, hab / np.where(ha > 0, ha, 1.0), 0.0)
        rb = np.where(hb > 0, hba / np.where(hb > 0, hb, 1.0), 0.0)
        return float(np.clip(1.0 - 0.5 * (ra.mean() + rb.mean()), 0.0, 1.0))
    raise ValueError(f"unknown oNMI variant {variant!r}")


# -- ROC ------------------------------------------------------------------------

@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("fpr,tpr\n")
        for x, y in self.points:
            buf.write(f"{x:.6f},{y:.6f}\n")
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps({"auc": round(self.auc, 12)}, sort_keys=True) + "\n"


def roc(scores, labels) -> RocCurve:
    """ROC for outlier prediction where a LOW score predicts an outlier.

    ``labels`` is truthy for outliers. Equal scores form a single step, so
    the area equals the Mann-Whitney statistic with ties counted as 1/2.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if len(s) != len(y):
        raise ValueError("scores and labels differ in length")
    pos, neg = int(y.sum()), int((~y).sum())
    if pos == 0 or neg == 0:
        raise ValueError("ROC needs at least one outlier and one normal node")
    order = np.argsort(s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last]
    fp = np.cumsum(~y)[last]
    tpr = np.r_[0.0, tp / pos]
    fpr = np.r_[0.0, fp / neg]
    return RocCurve(fpr, tpr, roc_area(fpr, tpr))


def roc_area(fpr, tpr) -> float:
    """Trapezoidal area under a curve given by ordered points."""
    fpr, tpr = np.asarray(fpr, dtype=np.float64), np.asarray(tpr, dtype=np.float64)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


# -- score-quality experiments ----------------------------------------------------

def k_rank_accuracy(graph: Graph, truth, kind) -> dict[int, tuple[float, int]]:
    """For each K, the share of nodes with at least K true memberships whose
    K-th ranked community (by ``kind``) truly contains them.

    Returns ``{K: (proportion, count)}``. Nodes without edges are skipped.
    """
    cover = as_cover(truth, graph.n_nodes)
    kind = ScoreKind.parse(kind)
    degc = community_degrees(graph, cover).tocsr()
    rel = relative_volumes(graph, cover)
    memberships = cover.memberships()
    n_comm = cover.n_communities
    hits: dict[int, list[int]] = {}
    for v in range(graph.n_nodes):
        mine = memberships[v]
        if not mine or graph.degrees[v] <= 0:
            continue
        row = degc.getrow(v)
        cand = row.indices
        s = score_from_counts(kind, row.data, np.full(len(cand), graph.degrees[v]), rel[cand])
        s = np.ravel(s)
        pos = s > 0
        cand, s = cand[pos], s[pos]
        ranked = cand[np.lexsort((cand, -s))]
        mine_set = set(mine)
        zero_tail = None
        for k in range(1, len(mine) + 1):
            if k <= len(ranked):
                c = int(ranked[k - 1])
            else:
                if zero_tail is None:
                    zero_tail = np.setdiff1d(np.arange(n_comm), ranked, assume_unique=True)
                idx = k - len(ranked) - 1
                c = int(zero_tail[idx]) if idx < len(zero_tail) else -1
            hits.setdefault(k, [0, 0])
            hits[k][0] += c in mine_set
            hits[k][1] += 1
    return {k: (h / c, c) for k, (h, c) in sorted(hits.items())}


def k_rank_csv(acc: dict[int, tuple[float, int]]) -> str:
    return "K,proportion,count\n" + "".join(f"{k},{p:.6f},{c}\n" for k, (p, c) in acc.items())


def outlier_experiment(graph: Graph, found: Partition, true_outliers, kind) -> RocCurve:
    _, best = max_scores(graph, found, kind)
    labels = np.zeros(graph.n_nodes, dtype=bool)
    labels[np.asarray(list(true_outliers), dtype=np.int64)] = True
    return roc(best, labels)
