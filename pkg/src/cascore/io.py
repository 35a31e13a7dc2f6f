"""Text formats for graphs, partitions, covers and node lists.

Edge list: ``u v [w]`` per line, ``#`` starts a comment, ``w`` defaults
to 1. A line holding a single label declares a node, which stays isolated
unless a later line gives it edges.
Partition: ``node community`` per line.
Cover: ``node<TAB>id1,id2,...`` per line, ``-`` for no membership.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .graph import Cover, Graph, GraphFormatError, Partition


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_edge_list(text: str) -> Graph:
    index: dict[str, int] = {}
    seen: dict[tuple[int, int], int] = {}
    src, dst, wts = [], [], []

    def intern(label: str) -> int:
        if label not in index:
            index[label] = len(index)
        return index[label]

    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) == 1:
            intern(parts[0])
            continue
        if len(parts) > 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        if parts[0] == parts[1]:
            raise GraphFormatError(f"line {lineno}: self-loop on {parts[0]!r}")
        try:
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise GraphFormatError(f"line {lineno}: bad weight {parts[2]!r}") from None
        if not math.isfinite(w) or w < 0:
            raise GraphFormatError(f"line {lineno}: negative or non-finite weight {parts[2]!r}")
        u, v = intern(parts[0]), intern(parts[1])
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(
                f"line {lineno}: duplicate edge {parts[0]} {parts[1]} (first seen on line {seen[key]})")
        seen[key] = lineno
        src.append(u)
        dst.append(v)
        wts.append(w)
    return Graph(list(index), src, dst, wts)


def read_edge_list(path) -> Graph:
    return load_edge_list(Path(path).read_text(encoding="utf-8"))


def dump_edge_list(graph: Graph, weights: bool | None = None, decimals: int = 6) -> str:
    """Serialize ``graph``; weights are written when not all equal to 1.

    Lines are ordered so that reloading assigns the same dense ids: edges
    are grouped by their higher endpoint, and a node with no lower-indexed
    neighbour is declared on its own line first.
    """
    src, dst, w = graph.edges()
    if weights is None:
        weights = bool(np.any(w != 1.0))
    order = np.lexsort((src, dst))
    src, dst, w = src[order], dst[order], w[order]
    starts = np.searchsorted(dst, np.arange(graph.n_nodes + 1))
    labels = graph.labels
    out = []
    for v in range(graph.n_nodes):
        lo, hi = starts[v], starts[v + 1]
        if lo == hi:
            out.append(labels[v])
        for a, x in zip(src[lo:hi], w[lo:hi]):
            line = f"{labels[a]} {labels[v]}"
            out.append(f"{line} {x:.{decimals}f}" if weights else line)
    return "".join(line + "\n" for line in out)


def _community_key(token: str):
    try:
        return (0, int(token), token)
    except ValueError:
        return (1, 0, token)


def _lookup(index: Mapping[str, int], label: str, lineno: int) -> int:
    try:
        return index[label]
    except KeyError:
        raise GraphFormatError(f"line {lineno}: unknown node {label!r}") from None


def load_partition(text: str, index: Mapping[str, int]) -> Partition:
    """Parse a partition file; every node of ``index`` must appear exactly once.

    Community tokens are mapped to dense ids in sorted order (numerically
    when they are integers).
    """
    assigned: dict[int, str] = {}
    for lineno, line in _lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'node community', got {line!r}")
        v = _lookup(index, parts[0], lineno)
        if v in assigned:
            raise GraphFormatError(f"line {lineno}: node {parts[0]!r} assigned twice")
        assigned[v] = parts[1]
    missing = len(index) - len(assigned)
    if missing:
        raise GraphFormatError(f"partition leaves {missing} node(s) unassigned")
    tokens = sorted(set(assigned.values()), key=_community_key)
    ids = {t: i for i, t in enumerate(tokens)}
    labels = np.empty(len(index), dtype=np.int64)
    for v, t in assigned.items():
        labels[v] = ids[t]
    return Partition(labels)


def dump_partition(partition: Partition, labels) -> str:
    return "".join(f"{labels[v]} {c}\n" for v, c in enumerate(partition.labels))


def load_cover(text: str, index: Mapping[str, int]) -> Cover:
    """Parse a cover file. Nodes not listed have no membership."""
    memberships: dict[int, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'node<TAB>ids', got {line!r}")
        v = _lookup(index, parts[0], lineno)
        if v in memberships:
            raise GraphFormatError(f"line {lineno}: node {parts[0]!r} listed twice")
        field = parts[1].strip()
        memberships[v] = [] if field == "-" else [t.strip() for t in field.split(",") if t.strip()]
    tokens = sorted({t for ts in memberships.values() for t in ts}, key=_community_key)
    ids = {t: i for i, t in enumerate(tokens)}
    members: list[list[int]] = [[] for _ in tokens]
    for v, ts in memberships.items():
        for t in ts:
            members[ids[t]].append(v)
    return Cover(len(index), members)


def dump_cover(cover: Cover, labels) -> str:
    out = []
    for v, ms in enumerate(cover.memberships()):
        out.append(f"{labels[v]}\t{','.join(map(str, ms)) if ms else '-'}\n")
    return "".join(out)


def load_node_list(text: str, index: Mapping[str, int]) -> np.ndarray:
    nodes = set()
    for lineno, line in _lines(text):
        for token in line.split():
            nodes.add(_lookup(index, token, lineno))
    return np.array(sorted(nodes), dtype=np.int64)


def dump_node_list(nodes, labels) -> str:
    return "".join(f"{labels[v]}\n" for v in sorted(int(x) for x in nodes))


def label_index(*texts: str, cover: bool = False) -> dict[str, int]:
    """Collect node labels from partition/cover files into a sorted index."""
    labels = set()
    for text in texts:
        for _, line in _lines(text):
            parts = line.split(None, 1) if cover else line.split()
            if parts:
                labels.add(parts[0])
    return {lab: i for i, lab in enumerate(sorted(labels))}
