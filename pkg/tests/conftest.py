from pathlib import Path

import numpy as np
import pytest

from cascore.graph import Cover, Graph
from cascore.io import load_edge_list

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"


def graph_from_pairs(pairs, n=None, weights=None):
    """Graph on labels '0'..'n-1' from integer pairs."""
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    src = [a for a, _ in pairs]
    dst = [b for _, b in pairs]
    return Graph([str(i) for i in range(n)], src, dst, weights)


@pytest.fixture
def two_triangles():
    return load_edge_list("a b\nb c\na c\nd e\ne f\nd f\n")


@pytest.fixture
def two_triangle_cover():
    return Cover(6, [[0, 1, 2], [3, 4, 5]])


def random_graph(rng, n, p):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph([str(i) for i in range(n)], iu[keep], ju[keep])


def disjoint_cliques(sizes):
    pairs, offset = [], 0
    for s in sizes:
        pairs += [(offset + i, offset + j) for i in range(s) for j in range(i + 1, s)]
        offset += s
    return graph_from_pairs(pairs, n=offset)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            found = [v for k, v in rep.user_properties if k == "acceptance"]
            lines += found or [f"FAIL  {rep.nodeid.split('::')[-1]}: raised before reaching a verdict"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda x: x.split(None, 1)[1]):
            terminalreporter.write_line(line)
