import numpy as np
import pytest

from cascore.benchgen import GenConfig, generate
from cascore.graph import Cover
from cascore.io import load_edge_list
from cascore.overlap import (DEFAULT_TAU_GRID, RefineConfig, count_outliers, cover_scores, ego_split, persona_graph,
                             personas, refine_by_scores, refine_cover, refine_grid)

from conftest import disjoint_cliques, random_graph

BRIDGE = "a b\nb c\na c\nd e\ne f\nd f\nx a\nx d\n"


@pytest.fixture
def bridge():
    g = load_edge_list(BRIDGE)
    i = g.index
    cover = Cover(g.n_nodes, [[i["a"], i["b"], i["c"]], [i["d"], i["e"], i["f"]]])
    return g, cover


def test_config_validation():
    with pytest.raises(ValueError):
        RefineConfig(tau=0.0)
    with pytest.raises(ValueError):
        RefineConfig(min_size=0)


def test_tau_above_one_empties_everything(bridge):
    g, cover = bridge
    out = refine_cover(g, cover, RefineConfig(kind="p", tau=1.01))
    assert count_outliers(out, g) == g.n_nodes
    assert out.n_communities == 2


def test_small_tau_with_ief_joins_every_touched_community(bridge):
    g, cover = bridge
    out = refine_cover(g, cover, RefineConfig(kind="ief", tau=1e-9))
    names = [[g.labels[v] for v in c] for c in out.communities]
    assert names == [["a", "b", "c", "x"], ["d", "e", "f", "x"]]


def test_bridge_node_by_hand(bridge):
    # vol(V) = 16 and vol(C) = 7 for both triangles; x has one edge to each side,
    # so NIEF(x, C) = 1/2 - 7/16 = 1/16
    g, cover = bridge
    assert g.total_volume == 16
    nief_x = cover_scores(g, cover, "nief")[g.index["x"]].toarray().ravel()
    assert nief_x == pytest.approx([1 / 16, 1 / 16])
    at_01 = refine_cover(g, cover, RefineConfig(kind="nief", tau=0.1))
    assert at_01.memberships()[g.index["x"]] == []
    at_005 = refine_cover(g, cover, RefineConfig(kind="nief", tau=0.05))
    names = [[g.labels[v] for v in c] for c in at_005.communities]
    assert names == [["a", "b", "c", "x"], ["d", "e", "f", "x"]]


def test_refinement_uses_original_communities(bridge):
    g, cover = bridge
    cfg = RefineConfig(kind="nief", tau=0.05)
    once = refine_cover(g, cover, cfg)
    assert refine_cover(g, cover, cfg) == once


def test_min_size_empties_but_keeps_index(bridge):
    g, cover = bridge
    out = refine_cover(g, cover, RefineConfig(kind="ief", tau=0.6, min_size=4))
    assert out.n_communities == 2
    assert all(len(c) == 0 for c in out.communities)


@pytest.mark.parametrize("kind", ["ief", "nief", "p"])
def test_monotone_in_tau(kind):
    g, truth, _ = generate(GenConfig(n=500, s_min=20, s_max=60, d_max=30, xi=0.35, eta=2.0, seed=3))
    grid = refine_grid(g, truth, kind, taus=np.linspace(0.02, 0.6, 15))
    for (t1, c1), (t2, c2) in zip(grid, grid[1:]):
        for a, b in zip(c1.communities, c2.communities):
            assert set(b.tolist()) <= set(a.tolist())
        assert count_outliers(c1) <= count_outliers(c2)


def test_grid_matches_single_refinements():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 40, 0.15)
    cover = Cover(40, [rng.choice(40, 10, replace=False) for _ in range(4)])
    for tau, out in refine_grid(g, cover, "p"):
        assert out == refine_cover(g, cover, RefineConfig(kind="p", tau=tau))
    assert [t for t, _ in refine_grid(g, cover, "p")] == list(DEFAULT_TAU_GRID)


def test_refine_by_scores_threshold_is_inclusive():
    from scipy import sparse
    s = sparse.csr_matrix(np.array([[0.1, 0.0], [0.05, 0.2]]))
    out = refine_by_scores(s, 0.1)
    assert [c.tolist() for c in out.communities] == [[0], [1]]


def test_count_outliers_examples(two_triangles):
    assert count_outliers(Cover(6, [[0, 1, 2], [3, 4, 5]]), two_triangles) == 0
    assert count_outliers(Cover(6, []), two_triangles) == 6
    with pytest.raises(ValueError):
        count_outliers(Cover(5, []), two_triangles)


def test_bowtie_personas():
    g = load_edge_list("a b\nb c\na c\nc d\nd e\nc e\n")
    owner, _ = personas(g)
    assert np.bincount(owner).tolist() == [1, 1, 2, 1, 1]
    pg, _ = persona_graph(g)
    assert pg.n_nodes == 6 and pg.n_edges == 6
    cover = ego_split(g)
    names = sorted([g.labels[v] for v in c] for c in cover.communities)
    assert names == [["a", "b", "c"], ["c", "d", "e"]]


def test_single_clique():
    g = disjoint_cliques([6])
    assert [c.tolist() for c in ego_split(g).communities] == [list(range(6))]


def test_min_size_above_everything():
    g = disjoint_cliques([4, 5])
    cover = ego_split(g, min_size=10)
    assert cover.n_communities == 0
    assert count_outliers(cover, g) == g.n_nodes


@pytest.mark.parametrize("seed", range(3))
def test_disjoint_cliques_returned_exactly(seed):
    g = disjoint_cliques([10, 12, 11])
    cover = ego_split(g, seed=seed, min_size=10)
    assert [c.tolist() for c in cover.communities] == [list(range(10)), list(range(10, 22)), list(range(22, 33))]


def test_persona_graph_preserves_edge_count():
    rng = np.random.default_rng(8)
    g = random_graph(rng, 50, 0.1)
    pg, owner = persona_graph(g)
    assert pg.n_edges == g.n_edges
    src, dst, _ = pg.edges()
    pairs = sorted(tuple(sorted(p)) for p in zip(owner[src].tolist(), owner[dst].tolist()))
    gs, gd, _ = g.edges()
    assert pairs == sorted(zip(gs.tolist(), gd.tolist()))


@pytest.mark.slow
def test_planted_outlier_count_in_range():
    # ego-split start followed by NIEF at tau = 0.1, with 250 planted outliers among 10000 nodes
    g, _, outliers = generate(GenConfig(n=10000, n_outliers=250, xi=0.35, seed=0))
    initial = ego_split(g, seed=0, min_size=10)
    refined = refine_cover(g, initial, RefineConfig(kind="nief", tau=0.1))
    assert len(outliers) == 250
    assert 100 <= count_outliers(refined, g) <= 600
