from math import log2

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascore.benchgen import GenConfig, generate
from cascore.graph import Cover, Graph, Partition
from cascore.metrics import ami, k_rank_accuracy, k_rank_csv, onmi, outlier_experiment, roc, roc_area

from conftest import disjoint_cliques

sklearn_metrics = pytest.importorskip("sklearn.metrics")

# overlapping NMI of A={{1,2,3},{4,5,6}} and B={{1,2,3,4},{5,6}} over 6 nodes, computed
# once by the loop-based formula oracle below and frozen
HAND_ONMI = 0.45914791702724495


def _h(w, n):
    return 0.0 if w == 0 else -w / n * log2(w / n)


def _cond(xk, yl, n):
    both, c, b = len(xk & yl), len(xk - yl), len(yl - xk)
    a = n - both - b - c
    if _h(a, n) + _h(both, n) < _h(b, n) + _h(c, n):
        return _h(len(xk), n) + _h(n - len(xk), n)
    return _h(a, n) + _h(b, n) + _h(c, n) + _h(both, n) - _h(b + both, n) - _h(a + c, n)


def oracle_onmi(X, Y, n):
    X, Y = [set(x) for x in X], [set(y) for y in Y]
    hx = sum(_h(len(x), n) + _h(n - len(x), n) for x in X)
    hy = sum(_h(len(y), n) + _h(n - len(y), n) for y in Y)
    hxy = sum(min(_cond(x, y, n) for y in Y) for x in X)
    hyx = sum(min(_cond(y, x, n) for x in X) for y in Y)
    return 0.5 * (hx - hxy + hy - hyx) / max(hx, hy)


def oracle_auc(scores, labels):
    """Mann-Whitney: P(outlier scores lower) + 1/2 P(tie), over all pairs."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum((p < q) + 0.5 * (p == q) for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


# -- AMI ------------------------------------------------------------------

def test_ami_identity_and_degenerate():
    p = Partition([0, 0, 1, 1, 2, 2, 2])
    assert ami(p, p) == pytest.approx(1.0, abs=1e-9)
    assert ami(p, Partition([0] * 7)) == 0.0
    with pytest.raises(ValueError):
        ami(p, Partition([0, 1]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 200), st.integers(2, 8), st.integers(2, 8))
def test_ami_matches_sklearn(seed, n, k1, k2):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, k1, n), rng.integers(0, k2, n)
    want = sklearn_metrics.adjusted_mutual_info_score(a, b, average_method="arithmetic")
    if len(set(a)) < 2 or len(set(b)) < 2:
        assert ami(a, b) == 0.0
    else:
        assert ami(a, b) == pytest.approx(want, abs=1e-9)


def test_ami_symmetric_and_relabel_invariant():
    rng = np.random.default_rng(1)
    a, b = rng.integers(0, 5, 300), rng.integers(0, 4, 300)
    assert ami(a, b) == pytest.approx(ami(b, a), abs=1e-12)
    perm = rng.permutation(5)
    assert ami(perm[a], b) == pytest.approx(ami(a, b), abs=1e-12)


def test_ami_null():
    vals = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        vals.append(ami(rng.integers(0, 4, 1000), rng.integers(0, 4, 1000)))
    assert max(abs(v) for v in vals) <= 0.05


# -- oNMI -----------------------------------------------------------------

def test_onmi_hand_case():
    a = [[0, 1, 2], [3, 4, 5]]
    b = [[0, 1, 2, 3], [4, 5]]
    assert oracle_onmi(a, b, 6) == pytest.approx(HAND_ONMI, abs=1e-15)
    assert onmi(a, b, 6) == pytest.approx(HAND_ONMI, abs=1e-12)
    assert onmi(b, a, 6) == pytest.approx(HAND_ONMI, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_onmi_matches_oracle(seed, ka, kb):
    rng = np.random.default_rng(seed)
    n = 30
    a = [rng.choice(n, rng.integers(1, n), replace=False).tolist() for _ in range(ka)]
    b = [rng.choice(n, rng.integers(1, n), replace=False).tolist() for _ in range(kb)]
    hx = sum(_h(len(set(x)), n) + _h(n - len(set(x)), n) for x in a)
    hy = sum(_h(len(set(y)), n) + _h(n - len(set(y)), n) for y in b)
    if max(hx, hy) == 0:
        return
    want = min(max(oracle_onmi(a, b, n), 0.0), 1.0)
    assert onmi(a, b, n) == pytest.approx(want, abs=1e-12)


def test_onmi_identity_symmetry_and_order():
    rng = np.random.default_rng(3)
    a = Cover(50, [rng.choice(50, 12, replace=False) for _ in range(4)])
    b = Cover(50, [rng.choice(50, 15, replace=False) for _ in range(3)])
    assert onmi(a, a) == pytest.approx(1.0, abs=1e-9)
    assert onmi(a, a, variant="lfk") == pytest.approx(1.0, abs=1e-9)
    assert onmi(a, b) == pytest.approx(onmi(b, a), abs=1e-12)
    reordered = Cover(50, a.communities[::-1])
    assert onmi(reordered, b) == pytest.approx(onmi(a, b), abs=1e-12)


def test_onmi_errors():
    with pytest.raises(ValueError):
        onmi(Cover(4, []), Cover(4, [[0, 1]]))
    with pytest.raises(ValueError):
        onmi(Cover(4, [[0]]), Cover(5, [[0]]))
    with pytest.raises(ValueError):
        onmi(Cover(4, [[0]]), Cover(4, [[0]]), variant="other")


def test_onmi_null():
    vals = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        a = Partition(rng.integers(0, 4, 1000)).to_cover()
        b = Partition(rng.integers(0, 4, 1000)).to_cover()
        vals.append(onmi(a, b))
    assert max(vals) <= 0.05


# -- ROC ------------------------------------------------------------------

def test_roc_trivial_cases():
    labels = [1, 1, 0, 0, 0]
    assert roc([0.1, 0.2, 0.5, 0.6, 0.9], labels).auc == 1.0
    assert roc([0.9, 0.8, 0.1, 0.2, 0.3], labels).auc == 0.0
    assert roc([0.4] * 5, labels).auc == 0.5
    with pytest.raises(ValueError):
        roc([0.1, 0.2], [0, 0])
    with pytest.raises(ValueError):
        roc([0.1, 0.2], [1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=40))
def test_auc_is_mann_whitney(data):
    scores = [s / 6 for s, _ in data]
    labels = [y for _, y in data]
    if all(labels) or not any(labels):
        return
    curve = roc(scores, labels)
    assert curve.auc == pytest.approx(oracle_auc(scores, labels), abs=1e-12)
    assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    assert curve.auc == pytest.approx(roc_area(curve.fpr, curve.tpr))
    transformed = roc(np.exp(3 * np.asarray(scores)) - 7, labels)
    assert transformed.auc == pytest.approx(curve.auc, abs=1e-12)


def test_roc_serialization():
    curve = roc([0.1, 0.5, 0.5, 0.9], [1, 1, 0, 0])
    assert curve.to_csv().splitlines()[0] == "fpr,tpr"
    assert curve.to_csv().splitlines()[1] == "0.000000,0.000000"
    assert curve.summary_json() == '{"auc": 0.875}\n'


# -- score-quality experiments ----------------------------------------------

@pytest.mark.parametrize("kind", ["ief", "nief", "p"])
def test_k_rank_disjoint_cliques(kind):
    g = disjoint_cliques([4, 5, 6])
    truth = Cover(15, [range(0, 4), range(4, 9), range(9, 15)])
    acc = k_rank_accuracy(g, truth, kind)
    assert acc == {1: (1.0, 15)}
    assert k_rank_csv(acc) == "K,proportion,count\n1,1.000000,15\n"


def test_k_rank_skips_isolated_nodes():
    g = Graph(["a", "b", "c", "z"], [0, 1, 0], [1, 2, 2])
    truth = Cover(4, [[0, 1, 2, 3]])
    assert k_rank_accuracy(g, truth, "p") == {1: (1.0, 3)}


def test_k_rank_uses_true_memberships():
    # node 0 belongs to both triangles' communities; its second-ranked community is still its own
    g = Graph([str(i) for i in range(5)], [0, 1, 0, 0, 3, 0], [1, 2, 2, 3, 4, 4])
    truth = Cover(5, [[0, 1, 2], [0, 3, 4]])
    acc = k_rank_accuracy(g, truth, "ief")
    assert acc[1] == (1.0, 5)
    assert acc[2] == (1.0, 1)


def test_outlier_experiment_isolated_outliers():
    g = Graph([str(i) for i in range(8)], [0, 1, 0, 3, 4, 3], [1, 2, 2, 4, 5, 5])
    found = Partition([0, 0, 0, 1, 1, 1, 2, 3])
    curve = outlier_experiment(g, found, [6, 7], "p")
    assert curve.auc == 1.0


@pytest.mark.parametrize("kind", ["ief", "nief", "p"])
def test_k_rank_generated_shape(kind):
    g, truth, _ = generate(GenConfig(n=1000, xi=0.35, eta=3.0, seed=0))
    acc = k_rank_accuracy(g, truth, kind)
    props = [p for _, (p, _) in sorted(acc.items())]
    assert props[0] >= props[1] >= props[2]
    assert acc[1][1] == 1000
