import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (best_bipartition, j_means, j_medoids, j_spherical, median_by_depth,
                     naive_agglomerate, scipy_distances, weighted_by_depth)
from vocabtree.clustering import (VALID_SPECS, DistanceMetric, LinkageSpec, agglomerate,
                                  build_cluster_tree, distance_matrix, divide, pairwise_distance,
                                  spherical_two_means, two_means, two_medoids)


# --- metrics ---------------------------------------------------------------

def test_metric_examples():
    assert pairwise_distance([0, 0], [3, 4], "euclidean") == 5.0
    assert pairwise_distance([1, 0], [0, 1], "cosine") == 1.0
    assert pairwise_distance([1, 2], [4, 6], "cityblock") == 7.0
    assert pairwise_distance([1, 2, 3], [3, 2, 1], "correlation") == pytest.approx(2.0, abs=1e-15)
    m = DistanceMetric("s-euclidean", scale=[1.0, 2.0])
    assert pairwise_distance([0, 0], [2, 4], m) == pytest.approx(math.sqrt(8), abs=1e-15)
    assert pairwise_distance([0, 0], [2, 4], m) == pytest.approx(2.828427, abs=1e-6)


def test_s_euclidean_needs_scale_for_single_pair():
    with pytest.raises(ValueError):
        pairwise_distance([0, 0], [1, 1], "s-euclidean")


def test_s_euclidean_skips_constant_dimension():
    E = np.array([[0.0, 5.0], [1.0, 5.0], [3.0, 5.0]])
    D = distance_matrix(E, "s-euclidean")
    sd = E[:, 0].std()
    assert D[0, 2] == pytest.approx(3.0 / sd)


def test_degenerate_pairs_counted():
    m = DistanceMetric("cosine")
    assert pairwise_distance([0, 0], [0, 0], m) == 0.0
    assert pairwise_distance([0, 0], [1, 0], m) == 2.0
    assert m.degenerate["cosine"] == 2
    c = DistanceMetric("correlation")
    assert pairwise_distance([2, 2, 2], [1, 2, 3], c) == 2.0
    assert pairwise_distance([2, 2, 2], [2, 2, 2], c) == 0.0
    assert c.degenerate["correlation"] == 2


def test_degenerate_rows_in_matrix():
    E = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 2.0]])
    m = DistanceMetric("cosine")
    D = distance_matrix(E, m)
    assert D[0, 2] == 0.0 and D[0, 1] == 2.0 and D[2, 3] == 2.0
    assert D[1, 3] == pytest.approx(1.0)
    assert m.degenerate["cosine"] == 5


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(1, 8), st.sampled_from(
    ["euclidean", "s-euclidean", "cityblock", "cosine", "correlation"]), st.integers(0, 2**32 - 1))
def test_distance_matrix_matches_scipy(n, m, metric, seed):
    if metric == "correlation" and m < 2:
        m = 2
    E = np.random.default_rng(seed).normal(size=(n, m))
    D = distance_matrix(E, metric)
    assert np.allclose(D, scipy_distances(E, metric), atol=1e-10)
    assert np.array_equal(D, D.T)
    assert not D.diagonal().any()


def test_pairwise_agrees_with_matrix():
    E = np.random.default_rng(1).normal(size=(6, 4))
    for metric in ("euclidean", "cityblock", "cosine", "correlation"):
        D = distance_matrix(E, metric)
        for i, j in itertools.combinations(range(6), 2):
            assert D[i, j] == pytest.approx(pairwise_distance(E[i], E[j], metric), abs=1e-12)


# --- specs -----------------------------------------------------------------

def test_spec_parsing():
    s = LinkageSpec.parse("agglomerative.average.cityblock")
    assert (s.family, s.linkage, s.metric) == ("agglomerative", "average", "cityblock")
    assert str(LinkageSpec.parse("divisive.2-medoids.s-euclidean")) == "divisive.2-medoids.s-euclidean"
    assert len(VALID_SPECS) == len(set(VALID_SPECS)) == 5 + 5 + 1 + 1 + 1 + 1 + 1 + 5


@pytest.mark.parametrize("text", ["agglomerative.ward.cosine", "agglomerative.centroid.cityblock",
                                  "divisive.2-means.cosine", "divisive.spherical.euclidean",
                                  "agglomerative.single.euclidean", "nope", "a.b.c.d"])
def test_invalid_spec_names_valid_ones(text):
    with pytest.raises(ValueError, match="agglomerative.average.cityblock"):
        LinkageSpec.parse(text)


def test_invalid_spec_rejected_before_work():
    with pytest.raises(ValueError):
        agglomerate(np.full((3, 2), np.nan), "agglomerative.ward.cosine")


# --- agglomerative ---------------------------------------------------------

def test_average_example():
    t = agglomerate(np.array([[0.0], [1.0], [10.0]]), "agglomerative.average.euclidean")
    assert t.to_nested() == ((0, 1), 2)


@pytest.mark.parametrize("spec", VALID_SPECS)
def test_two_points_any_spec(spec):
    t = build_cluster_tree(np.array([[1.0, 2.0], [3.0, 1.0]]), spec)
    assert t.to_nested() == (0, 1)


def test_ward_singleton_increase():
    t = agglomerate(np.array([[0.0], [2.0]]), "agglomerative.ward.euclidean")
    assert t.heights == [2.0]


def test_ties_use_smallest_ids():
    # four corners of a unit square: every side is a tie
    E = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    t = agglomerate(E, "agglomerative.average.euclidean")
    assert t.merges()[0] == (0, 1)
    assert t.merges()[1] == (2, 3)


def test_left_child_holds_smallest_token():
    E = np.random.default_rng(7).normal(size=(25, 3))
    for spec in ("agglomerative.ward.euclidean", "divisive.2-means.euclidean"):
        t = build_cluster_tree(E, spec)
        for nid, (left, right) in t.children.items():
            assert min(t.subtree_tokens(left)) < min(t.subtree_tokens(right))


CASES = [(link, met) for link, mets in [
    ("average", ["euclidean", "s-euclidean", "cityblock", "cosine", "correlation"]),
    ("weighted", ["euclidean", "s-euclidean", "cityblock", "cosine", "correlation"]),
    ("centroid", ["euclidean"]), ("median", ["euclidean"]), ("ward", ["euclidean"])] for met in mets]


@pytest.mark.parametrize("linkage, metric", CASES)
def test_matches_naive_recomputation(linkage, metric):
    rng = np.random.default_rng(sum(map(ord, linkage + metric)))
    for _ in range(3):
        n = int(rng.integers(2, 30))
        E = rng.normal(size=(n, int(rng.integers(2, 6))))
        got = agglomerate(E, "agglomerative.%s.%s" % (linkage, metric)).merges()
        assert got == naive_agglomerate(E, linkage, metric)


def test_exact_ties_on_a_lattice_match_naive():
    # integer grid: many exactly equal distances
    E = np.array([[x, y] for x in range(4) for y in range(3)], dtype=float)
    for linkage in ("average", "weighted", "centroid", "median", "ward"):
        assert agglomerate(E, "agglomerative.%s.euclidean" % linkage).merges() == \
            naive_agglomerate(E, linkage, "euclidean")


def test_weighted_heights_equal_depth_weighted_sums():
    rng = np.random.default_rng(11)
    for _ in range(10):
        E = rng.normal(size=(8, 3))
        D = scipy_distances(E, "euclidean")
        t = agglomerate(E, "agglomerative.weighted.euclidean")
        for nid, h in zip(sorted(t.children), t.heights):
            left, right = t.children[nid]
            assert h == pytest.approx(weighted_by_depth(t.to_nested(left), t.to_nested(right), D), rel=1e-10)


def test_median_heights_equal_depth_weighted_points():
    rng = np.random.default_rng(12)
    for _ in range(10):
        E = rng.normal(size=(8, 3))
        t = agglomerate(E, "agglomerative.median.euclidean")
        for nid, h in zip(sorted(t.children), t.heights):
            left, right = t.children[nid]
            gap = median_by_depth(t.to_nested(left), E) - median_by_depth(t.to_nested(right), E)
            assert h == pytest.approx(np.linalg.norm(gap), rel=1e-8, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 25), st.floats(0.01, 100.0), st.sampled_from(
    ["agglomerative.average.euclidean", "agglomerative.weighted.euclidean",
     "agglomerative.centroid.euclidean", "agglomerative.median.euclidean",
     "agglomerative.ward.euclidean", "divisive.2-means.euclidean"]), st.integers(0, 2**32 - 1))
def test_scale_invariant_shape(n, c, spec, seed):
    E = np.random.default_rng(seed).normal(size=(n, 3))
    # powers of two scale exactly; other factors are compared on well-separated data
    assert build_cluster_tree(E, spec) == build_cluster_tree(E * 4.0, spec)
    gapped = np.cumsum(np.random.default_rng(seed).uniform(1, 2, size=(n, 1)) ** 3, axis=0)
    assert build_cluster_tree(gapped, spec) == build_cluster_tree(gapped * c, spec)


@pytest.mark.parametrize("spec", VALID_SPECS)
def test_deterministic_json(spec):
    E = np.random.default_rng(3).normal(size=(20, 4))
    tokens = [chr(97 + i) for i in range(20)]
    assert build_cluster_tree(E, spec, tokens).to_json() == build_cluster_tree(E.copy(), spec, tokens).to_json()


# --- divisive --------------------------------------------------------------

def first_split(t):
    left, right = t.children[t.root]
    return sorted(t.subtree_tokens(left)), sorted(t.subtree_tokens(right))


def test_two_means_example():
    E = np.array([[0.0], [1.0], [10.0], [11.0]])
    assert first_split(divide(E, "divisive.2-means.euclidean")) == ([0, 1], [2, 3])
    assert best_bipartition(lambda p: j_means(E, p), 4)[1:] == ([0, 1], [2, 3])


def test_spherical_example():
    ang = np.radians([0.0, 5.0, 90.0])
    E = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    assert first_split(divide(E, "divisive.spherical.cosine")) == ([0, 1], [2])
    assert best_bipartition(lambda p: j_spherical(E, p), 3)[1:] == ([0, 1], [2])


def test_two_medoids_example():
    E = np.array([[0.0], [1.0], [10.0]])
    assert first_split(divide(E, "divisive.2-medoids.euclidean")) == ([0, 1], [2])


def test_divisive_node_ids_breadth_first():
    E = np.array([[0.0], [1.0], [10.0], [11.0], [30.0]])
    t = divide(E, "divisive.2-means.euclidean")
    assert t.root == 5
    assert t.internal_order == sorted(t.children)


def test_identical_points_still_split():
    E = np.zeros((5, 2))
    for spec in ("divisive.2-means.euclidean", "divisive.2-medoids.euclidean", "divisive.spherical.cosine"):
        t = divide(E, spec)
        assert t.n_leaves == 5


DIVISIVE = [("2-means", "euclidean", "means"), ("spherical", "cosine", "spherical"),
            ("2-medoids", "euclidean", "medoids"), ("2-medoids", "cityblock", "medoids"),
            ("2-medoids", "s-euclidean", "medoids"), ("2-medoids", "cosine", "medoids"),
            ("2-medoids", "correlation", "medoids")]


@pytest.mark.parametrize("linkage, metric, objective", DIVISIVE)
def test_first_split_is_exhaustive_optimum(linkage, metric, objective):
    rng = np.random.default_rng(sum(map(ord, linkage + metric)))
    for _ in range(15):
        n = int(rng.integers(3, 11))
        E = rng.normal(size=(n, int(rng.integers(3, 5))))
        if objective == "means":
            f = lambda p: j_means(E, p)
        elif objective == "spherical":
            f = lambda p: j_spherical(E, p)
        else:
            D = scipy_distances(E, metric)
            f = lambda p: j_medoids(D, p)
        best, a, b = best_bipartition(f, n)
        got = first_split(divide(E, "divisive.%s.%s" % (linkage, metric)))
        assert f(list(got)) == pytest.approx(best, rel=1e-9, abs=1e-12)
        assert got == (a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 32), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_two_means_single_moves_do_not_help(n, m, seed):
    E = np.random.default_rng(seed).normal(size=(n, m))
    mask = two_means(E)
    parts = [list(np.nonzero(mask)[0]), list(np.nonzero(~mask)[0])]
    base = j_means(E, parts)
    for side in (0, 1):
        if len(parts[side]) == 1:
            continue
        for p in parts[side]:
            moved = [list(parts[0]), list(parts[1])]
            moved[side].remove(p)
            moved[1 - side].append(p)
            assert j_means(E, moved) >= base - 1e-9 * max(1.0, base)


def test_spherical_ignores_vector_length():
    E = np.random.default_rng(4).normal(size=(9, 3))
    lengths = np.random.default_rng(5).uniform(0.1, 10, size=(9, 1))
    assert np.array_equal(spherical_two_means(E), spherical_two_means(E * lengths))


def test_two_medoids_large_cluster_uses_swap_search():
    # beyond the exact-search size the build+swap path must still give a sane split
    rng = np.random.default_rng(6)
    E = np.vstack([rng.normal(0, 1, size=(300, 2)), rng.normal(20, 1, size=(300, 2))])
    mask = two_medoids(scipy_distances(E, "euclidean"))
    assert len(set(mask[:300])) == 1 and len(set(mask[300:])) == 1 and mask[0] != mask[300]


def test_divisive_needs_divisive_spec():
    with pytest.raises(ValueError):
        divide(np.zeros((3, 1)), "agglomerative.ward.euclidean")
    with pytest.raises(ValueError):
        agglomerate(np.zeros((3, 1)), "divisive.2-means.euclidean")


def test_too_few_points():
    with pytest.raises(ValueError, match="vocabulary too small"):
        build_cluster_tree(np.zeros((1, 2)), "agglomerative.average.euclidean")
