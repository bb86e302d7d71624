"""Vocabulary trees from hierarchical clustering of token embeddings.

Agglomerative linkages (average, weighted, centroid, median, ward) are run
with Lance-Williams updates on a dense dissimilarity matrix.  Divisive
clustering splits top-down with 2-means, spherical 2-means or 2-medoids.

Determinism rules:

* agglomerative ties (criteria within 1e-12 of the minimum, relative to the
  larger of the minimum and the largest initial dissimilarity) go to the pair
  whose (min token id, second min token id) is lexicographically smallest;
* in every merge or split the child holding the smallest token id is the
  left child;
* 2-means / spherical start from the farthest pair, then retry from the
  next-farthest pairs and keep the lowest objective (earliest start on ties);
  points equidistant to both centres join cluster 0;
* 2-medoids scores every medoid pair exactly up to 512 members.
"""

from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .tree import VocabTree

METRICS = ("euclidean", "s-euclidean", "cityblock", "cosine", "correlation")
AGGLOMERATIVE = ("average", "weighted", "centroid", "median", "ward")
DIVISIVE = ("2-means", "spherical", "2-medoids")

# family -> linkage -> allowed metrics
SUPPORTED = {
    "agglomerative": {
        "average": METRICS,
        "weighted": METRICS,
        "centroid": ("euclidean",),
        "median": ("euclidean",),
        "ward": ("euclidean",),
    },
    "divisive": {
        "2-means": ("euclidean",),
        "spherical": ("cosine",),
        "2-medoids": METRICS,
    },
}

VALID_SPECS = tuple("%s.%s.%s" % (fam, link, met)
                    for fam, links in SUPPORTED.items()
                    for link, mets in links.items()
                    for met in mets)

_TIE_RTOL = 1e-12
_MAX_SWEEPS = 100
_EXACT_MEDOIDS = 512
_SEED_PAIRS = 16


@dataclass
class DistanceMetric:
    """Distance selector; ``scale`` holds per-dimension std-devs for s-euclidean.

    ``degenerate`` counts pairs involving a zero vector (cosine) or a constant
    vector (correlation).  Such pairs get distance 0 if the two operands are
    identical and 2 otherwise.
    """

    name: str = "euclidean"
    scale: np.ndarray = None
    degenerate: Counter = field(default_factory=Counter, repr=False, compare=False)

    def __post_init__(self):
        if self.name not in METRICS:
            raise ValueError("unknown metric %r; expected one of %s" % (self.name, ", ".join(METRICS)))
        if self.scale is not None:
            self.scale = np.asarray(self.scale, dtype=float)
            if np.any(self.scale < 0):
                raise ValueError("standard deviations must be nonnegative")

    def fitted(self, E):
        """Copy whose s-euclidean scale is the population std-dev over ``E``."""
        if self.name != "s-euclidean" or self.scale is not None:
            return self
        return DistanceMetric(self.name, np.asarray(E, dtype=float).std(axis=0), self.degenerate)

    def _weights(self, dim):
        # 1/sigma^2 per dimension; zero-variance dimensions drop out
        if self.scale is None:
            raise ValueError("s-euclidean needs per-dimension scales; call fitted(E)")
        if self.scale.shape != (dim,):
            raise ValueError("scale has %d entries for dimension %d" % (self.scale.size, dim))
        w = np.zeros(dim)
        nz = self.scale > 0
        w[nz] = 1.0 / self.scale[nz] ** 2
        return w


def pairwise_distance(a, b, metric):
    """Distance between two vectors under ``metric`` (a DistanceMetric or name)."""
    if isinstance(metric, str):
        metric = DistanceMetric(metric)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("vectors must be 1-D with equal dimensions")
    name = metric.name
    if name == "euclidean":
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if name == "s-euclidean":
        return float(np.sqrt(np.sum(metric._weights(a.size) * (a - b) ** 2)))
    if name == "cityblock":
        return float(np.sum(np.abs(a - b)))
    raw_a, raw_b = a, b
    if name == "correlation":
        a = a - a.mean()
        b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        metric.degenerate[name] += 1
        return 0.0 if np.array_equal(raw_a, raw_b) else 2.0
    return float(np.clip(1.0 - np.dot(a, b) / (na * nb), 0.0, 2.0))


def distance_matrix(E, metric):
    """Dense symmetric ``N x N`` matrix of pairwise distances."""
    if isinstance(metric, str):
        metric = DistanceMetric(metric)
    E = np.asarray(E, dtype=float)
    metric = metric.fitted(E) if metric.name == "s-euclidean" else metric
    name = metric.name
    if name in ("euclidean", "s-euclidean"):
        X = E if name == "euclidean" else E * np.sqrt(metric._weights(E.shape[1]))
        sq = np.sum(X ** 2, axis=1)
        D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        # exact differences where cancellation would bite
        D2 = np.maximum(D2, 0.0)
        D = np.sqrt(D2)
        small = D2 < 1e-8 * (sq[:, None] + sq[None, :] + 1e-300)
        if np.any(small):
            ii, jj = np.nonzero(small)
            D[ii, jj] = np.sqrt(np.sum((X[ii] - X[jj]) ** 2, axis=1))
    elif name == "cityblock":
        D = np.abs(E[:, None, :] - E[None, :, :]).sum(axis=2)
    else:
        X = E - E.mean(axis=1, keepdims=True) if name == "correlation" else E
        norms = np.linalg.norm(X, axis=1)
        ok = norms > 0
        U = np.zeros_like(X)
        U[ok] = X[ok] / norms[ok, None]
        D = np.clip(1.0 - U @ U.T, 0.0, 2.0)
        bad = ~ok
        if np.any(bad):
            for i in np.nonzero(bad)[0]:
                same = np.all(E == E[i], axis=1)
                D[i, :] = np.where(same, 0.0, 2.0)
                D[:, i] = D[i, :]
            n_bad = int(bad.sum())
            n = len(E)
            metric.degenerate[name] += n_bad * (n - n_bad) + n_bad * (n_bad - 1) // 2
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


@dataclass(frozen=True)
class LinkageSpec:
    """Clustering family, linkage and metric, e.g. ``agglomerative.average.cityblock``."""

    family: str
    linkage: str
    metric: str

    def __post_init__(self):
        if self.family not in SUPPORTED:
            raise ValueError("unknown family %r; valid specs: %s" % (self.family, ", ".join(VALID_SPECS)))
        if self.linkage not in SUPPORTED[self.family]:
            raise ValueError("unknown %s linkage %r; valid specs: %s"
                             % (self.family, self.linkage, ", ".join(VALID_SPECS)))
        if self.metric not in SUPPORTED[self.family][self.linkage]:
            raise ValueError("%s.%s does not support metric %r; valid specs: %s"
                             % (self.family, self.linkage, self.metric, ", ".join(VALID_SPECS)))

    @classmethod
    def parse(cls, text):
        parts = text.strip().lower().split(".")
        if len(parts) != 3:
            raise ValueError("bad spec %r; valid specs: %s" % (text, ", ".join(VALID_SPECS)))
        return cls(*parts)

    def __str__(self):
        return "%s.%s.%s" % (self.family, self.linkage, self.metric)


def _as_spec(spec):
    return LinkageSpec.parse(spec) if isinstance(spec, str) else spec


def _check_embeddings(E):
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[1] < 1:
        raise ValueError("embeddings must be an N x m matrix with m >= 1")
    if E.shape[0] < 2:
        raise ValueError("vocabulary too small")
    if not np.all(np.isfinite(E)):
        raise ValueError("embeddings must be finite")
    return E


# ---------------------------------------------------------------------------
# agglomerative


def agglomerate(E, spec, tokens=None, metric=None):
    """Bottom-up tree: repeatedly merge the pair minimising the linkage criterion.

    ``metric`` may pass a pre-built DistanceMetric (e.g. with fixed scales or
    to collect degenerate-pair counts); its name must match the spec.  The
    returned tree carries the merge criterion of each internal node in
    ``tree.heights`` (distances for average/weighted/centroid/median, the
    variance increase for ward).
    """
    spec = _as_spec(spec)
    if spec.family != "agglomerative":
        raise ValueError("agglomerate needs an agglomerative spec, got %s" % spec)
    E = _check_embeddings(E)
    n = len(E)
    metric = _resolve_metric(spec, metric)
    D = distance_matrix(E, metric)
    link = spec.linkage
    if link in ("centroid", "median"):
        W = D ** 2
    elif link == "ward":
        W = D ** 2 / 2.0
    else:
        W = D.copy()
    np.fill_diagonal(W, np.inf)
    scale = float(W[np.isfinite(W)].max()) if n > 1 else 0.0
    sizes = np.ones(n)
    node_of = np.arange(n)
    merges, heights = [], []
    for step in range(n - 1):
        v = W.min()
        tol = _TIE_RTOL * max(abs(v), scale)
        cand = np.argwhere(W <= v + tol)
        i, j = next((int(a), int(b)) for a, b in cand if a < b)
        dij = W[i, j]
        ni, nj = sizes[i], sizes[j]
        active = np.isfinite(W[i])
        active[j] = False
        k = np.nonzero(active)[0]
        dki, dkj = W[k, i], W[k, j]
        if link == "average":
            new = (ni * dki + nj * dkj) / (ni + nj)
        elif link == "weighted":
            new = 0.5 * (dki + dkj)
        elif link == "centroid":
            new = (ni * dki + nj * dkj) / (ni + nj) - ni * nj * dij / (ni + nj) ** 2
        elif link == "median":
            new = 0.5 * dki + 0.5 * dkj - 0.25 * dij
        else:  # ward, on variance increases
            nk = sizes[k]
            new = ((nk + ni) * dki + (nk + nj) * dkj - nk * dij) / (ni + nj + nk)
        W[k, i] = W[i, k] = new
        W[j, :] = np.inf
        W[:, j] = np.inf
        sizes[i] = ni + nj
        merges.append((int(node_of[i]), int(node_of[j])))
        heights.append(float(np.sqrt(max(dij, 0.0)) if link in ("centroid", "median") else dij))
        node_of[i] = n + step
    tree = VocabTree.from_merges(n, merges, tokens)
    tree.heights = heights
    return tree


def _resolve_metric(spec, metric):
    if metric is None:
        return DistanceMetric(spec.metric)
    if metric.name != spec.metric:
        raise ValueError("metric %r does not match spec %s" % (metric.name, spec))
    return metric


# ---------------------------------------------------------------------------
# divisive


def divide(E, spec, tokens=None, metric=None):
    """Top-down tree: split every cluster with more than one member in two.

    Internal node ids are assigned breadth-first (root is ``N``).
    """
    spec = _as_spec(spec)
    if spec.family != "divisive":
        raise ValueError("divide needs a divisive spec, got %s" % spec)
    E = _check_embeddings(E)
    n = len(E)
    metric = _resolve_metric(spec, metric)
    D = distance_matrix(E, metric) if spec.linkage == "2-medoids" else None
    children = {}
    next_id = n
    queue = deque([(np.arange(n), next_id)])
    next_id += 1
    while queue:
        members, nid = queue.popleft()
        mask = split_cluster(E, members, spec, D)
        parts = [members[mask], members[~mask]]
        parts.sort(key=lambda p: p.min())
        ids = []
        for p in parts:
            if len(p) == 1:
                ids.append(int(p[0]))
            else:
                ids.append(next_id)
                queue.append((p, next_id))
                next_id += 1
        children[nid] = tuple(ids)
    return VocabTree(n, children, {i: i for i in range(n)}, tokens)


def split_cluster(E, members, spec, D=None):
    """Boolean mask over ``members`` selecting one side of the split."""
    spec = _as_spec(spec)
    members = np.asarray(members)
    if len(members) == 2:
        return np.array([True, False])
    if spec.linkage == "2-means":
        mask = two_means(E[members])
    elif spec.linkage == "spherical":
        mask = spherical_two_means(E[members])
    else:
        if D is None:
            D = distance_matrix(E, DistanceMetric(spec.metric))
        mask = two_medoids(D[np.ix_(members, members)])
    if mask.all() or not mask.any():
        raise ValueError("degenerate split")
    return mask


def _repair_empty(assign, dist_to_own):
    # move the point farthest from its own centre into the empty cluster
    empty = 0 if not np.any(assign == 0) else 1
    p = int(np.argmax(dist_to_own))
    assign = assign.copy()
    assign[p] = empty
    return assign


def _seed_pairs(D, limit):
    """Point pairs by decreasing distance (ties by index), farthest first."""
    n = len(D)
    iu, ju = np.triu_indices(n, 1)
    d = D[iu, ju]
    v = d.max()
    # snap near-equal distances together so round-off cannot reorder ties
    key = np.where(d >= v - _TIE_RTOL * abs(v), v, d)
    order = np.lexsort((ju, iu, -key))[:limit]
    return [(int(iu[k]), int(ju[k])) for k in order]


def _lloyd(X, i, j, spherical):
    n = len(X)
    centres = np.stack([X[i], X[j]])
    assign = None
    for _ in range(_MAX_SWEEPS):
        if spherical:
            d = 1.0 - X @ _unit_rows(centres).T
        else:
            d = ((X[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
        new = (d[:, 1] < d[:, 0]).astype(int)
        if new.all() or not new.any():
            new = _repair_empty(new, d[np.arange(n), new])
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        if spherical:
            centres = np.stack([X[assign == c].sum(axis=0) for c in (0, 1)])
        else:
            centres = np.stack([X[assign == c].mean(axis=0) for c in (0, 1)])
    return assign


def _multi_start(X, D, spherical):
    refine = _hartigan_spherical if spherical else _hartigan_means
    objective = _j_spherical if spherical else _j_means
    best, seen = None, set()
    scale = max(1.0, float(np.sum(X ** 2)))
    for i, j in _seed_pairs(D, _SEED_PAIRS):
        start = _lloyd(X, i, j, spherical)
        key = start.tobytes()
        if key in seen:
            continue
        seen.add(key)
        assign = refine(X, start)
        v = objective(X, assign)
        if best is None or v < best[0] - _TIE_RTOL * scale:
            best = (v, assign)
    return best[1]


def _j_means(X, assign):
    return float(np.sum(X ** 2) - sum(
        np.sum(X[assign == c].sum(axis=0) ** 2) / np.sum(assign == c) for c in (0, 1)))


def _j_spherical(U, assign):
    return float(len(U) - sum(np.linalg.norm(U[assign == c].sum(axis=0)) for c in (0, 1)))


def two_means(X):
    """2-means split minimising the within-cluster sum of squares.

    Each start runs Lloyd iterations from a seed pair and then single-point
    (Hartigan) moves until no move lowers the objective.  The farthest pair
    is the first seed; the next ``_SEED_PAIRS - 1`` pairs by decreasing
    distance are also tried and the lowest objective wins (earliest start on
    ties).  Returns a mask for cluster 0.
    """
    X = np.asarray(X, dtype=float)
    sq = np.sum(X ** 2, axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0)
    return _multi_start(X, D2, spherical=False) == 0


def _hartigan_means(X, assign):
    assign = assign.copy()
    counts = np.array([np.sum(assign == 0), np.sum(assign == 1)], dtype=float)
    sums = np.stack([X[assign == 0].sum(axis=0), X[assign == 1].sum(axis=0)])
    scale = max(1.0, float(np.sum(X ** 2)))
    for _ in range(_MAX_SWEEPS):
        moved = False
        for p in range(len(X)):
            a = assign[p]
            b = 1 - a
            if counts[a] <= 1:
                continue
            ca, cb = sums[a] / counts[a], sums[b] / counts[b]
            gain = (counts[b] / (counts[b] + 1) * np.sum((X[p] - cb) ** 2)
                    - counts[a] / (counts[a] - 1) * np.sum((X[p] - ca) ** 2))
            if gain < -_TIE_RTOL * scale:
                assign[p] = b
                counts[a] -= 1
                counts[b] += 1
                sums[a] -= X[p]
                sums[b] += X[p]
                moved = True
        if not moved:
            break
    return assign


def _unit_rows(X):
    norms = np.linalg.norm(X, axis=1)
    U = np.zeros_like(X)
    ok = norms > 0
    U[ok] = X[ok] / norms[ok, None]
    return U


def spherical_two_means(X):
    """Spherical 2-means split (cosine distance to normalised centroids).

    The minimised objective is ``sum(1 - cos(a, centroid))`` over both
    clusters, i.e. the cosine-similarity sum is maximised.  Seeding and
    restarts follow ``two_means`` with cosine distance.
    """
    U = _unit_rows(np.asarray(X, dtype=float))
    Dc = np.clip(1.0 - U @ U.T, 0.0, 2.0)
    return _multi_start(U, Dc, spherical=True) == 0


def _hartigan_spherical(U, assign):
    # objective (up to a constant) = -(|S_0| + |S_1|) with S_c the sum of unit rows
    assign = assign.copy()
    counts = np.array([np.sum(assign == 0), np.sum(assign == 1)])
    sums = np.stack([U[assign == 0].sum(axis=0), U[assign == 1].sum(axis=0)])
    scale = max(1.0, float(len(U)))
    for _ in range(_MAX_SWEEPS):
        moved = False
        for p in range(len(U)):
            a = assign[p]
            b = 1 - a
            if counts[a] <= 1:
                continue
            before = np.linalg.norm(sums[a]) + np.linalg.norm(sums[b])
            after = np.linalg.norm(sums[a] - U[p]) + np.linalg.norm(sums[b] + U[p])
            if before - after < -_TIE_RTOL * scale:
                assign[p] = b
                counts[a] -= 1
                counts[b] += 1
                sums[a] -= U[p]
                sums[b] += U[p]
                moved = True
        if not moved:
            break
    return assign


def two_medoids(D):
    """2-medoids split of a precomputed distance matrix.

    Up to ``_EXACT_MEDOIDS`` points every medoid pair is scored, which gives
    the optimal split (each point joins its nearer medoid).  Larger clusters
    use PAM build + swap.  Returns a mask for the cluster of the first medoid.
    """
    D = np.asarray(D, dtype=float)
    n = len(D)
    scale = max(1.0, float(D.sum()))
    if n <= _EXACT_MEDOIDS:
        best = None
        for i in range(n - 1):
            costs = np.minimum(D[:, i:i + 1], D[:, i + 1:]).sum(axis=0)
            k = int(np.argmin(costs))
            if best is None or costs[k] < best[0] - _TIE_RTOL * scale:
                best = (costs[k], i, i + 1 + k)
        med = [best[1], best[2]]
    else:
        med = _pam(D, scale)
    to_first = D[:, med[0]] <= D[:, med[1]]
    to_first[med[0]] = True
    to_first[med[1]] = False
    return to_first


def _pam(D, scale):
    m0 = int(np.argmin(D.sum(axis=1)))
    cost1 = np.minimum(D, D[m0][None, :]).sum(axis=1)
    cost1[m0] = np.inf
    m1 = int(np.argmin(cost1))
    med = [m0, m1]
    best = np.minimum(D[m0], D[m1]).sum()
    for _ in range(_MAX_SWEEPS):
        improved = None
        for s in (0, 1):
            other = med[1 - s]
            costs = np.minimum(D, D[other][None, :]).sum(axis=1)
            costs[med] = np.inf
            c = int(np.argmin(costs))
            if costs[c] < best - _TIE_RTOL * scale and (improved is None or costs[c] < improved[0]):
                improved = (costs[c], s, c)
        if improved is None:
            break
        best, s, c = improved
        med[s] = c
    return med


def medoid_cost(D, members):
    """Sum of distances to the medoid of ``members``."""
    sub = D[np.ix_(members, members)]
    return float(sub.sum(axis=1).min())


# ---------------------------------------------------------------------------


def build_cluster_tree(E, spec, tokens=None, metric=None):
    """Dispatch on the spec family."""
    spec = _as_spec(spec)
    if spec.family == "agglomerative":
        return agglomerate(E, spec, tokens, metric)
    return divide(E, spec, tokens, metric)
