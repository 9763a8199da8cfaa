"""K-means clustering and the three cluster-coherence metrics.

All metrics use Euclidean distance; on the engine's unit-norm vectors that
is monotone with cosine, so one metric family serves every technique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    CoincidentCentroids,
    KTooLarge,
    NEqualsK,
    SingleCluster,
)


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray  # (N,) int
    centroids: np.ndarray  # (k, D)
    inertia: float
    n_iterations: int
    seed: int


def _kmeans_pp_init(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; degenerate all-equal data falls back to the first
    unchosen points so initialization always yields k centers."""
    n = vectors.shape[0]
    centers = np.empty((k, vectors.shape[1]), dtype=np.float64)
    chosen = [int(rng.integers(n))]
    centers[0] = vectors[chosen[0]]
    d2 = np.sum((vectors - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            remaining = [i for i in range(n) if i not in set(chosen)]
            pick = remaining[0] if remaining else chosen[-1]
        else:
            r = rng.random() * total
            pick = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            pick = min(pick, n - 1)
        chosen.append(pick)
        centers[j] = vectors[pick]
        d2 = np.minimum(d2, np.sum((vectors - centers[j]) ** 2, axis=1))
    return centers


def _assign(vectors: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(vectors**2, axis=1)[:, None]
        - 2.0 * vectors @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def kmeans_single(
    vectors: np.ndarray,
    k: int,
    seed: int,
    max_iterations: int = 300,
    tol: float = 1e-6,
) -> KMeansResult:
    """One Lloyd run from a k-means++ start; converges on centroid shift."""
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if k < 1 or k > n:
        raise KTooLarge(f"k={k} not in [1, N={n}]")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(vectors, k, rng)
    assignments = _assign(vectors, centers)
    for iteration in range(1, max_iterations + 1):
        new_centers = centers.copy()
        for j in range(k):
            members = vectors[assignments == j]
            if members.shape[0] > 0:
                new_centers[j] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        new_assignments = _assign(vectors, centers)
        moved = not np.array_equal(new_assignments, assignments)
        assignments = new_assignments
        if shift < tol and not moved:
            break
    inertia = float(
        np.sum((vectors - centers[assignments]) ** 2)
    )
    return KMeansResult(
        assignments=assignments,
        centroids=centers,
        inertia=inertia,
        n_iterations=iteration,
        seed=seed,
    )


def kmeans(vectors: np.ndarray, k: int, seeds: list[int]) -> list[KMeansResult]:
    """One result per seed; pick the best by inertia for point metrics and
    keep the rest for spread estimates."""
    if not seeds:
        raise KTooLarge("kmeans needs at least one seed")
    return [kmeans_single(vectors, k, seed) for seed in seeds]


def best_result(results: list[KMeansResult]) -> KMeansResult:
    return min(results, key=lambda r: (r.inertia, r.seed))


def _cluster_indices(assignments: np.ndarray) -> list[np.ndarray]:
    labels = np.unique(assignments)
    return [np.flatnonzero(assignments == label) for label in labels]


def silhouette(vectors: np.ndarray, assignments: np.ndarray) -> float:
    """Mean over points of (b - a) / max(a, b).

    a: mean distance to own cluster (excluding self); b: smallest mean
    distance to another cluster. Singletons score 0; coincident clusters
    (a = b = 0) score 0 by convention.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    assignments = np.asarray(assignments)
    groups = _cluster_indices(assignments)
    if len(groups) < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    d2 = (
        np.sum(vectors**2, axis=1)[:, None]
        - 2.0 * vectors @ vectors.T
        + np.sum(vectors**2, axis=1)[None, :]
    )
    np.clip(d2, 0.0, None, out=d2)
    dist = np.sqrt(d2)
    scores = np.zeros(vectors.shape[0])
    for gi, group in enumerate(groups):
        size = group.shape[0]
        for i in group:
            if size == 1:
                scores[i] = 0.0
                continue
            a = float(dist[i, group].sum()) / (size - 1)
            b = min(
                float(dist[i, other].mean())
                for gj, other in enumerate(groups)
                if gj != gi
            )
            top = max(a, b)
            scores[i] = 0.0 if top == 0.0 else (b - a) / top
    return float(scores.mean())


def calinski_harabasz(vectors: np.ndarray, assignments: np.ndarray) -> float:
    """(between dispersion / (k-1)) / (within dispersion / (N-k)), trace form.

    Returns +inf when points coincide exactly with their centroids but the
    clusters are distinct (zero within-dispersion limit).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    assignments = np.asarray(assignments)
    groups = _cluster_indices(assignments)
    k = len(groups)
    n = vectors.shape[0]
    if k < 2:
        raise SingleCluster("calinski_harabasz needs at least two clusters")
    if n == k:
        raise NEqualsK("calinski_harabasz is undefined when every point is its own cluster")
    grand_mean = vectors.mean(axis=0)
    between = 0.0
    within = 0.0
    for group in groups:
        members = vectors[group]
        centroid = members.mean(axis=0)
        between += group.shape[0] * float(np.sum((centroid - grand_mean) ** 2))
        within += float(np.sum((members - centroid) ** 2))
    if within == 0.0:
        return 0.0 if between == 0.0 else float("inf")
    return (between / (k - 1)) / (within / (n - k))


def davies_bouldin(vectors: np.ndarray, assignments: np.ndarray) -> float:
    """Mean over clusters of max_j (s_i + s_j) / d(c_i, c_j)."""
    vectors = np.asarray(vectors, dtype=np.float64)
    assignments = np.asarray(assignments)
    groups = _cluster_indices(assignments)
    k = len(groups)
    if k < 2:
        raise SingleCluster("davies_bouldin needs at least two clusters")
    centroids = np.stack([vectors[g].mean(axis=0) for g in groups])
    spreads = np.array(
        [
            float(np.linalg.norm(vectors[g] - centroids[i], axis=1).mean())
            for i, g in enumerate(groups)
        ]
    )
    total = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i == j:
                continue
            gap = float(np.linalg.norm(centroids[i] - centroids[j]))
            if gap == 0.0:
                raise CoincidentCentroids(
                    f"clusters {i} and {j} have identical centroids"
                )
            worst = max(worst, (spreads[i] + spreads[j]) / gap)
        total += worst
    return total / k
