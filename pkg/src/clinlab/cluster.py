"""Seeded k-means clustering with silhouette scoring for encoded feature
matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClusteringError


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray  # (n,) int64, values in [0, k)
    centroids: np.ndarray  # (k, d)
    inertia: float
    iterations: int

    def __post_init__(self):
        self.labels.setflags(write=False)
        self.centroids.setflags(write=False)
        if np.bincount(self.labels, minlength=self.k).min() == 0:
            raise ClusteringError("empty cluster in assignment")
        if self.inertia < 0:
            raise ClusteringError("negative inertia")


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) matrix of squared euclidean distances."""
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_seed(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.einsum("nd,nd->n", x - centroids[0], x - centroids[0])
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass sits on chosen centroids; pick uniformly
            idx = rng.integers(n)
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[i] = x[idx]
        d2 = np.minimum(d2, np.einsum("nd,nd->n", x - centroids[i], x - centroids[i]))
    return centroids


def k_means(x: np.ndarray, k: int, seed: int = 0, max_iter: int = 300) -> ClusterAssignment:
    """Lloyd iterations from k-means++ seeding; same seed gives identical output."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ClusteringError("input must be a 2-d matrix with at least one column")
    n = x.shape[0]
    if k < 1:
        raise ClusteringError("k must be at least 1")
    if k > n:
        raise ClusteringError(f"k={k} exceeds the {n} available rows")
    if not np.isfinite(x).all():
        raise ClusteringError("non-finite entries in input")

    rng = np.random.default_rng(seed)
    centroids = _plus_plus_seed(x, k, rng)
    labels = np.zeros(n, dtype=np.int64)
    prev_inertia = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = _squared_distances(x, centroids)
        new_labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), new_labels].sum())

        # repair empty clusters with the point farthest from its own centroid,
        # drawn from clusters that can spare one
        counts = np.bincount(new_labels, minlength=k)
        while (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            own = d2[np.arange(n), new_labels].copy()
            own[counts[new_labels] <= 1] = -np.inf
            far = int(own.argmax())
            if own[far] == -np.inf:
                raise ClusteringError("cannot populate every cluster (duplicate points?)")
            counts[new_labels[far]] -= 1
            new_labels[far] = empty
            counts[empty] += 1
            centroids[empty] = x[far]
            d2 = _squared_distances(x, centroids)
            inertia = float(d2[np.arange(n), new_labels].sum())

        assert inertia <= prev_inertia + 1e-9, "inertia increased between iterations"
        converged = iterations > 1 and np.array_equal(new_labels, labels)
        labels = new_labels
        prev_inertia = inertia
        for c in range(k):
            centroids[c] = x[labels == c].mean(axis=0)
        if converged:
            break

    d2 = _squared_distances(x, centroids)
    inertia = float(d2[np.arange(n), labels].sum())
    return ClusterAssignment(
        k=k, labels=labels, centroids=centroids, inertia=inertia, iterations=iterations
    )


def silhouette(x: np.ndarray, assignment: ClusterAssignment) -> float:
    """Mean silhouette over all points; singleton-cluster points contribute 0."""
    x = np.asarray(x, dtype=np.float64)
    k = assignment.k
    if k < 2:
        raise ClusteringError("silhouette needs at least 2 clusters")
    labels = assignment.labels
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
    counts = np.bincount(labels, minlength=k)

    # per-point mean distance to each cluster
    sums = np.zeros((n, k))
    for c in range(k):
        sums[:, c] = dist[:, labels == c].sum(axis=1)

    scores = np.zeros(n)
    for i in range(n):
        c = labels[i]
        if counts[c] == 1:
            continue  # contributes 0
        a = sums[i, c] / (counts[c] - 1)
        b = min(sums[i, o] / counts[o] for o in range(k) if o != c)
        denom = max(a, b)
        if denom > 0:
            scores[i] = (b - a) / denom
    return float(scores.mean())
