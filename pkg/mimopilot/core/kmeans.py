from typing import List, Optional, Sequence

import numpy as np

from mimopilot.config import KMEANS_MAX_ITER, KMEANS_TOL
from mimopilot.core.errors import ClusteringError


class ClusterModel:
    """
    Result of a k-means run.

    Attributes:
        centroids: C x d array.
        labels: cluster id of every point, in 0..C-1; no cluster is empty.
        inertia: total within-cluster squared distance.
        inertia_history: inertia after each assignment step, non-increasing.
        n_iter: Lloyd iterations performed.
    """

    def __init__(self, centroids, labels, inertia_history: List[float], n_iter: int):
        self.centroids = np.asarray(centroids, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.inertia_history = list(inertia_history)
        self.inertia = self.inertia_history[-1]
        self.n_iter = n_iter

    @property
    def C(self) -> int:
        return len(self.centroids)

    def groups(self) -> List[np.ndarray]:
        """Point indices of each cluster, in ascending order."""
        return [np.nonzero(self.labels == c)[0] for c in range(self.C)]


def kmeans(
    points,
    C: int,
    max_iter: int = KMEANS_MAX_ITER,
    tol: float = KMEANS_TOL,
    rng: Optional[np.random.Generator] = None,
) -> ClusterModel:
    """
    Lloyd's algorithm from k-means++ seeding.

    Stops once no centroid moves by `tol` or more, or after `max_iter` iterations. A cluster left empty takes over
    the point farthest from its own centroid.

    Args:
        points: n points, either n x d or a flat sequence of scalars (d = 1)
        C (int): number of clusters
        max_iter (int): iteration cap
        tol (float): centroid movement threshold
        rng: random stream for the seeding

    Raises:
        ClusteringError: fewer points than clusters
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if C < 1 or len(X) < C:
        raise ClusteringError(f"cannot form {C} clusters from {len(X)} points")
    if rng is None:
        rng = np.random.default_rng(0)

    centroids = kmeans_plusplus(X, C, rng)
    labels, centroids = _assign(X, centroids)
    history = [_inertia(X, centroids, labels)]
    n_iter = 0
    while n_iter < max_iter:
        n_iter += 1
        updated = np.stack([X[labels == c].mean(axis=0) for c in range(C)])
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        labels, centroids = _assign(X, updated)
        history.append(_inertia(X, centroids, labels))
        if shift < tol:
            break
    return ClusterModel(centroids, labels, history, n_iter)


def kmeans_plusplus(X: np.ndarray, C: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centroids = np.empty((C, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest = np.sum((X - centroids[0]) ** 2, axis=1)
    for c in range(1, C):
        total = closest.sum()
        if total > 0:
            index = rng.choice(n, p=closest / total)
        else:
            index = rng.integers(n)
        centroids[c] = X[index]
        closest = np.minimum(closest, np.sum((X - centroids[c]) ** 2, axis=1))
    return centroids


def _assign(X: np.ndarray, centroids: np.ndarray):
    distances = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(distances, axis=1)
    centroids = centroids.copy()
    C = len(centroids)
    counts = np.bincount(labels, minlength=C)
    for empty in np.nonzero(counts == 0)[0]:
        own = np.sum((X - centroids[labels]) ** 2, axis=1)
        own[counts[labels] < 2] = -1.0
        donor = int(np.argmax(own))
        counts[labels[donor]] -= 1
        labels[donor] = empty
        counts[empty] = 1
        centroids[empty] = X[donor]
    return labels, centroids


def _inertia(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((X - centroids[labels]) ** 2))


def partition_population(
    population: Sequence, fitness: Sequence[float], C: int, rng: Optional[np.random.Generator] = None
) -> List[np.ndarray]:
    """
    Split a population into C subpopulations by k-means over scalar fitness.

    Returns:
        C index arrays into `population`, ordered by ascending cluster centroid; together they cover every
        individual exactly once.

    Raises:
        ClusteringError: population smaller than C
    """
    if len(population) != len(fitness):
        raise ClusteringError(f"{len(population)} individuals but {len(fitness)} fitness values")
    if len(population) < C:
        raise ClusteringError(f"population of {len(population)} cannot be split into {C} subpopulations")
    model = kmeans(np.asarray(fitness, dtype=float), C, rng=rng)
    groups = model.groups()
    order = sorted(range(C), key=lambda c: (model.centroids[c, 0], groups[c][0]))
    return [groups[c] for c in order]
