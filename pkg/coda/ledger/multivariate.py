# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Covariance biplot and k-means clustering of clr-transformed firms.

Euclidean distances between clr rows are Aitchison distances between the
compositions, so both analyses run standard algorithms on the clr matrix.

Biplot convention: with the column-centred clr matrix ``Z = U S V'``, firm
scores are ``sqrt(n-1) U[:, :2]`` and ray coordinates ``V[:, :2] S / sqrt(n-1)``.
Each dimension is flipped so that its largest-magnitude ray coordinate is
positive.

"""

from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr
from sklearn.cluster import KMeans
from sklearn.metrics import calinski_harabasz_score, silhouette_score

from .composition import (
    CompositionalCentre,
    CompositionSet,
    compositional_centre,
    require_valid,
)
from .exception import ClusterError, DegenerateDataError
from .transforms import clr

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 25
DEFAULT_SEED = 42
MAX_ITERATIONS = 300
ZERO_VARIANCE_TOLERANCE = 1e-10
MIN_LINK_LENGTH = 1e-9


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BiplotModel:
    parts: Tuple[str, ...]
    firms: Tuple[str, ...]
    firm_scores: np.ndarray
    ray_coords: np.ndarray
    explained_variance_fraction: float
    singular_values: np.ndarray

    def __post_init__(self):
        for name in ("firm_scores", "ray_coords", "singular_values"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

    @property
    def dimension_fractions(self) -> np.ndarray:
        """Fraction of the total clr variance carried by each dimension."""
        squares = self.singular_values**2
        return squares / squares.sum()

    def ray(self, part: str) -> np.ndarray:
        return self.ray_coords[self.parts.index(part)]


def biplot(dataset: CompositionSet) -> BiplotModel:
    """Covariance biplot of the clr-transformed firms.

    Raises:
        CompositionValidationError: the dataset is not valid
        DegenerateDataError: not more firms than parts, or a clr rank below 2

    """
    require_valid(dataset)
    n, D = dataset.n, dataset.D
    if n <= D:
        raise DegenerateDataError(
            f"Biplot needs more firms than parts, got {n} firms for {D} parts"
        )
    z = clr(dataset).values
    z = z - z.mean(axis=0)
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    tolerance = ZERO_VARIANCE_TOLERANCE * math.sqrt(n * D)
    rank = int((s > tolerance).sum())
    if rank == 0:
        raise DegenerateDataError("degenerate: zero variance")
    if rank < 2:
        raise DegenerateDataError(
            f"degenerate: clr matrix has rank {rank}, a biplot needs rank 2"
        )

    scores = math.sqrt(n - 1) * u[:, :2]
    rays = vt[:2].T * s[:2] / math.sqrt(n - 1)
    for d in range(2):
        largest = np.argmax(np.abs(rays[:, d]))
        if rays[largest, d] < 0:
            rays[:, d] = -rays[:, d]
            scores[:, d] = -scores[:, d]

    squares = s**2
    explained = float(squares[:2].sum() / squares.sum())
    logger.info("Biplot explains %.2f%% of the clr variance", 100 * explained)
    return BiplotModel(
        parts=dataset.part_names,
        firms=dataset.firms,
        firm_scores=scores,
        ray_coords=rays,
        explained_variance_fraction=explained,
        singular_values=s,
    )


@dataclass(frozen=True)
class LinkProjection:
    numerator: str
    denominator: str
    projections: np.ndarray
    quality: float


def link_projection(
    b: BiplotModel, i: str, j: str, dataset: CompositionSet
) -> LinkProjection:
    """Project the firms on the link from ray ``j`` to ray ``i``.

    The projection approximates ``log(x_i/x_j)``; ``quality`` is the Spearman
    rank correlation between both.

    Raises:
        DegenerateDataError: ``i == j`` or the link is shorter than 1e-9

    """
    if i == j:
        raise DegenerateDataError(f"Cannot link part {i} with itself")
    direction = b.ray(i) - b.ray(j)
    length = float(np.linalg.norm(direction))
    if length < MIN_LINK_LENGTH:
        raise DegenerateDataError("link too short to define a direction")
    projections = b.firm_scores @ (direction / length)
    exact = np.log(dataset.column(i) / dataset.column(j))
    quality = float(spearmanr(projections, exact).correlation)
    logger.debug("Link %s/%s: rank correlation %.4f", i, j, quality)
    return LinkProjection(
        numerator=i,
        denominator=j,
        projections=_frozen_array(projections),
        quality=quality,
    )


@dataclass(frozen=True)
class ClusterFit:
    """Best of several seeded Lloyd runs on arbitrary feature rows."""

    k: int
    assignment: Tuple[int, ...]
    centroids: np.ndarray
    within_ss: float
    silhouette: float
    calinski_harabasz: float
    restarts: int
    seed: int
    restart_within_ss: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "centroids", _frozen_array(self.centroids))

    @property
    def sizes(self) -> Tuple[int, ...]:
        counts = np.bincount(np.asarray(self.assignment), minlength=self.k)
        return tuple(int(c) for c in counts)


@dataclass(frozen=True)
class ClusterModel:
    k: int
    assignment: Tuple[int, ...]
    clr_centroids: np.ndarray
    centres: Tuple[CompositionalCentre, ...]
    within_ss: float
    silhouette: float
    calinski_harabasz: float
    restarts: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "clr_centroids", _frozen_array(self.clr_centroids))

    @property
    def sizes(self) -> Tuple[int, ...]:
        counts = np.bincount(np.asarray(self.assignment), minlength=self.k)
        return tuple(int(c) for c in counts)

    def labels(self) -> Tuple[str, ...]:
        """1-based cluster labels, as written in the Cluster column."""
        return tuple(str(c + 1) for c in self.assignment)


def _within_ss(rows: np.ndarray, assignment: np.ndarray, centroids: np.ndarray):
    return float(((rows - centroids[assignment]) ** 2).sum())


def _relabel(assignment: np.ndarray) -> np.ndarray:
    """Number clusters by order of first appearance."""
    _, first, inverse = np.unique(assignment, return_index=True, return_inverse=True)
    order = np.argsort(first)
    mapping = np.empty_like(order)
    mapping[order] = np.arange(order.size)
    return mapping[inverse.ravel()]


def _lloyd(rows: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    start = rng.choice(rows.shape[0], size=k, replace=False)
    model = KMeans(
        n_clusters=k,
        init=rows[start],
        n_init=1,
        max_iter=MAX_ITERATIONS,
        tol=0.0,
        algorithm="lloyd",
    ).fit(rows)
    if model.n_iter_ >= MAX_ITERATIONS:
        logger.warning("k-means restart stopped after %s iterations", model.n_iter_)
    return np.asarray(model.labels_)


def kmeans_rows(
    rows: np.ndarray,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> ClusterFit:
    """Seeded multi-start k-means with Euclidean distance.

    Each restart draws k distinct rows as initial centroids from its own
    generator, spawned from ``seed``; the restart with the smallest
    within-cluster sum of squares wins, ties going to the earliest restart.

    Raises:
        ClusterError: ``k`` is not in [2, n-1] or ``restarts`` < 1

    """
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    if not 2 <= k <= n - 1:
        raise ClusterError(f"k must lie in [2, {n - 1}], got {k}")
    if restarts < 1:
        raise ClusterError(f"At least one restart is needed, got {restarts}")

    best: Optional[Tuple[float, np.ndarray, np.ndarray]] = None
    restart_ss = []
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        assignment = _relabel(_lloyd(rows, k, np.random.default_rng(child)))
        if np.unique(assignment).size != k:
            raise ClusterError(f"Restart {r} ended with an empty cluster")
        centroids = np.array([rows[assignment == c].mean(axis=0) for c in range(k)])
        ss = _within_ss(rows, assignment, centroids)
        restart_ss.append(ss)
        logger.debug("k-means k=%s restart %s: within SS %.6f", k, r, ss)
        if best is None or ss < best[0]:
            best = (ss, assignment, centroids)
    assert best is not None
    within, assignment, centroids = best
    assert all(within <= ss for ss in restart_ss)

    return ClusterFit(
        k=k,
        assignment=tuple(int(a) for a in assignment),
        centroids=centroids,
        within_ss=within,
        silhouette=silhouette(rows, assignment),
        calinski_harabasz=calinski_harabasz(rows, assignment),
        restarts=restarts,
        seed=seed,
        restart_within_ss=tuple(restart_ss),
    )


def kmeans_clr(
    dataset: CompositionSet,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> ClusterModel:
    """k-means of the firms on their clr rows, i.e. with Aitchison distance."""
    require_valid(dataset)
    fit = kmeans_rows(clr(dataset).values, k, restarts=restarts, seed=seed)
    assignment = np.asarray(fit.assignment)
    centres = tuple(
        compositional_centre(dataset, assignment == c) for c in range(fit.k)
    )
    logger.info(
        "k-means k=%s: sizes %s, silhouette %.3f, CH %.1f",
        k,
        fit.sizes,
        fit.silhouette,
        fit.calinski_harabasz,
    )
    return ClusterModel(
        k=fit.k,
        assignment=fit.assignment,
        clr_centroids=fit.centroids,
        centres=centres,
        within_ss=fit.within_ss,
        silhouette=fit.silhouette,
        calinski_harabasz=fit.calinski_harabasz,
        restarts=restarts,
        seed=seed,
    )


def _cluster_count(assignment: np.ndarray) -> int:
    return int(np.unique(assignment).size)


def silhouette(rows: np.ndarray, assignment: Sequence[int]) -> float:
    """Average silhouette width with Euclidean distance.

    Points alone in their cluster score 0.

    Raises:
        ClusterError: fewer than 2 clusters

    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(assignment)
    k = _cluster_count(labels)
    if k < 2:
        raise ClusterError("Silhouette needs at least 2 clusters")
    if k == rows.shape[0]:
        return 0.0
    return float(silhouette_score(rows, labels, metric="euclidean"))


def calinski_harabasz(rows: np.ndarray, assignment: Sequence[int]) -> float:
    """Between-cluster over within-cluster dispersion, each per degree of
    freedom; ``math.inf`` when the within-cluster sum of squares is zero.

    Raises:
        ClusterError: the number of clusters is not in [2, n]

    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(assignment)
    k = _cluster_count(labels)
    n = rows.shape[0]
    if not 2 <= k <= n:
        raise ClusterError(
            f"Calinski-Harabasz needs between 2 and {n} clusters, got {k}"
        )
    within = sum(
        float(((rows[labels == c] - rows[labels == c].mean(axis=0)) ** 2).sum())
        for c in np.unique(labels)
    )
    if within == 0:
        return math.inf
    return float(calinski_harabasz_score(rows, labels))


@dataclass(frozen=True)
class SweepRow:
    k: int
    silhouette: float
    calinski_harabasz: float
    within_ss: float
    best_silhouette: bool = False
    best_calinski_harabasz: bool = False


def sweep_k(
    dataset: CompositionSet,
    k_min: int = 2,
    k_max: int = 8,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> List[SweepRow]:
    """Cluster for every k in [k_min, k_max] and mark the best k per index."""
    if k_min > k_max:
        raise ClusterError(f"k_min ({k_min}) is larger than k_max ({k_max})")
    if k_max > dataset.n - 1:
        raise ClusterError(f"k_max must be at most {dataset.n - 1}, got {k_max}")
    models = [
        kmeans_clr(dataset, k, restarts=restarts, seed=seed)
        for k in range(k_min, k_max + 1)
    ]
    best_s = int(np.argmax([m.silhouette for m in models]))
    best_ch = int(np.argmax([m.calinski_harabasz for m in models]))
    return [
        SweepRow(
            k=m.k,
            silhouette=m.silhouette,
            calinski_harabasz=m.calinski_harabasz,
            within_ss=m.within_ss,
            best_silhouette=i == best_s,
            best_calinski_harabasz=i == best_ch,
        )
        for i, m in enumerate(models)
    ]
