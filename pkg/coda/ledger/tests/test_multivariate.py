# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import math

import numpy as np
import pytest

from coda.ledger.exception import ClusterError, DegenerateDataError
from coda.ledger.multivariate import (
    biplot,
    calinski_harabasz,
    kmeans_clr,
    kmeans_rows,
    link_projection,
    silhouette,
    sweep_k,
)
from coda.ledger.reproduce import (
    CALINSKI_HARABASZ,
    CLUSTER_CENTRES,
    SILHOUETTE,
    find_reference_partition,
)
from coda.ledger.transforms import clr


def test_winery_biplot(winery):
    model = biplot(winery)
    assert model.explained_variance_fraction == pytest.approx(0.9899, abs=1e-3)
    assert model.firm_scores.shape == (109, 2)
    assert model.ray_coords.shape == (4, 2)
    assert model.dimension_fractions.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        model.firm_scores[0, 0] = 1.0


def test_biplot_sign_convention(random_compositions):
    for dataset in random_compositions[:50]:
        if dataset.n <= dataset.D:
            continue
        rays = biplot(dataset).ray_coords
        for d in range(2):
            assert rays[np.argmax(np.abs(rays[:, d])), d] > 0


def test_biplot_reconstructs_three_parts(random_compositions):
    """With three parts two dimensions hold the whole clr variance."""
    for dataset in random_compositions:
        if dataset.D != 3:
            continue
        model = biplot(dataset)
        assert model.explained_variance_fraction == pytest.approx(1.0)
        z = clr(dataset).values
        z = z - z.mean(axis=0)
        assert model.firm_scores @ model.ray_coords.T == pytest.approx(z, abs=1e-9)


def test_biplot_needs_more_firms_than_parts(composition_set):
    dataset = composition_set([[1.0, 2.0, 3.0], [2.0, 1.0, 3.0], [3.0, 2.0, 1.0]])
    with pytest.raises(DegenerateDataError, match="more firms than parts"):
        biplot(dataset)


def test_biplot_zero_variance(composition_set):
    dataset = composition_set([[1.0, 2.0, 3.0]] * 3 + [[2.0, 4.0, 6.0]] * 2)
    with pytest.raises(DegenerateDataError, match="zero variance"):
        biplot(dataset)


def test_biplot_rank_one(composition_set):
    # clr rows are multiples of (1, 0, -1)
    t = [0.5, 1.0, 1.5, 2.0, 2.5]
    dataset = composition_set([[math.exp(v), 1.0, math.exp(-v)] for v in t])
    with pytest.raises(DegenerateDataError, match="rank 1"):
        biplot(dataset)


def test_link_projection_exact_with_three_parts(random_compositions):
    dataset = next(d for d in random_compositions if d.D == 3)
    link = link_projection(biplot(dataset), "x1", "x3", dataset)
    assert link.quality == pytest.approx(1.0)
    assert link.projections.shape == (dataset.n,)


def test_winery_link_quality(winery):
    model = biplot(winery)
    link = link_projection(model, "x1", "x4", winery)
    assert -1.0 <= link.quality <= 1.0
    assert (link.numerator, link.denominator) == ("x1", "x4")


def test_link_projection_errors(composition_set):
    dataset = composition_set(
        [
            [1.0, 1.0, 3.0, 2.0],
            [2.0, 2.0, 1.0, 5.0],
            [4.0, 4.0, 5.0, 1.0],
            [3.0, 3.0, 1.0, 2.0],
            [1.0, 1.0, 2.0, 7.0],
        ]
    )
    model = biplot(dataset)
    with pytest.raises(DegenerateDataError, match="itself"):
        link_projection(model, "x1", "x1", dataset)
    # x1 and x2 are always equal, their rays coincide
    with pytest.raises(DegenerateDataError, match="too short"):
        link_projection(model, "x1", "x2", dataset)


@pytest.mark.parametrize("k,restarts", [(1, 5), (10, 5), (3, 0)])
def test_kmeans_rows_errors(k, restarts):
    rows = np.arange(20.0).reshape(10, 2)
    with pytest.raises(ClusterError):
        kmeans_rows(rows, k, restarts=restarts)


def test_kmeans_rows_separated_groups():
    rng = np.random.default_rng(3)
    rows = np.vstack(
        [rng.normal(0.0, 0.1, (10, 2)), rng.normal(5.0, 0.1, (12, 2))]
    )
    fit = kmeans_rows(rows, 2, restarts=4, seed=7)
    assert fit.assignment[:10] == (0,) * 10
    assert fit.assignment[10:] == (1,) * 12
    assert fit.sizes == (10, 12)
    assert fit.silhouette > 0.9
    assert len(fit.restart_within_ss) == 4
    assert all(fit.within_ss <= ss for ss in fit.restart_within_ss)


def test_kmeans_clr_is_deterministic(winery):
    first = kmeans_clr(winery, 3, restarts=5, seed=11)
    second = kmeans_clr(winery, 3, restarts=5, seed=11)
    assert first.assignment == second.assignment
    assert first.within_ss == second.within_ss
    assert sum(first.sizes) == 109
    assert first.assignment[0] == 0
    assert set(first.labels()) == {"1", "2", "3"}
    assert len(first.centres) == 3
    for centre in first.centres:
        assert sum(centre.values) == pytest.approx(1.0)


def test_clusters_invariant_under_perturbation(random_compositions):
    dataset = next(d for d in random_compositions if d.n >= 20)
    factor = np.linspace(0.5, 3.0, dataset.D)
    shifted = type(dataset)(
        parts=dataset.parts,
        firms=dataset.firms,
        values=dataset.values * factor,
        extras=dataset.extras,
    )
    original = kmeans_clr(dataset, 3, restarts=5, seed=1)
    perturbed = kmeans_clr(shifted, 3, restarts=5, seed=1)
    assert original.assignment == perturbed.assignment
    assert original.silhouette == pytest.approx(perturbed.silhouette, abs=1e-9)
    assert original.calinski_harabasz == pytest.approx(
        perturbed.calinski_harabasz, rel=1e-9
    )


def test_silhouette_edge_cases():
    rows = np.array([[0.0], [1.0], [5.0]])
    assert silhouette(rows, [0, 1, 2]) == 0.0
    with pytest.raises(ClusterError):
        silhouette(rows, [0, 0, 0])


def test_silhouette_value():
    rows = np.array([[0.0], [1.0], [10.0], [11.0]])
    # a = 1 everywhere, b = 10.5 or 9.5
    expected = np.mean([1 - 1 / 10.5, 1 - 1 / 9.5, 1 - 1 / 9.5, 1 - 1 / 10.5])
    assert silhouette(rows, [0, 0, 1, 1]) == pytest.approx(expected)


def test_calinski_harabasz():
    rows = np.array([[0.0], [1.0], [10.0], [11.0]])
    # between 100 over 1 degree of freedom, within 1 over 2
    assert calinski_harabasz(rows, [0, 0, 1, 1]) == pytest.approx(200.0)
    assert calinski_harabasz(np.array([[0.0], [0.0], [1.0], [1.0]]), [0, 0, 1, 1]) == (
        math.inf
    )
    # one firm per cluster
    assert calinski_harabasz(rows, [0, 1, 2, 3]) == math.inf
    with pytest.raises(ClusterError):
        calinski_harabasz(rows, [0, 0, 0, 0])


def test_sweep(winery):
    rows = sweep_k(winery, 2, 4, restarts=3, seed=5)
    assert [r.k for r in rows] == [2, 3, 4]
    assert sum(r.best_silhouette for r in rows) == 1
    assert sum(r.best_calinski_harabasz for r in rows) == 1
    best = max(rows, key=lambda r: r.silhouette)
    assert best.best_silhouette


def test_sweep_errors(winery):
    with pytest.raises(ClusterError, match="larger"):
        sweep_k(winery, 5, 3)
    with pytest.raises(ClusterError, match="at most"):
        sweep_k(winery, 2, 109)


def test_reference_partition(winery):
    model, matched = find_reference_partition(winery)
    if not matched:
        pytest.skip("reference partition not reached with the searched seeds")
    assert sorted(model.sizes) == sorted(CLUSTER_CENTRES)
    assert model.silhouette == pytest.approx(SILHOUETTE, abs=5e-3)
    assert model.calinski_harabasz == pytest.approx(CALINSKI_HARABASZ, abs=0.5)
