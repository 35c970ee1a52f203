# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import logging
import math
import os

import pandas as pd
import pytest

from coda.ledger.exception import OutputError
from coda.ledger.graph import builtin_graph
from coda.ledger.ratios import RatioScheme, firm_ratio_table
from coda.ledger.reproduce import (
    REPORT_FILE,
    Check,
    ComparisonReport,
    check_derivation,
    check_toy,
    find_reference_partition,
    ratio_cluster_contrast,
    reproduce,
)

TABLES = [
    "toy_logratios",
    "zeros",
    "centre",
    "centre_ratios",
    "firm_ratios",
    "logratio_summary",
    "biplot",
    "biplot_links",
    "clusters",
    "cluster_indices",
    "cluster_ratios",
    "cluster_sweep",
    "ratio_cluster_indices",
    "regression_pairwise",
    "regression_ilr",
    "hypotheses",
]
FIGURES = [
    "standard_ratios",
    "pairwise_logratios",
    "biplot",
    "biplot_clusters",
    "clusters_by_brand",
    "cluster_sweep",
    "scatter_y1_age",
]


@pytest.fixture(scope="module")
def reproduced(tmp_path_factory, winery):
    out_dir = str(tmp_path_factory.mktemp("reproduce"))
    return out_dir, reproduce(out_dir, dataset=winery)


def test_reference_values(reproduced):
    _, report = reproduced
    assert report.failed == [], "\n".join(str(c) for c in report.failed)
    assert report.passed
    names = [c.name for c in report.checks]
    assert "biplot/explained_variance" in names
    assert "graph/derived y4 = y1 - y3" in names
    assert any(name.startswith("regression/ilr_y2 vs y2") for name in names)


def test_artifacts(reproduced):
    out_dir, report = reproduced
    for name in TABLES:
        assert name + ".csv" in report.artifacts
        assert os.path.getsize(os.path.join(out_dir, name + ".csv")) > 0
    for name in FIGURES:
        assert os.path.exists(os.path.join(out_dir, name + ".svg"))
    frame = pd.read_csv(os.path.join(out_dir, "transformed.csv"), dtype=str)
    header = list(frame.columns)
    assert header[:7] == ["Firm", "x1", "x2", "x3", "x4", "Brand", "Age"]
    assert {"y1", "y2", "y3", "clr_x1", "ilr_1:x1,x2|x3,x4", "Cluster"} <= set(header)
    assert len(frame) == 109
    assert set(frame["Cluster"]) == {"1", "2", "3"}


def test_report_file(reproduced):
    out_dir, report = reproduced
    with open(os.path.join(out_dir, REPORT_FILE)) as f:
        text = f.read()
    assert text == report.format()
    assert text.rstrip().endswith("result: PASS")
    assert "derivation: y4 = y1 - y3" in text
    assert "k-means on the standard ratios gives cluster sizes" in text


def test_toy_checks():
    report = ComparisonReport()
    check_toy(report)
    assert report.passed
    assert len(report.checks) == 7


def test_derivation_check(winery):
    report = ComparisonReport()
    check_derivation(report, winery, builtin_graph("dupont4", winery.parts))
    (check,) = report.checks
    assert check.passed
    assert report.notes == ["derivation: y4 = y1 - y3"]


def test_ratio_clusters_unbalanced(winery):
    scheme = RatioScheme.for_parts("dupont4", winery.parts)
    clusters, _ = find_reference_partition(winery)
    report = ComparisonReport()
    fit = ratio_cluster_contrast(
        report, firm_ratio_table(winery, scheme), scheme.ratio_names, clusters
    )
    assert fit.k == 3
    assert sum(fit.sizes) <= winery.n
    # outlying ratios end up in tiny clusters
    assert max(fit.sizes) > max(clusters.sizes)
    assert min(fit.sizes) < min(clusters.sizes)
    assert [c.name for c in report.checks] == [
        "ratio_cluster/size 101",
        "ratio_cluster/size 7",
        "ratio_cluster/size 1",
        "ratio_cluster/largest above clr largest",
    ]
    assert not any(c.required for c in report.checks)
    assert report.checks[-1].passed
    assert report.notes[0].startswith("k-means on the standard ratios")


@pytest.mark.parametrize(
    "expected,actual,tolerance,passed",
    [
        (1.0, 1.0004, 5e-4, True),
        (1.0, 1.0006, 5e-4, False),
        (86.9, math.inf, 0.5, False),
        (math.inf, math.inf, 0.5, True),
        (0.5, math.nan, 1.0, False),
    ],
)
def test_check(expected, actual, tolerance, passed):
    assert Check("x", expected, actual, tolerance).passed is passed


def test_advisory_checks(caplog):
    report = ComparisonReport()
    with caplog.at_level(logging.WARNING, logger="coda.ledger.reproduce"):
        report.add("cluster/best k", 3, 2, 0, required=False)
    assert report.passed
    assert caplog.records[0].levelno == logging.WARNING
    assert str(report.checks[0]).startswith("WARN")
    report.add("centre/0/x1", 0.2684, 0.3, 5e-5)
    assert not report.passed
    text = report.format()
    assert "summary: 0 passed, 1 failed, 1 advisory warnings" in text
    assert text.endswith("result: FAIL\n")


def test_unwritable_output(tmp_path):
    (tmp_path / "blocker").write_text("")
    with pytest.raises(OutputError):
        reproduce(str(tmp_path / "blocker" / "out"))
