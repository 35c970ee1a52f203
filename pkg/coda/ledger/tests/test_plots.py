# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from coda.ledger.exception import EmptyGroupError, OutputError, UnknownPartError
from coda.ledger.multivariate import SweepRow, biplot
from coda.ledger.plots import (
    boxplot_stats,
    mosaic_layout,
    render_plot,
    summary_statistics,
)

SVG = "{http://www.w3.org/2000/svg}"


def _parse(document: str) -> ET.Element:
    root = ET.fromstring(document)
    assert root.tag == f"{SVG}svg"
    return root


def test_boxplot_quartiles():
    (box,) = boxplot_stats(range(1, 10))
    assert (box.group, box.n) == ("all", 9)
    assert (box.q1, box.median, box.q3) == (3.0, 5.0, 7.0)
    assert (box.lower_whisker, box.upper_whisker) == (1.0, 9.0)
    assert box.outliers == ()
    assert box.iqr == 4.0


def test_boxplot_outlier():
    (box,) = boxplot_stats(list(range(1, 10)) + [100])
    assert box.q1 == pytest.approx(3.25)
    assert box.q3 == pytest.approx(7.75)
    assert box.upper_whisker == 9.0
    assert box.outliers == (100.0,)


def test_boxplot_constant_values(tmp_path):
    (box,) = boxplot_stats([2.0, 2.0, 2.0])
    assert (box.q1, box.median, box.q3) == (2.0, 2.0, 2.0)
    assert (box.lower_whisker, box.upper_whisker) == (2.0, 2.0)
    _parse(render_plot("boxplot", str(tmp_path / "flat.svg"), [box]))


def test_boxplot_groups():
    values = [1.0, 2.0, 3.0, np.nan, 10.0, 20.0]
    groups = ["10", "10", "9", "9", None, "9"]
    stats = boxplot_stats(values, groups)
    assert [(s.group, s.n) for s in stats] == [("9", 2), ("10", 2)]
    with pytest.raises(EmptyGroupError, match="empty group: 8"):
        boxplot_stats(values, groups, order=["8"])
    with pytest.raises(ValueError):
        boxplot_stats(values, groups[:2])


def test_summary_statistics():
    summary = summary_statistics("Age", [1.0, 2.0, 3.0, 4.0, np.nan])
    assert summary.n == 4
    assert summary.mean == 2.5
    assert summary.sd == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert (summary.q1, summary.median, summary.q3) == (1.75, 2.5, 3.25)
    assert math.isnan(summary_statistics("one", [5.0]).sd)
    with pytest.raises(EmptyGroupError):
        summary_statistics("none", [np.nan])


def test_mosaic_layout():
    layout = mosaic_layout(
        ["0", "0", "1", "1", "1", None], ["a", "b", "a", "a", "b", "b"]
    )
    assert [(c.label, c.n) for c in layout] == [("0", 2), ("1", 3)]
    assert [c.width for c in layout] == pytest.approx([0.4, 0.6])
    assert layout[0].segments == (("a", 0.5), ("b", 0.5))
    assert layout[1].segments[0][1] == pytest.approx(2 / 3)
    with pytest.raises(EmptyGroupError):
        mosaic_layout([None], ["a"])


def test_biplot_figure(tmp_path, winery):
    model = biplot(winery)
    groups = winery.extra("Brand").labels()
    path = tmp_path / "figures" / "biplot.svg"
    document = render_plot(
        "biplot", str(path), model, groups, links=[("y1", "x1", "x4")], title="Biplot"
    )
    assert path.read_text(encoding="utf-8") == document
    root = _parse(document)
    assert len(root.findall(f"{SVG}circle")) == 109
    rays = [
        e for e in root.findall(f"{SVG}line") if e.get("stroke") == "#333333"
    ]
    assert len(rays) == 4
    texts = [e.text for e in root.findall(f"{SVG}text")]
    assert {"clr.x1", "clr.x2", "clr.x3", "clr.x4", "y1", "0", "1"} <= set(texts)
    with pytest.raises(UnknownPartError):
        render_plot(
            "biplot", str(tmp_path / "bad.svg"), model, links=[("y", "x1", "x9")]
        )
    assert not (tmp_path / "bad.svg").exists()


def test_scatter_and_mosaic_figures(tmp_path):
    scatter = render_plot(
        "scatter",
        str(tmp_path / "scatter.svg"),
        [1.0, 2.0, np.nan],
        [3.0, 4.0, 5.0],
        groups=["a", "b<c", "a"],
        x_label="Age",
    )
    root = _parse(scatter)
    assert len(root.findall(f"{SVG}circle")) == 2
    assert "b&lt;c" in scatter

    layout = mosaic_layout(["0", "1", "1"], ["1", "1", "2"])
    root = _parse(render_plot("mosaic", str(tmp_path / "mosaic.svg"), layout))
    # two legend squares plus one rectangle per column and segment
    assert len(root.findall(f"{SVG}rect")) == 1 + 2 * 2 + 2


def test_sweep_figure(tmp_path):
    rows = [
        SweepRow(k=2, silhouette=0.4, calinski_harabasz=80.0, within_ss=10.0),
        SweepRow(k=3, silhouette=0.42, calinski_harabasz=math.inf, within_ss=0.0),
    ]
    root = _parse(render_plot("sweep", str(tmp_path / "sweep.svg"), rows))
    assert len(root.findall(f"{SVG}polyline")) == 2


def test_render_errors(tmp_path):
    with pytest.raises(ValueError, match="Unknown plot kind"):
        render_plot("pie", str(tmp_path / "pie.svg"))  # type: ignore[arg-type]
    (tmp_path / "blocker").write_text("")
    (box,) = boxplot_stats([1.0, 2.0])
    with pytest.raises(OutputError):
        render_plot("boxplot", str(tmp_path / "blocker" / "box.svg"), [box])
