# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Descriptive statistics and standalone SVG figures.

Quartiles interpolate linearly between order statistics at position
``1 + (n - 1) p``. Whiskers end at the most extreme observations inside the
Tukey fences ``[Q1 - 1.5 IQR, Q3 + 1.5 IQR]``; observations outside are
outliers.

"""

from dataclasses import dataclass
import logging
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Literal

from .composition import label_sort_key
from .exception import EmptyGroupError, OutputError, UnknownPartError
from .multivariate import BiplotModel, SweepRow

logger = logging.getLogger(__name__)

PlotKind = Literal["boxplot", "scatter", "mosaic", "biplot", "sweep"]

FENCE_FACTOR = 1.5

COLORS = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
]

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 80
MARGIN_RIGHT = 160
MARGIN_TOP = 50
MARGIN_BOTTOM = 70


@dataclass(frozen=True)
class BoxplotStats:
    group: str
    n: int
    median: float
    q1: float
    q3: float
    lower_whisker: float
    upper_whisker: float
    outliers: Tuple[float, ...]

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def _box(group: str, values: np.ndarray) -> BoxplotStats:
    q1, median, q3 = np.percentile(values, [25, 50, 75], method="linear")
    low_fence = q1 - FENCE_FACTOR * (q3 - q1)
    high_fence = q3 + FENCE_FACTOR * (q3 - q1)
    inside = values[(values >= low_fence) & (values <= high_fence)]
    outliers = values[(values < low_fence) | (values > high_fence)]
    return BoxplotStats(
        group=group,
        n=int(values.size),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        lower_whisker=float(inside.min()),
        upper_whisker=float(inside.max()),
        outliers=tuple(float(v) for v in np.sort(outliers)),
    )


def boxplot_stats(
    values: Sequence[float],
    groups: Optional[Sequence[Optional[str]]] = None,
    order: Optional[Sequence[str]] = None,
) -> List[BoxplotStats]:
    """Boxplot statistics of ``values``, per group when ``groups`` is given.

    NaN values and values of firms without group are left out.

    Raises:
        EmptyGroupError: a group, or the whole sample, holds no value

    """
    data = np.asarray(values, dtype=float)
    if groups is None:
        labels: List[Optional[str]] = ["all"] * data.size
    else:
        labels = list(groups)
        if len(labels) != data.size:
            raise ValueError(f"{len(labels)} group labels for {data.size} values")
    keep = ~np.isnan(data)
    if not keep.all():
        logger.debug("Boxplot ignores %s missing values", int((~keep).sum()))
    if order is None:
        order = sorted({lbl for lbl in labels if lbl is not None}, key=label_sort_key)
        if not order:
            raise EmptyGroupError("empty group")
    stats = []
    for label in order:
        mask = keep & np.array([lbl == label for lbl in labels], dtype=bool)
        if not mask.any():
            raise EmptyGroupError(f"empty group: {label}")
        stats.append(_box(label, data[mask]))
    return stats


@dataclass(frozen=True)
class SummaryStatistics:
    name: str
    n: int
    mean: float
    sd: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def summary_statistics(name: str, values: Sequence[float]) -> SummaryStatistics:
    """Classical summary of one column; NaN values are left out."""
    data = np.asarray(values, dtype=float)
    data = data[~np.isnan(data)]
    if data.size == 0:
        raise EmptyGroupError(f"empty group: {name}")
    q1, median, q3 = np.percentile(data, [25, 50, 75], method="linear")
    return SummaryStatistics(
        name=name,
        n=int(data.size),
        mean=float(data.mean()),
        sd=float(data.std(ddof=1)) if data.size > 1 else math.nan,
        minimum=float(data.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        maximum=float(data.max()),
    )


@dataclass(frozen=True)
class MosaicColumn:
    label: str
    n: int
    width: float
    segments: Tuple[Tuple[str, float], ...]


def mosaic_layout(
    columns: Sequence[Optional[str]], segments: Sequence[Optional[str]]
) -> List[MosaicColumn]:
    """Column widths proportional to group sizes, segment heights to the
    within-group shares of the second category.

    Firms missing either label are left out.

    """
    if len(columns) != len(segments):
        raise ValueError("Mosaic needs one column label and one segment per firm")
    pairs = [
        (c, s) for c, s in zip(columns, segments) if c is not None and s is not None
    ]
    if not pairs:
        raise EmptyGroupError("empty group")
    column_labels = sorted({c for c, _ in pairs}, key=label_sort_key)
    segment_labels = sorted({s for _, s in pairs}, key=label_sort_key)
    layout = []
    for c in column_labels:
        members = [s for col, s in pairs if col == c]
        layout.append(
            MosaicColumn(
                label=c,
                n=len(members),
                width=len(members) / len(pairs),
                segments=tuple(
                    (s, members.count(s) / len(members)) for s in segment_labels
                ),
            )
        )
    return layout


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("'", "&#39;")
    )


def _text(x: float, y: float, text: str, size: int = 13, anchor: str = "middle"):
    return (
        f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}" font-size="{size}" '
        f'font-family="Arial">{_escape(text)}</text>'
    )


def _line(x1: float, y1: float, x2: float, y2: float, color="#000000", width=1):
    return (
        f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
        f'stroke="{color}" stroke-width="{width}"/>'
    )


def _format_tick(value: float) -> str:
    if abs(value) >= 100:
        return f"{value:.0f}"
    if abs(value) >= 10:
        return f"{value:.1f}"
    return f"{value:.2f}"


class _Frame:
    """Linear mapping from a data box to the plot area, with axes."""

    def __init__(self, x_range: Tuple[float, float], y_range: Tuple[float, float]):
        self.x0, self.x1 = self._pad(*x_range)
        self.y0, self.y1 = self._pad(*y_range)
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = HEIGHT - MARGIN_BOTTOM

    @staticmethod
    def _pad(low: float, high: float) -> Tuple[float, float]:
        if not (math.isfinite(low) and math.isfinite(high)):
            raise ValueError("Plot ranges must be finite")
        if high - low < 1e-12:
            return low - 1.0, high + 1.0
        pad = 0.05 * (high - low)
        return low - pad, high + pad

    def x(self, value: float) -> float:
        return self.left + (value - self.x0) / (self.x1 - self.x0) * (
            self.right - self.left
        )

    def y(self, value: float) -> float:
        return self.bottom - (value - self.y0) / (self.y1 - self.y0) * (
            self.bottom - self.top
        )

    def axes(self, x_label: str, y_label: str, x_ticks: bool = True) -> List[str]:
        lines = [
            _line(self.left, self.bottom, self.right, self.bottom, width=2),
            _line(self.left, self.top, self.left, self.bottom, width=2),
        ]
        for i in range(6):
            value = self.y0 + (self.y1 - self.y0) * i / 5
            y = self.y(value)
            lines.append(_line(self.left, y, self.right, y, color="#d9d9d9"))
            lines.append(_text(self.left - 8, y + 4, _format_tick(value), anchor="end"))
            if x_ticks:
                xv = self.x0 + (self.x1 - self.x0) * i / 5
                x = self.x(xv)
                lines.append(_line(x, self.bottom, x, self.bottom + 6))
                lines.append(_text(x, self.bottom + 22, _format_tick(xv)))
        mid_y = (self.top + self.bottom) / 2
        lines.append(_text((self.left + self.right) / 2, HEIGHT - 20, x_label, 15))
        lines.append(
            f'<text x="24" y="{mid_y:.2f}" text-anchor="middle" font-size="15" '
            f'font-family="Arial" transform="rotate(-90 24 {mid_y:.2f})">'
            f"{_escape(y_label)}</text>"
        )
        return lines


def _legend(labels: Sequence[str], title: str = "") -> List[str]:
    x = WIDTH - MARGIN_RIGHT + 20
    lines = [_text(x, MARGIN_TOP, title, anchor="start")] if title else []
    for i, label in enumerate(labels):
        y = MARGIN_TOP + 22 * (i + 1)
        color = COLORS[i % len(COLORS)]
        lines.append(
            f'<rect x="{x}" y="{y - 10}" width="12" height="12" fill="{color}"/>'
        )
        lines.append(_text(x + 18, y, label, anchor="start"))
    return lines


def _group_color(legend: Sequence[str], label: Optional[str]) -> str:
    if label in legend:
        return COLORS[legend.index(label) % len(COLORS)]
    return COLORS[0]


def _document(title: str, body: Sequence[str]) -> str:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        _text(WIDTH / 2, 28, title, 18),
    ]
    lines.extend(body)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def boxplot_svg(
    stats: Sequence[BoxplotStats], title: str = "", y_label: str = ""
) -> str:
    if not stats:
        raise ValueError("Boxplot needs at least one group")
    low = min(min((s.lower_whisker,) + s.outliers) for s in stats)
    high = max(max((s.upper_whisker,) + s.outliers) for s in stats)
    frame = _Frame((0.0, float(len(stats))), (low, high))
    body = frame.axes("", y_label, x_ticks=False)
    slot = (frame.right - frame.left) / len(stats)
    for i, s in enumerate(stats):
        centre = frame.left + slot * (i + 0.5)
        half = slot * 0.25
        color = COLORS[i % len(COLORS)]
        body.append(_line(centre, frame.y(s.lower_whisker), centre, frame.y(s.q1)))
        body.append(_line(centre, frame.y(s.q3), centre, frame.y(s.upper_whisker)))
        for end in (s.lower_whisker, s.upper_whisker):
            y = frame.y(end)
            body.append(_line(centre - half / 2, y, centre + half / 2, y))
        top, bottom = frame.y(s.q3), frame.y(s.q1)
        body.append(
            f'<rect x="{centre - half:.2f}" y="{top:.2f}" width="{2 * half:.2f}" '
            f'height="{max(bottom - top, 0.0):.2f}" fill="{color}" '
            f'fill-opacity="0.4" stroke="{color}"/>'
        )
        y = frame.y(s.median)
        body.append(_line(centre - half, y, centre + half, y, width=2))
        for value in s.outliers:
            body.append(
                f'<circle cx="{centre:.2f}" cy="{frame.y(value):.2f}" r="3" '
                f'fill="none" stroke="{color}"/>'
            )
        body.append(_text(centre, frame.bottom + 22, f"{s.group} (n={s.n})"))
    return _document(title, body)


def scatter_svg(
    x: Sequence[float],
    y: Sequence[float],
    groups: Optional[Sequence[Optional[str]]] = None,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
) -> str:
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError(f"Scatter needs paired values, got {xs.size} and {ys.size}")
    keep = ~(np.isnan(xs) | np.isnan(ys))
    if not keep.any():
        raise EmptyGroupError("empty group")
    labels = list(groups) if groups is not None else [None] * xs.size
    if len(labels) != xs.size:
        raise ValueError(f"{len(labels)} group labels for {xs.size} points")
    legend = sorted({lbl for lbl in labels if lbl is not None}, key=label_sort_key)
    frame = _Frame((xs[keep].min(), xs[keep].max()), (ys[keep].min(), ys[keep].max()))
    body = frame.axes(x_label, y_label)
    for xv, yv, label, ok in zip(xs, ys, labels, keep):
        if not ok:
            continue
        color = _group_color(legend, label)
        body.append(
            f'<circle cx="{frame.x(xv):.2f}" cy="{frame.y(yv):.2f}" r="3.5" '
            f'fill="{color}"/>'
        )
    body.extend(_legend(legend))
    return _document(title, body)


def mosaic_svg(
    layout: Sequence[MosaicColumn], title: str = "", legend_title: str = ""
) -> str:
    if not layout:
        raise ValueError("Mosaic needs at least one column")
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    gap = 4.0
    usable = right - left - gap * (len(layout) - 1)
    segment_labels = [label for label, _ in layout[0].segments]
    body = []
    x = float(left)
    for column in layout:
        width = usable * column.width
        y = float(bottom)
        for i, (_, share) in enumerate(column.segments):
            height = (bottom - top) * share
            y -= height
            body.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{width:.2f}" '
                f'height="{height:.2f}" fill="{COLORS[i % len(COLORS)]}" '
                f'stroke="#ffffff"/>'
            )
        body.append(_text(x + width / 2, bottom + 22, f"{column.label} (n={column.n})"))
        x += width + gap
    body.extend(_legend(segment_labels, legend_title))
    return _document(title, body)


def biplot_svg(
    model: BiplotModel,
    groups: Optional[Sequence[Optional[str]]] = None,
    links: Sequence[Tuple[str, str, str]] = (),
    title: str = "",
) -> str:
    """Firms as points, clr variables as rays from the origin and optional
    ``(name, numerator, denominator)`` links between ray vertices."""
    scores, rays = model.firm_scores, model.ray_coords
    labels = list(groups) if groups is not None else [None] * scores.shape[0]
    if len(labels) != scores.shape[0]:
        raise ValueError(f"{len(labels)} group labels for {scores.shape[0]} firms")
    for name, i, j in links:
        for part in (i, j):
            if part not in model.parts:
                raise UnknownPartError(f"Link {name!r} uses unknown part {part!r}")
    legend = sorted({lbl for lbl in labels if lbl is not None}, key=label_sort_key)
    points = np.vstack([scores, rays, np.zeros((1, 2))])
    frame = _Frame(
        (points[:, 0].min(), points[:, 0].max()),
        (points[:, 1].min(), points[:, 1].max()),
    )
    fractions = model.dimension_fractions
    body = frame.axes(
        f"Dimension 1 ({100 * fractions[0]:.2f}%)",
        f"Dimension 2 ({100 * fractions[1]:.2f}%)",
    )
    for (xv, yv), label in zip(scores, labels):
        color = _group_color(legend, label)
        body.append(
            f'<circle cx="{frame.x(xv):.2f}" cy="{frame.y(yv):.2f}" r="3" '
            f'fill="{color}" fill-opacity="0.7"/>'
        )
    ox, oy = frame.x(0.0), frame.y(0.0)
    for part, (xv, yv) in zip(model.parts, rays):
        body.append(_line(ox, oy, frame.x(xv), frame.y(yv), color="#333333", width=2))
        body.append(_text(frame.x(xv), frame.y(yv) - 6, f"clr.{part}"))
    for name, i, j in links:
        (xi, yi), (xj, yj) = model.ray(i), model.ray(j)
        body.append(
            f'<line x1="{frame.x(xj):.2f}" y1="{frame.y(yj):.2f}" '
            f'x2="{frame.x(xi):.2f}" y2="{frame.y(yi):.2f}" stroke="#9467bd" '
            f'stroke-width="1.5" stroke-dasharray="6 3"/>'
        )
        mid_x = (frame.x(xi) + frame.x(xj)) / 2
        mid_y = (frame.y(yi) + frame.y(yj)) / 2
        body.append(_text(mid_x, mid_y - 4, name, 12))
    body.extend(_legend(legend))
    return _document(title, body)


def sweep_svg(rows: Sequence[SweepRow], title: str = "") -> str:
    """Silhouette and Calinski-Harabasz against k, each scaled to its maximum."""
    if not rows:
        raise ValueError("Sweep plot needs at least one k")
    ks = [r.k for r in rows]
    series: Dict[str, List[float]] = {
        "silhouette": [r.silhouette for r in rows],
        "Calinski-Harabasz": [r.calinski_harabasz for r in rows],
    }
    frame = _Frame((min(ks), max(ks)), (0.0, 1.0))
    body = frame.axes("k", "index / max index")
    for i, values in enumerate(series.values()):
        finite = [v for v in values if math.isfinite(v)]
        top = max(finite) if finite and max(finite) > 0 else 1.0
        scaled = [min(v / top, 1.0) if math.isfinite(v) else 1.0 for v in values]
        color = COLORS[i]
        points = " ".join(
            f"{frame.x(k):.2f},{frame.y(v):.2f}" for k, v in zip(ks, scaled)
        )
        body.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" '
            f'points="{points}"/>'
        )
        for k, v in zip(ks, scaled):
            body.append(
                f'<circle cx="{frame.x(k):.2f}" cy="{frame.y(v):.2f}" r="4" '
                f'fill="{color}"/>'
            )
    body.extend(_legend(list(series)))
    return _document(title, body)


_RENDERERS = {
    "boxplot": boxplot_svg,
    "scatter": scatter_svg,
    "mosaic": mosaic_svg,
    "biplot": biplot_svg,
    "sweep": sweep_svg,
}


def render_plot(kind: PlotKind, path: str, *args, **kwargs) -> str:
    """Render a figure of ``kind`` and write it to ``path`` as SVG.

    Inputs are checked, and the document built, before anything is written.

    Raises:
        OutputError: ``path`` cannot be written

    """
    try:
        renderer = _RENDERERS[kind]
    except KeyError:
        raise ValueError(f"Unknown plot kind {kind!r}, known: {sorted(_RENDERERS)}")
    document = renderer(*args, **kwargs)
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(document)
    except OSError as e:
        raise OutputError(f"Cannot write figure {path}: {e}")
    logger.info("Wrote %s figure %s", kind, path)
    return document
