# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Deterministic CSV and Markdown tables."""

import logging
import math
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from typing_extensions import Literal

from .composition import Missing
from .exception import OutputError
from .multivariate import (
    BiplotModel,
    ClusterFit,
    ClusterModel,
    LinkProjection,
    SweepRow,
)
from .plots import SummaryStatistics
from .ratios import FirmRatios, GroupRatios, Undefined
from .regress import HypothesisRow, RegressionFit
from .zeros import ZeroReport

logger = logging.getLogger(__name__)

TableFormat = Literal["csv", "markdown"]
Decimals = Union[int, Mapping[str, int]]

CENTRE_DECIMALS = 4
RATIO_DECIMALS = 3
REGRESSION_DECIMALS = 4


def format_cell(value: Any, decimals: int) -> str:
    """Render one cell; floats use a fixed number of decimals."""
    if isinstance(value, Undefined):
        return "undefined"
    if value is None or isinstance(value, Missing):
        return "NA"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "NA"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = f"{value:.{decimals}f}"
        # no negative zero
        if float(text) == 0:
            text = text.lstrip("-")
        return text
    return str(value)


def render_table(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    format: TableFormat = "csv",
    decimals: Decimals = 4,
) -> str:
    """Render ``rows`` restricted to ``columns``, in that order.

    ``decimals`` is either one count for every column or a per-column
    mapping, missing columns defaulting to 4.

    """
    def places(column: str) -> int:
        if isinstance(decimals, int):
            return decimals
        return decimals.get(column, 4)

    frame = pd.DataFrame(
        [[format_cell(row.get(c), places(c)) for c in columns] for row in rows],
        columns=list(columns),
        dtype=str,
    )
    if format == "csv":
        return frame.to_csv(index=False, lineterminator="\n")
    if format == "markdown":
        return frame.to_markdown(index=False, disable_numparse=True) + "\n"
    raise ValueError(f"Unknown table format {format!r}")


def emit_table(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    path: Optional[str] = None,
    format: TableFormat = "csv",
    decimals: Decimals = 4,
) -> str:
    """Render a table and write it to ``path`` when given.

    Raises:
        OutputError: ``path`` cannot be written

    """
    text = render_table(rows, columns, format=format, decimals=decimals)
    if path is not None:
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "w", newline="") as f:
                f.write(text)
        except OSError as e:
            raise OutputError(f"Cannot write table {path}: {e}")
        logger.info("Wrote table %s", path)
    return text


def table_extension(format: TableFormat) -> str:
    return ".md" if format == "markdown" else ".csv"


Row = Dict[str, Any]


def centre_rows(groups: Sequence[GroupRatios]) -> Tuple[List[str], List[Row]]:
    """Group size and closed geometric means, one row per group."""
    parts = [p.name for p in groups[0].centre.parts] if groups else []
    rows = []
    for g in groups:
        row: Row = {"group": g.group, "n": g.n}
        row.update(g.centre.as_dict())
        rows.append(row)
    return ["group", "n"] + parts, rows


def ratio_rows(groups: Sequence[GroupRatios]) -> Tuple[List[str], List[Row]]:
    names = list(groups[0].ratios) if groups else []
    rows = []
    for g in groups:
        row: Row = {"group": g.group, "n": g.n}
        row.update(g.ratios.as_dict())
        rows.append(row)
    return ["group", "n"] + names, rows


def firm_ratio_rows(firms: Sequence[FirmRatios]) -> Tuple[List[str], List[Row]]:
    names = list(firms[0].ratios) if firms else []
    rows = []
    for f in firms:
        row: Row = {"firm": f.firm}
        row.update(f.ratios.as_dict())
        rows.append(row)
    return ["firm"] + names, rows


def regression_rows(fits: Sequence[RegressionFit]) -> Tuple[List[str], List[Row]]:
    columns = [
        "response",
        "term",
        "estimate",
        "std_error",
        "t_statistic",
        "p_value",
        "r_squared",
    ]
    rows = []
    for fit in fits:
        for j, term in enumerate(fit.columns):
            rows.append(
                {
                    "response": fit.response,
                    "term": term,
                    "estimate": float(fit.coefficients[j]),
                    "std_error": float(fit.standard_errors[j]),
                    "t_statistic": float(fit.t_statistics[j]),
                    "p_value": float(fit.p_values[j]),
                    "r_squared": fit.r_squared,
                }
            )
    return columns, rows


def hypothesis_rows(
    hypotheses: Sequence[HypothesisRow],
) -> Tuple[List[str], List[Row]]:
    columns = ["response", "predictor", "estimate", "p_value", "significant"]
    return columns, [
        {
            "response": h.response,
            "predictor": h.predictor,
            "estimate": h.estimate,
            "p_value": h.p_value,
            "significant": h.significant,
        }
        for h in hypotheses
    ]


def zero_report_rows(report: ZeroReport) -> Tuple[List[str], List[Row]]:
    rows: List[Row] = [
        {
            "part": part.name,
            "zero_fraction": fraction,
            "flagged": part.name in report.flagged_parts,
        }
        for part, fraction in zip(report.parts, report.per_part_zero_fraction)
    ]
    rows.append(
        {
            "part": "overall",
            "zero_fraction": report.overall_zero_fraction,
            "flagged": bool(report.flagged_parts),
        }
    )
    return ["part", "zero_fraction", "flagged"], rows


def biplot_rows(model: BiplotModel) -> Tuple[List[str], List[Row]]:
    rows: List[Row] = [
        {"kind": "firm", "label": firm, "dim1": float(x), "dim2": float(y)}
        for firm, (x, y) in zip(model.firms, model.firm_scores)
    ]
    rows.extend(
        {"kind": "ray", "label": f"clr.{part}", "dim1": float(x), "dim2": float(y)}
        for part, (x, y) in zip(model.parts, model.ray_coords)
    )
    return ["kind", "label", "dim1", "dim2"], rows


def link_rows(
    links: Sequence[Tuple[str, LinkProjection]],
) -> Tuple[List[str], List[Row]]:
    return ["link", "numerator", "denominator", "rank_correlation"], [
        {
            "link": name,
            "numerator": link.numerator,
            "denominator": link.denominator,
            "rank_correlation": link.quality,
        }
        for name, link in links
    ]


def cluster_rows(model: ClusterModel) -> Tuple[List[str], List[Row]]:
    """Size and compositional centre of every cluster, numbered from 1."""
    parts = [p.name for p in model.centres[0].parts]
    rows = []
    for c, (size, centre) in enumerate(zip(model.sizes, model.centres), start=1):
        row: Row = {"cluster": c, "n": size}
        row.update(centre.as_dict())
        rows.append(row)
    return ["cluster", "n"] + parts, rows


def cluster_index_rows(model: ClusterModel) -> Tuple[List[str], List[Row]]:
    columns = ["k", "restarts", "seed", "within_ss", "silhouette", "calinski_harabasz"]
    return columns, [
        {
            "k": model.k,
            "restarts": model.restarts,
            "seed": model.seed,
            "within_ss": model.within_ss,
            "silhouette": model.silhouette,
            "calinski_harabasz": model.calinski_harabasz,
        }
    ]


def fit_index_rows(fit: ClusterFit) -> Tuple[List[str], List[Row]]:
    columns = ["k", "sizes", "within_ss", "silhouette", "calinski_harabasz"]
    return columns, [
        {
            "k": fit.k,
            "sizes": " ".join(str(s) for s in fit.sizes),
            "within_ss": fit.within_ss,
            "silhouette": fit.silhouette,
            "calinski_harabasz": fit.calinski_harabasz,
        }
    ]


def sweep_rows(sweep: Sequence[SweepRow]) -> Tuple[List[str], List[Row]]:
    columns = [
        "k",
        "silhouette",
        "calinski_harabasz",
        "within_ss",
        "best_silhouette",
        "best_calinski_harabasz",
    ]
    return columns, [
        {
            "k": r.k,
            "silhouette": r.silhouette,
            "calinski_harabasz": r.calinski_harabasz,
            "within_ss": r.within_ss,
            "best_silhouette": r.best_silhouette,
            "best_calinski_harabasz": r.best_calinski_harabasz,
        }
        for r in sweep
    ]


def summary_rows(
    summaries: Sequence[SummaryStatistics],
) -> Tuple[List[str], List[Row]]:
    columns = ["column", "n", "mean", "sd", "min", "q1", "median", "q3", "max"]
    return columns, [
        {
            "column": s.name,
            "n": s.n,
            "mean": s.mean,
            "sd": s.sd,
            "min": s.minimum,
            "q1": s.q1,
            "median": s.median,
            "q3": s.q3,
            "max": s.maximum,
        }
        for s in summaries
    ]
