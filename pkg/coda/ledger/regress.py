# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Least-squares regression of log-ratios on firm characteristics."""

from dataclasses import dataclass
import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betainc

from .composition import CompositionSet
from .exception import RankDeficiencyError
from .transforms import LogRatioSpec, SbpMatrix, ilr, pairwise_matrix

logger = logging.getLogger(__name__)

INTERCEPT = "Intercept"
SIGNIFICANCE_LEVEL = 0.05
RANK_TOLERANCE = 1e-10


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DesignMatrix:
    """Intercept plus named numeric predictors.

    ``rows`` holds the indices, in the source dataset, of the firms kept after
    listwise deletion of missing predictor values; ``source_n`` is the size of
    that dataset.

    """

    columns: Tuple[str, ...]
    values: np.ndarray
    rows: Tuple[int, ...]
    source_n: int

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise ValueError(
                f"Design matrix shape {values.shape} does not match "
                f"{len(self.columns)} columns"
            )
        if values.shape[0] != len(self.rows):
            raise ValueError("Design matrix rows do not match the kept row indices")
        if not np.isfinite(values).all():
            raise ValueError("Design matrix holds missing or non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def dropped(self) -> int:
        return self.source_n - self.n

    @classmethod
    def from_array(
        cls, values: np.ndarray, columns: Sequence[str], intercept: bool = True
    ) -> "DesignMatrix":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        n = values.shape[0]
        if intercept:
            values = np.column_stack([np.ones(n), values])
            columns = (INTERCEPT,) + tuple(columns)
        return cls(
            columns=tuple(columns), values=values, rows=tuple(range(n)), source_n=n
        )


def design_from_extras(
    dataset: CompositionSet, predictors: Sequence[str], intercept: bool = True
) -> DesignMatrix:
    """Build the design matrix from numeric extras columns.

    Binary predictors must already be coded 0/1. Firms with a missing value
    in any predictor are dropped.

    Raises:
        UnknownPartError: a predictor is unknown or not numeric

    """
    columns = [dataset.extra(name).numeric() for name in predictors]
    matrix = np.column_stack(columns) if columns else np.empty((dataset.n, 0))
    keep = ~np.isnan(matrix).any(axis=1)
    dropped = int((~keep).sum())
    if dropped:
        logger.info("Dropped %s firms with missing predictor values", dropped)
    values = matrix[keep]
    names = tuple(predictors)
    if intercept:
        values = np.column_stack([np.ones(values.shape[0]), values])
        names = (INTERCEPT,) + names
    return DesignMatrix(
        columns=names,
        values=values,
        rows=tuple(int(i) for i in np.nonzero(keep)[0]),
        source_n=dataset.n,
    )


def _collinear_columns(design: DesignMatrix) -> List[str]:
    """Columns that add nothing to the span of the columns before them."""
    collinear = []
    kept: List[int] = []
    for j in range(design.p):
        candidate = kept + [j]
        sub = design.values[:, candidate]
        if np.linalg.matrix_rank(sub, tol=None) == len(candidate):
            kept.append(j)
        else:
            collinear.append(design.columns[j])
    return collinear


def check_rank(design: DesignMatrix) -> None:
    """Raises RankDeficiencyError unless n > p and the design has full rank."""
    if design.n <= design.p:
        raise RankDeficiencyError(
            f"Regression needs more firms than columns, got n={design.n}, "
            f"p={design.p}"
        )
    collinear = _collinear_columns(design)
    if collinear:
        raise RankDeficiencyError(
            f"Design matrix is rank deficient, collinear columns: "
            f"{', '.join(collinear)}",
            collinear,
        )


def student_t_sf(t: float, dof: int) -> float:
    """Upper-tail probability P(T > t) of a Student-t with ``dof`` degrees of
    freedom, through the regularized incomplete beta function.

    >>> student_t_sf(0.0, 5)
    0.5
    >>> round(student_t_sf(1.0, 1), 12)
    0.25

    """
    if dof < 1:
        raise ValueError(f"Degrees of freedom must be positive, got {dof}")
    if math.isnan(t):
        return math.nan
    if t < 0:
        return 1.0 - student_t_sf(-t, dof)
    if math.isinf(t):
        return 0.0
    return float(0.5 * betainc(dof / 2.0, 0.5, dof / (dof + t * t)))


@dataclass(frozen=True)
class RegressionFit:
    response: str
    columns: Tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    p_values: np.ndarray
    r_squared: float
    residuals: np.ndarray
    dof: int

    def __post_init__(self):
        for name in (
            "coefficients",
            "standard_errors",
            "t_statistics",
            "p_values",
            "residuals",
        ):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def coefficient(self, column: str) -> float:
        return float(self.coefficients[self.columns.index(column)])

    def p_value(self, column: str) -> float:
        return float(self.p_values[self.columns.index(column)])

    def as_dict(self) -> Dict[str, Tuple[float, float]]:
        """Column name to (estimate, p-value)."""
        return {
            c: (float(b), float(p))
            for c, b, p in zip(self.columns, self.coefficients, self.p_values)
        }


def _response_for_design(
    name: str, y: np.ndarray, design: DesignMatrix
) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape == (design.source_n,) and design.source_n != design.n:
        y = y[list(design.rows)]
    if y.shape != (design.n,):
        raise ValueError(
            f"Response {name!r} has {y.shape[0]} values, design has {design.n} rows"
        )
    if not np.isfinite(y).all():
        raise ValueError(f"Response {name!r} holds non-finite values")
    return y


def ols(
    responses: Mapping[str, np.ndarray], design: DesignMatrix
) -> List[RegressionFit]:
    """Fit every response on ``design`` by least squares.

    Coefficients come from a QR decomposition of the design; p-values are
    two-sided, from a Student-t with n - p degrees of freedom.

    Args:
        responses: response name to values, either one per design row or one
            per firm of the dataset the design was built from
        design: full-rank design matrix

    Raises:
        RankDeficiencyError: n <= p or collinear design columns

    """
    check_rank(design)
    x = design.values
    q, r = np.linalg.qr(x)
    dof = design.n - design.p
    r_inv = solve_triangular(r, np.eye(design.p))
    xtx_inv_diag = (r_inv**2).sum(axis=1)

    fits = []
    for name, y in responses.items():
        y = _response_for_design(name, y, design)
        beta = solve_triangular(r, q.T @ y)
        residuals = y - x @ beta
        ssr = float(residuals @ residuals)
        centred = y - y.mean()
        sst = float(centred @ centred)
        if sst > 0:
            r_squared = 1.0 - ssr / sst
        else:
            r_squared = 1.0 if ssr == 0 else 0.0
        sigma2 = ssr / dof
        se = np.sqrt(sigma2 * xtx_inv_diag)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = beta / se
        p = np.array([2.0 * student_t_sf(abs(float(ti)), dof) for ti in t])
        logger.debug("OLS %s: R2 %.4f on %s firms", name, r_squared, design.n)
        fits.append(
            RegressionFit(
                response=name,
                columns=design.columns,
                coefficients=beta,
                standard_errors=se,
                t_statistics=t,
                p_values=p,
                r_squared=r_squared,
                residuals=residuals,
                dof=dof,
            )
        )
    return fits


@dataclass(frozen=True)
class HypothesisRow:
    response: str
    predictor: str
    estimate: float
    p_value: float
    significant: bool


def hypothesis_table(
    fits: Sequence[RegressionFit], alpha: Optional[float] = None
) -> List[HypothesisRow]:
    """One row per response and non-intercept predictor; a predictor is
    significant when its p-value is below ``alpha`` (0.05)."""
    level = SIGNIFICANCE_LEVEL if alpha is None else alpha
    rows = []
    for fit in fits:
        for column, estimate, p in zip(fit.columns, fit.coefficients, fit.p_values):
            if column == INTERCEPT:
                continue
            rows.append(
                HypothesisRow(
                    response=fit.response,
                    predictor=column,
                    estimate=float(estimate),
                    p_value=float(p),
                    significant=bool(p < level),
                )
            )
    return rows


def pairwise_responses(
    dataset: CompositionSet, specs: Sequence[LogRatioSpec]
) -> Dict[str, np.ndarray]:
    """Pairwise log-ratio responses named after their log-ratio."""
    return pairwise_matrix(dataset, specs).as_dict()


def ilr_responses(
    dataset: CompositionSet, sbp: SbpMatrix, prefix: str = "ilr_y"
) -> Dict[str, np.ndarray]:
    """ilr coordinate responses named ``<prefix><k>`` for SBP row k."""
    names = [f"{prefix}{k}" for k in range(1, len(sbp.signs) + 1)]
    return ilr(dataset, sbp, names=names).as_dict()
