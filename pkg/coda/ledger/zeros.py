# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Zero patterns in compositional parts and their simple replacement.

Log-ratios are undefined on zeros. Zeros are replaced by a fraction of the
smallest positive value observed in their part (the part's *detection
limit*). Nonzero cells are left untouched: financial parts are raw monetary
figures, not closed to a constant sum.

Model-based imputation (log-ratio EM) is not provided.

"""

from dataclasses import dataclass
import logging
from typing import Optional, Tuple

import numpy as np

from .composition import CompositionSet, PartLabel, require_valid
from .exception import CompositionValidationError, ZeroPatternError

logger = logging.getLogger(__name__)

ZERO_FRACTION_THRESHOLD = 0.20
DEFAULT_REPLACEMENT_FRACTION = 0.65


@dataclass(frozen=True)
class ZeroReport:
    parts: Tuple[PartLabel, ...]
    per_part_zero_fraction: Tuple[float, ...]
    overall_zero_fraction: float
    cooccurrence: np.ndarray
    flagged_parts: Tuple[str, ...]

    def __post_init__(self):
        cooccurrence = np.array(self.cooccurrence, dtype=float, copy=True)
        cooccurrence.setflags(write=False)
        object.__setattr__(self, "cooccurrence", cooccurrence)

    @property
    def has_zeros(self) -> bool:
        return self.overall_zero_fraction > 0


@dataclass(frozen=True)
class DetectionLimits:
    parts: Tuple[PartLabel, ...]
    per_part_limit: Tuple[float, ...]

    def __post_init__(self):
        limits = tuple(float(v) for v in self.per_part_limit)
        if len(limits) != len(self.parts):
            raise CompositionValidationError(
                f"{len(limits)} detection limits for {len(self.parts)} parts"
            )
        for part, limit in zip(self.parts, limits):
            if not (np.isfinite(limit) and limit > 0):
                raise CompositionValidationError(
                    f"Detection limit of part {part.name} must be positive, "
                    f"got {limit!r}"
                )
        object.__setattr__(self, "per_part_limit", limits)


def _require_non_negative(dataset: CompositionSet) -> None:
    values = dataset.values
    bad = ~np.isfinite(values) | (values < 0)
    if bad.any():
        i, j = (int(k[0]) for k in np.nonzero(bad))
        raise CompositionValidationError(
            f"Zero report needs finite non-negative cells: firm {dataset.firms[i]}, "
            f"part {dataset.parts[j].name} holds {values[i, j]!r}"
        )


def zero_report(
    dataset: CompositionSet, threshold: float = ZERO_FRACTION_THRESHOLD
) -> ZeroReport:
    """Fractions of zero cells per part, overall and per pair of parts.

    Parts whose zero fraction is above ``threshold`` are flagged.

    Raises:
        CompositionValidationError: a cell is negative or not finite

    """
    _require_non_negative(dataset)
    zeros = (dataset.values == 0).astype(float)
    cooccurrence = zeros.T @ zeros / dataset.n
    per_part = tuple(float(v) for v in np.diag(cooccurrence))
    flagged = tuple(
        p.name for p, fraction in zip(dataset.parts, per_part) if fraction > threshold
    )
    report = ZeroReport(
        parts=dataset.parts,
        per_part_zero_fraction=per_part,
        overall_zero_fraction=float(zeros.mean()),
        cooccurrence=cooccurrence,
        flagged_parts=flagged,
    )
    logger.debug(
        "Zero report: overall fraction %.4f, flagged parts %s",
        report.overall_zero_fraction,
        flagged,
    )
    return report


def detection_limits(dataset: CompositionSet) -> DetectionLimits:
    """Smallest strictly positive value of each part.

    Raises:
        CompositionValidationError: a part has no positive observation

    """
    limits = []
    for j, part in enumerate(dataset.parts):
        column = dataset.values[:, j]
        positive = column[np.isfinite(column) & (column > 0)]
        if positive.size == 0:
            raise CompositionValidationError(
                f"Part {part.name}: part has no positive observations"
            )
        limits.append(float(positive.min()))
    return DetectionLimits(parts=dataset.parts, per_part_limit=tuple(limits))


def replace_zeros(
    dataset: CompositionSet,
    limits: Optional[DetectionLimits] = None,
    fraction: float = DEFAULT_REPLACEMENT_FRACTION,
    allow_flagged: bool = False,
) -> CompositionSet:
    """Replace every zero of part j by ``fraction * limit_j``.

    Args:
        dataset: composition set whose cells are finite and non-negative
        limits: detection limits, computed from ``dataset`` when omitted
        fraction: multiplier of the detection limit, in (0, 1)
        allow_flagged: proceed even if parts hold more than 20% zeros

    Returns:
        ``dataset`` itself when it holds no zero, a new valid set otherwise.

    Raises:
        ZeroPatternError: parts are flagged and ``allow_flagged`` is false

    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"Replacement fraction must lie in (0, 1), got {fraction!r}")
    report = zero_report(dataset)
    if not report.has_zeros:
        return dataset
    if report.flagged_parts:
        if not allow_flagged:
            raise ZeroPatternError(
                "Parts with more than "
                f"{ZERO_FRACTION_THRESHOLD:.0%} zeros: "
                f"{', '.join(report.flagged_parts)}",
                report.flagged_parts,
            )
        logger.warning(
            "Replacing zeros in parts above the %.0f%% guidance: %s",
            ZERO_FRACTION_THRESHOLD * 100,
            ", ".join(report.flagged_parts),
        )
    if limits is None:
        limits = detection_limits(dataset)
    elif len(limits.per_part_limit) != dataset.D:
        raise CompositionValidationError(
            f"{len(limits.per_part_limit)} detection limits for {dataset.D} parts"
        )

    values = np.array(dataset.values, copy=True)
    replacement = fraction * np.asarray(limits.per_part_limit)
    zeros = values == 0
    values[zeros] = np.broadcast_to(replacement, values.shape)[zeros]
    logger.info("Replaced %s zero cells", int(zeros.sum()))
    replaced = dataset.with_values(values)
    require_valid(replaced)
    return replaced
