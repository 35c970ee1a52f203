# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Compositions of accounting figures and their centres.

A composition is an array of D strictly positive accounting figures of one
firm, whose information lies in the ratios between the figures. A
:class:`CompositionSet` stacks the compositions of n firms together with
non-compositional firm characteristics (the *extras*).

All geometric means are computed in log space as ``exp(mean(log(x)))``.

"""

from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import (
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from .exception import CompositionValidationError, EmptyGroupError, UnknownPartError

logger = logging.getLogger(__name__)

CENTRE_SUM_TOLERANCE = 1e-12


class Missing(Enum):
    """Typed marker of a missing value in an extras column."""

    MISSING = "NA"

    def __repr__(self) -> str:
        return "MISSING"


MISSING = Missing.MISSING

ExtraValue = Union[float, str, Missing]


@dataclass(frozen=True)
class PartLabel:
    name: str
    description: str = ""

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Composition:
    """D strictly positive figures of one firm."""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) < 2:
            raise CompositionValidationError(
                f"A composition needs at least 2 parts, got {len(values)}"
            )
        bad = [v for v in values if not (math.isfinite(v) and v > 0)]
        if bad:
            raise CompositionValidationError(
                f"Composition parts must be finite and strictly positive, got {bad}",
                bad,
            )

    @property
    def D(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def label_sort_key(label: str) -> Tuple[int, float, str]:
    """Sort key putting numeric category labels first, in numeric order."""
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


@dataclass(frozen=True)
class ExtraColumn:
    """Per-firm non-compositional data, numeric or categorical.

    Numeric cells are floats, categorical cells are strings; both may be
    :data:`MISSING`.

    """

    name: str
    values: Tuple[ExtraValue, ...]
    categorical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    def missing_mask(self) -> np.ndarray:
        return np.array([v is MISSING for v in self.values], dtype=bool)

    def numeric(self) -> np.ndarray:
        """Values as floats, missing cells as NaN.

        Raises:
            UnknownPartError: a cell is not numeric

        """
        out = np.empty(len(self.values), dtype=float)
        for i, value in enumerate(self.values):
            if value is MISSING:
                out[i] = np.nan
                continue
            try:
                out[i] = float(value)
            except (TypeError, ValueError):
                raise UnknownPartError(
                    f"Column {self.name!r} is not numeric (value {value!r})"
                )
        return out

    def labels(self) -> Tuple[Optional[str], ...]:
        """Values as category labels; numbers are rendered with ``%g``."""
        return tuple(
            None
            if value is MISSING
            else (value if isinstance(value, str) else "%g" % value)
            for value in self.values
        )


@dataclass(frozen=True)
class FirmRecord:
    """Read-only view of one firm, as handed to row filter predicates."""

    firm: str
    values: Mapping[str, float]
    extras: Mapping[str, ExtraValue]


RowFilter = Union[Callable[[FirmRecord], bool], Sequence[bool], np.ndarray, None]


@dataclass(frozen=True)
class CompositionSet:
    """n firms by D parts, plus per-firm extras columns.

    The parts matrix may hold zeros or negative numbers right after reading
    a file; :func:`validate` reports them and the :mod:`coda.ledger.zeros`
    module deals with zeros.

    """

    parts: Tuple[PartLabel, ...]
    firms: Tuple[str, ...]
    values: np.ndarray
    extras: Mapping[str, ExtraColumn] = field(default_factory=dict)

    def __post_init__(self):
        parts = tuple(
            p if isinstance(p, PartLabel) else PartLabel(str(p)) for p in self.parts
        )
        firms = tuple(str(f) for f in self.firms)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise CompositionValidationError("Parts matrix must be two-dimensional")
        if values.shape[1] != len(parts):
            raise CompositionValidationError(
                f"Parts matrix has {values.shape[1]} columns for {len(parts)} parts"
            )
        if len(parts) < 2:
            raise CompositionValidationError("A composition needs at least 2 parts")
        if values.shape[0] != len(firms):
            raise CompositionValidationError(
                f"Parts matrix has {values.shape[0]} rows for {len(firms)} firms"
            )
        names = [p.name for p in parts]
        duplicated = sorted({n for n in names if names.count(n) > 1})
        if duplicated:
            raise CompositionValidationError(f"Duplicate part names: {duplicated}")
        duplicated = sorted({f for f in firms if firms.count(f) > 1})
        if duplicated:
            raise CompositionValidationError(
                f"Duplicate firm identifiers: {duplicated}"
            )
        extras = dict(self.extras)
        for name, column in extras.items():
            if len(column) != len(firms):
                raise CompositionValidationError(
                    f"Extras column {name!r} has {len(column)} values "
                    f"for {len(firms)} firms"
                )
            if name in names:
                raise CompositionValidationError(
                    f"Extras column {name!r} clashes with a part name"
                )
        values.setflags(write=False)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "firms", firms)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "extras", extras)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    @property
    def part_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parts)

    def part_index(self, part: Union[str, PartLabel]) -> int:
        name = part.name if isinstance(part, PartLabel) else part
        try:
            return self.part_names.index(name)
        except ValueError:
            raise UnknownPartError(
                f"Unknown part {name!r}, known parts: {list(self.part_names)}"
            )

    def column(self, part: Union[str, PartLabel]) -> np.ndarray:
        return self.values[:, self.part_index(part)]

    def extra(self, name: str) -> ExtraColumn:
        try:
            return self.extras[name]
        except KeyError:
            raise UnknownPartError(
                f"Unknown column {name!r}, known columns: {sorted(self.extras)}"
            )

    def row(self, i: int) -> Composition:
        return Composition(tuple(self.values[i]))

    def records(self) -> Iterator[FirmRecord]:
        for i, firm in enumerate(self.firms):
            yield FirmRecord(
                firm=firm,
                values=dict(zip(self.part_names, self.values[i].tolist())),
                extras={name: col.values[i] for name, col in self.extras.items()},
            )

    def mask(self, row_filter: RowFilter = None) -> np.ndarray:
        """Boolean mask of the firms selected by ``row_filter``."""
        if row_filter is None:
            return np.ones(self.n, dtype=bool)
        if callable(row_filter):
            return np.array([bool(row_filter(r)) for r in self.records()], dtype=bool)
        mask = np.asarray(row_filter, dtype=bool)
        if mask.shape != (self.n,):
            raise ValueError(f"Row mask has shape {mask.shape}, expected ({self.n},)")
        return mask

    def group_mask(self, column: str, label: str) -> np.ndarray:
        """Firms whose extras ``column`` has category ``label``."""
        labels = self.extra(column).labels()
        return np.array([lbl == label for lbl in labels], dtype=bool)

    def subset(self, row_filter: RowFilter) -> "CompositionSet":
        mask = self.mask(row_filter)
        return CompositionSet(
            parts=self.parts,
            firms=tuple(f for f, keep in zip(self.firms, mask) if keep),
            values=self.values[mask],
            extras={
                name: ExtraColumn(
                    name,
                    tuple(v for v, keep in zip(col.values, mask) if keep),
                    col.categorical,
                )
                for name, col in self.extras.items()
            },
        )

    def with_values(self, values: np.ndarray) -> "CompositionSet":
        return CompositionSet(
            parts=self.parts, firms=self.firms, values=values, extras=self.extras
        )

    def with_extra(self, column: ExtraColumn) -> "CompositionSet":
        extras = dict(self.extras)
        extras[column.name] = column
        return CompositionSet(
            parts=self.parts, firms=self.firms, values=self.values, extras=extras
        )


@dataclass(frozen=True)
class Violation:
    firm: str
    part: str
    value: float
    reason: str

    def __str__(self) -> str:
        return f"firm {self.firm}, part {self.part}: {self.reason} ({self.value!r})"


@dataclass(frozen=True)
class CompositionalCentre:
    """Closed vector of per-part geometric means."""

    parts: Tuple[PartLabel, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        parts = tuple(
            p if isinstance(p, PartLabel) else PartLabel(str(p)) for p in self.parts
        )
        object.__setattr__(self, "parts", parts)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.parts):
            raise CompositionValidationError(
                f"Centre has {len(values)} values for {len(self.parts)} parts"
            )
        if abs(math.fsum(values) - 1.0) > CENTRE_SUM_TOLERANCE:
            raise CompositionValidationError(
                f"Centre values sum to {math.fsum(values)!r}, not 1"
            )
        if not all(0.0 < v < 1.0 for v in values):
            raise CompositionValidationError(f"Centre values outside (0, 1): {values}")

    def as_dict(self) -> Dict[str, float]:
        return {p.name: v for p, v in zip(self.parts, self.values)}

    def as_composition(self) -> Composition:
        return Composition(self.values)

    def __getitem__(self, part: str) -> float:
        return self.as_dict()[part]


def validate(dataset: CompositionSet) -> List[Violation]:
    """Check that every compositional cell is finite and strictly positive.

    Zeros are reported as violations; they must go through zero replacement
    before any log-ratio can be computed.

    Returns:
        One violation per offending cell, in row-major order; an empty list
        when the dataset is valid.

    """
    violations: List[Violation] = []
    bad = ~(np.isfinite(dataset.values) & (dataset.values > 0))
    for i, j in zip(*np.nonzero(bad)):
        value = float(dataset.values[i, j])
        if not math.isfinite(value):
            reason = "non-finite value"
        elif value == 0:
            reason = "zero value, needs zero replacement"
        else:
            reason = "negative value"
        violations.append(
            Violation(dataset.firms[i], dataset.parts[j].name, value, reason)
        )
    return violations


def require_valid(dataset: CompositionSet) -> None:
    """Raise :class:`CompositionValidationError` when :func:`validate` reports."""
    violations = validate(dataset)
    if violations:
        summary = "; ".join(str(v) for v in violations[:5])
        if len(violations) > 5:
            summary += f"; ... ({len(violations)} violations)"
        raise CompositionValidationError(
            f"Invalid composition set: {summary}", violations
        )


def closure(c: Composition) -> Composition:
    """Rescale ``c`` to unit sum."""
    x = c.as_array()
    return Composition(tuple(x / x.sum()))


def per_firm_geometric_mean(c: Composition) -> float:
    """Geometric mean of all the parts of one firm."""
    return float(np.exp(np.mean(np.log(c.as_array()))))


def _selected_values(dataset: CompositionSet, row_filter: RowFilter) -> np.ndarray:
    mask = dataset.mask(row_filter)
    if not mask.any():
        raise EmptyGroupError("empty group")
    selected = dataset.values[mask]
    if not (np.isfinite(selected).all() and (selected > 0).all()):
        require_valid(dataset.subset(mask))
    return selected


def geometric_mean_by_part(
    dataset: CompositionSet, row_filter: RowFilter = None
) -> np.ndarray:
    """Geometric mean over the selected firms of each part.

    Args:
        dataset: the composition dataset
        row_filter: optional predicate on :class:`FirmRecord` or boolean mask

    Raises:
        EmptyGroupError: the filter selects no firm

    """
    return np.exp(np.mean(np.log(_selected_values(dataset, row_filter)), axis=0))


def compositional_centre(
    dataset: CompositionSet, row_filter: RowFilter = None
) -> CompositionalCentre:
    """Closure of the per-part geometric means over the selected firms."""
    g = geometric_mean_by_part(dataset, row_filter)
    return CompositionalCentre(parts=dataset.parts, values=tuple(g / g.sum()))
