# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Reading and writing firm tables.

A dataset file is a delimited text file with a header row, one row per firm,
a firm identifier column, the compositional columns and any number of
extras columns. Missing extras are written ``NA``; compositional cells can
never be missing.

"""

from dataclasses import dataclass
import importlib.resources
import logging
import math
import os
import re
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .composition import MISSING, CompositionSet, ExtraColumn, PartLabel
from .exception import CompositionValidationError, DatasetParseError, UnknownPartError

logger = logging.getLogger(__name__)

NA = "NA"
BUNDLED_DATASET = "wineries.csv"
PART_COLUMN_RE = re.compile(r"^x\d+$")


@dataclass(frozen=True)
class PartColumn:
    name: str
    column: str
    description: str = ""


@dataclass(frozen=True)
class DatasetLayout:
    """Which columns of a dataset file hold what.

    Without ``parts``, every column named ``x<number>`` is a part.

    """

    firm_column: str = "Firm"
    parts: Tuple[PartColumn, ...] = ()
    categorical: Tuple[str, ...] = ()
    delimiter: str = ","

    def part_columns(self, header: Sequence[str]) -> Tuple[PartColumn, ...]:
        if self.parts:
            return self.parts
        return tuple(PartColumn(c, c) for c in header if PART_COLUMN_RE.match(c))


WINERY_LAYOUT = DatasetLayout(
    firm_column="Firm",
    parts=(
        PartColumn("x1", "x1", "revenues"),
        PartColumn("x2", "x2", "costs"),
        PartColumn("x3", "x3", "liabilities"),
        PartColumn("x4", "x4", "assets"),
    ),
    categorical=("Brand",),
)


def bundled_dataset_path() -> str:
    """Path of the bundled winery dataset."""
    resource = importlib.resources.files("coda.ledger") / "data" / BUNDLED_DATASET
    return str(resource)


def _parse_float(text: str) -> Optional[float]:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _read_frame(path: str, delimiter: str) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=delimiter,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise DatasetParseError(
            f"Ragged dataset file {path}: {e}",
            row=int(match.group(1)) if match else None,
        )
    except pd.errors.EmptyDataError:
        raise DatasetParseError(f"Empty dataset file {path}")
    except OSError as e:
        raise DatasetParseError(f"Cannot read dataset file {path}: {e}")


def read_dataset(path: str, layout: Optional[DatasetLayout] = None) -> CompositionSet:
    """Read a firm table into a composition set.

    Zeros and negative compositional cells are kept; they are reported by
    :func:`coda.ledger.composition.validate`. An extras column whose
    non-missing cells are all numbers is numeric, other extras hold labels.

    Raises:
        DatasetParseError: ragged rows, unknown columns, a missing or
            non-numeric compositional cell, or duplicated firm identifiers;
            rows are numbered from the header line, which is row 1

    """
    if layout is None:
        layout = DatasetLayout()
    frame = _read_frame(path, layout.delimiter)
    header = [str(c).strip() for c in frame.columns]
    frame.columns = header

    short = frame.isna().any(axis=1)
    if short.any():
        raise DatasetParseError(
            f"Ragged dataset file {path}: row has too few fields",
            row=int(np.argmax(short.to_numpy())) + 2,
        )
    if layout.firm_column not in header:
        raise DatasetParseError(
            f"Firm identifier column missing from {path}", column=layout.firm_column
        )
    parts = layout.part_columns(header)
    if len(parts) < 2:
        raise DatasetParseError(f"Dataset file {path} has fewer than 2 parts")
    for part in parts:
        if part.column not in header:
            raise DatasetParseError(
                f"Compositional column missing from {path}", column=part.column
            )

    firms = [f.strip() for f in frame[layout.firm_column]]
    seen: Dict[str, int] = {}
    for i, firm in enumerate(firms):
        if firm in seen:
            raise DatasetParseError(
                f"Duplicated firm identifier {firm!r}",
                row=i + 2,
                column=layout.firm_column,
            )
        seen[firm] = i

    values = np.empty((len(frame), len(parts)))
    for j, part in enumerate(parts):
        for i, cell in enumerate(frame[part.column]):
            cell = cell.strip()
            value = _parse_float(cell)
            if value is None:
                reason = "missing" if cell in (NA, "") else "non-numeric"
                raise DatasetParseError(
                    f"{reason} compositional cell {cell!r}",
                    row=i + 2,
                    column=part.column,
                )
            values[i, j] = value

    used = {layout.firm_column} | {p.column for p in parts}
    extras = {}
    for name in header:
        if name in used:
            continue
        categorical = name in layout.categorical
        extras[name] = _extra_column(name, list(frame[name]), categorical)

    dataset = CompositionSet(
        parts=tuple(PartLabel(p.name, p.description) for p in parts),
        firms=tuple(firms),
        values=values,
        extras=extras,
    )
    logger.info(
        "Read %s firms, %s parts and %s extras columns from %s",
        dataset.n,
        dataset.D,
        len(extras),
        path,
    )
    return dataset


def _extra_column(name: str, cells: List[str], categorical: bool) -> ExtraColumn:
    cells = [c.strip() for c in cells]
    present = [c for c in cells if c != NA]
    numbers = [_parse_float(c) for c in present]
    if all(v is not None for v in numbers):
        values: List[Union[float, str, object]] = [
            MISSING if c == NA else float(c) for c in cells
        ]
    else:
        values = [MISSING if c == NA else c for c in cells]
        categorical = True
    return ExtraColumn(name, tuple(values), categorical)  # type: ignore[arg-type]


def _format_number(value: float) -> str:
    return "%.17g" % value


def _format_extra(value) -> str:
    if value is MISSING:
        return NA
    if isinstance(value, float):
        return NA if math.isnan(value) else _format_number(value)
    return str(value)


def dataset_frame(
    dataset: CompositionSet,
    appended: Optional[Mapping[str, Sequence[float]]] = None,
    firm_column: str = "Firm",
) -> pd.DataFrame:
    """Firm table as text cells, with ``appended`` columns at the end."""
    columns: Dict[str, List[str]] = {firm_column: list(dataset.firms)}
    for j, name in enumerate(dataset.part_names):
        columns[name] = [_format_number(v) for v in dataset.values[:, j]]
    for name, column in dataset.extras.items():
        columns[name] = [_format_extra(v) for v in column.values]
    for name, values in (appended or {}).items():
        if name in columns:
            raise UnknownPartError(f"Appended column {name!r} already exists")
        if len(values) != dataset.n:
            raise CompositionValidationError(
                f"Appended column {name!r} has {len(values)} values "
                f"for {dataset.n} firms"
            )
        columns[name] = [
            v if isinstance(v, str) else _format_extra(float(v)) for v in values
        ]
    return pd.DataFrame(columns)


def write_dataset(
    dataset: CompositionSet,
    path: str,
    appended: Optional[Mapping[str, Sequence[float]]] = None,
    delimiter: str = ",",
    firm_column: str = "Firm",
) -> None:
    """Write the firm table, numbers at 17 significant digits.

    Reading the file back with :func:`read_dataset` gives the same set.

    """
    frame = dataset_frame(dataset, appended, firm_column)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, sep=delimiter, index=False, lineterminator="\n")
    logger.info("Wrote %s firms to %s", dataset.n, path)


def recode_binary(
    dataset: CompositionSet,
    column: str,
    zero_label: str,
    one_label: str,
    name: Optional[str] = None,
) -> CompositionSet:
    """Code the two categories of ``column`` as 0 and 1.

    The recoded column replaces ``column`` unless ``name`` is given.

    Raises:
        UnknownPartError: the column holds another category

    """
    recoded = []
    for label in dataset.extra(column).labels():
        if label is None:
            recoded.append(MISSING)
        elif label == zero_label:
            recoded.append(0.0)
        elif label == one_label:
            recoded.append(1.0)
        else:
            raise UnknownPartError(
                f"Column {column!r} holds {label!r}, expected "
                f"{zero_label!r} or {one_label!r}"
            )
    return dataset.with_extra(
        ExtraColumn(name or column, tuple(recoded), categorical=True)  # type: ignore
    )

