# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

from typing import Any, Optional, Sequence

VALIDATION_EXIT_CODE = 1
COMPUTATION_EXIT_CODE = 2


class CodaError(ValueError):
    """Base class of every error raised by the library."""

    exit_code = COMPUTATION_EXIT_CODE


class CompositionValidationError(CodaError):
    """Compositional cells are not all finite and strictly positive.

    The offending cells are listed in ``violations``.

    """

    exit_code = VALIDATION_EXIT_CODE

    def __init__(self, message: str, violations: Sequence[Any] = ()):
        super().__init__(message)
        self.violations = list(violations)


class EmptyGroupError(CodaError):
    """A row filter or a group selected no firm."""

    exit_code = VALIDATION_EXIT_CODE


class UnknownPartError(CodaError):
    """A part label or a column name is unknown."""

    exit_code = VALIDATION_EXIT_CODE


class InvalidSbpError(CodaError):
    exit_code = VALIDATION_EXIT_CODE

    def __init__(self, message: str, violations: Sequence[Any] = ()):
        super().__init__(message)
        self.violations = list(violations)


class InvalidGraphError(CodaError):
    exit_code = VALIDATION_EXIT_CODE

    def __init__(self, message: str, diagnosis: Optional[Any] = None):
        super().__init__(message)
        self.diagnosis = diagnosis


class ZeroPatternError(CodaError):
    """Some parts hold too many zeros to be replaced safely."""

    exit_code = VALIDATION_EXIT_CODE

    def __init__(self, message: str, parts: Sequence[str] = ()):
        super().__init__(message)
        self.parts = list(parts)


class DegenerateDataError(CodaError):
    """The data cannot support the requested geometric construction."""

    pass


class ClusterError(CodaError):
    pass


class RankDeficiencyError(CodaError):
    def __init__(self, message: str, columns: Sequence[str] = ()):
        super().__init__(message)
        self.columns = list(columns)


class DatasetParseError(CodaError):
    """A dataset file could not be parsed; ``row`` is 1-based and counts the
    header line, ``column`` is the column name when known."""

    exit_code = VALIDATION_EXIT_CODE

    def __init__(
        self, message: str, row: Optional[int] = None, column: Optional[str] = None
    ):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigurationError(CodaError):
    exit_code = VALIDATION_EXIT_CODE


class InvalidLogRatioError(CodaError):
    """A log-ratio puts the same part in numerator and denominator, or its
    textual form cannot be parsed."""

    exit_code = VALIDATION_EXIT_CODE


class OutputError(CodaError):
    """A table, figure or dataset could not be written."""

    pass
