# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Pairwise, centred and isometric log-ratio transforms.

Natural logarithms are used throughout. The isometric (ilr) coordinates are
built from a sequential binary partition (SBP) given as a sign matrix in
which ``+1`` marks parts in the numerator, ``-1`` parts in the denominator
and ``0`` parts left out of that partition.

"""

from dataclasses import dataclass
import logging
import math
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from typing_extensions import Literal

from .composition import CompositionSet, PartLabel, require_valid
from .exception import (
    CompositionValidationError,
    InvalidLogRatioError,
    InvalidSbpError,
    UnknownPartError,
)

logger = logging.getLogger(__name__)

CLR_ZERO_SUM_TOLERANCE = 1e-10

LogRatioKind = Literal["pairwise", "clr", "ilr"]

SIGN_TOKENS = {"+": 1, "-": -1, "0": 0}


def _part_name(part: Union[str, PartLabel]) -> str:
    return part.name if isinstance(part, PartLabel) else str(part)


@dataclass(frozen=True)
class LogRatioSpec:
    """The named log-ratio ``log(numerator / denominator)``."""

    name: str
    numerator: str
    denominator: str

    def __post_init__(self):
        object.__setattr__(self, "numerator", _part_name(self.numerator))
        object.__setattr__(self, "denominator", _part_name(self.denominator))
        if self.numerator == self.denominator:
            raise InvalidLogRatioError(
                f"Log-ratio {self.name!r} uses part {self.numerator!r} "
                "as both numerator and denominator"
            )

    @classmethod
    def parse(cls, text: str) -> "LogRatioSpec":
        """Parse the ``name: numerator / denominator`` form."""
        name, sep, ratio = text.partition(":")
        numerator, slash, denominator = ratio.partition("/")
        if not sep or not slash or not name.strip():
            raise InvalidLogRatioError(
                f"Cannot parse log-ratio {text!r}, "
                "expected 'name: numerator / denominator'"
            )
        return cls(name.strip(), numerator.strip(), denominator.strip())

    def reversed(self, name: Optional[str] = None) -> "LogRatioSpec":
        return LogRatioSpec(
            name or f"{self.denominator}_{self.numerator}",
            self.denominator,
            self.numerator,
        )

    @property
    def pair(self) -> frozenset:
        return frozenset((self.numerator, self.denominator))

    def __str__(self) -> str:
        return f"{self.name}: {self.numerator} / {self.denominator}"


@dataclass(frozen=True)
class SbpMatrix:
    """(D-1) x D sign matrix encoding a sequential binary partition."""

    parts: Tuple[PartLabel, ...]
    signs: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "parts",
            tuple(p if isinstance(p, PartLabel) else PartLabel(p) for p in self.parts),
        )
        object.__setattr__(
            self, "signs", tuple(tuple(int(s) for s in row) for row in self.signs)
        )

    @property
    def part_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parts)

    def as_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float).reshape(len(self.signs), -1)

    def groups(self, row: int) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        """Names of the numerator and denominator parts of a 0-based row."""
        signs = self.signs[row]
        names = self.part_names
        return (
            tuple(n for n, s in zip(names, signs) if s > 0),
            tuple(n for n, s in zip(names, signs) if s < 0),
        )

    @classmethod
    def parse(cls, text: str, parts: Sequence[Union[str, PartLabel]]) -> "SbpMatrix":
        """Parse one partition per line, D tokens from ``+``, ``-`` and ``0``.

        Blank lines and lines starting with ``#`` are skipped.

        """
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append(tuple(SIGN_TOKENS[token] for token in line.split()))
            except KeyError as e:
                raise InvalidSbpError(
                    f"Invalid sign token {e.args[0]!r} on line {lineno}"
                )
        return cls(parts=tuple(parts), signs=tuple(rows))

    def format(self) -> str:
        tokens = {1: "+", -1: "-", 0: "0"}
        return "".join(
            " ".join(tokens.get(s, str(s)) for s in row) + "\n" for row in self.signs
        )


@dataclass(frozen=True)
class SbpViolation:
    row: Optional[int]
    """1-based row number, or None for a violation of the whole matrix"""
    rule: str

    def __str__(self) -> str:
        where = "matrix" if self.row is None else f"row {self.row}"
        return f"{where}: {self.rule}"


@dataclass(frozen=True)
class LogRatioMatrix:
    """n firms by m named log-ratio variables."""

    columns: Tuple[str, ...]
    values: np.ndarray
    kind: LogRatioKind
    firms: Tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise ValueError(
                f"Log-ratio values of shape {values.shape} "
                f"do not match {len(self.columns)} columns"
            )
        if self.kind == "clr":
            worst = float(np.max(np.abs(values.sum(axis=1)), initial=0.0))
            if worst > CLR_ZERO_SUM_TOLERANCE:
                raise CompositionValidationError(
                    f"clr rows must sum to zero, worst row sums to {worst!r}"
                )
        values.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "firms", tuple(self.firms))

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise UnknownPartError(
                f"Unknown log-ratio column {name!r}, known: {list(self.columns)}"
            )

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {name: self.values[:, j] for j, name in enumerate(self.columns)}


def pairwise_logratio(
    dataset: CompositionSet, spec: LogRatioSpec, base: Optional[float] = None
) -> np.ndarray:
    """``log(numerator) - log(denominator)`` for every firm.

    Args:
        dataset: a valid composition set
        spec: the log-ratio to compute
        base: logarithm base, natural logarithms when None

    Raises:
        UnknownPartError: a part of ``spec`` is not in ``dataset``

    """
    i = dataset.part_index(spec.numerator)
    j = dataset.part_index(spec.denominator)
    require_valid(dataset)
    if base == 10:
        log = np.log10
    elif base is None:
        log = np.log
    else:

        def log(x):
            return np.log(x) / math.log(base)

    return log(dataset.values[:, i]) - log(dataset.values[:, j])


def pairwise_matrix(
    dataset: CompositionSet, specs: Sequence[LogRatioSpec]
) -> LogRatioMatrix:
    return LogRatioMatrix(
        columns=tuple(spec.name for spec in specs),
        values=np.column_stack([pairwise_logratio(dataset, spec) for spec in specs]),
        kind="pairwise",
        firms=dataset.firms,
    )


def clr(dataset: CompositionSet) -> LogRatioMatrix:
    """Centred log-ratios: each part over the geometric mean of the firm's
    parts."""
    require_valid(dataset)
    logs = np.log(dataset.values)
    return LogRatioMatrix(
        columns=tuple(f"clr_{name}" for name in dataset.part_names),
        values=logs - logs.mean(axis=1, keepdims=True),
        kind="clr",
        firms=dataset.firms,
    )


def scaling_constant(r: int, s: int) -> float:
    """``sqrt(r*s / (r+s))`` for r numerator and s denominator parts."""
    if r < 1 or s < 1:
        raise ValueError(f"Group sizes must be positive, got r={r}, s={s}")
    return math.sqrt(r * s / (r + s))


def validate_sbp(sbp: SbpMatrix) -> List[SbpViolation]:
    """Check that ``sbp`` encodes a full sequential binary partition.

    Rows are walked in order while keeping the groups produced by earlier
    rows and not split yet; every row after the first must split exactly one
    of them.

    """
    violations: List[SbpViolation] = []
    names = sbp.part_names
    D = len(names)
    if D < 2:
        return [SbpViolation(None, f"needs at least 2 parts, got {D}")]
    if len(sbp.signs) != D - 1:
        violations.append(
            SbpViolation(
                None, f"expected {D - 1} rows for {D} parts, got {len(sbp.signs)}"
            )
        )

    open_groups: List[Set[str]] = []
    for k, row in enumerate(sbp.signs, start=1):
        if len(row) != D:
            violations.append(SbpViolation(k, f"has {len(row)} entries, expected {D}"))
            continue
        if any(s not in (-1, 0, 1) for s in row):
            violations.append(SbpViolation(k, "entries must be +1, -1 or 0"))
            continue
        plus = {n for n, s in zip(names, row) if s > 0}
        minus = {n for n, s in zip(names, row) if s < 0}
        if not plus:
            violations.append(SbpViolation(k, "row lacks a numerator group"))
        if not minus:
            violations.append(SbpViolation(k, "row lacks a denominator group"))
        if not plus or not minus:
            continue
        support = plus | minus
        if k == 1:
            if len(support) != D:
                violations.append(
                    SbpViolation(k, "first row must involve every part")
                )
                continue
        elif support in open_groups:
            open_groups.remove(support)
        else:
            violations.append(
                SbpViolation(
                    k,
                    "row support is not an unsplit sign group of an earlier row",
                )
            )
            continue
        open_groups.extend(g for g in (plus, minus) if len(g) > 1)

    if not violations:
        for group in open_groups:
            violations.append(
                SbpViolation(
                    None, f"group {{{', '.join(sorted(group))}}} is never split"
                )
            )
    return violations


def sbp_basis(sbp: SbpMatrix) -> np.ndarray:
    """Orthonormal contrast matrix of a valid SBP.

    Row k holds ``+sqrt(s/(r(r+s)))`` on its numerator parts and
    ``-sqrt(r/(s(r+s)))`` on its denominator parts, so that projecting the
    logs of a composition gives the ilr coordinates.

    """
    signs = sbp.as_array()
    psi = np.zeros_like(signs)
    for k, row in enumerate(signs):
        r = int((row > 0).sum())
        s = int((row < 0).sum())
        psi[k, row > 0] = math.sqrt(s / (r * (r + s)))
        psi[k, row < 0] = -math.sqrt(r / (s * (r + s)))
    return psi


def ilr_column_name(k: int, plus: Sequence[str], minus: Sequence[str]) -> str:
    return f"ilr_{k}:{','.join(plus)}|{','.join(minus)}"


def ilr(
    dataset: CompositionSet,
    sbp: SbpMatrix,
    names: Optional[Sequence[str]] = None,
) -> LogRatioMatrix:
    """Isometric log-ratio coordinates of every firm.

    Coordinate k is ``sqrt(r*s/(r+s))`` times the log-ratio of the geometric
    means of the numerator and denominator groups of SBP row k.

    Args:
        dataset: a valid composition set
        sbp: a valid SBP over the same parts, in the same order
        names: optional coordinate names, auto-generated otherwise

    Raises:
        InvalidSbpError: the SBP does not validate or its parts differ

    """
    violations = validate_sbp(sbp)
    if violations:
        raise InvalidSbpError(
            "Invalid SBP: " + "; ".join(str(v) for v in violations), violations
        )
    if sbp.part_names != dataset.part_names:
        raise InvalidSbpError(
            f"SBP parts {list(sbp.part_names)} do not match "
            f"composition parts {list(dataset.part_names)}"
        )
    require_valid(dataset)
    if names is None:
        names = [
            ilr_column_name(k, *sbp.groups(k - 1)) for k in range(1, len(sbp.signs) + 1)
        ]
    elif len(names) != len(sbp.signs):
        raise InvalidSbpError(
            f"{len(names)} coordinate names given for {len(sbp.signs)} SBP rows"
        )
    return LogRatioMatrix(
        columns=tuple(names),
        values=np.log(dataset.values) @ sbp_basis(sbp).T,
        kind="ilr",
        firms=dataset.firms,
    )


BUILTIN_SBPS: Dict[str, Tuple[Tuple[int, ...], ...]] = {
    # revenues, costs, liabilities, assets
    "dupont4": (
        (1, 1, -1, -1),
        (1, -1, 0, 0),
        (0, 0, 1, -1),
    ),
    # non-current assets, current assets, non-current liabilities,
    # current liabilities, revenues, costs
    "balance6": (
        (-1, -1, -1, -1, 1, 1),
        (0, 0, 0, 0, 1, -1),
        (-1, -1, 1, 1, 0, 0),
        (1, -1, 0, 0, 0, 0),
        (0, 0, 1, -1, 0, 0),
    ),
}


def builtin_sbp(name: str, parts: Sequence[Union[str, PartLabel]]) -> SbpMatrix:
    """Bind a built-in SBP to ``parts``, given in the built-in part order."""
    try:
        signs = BUILTIN_SBPS[name]
    except KeyError:
        raise InvalidSbpError(
            f"Unknown built-in SBP {name!r}, known: {sorted(BUILTIN_SBPS)}"
        )
    if len(parts) != len(signs[0]):
        raise InvalidSbpError(
            f"Built-in SBP {name!r} needs {len(signs[0])} parts, got {len(parts)}"
        )
    return SbpMatrix(parts=tuple(parts), signs=signs)
