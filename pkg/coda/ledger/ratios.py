# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Standard financial ratios of firms and of industry centres.

Averages of standard ratios are computed from compositional centres: the
ratio of the geometric means of two parts is the geometric mean of their
ratio, so ``g(x1)/g(x4)`` is the industry turnover. Ratios whose derived
denominator (equity) is not positive are reported as :data:`UNDEFINED`.

"""

from dataclasses import dataclass
from enum import Enum
import logging
import re
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
from typing_extensions import Literal

from .composition import (
    Composition,
    CompositionalCentre,
    CompositionSet,
    PartLabel,
    RowFilter,
    compositional_centre,
    label_sort_key,
)
from .exception import ConfigurationError, EmptyGroupError, UnknownPartError

logger = logging.getLogger(__name__)

SchemeName = Literal["dupont4", "balance6"]

OVERALL = "overall"


class Undefined(Enum):
    """Typed marker of a ratio whose denominator is not positive."""

    UNDEFINED = "undefined"

    def __repr__(self) -> str:
        return "UNDEFINED"


UNDEFINED = Undefined.UNDEFINED

RatioValue = Union[float, Undefined]

SCHEME_ROLES: Dict[str, Tuple[str, ...]] = {
    "dupont4": ("revenues", "costs", "liabilities", "assets"),
    "balance6": (
        "non_current_assets",
        "current_assets",
        "non_current_liabilities",
        "current_liabilities",
        "revenues",
        "costs",
    ),
}

Figures = Mapping[str, float]
_Term = Callable[[Figures], float]


def _assets(f: Figures) -> float:
    return f["non_current_assets"] + f["current_assets"]


def _liabilities(f: Figures) -> float:
    return f["non_current_liabilities"] + f["current_liabilities"]


def _equity(f: Figures) -> float:
    return _assets(f) - _liabilities(f)


def _profit(f: Figures) -> float:
    return f["revenues"] - f["costs"]


# ratio name -> (numerator, denominator) over the role values
RATIO_DEFINITIONS: Dict[str, Dict[str, Tuple[_Term, _Term]]] = {
    "dupont4": {
        "turnover": (lambda f: f["revenues"], lambda f: f["assets"]),
        "margin": (_profit, lambda f: f["revenues"]),
        "leverage": (
            lambda f: f["assets"],
            lambda f: f["assets"] - f["liabilities"],
        ),
        "roe": (_profit, lambda f: f["assets"] - f["liabilities"]),
    },
    "balance6": {
        "turnover": (lambda f: f["revenues"], _assets),
        "current_asset_turnover": (
            lambda f: f["revenues"],
            lambda f: f["current_assets"],
        ),
        "margin": (_profit, lambda f: f["revenues"]),
        "leverage": (_assets, _equity),
        "roa": (_profit, _assets),
        "roe": (_profit, _equity),
        "indebtedness": (_liabilities, _assets),
        "current_ratio": (
            lambda f: f["current_assets"],
            lambda f: f["current_liabilities"],
        ),
        "debt_maturity": (lambda f: f["non_current_liabilities"], _liabilities),
        "asset_structure": (lambda f: f["non_current_assets"], _assets),
    },
}


@dataclass(frozen=True)
class RatioScheme:
    """Binding of the roles of a ratio scheme to the parts of a dataset.

    ``parts`` is the part order of the compositions the scheme applies to.

    """

    name: str
    part_roles: Mapping[str, str]
    parts: Tuple[str, ...]

    def __post_init__(self):
        if self.name not in SCHEME_ROLES:
            raise ConfigurationError(
                f"Unknown ratio scheme {self.name!r}, known: {sorted(SCHEME_ROLES)}"
            )
        parts = tuple(p.name if isinstance(p, PartLabel) else p for p in self.parts)
        roles = {
            role: (p.name if isinstance(p, PartLabel) else p)
            for role, p in self.part_roles.items()
        }
        expected = SCHEME_ROLES[self.name]
        missing = [r for r in expected if r not in roles]
        unexpected = sorted(set(roles) - set(expected))
        if missing or unexpected:
            raise ConfigurationError(
                f"Scheme {self.name} roles mismatch: missing {missing}, "
                f"unexpected {unexpected}"
            )
        bound = list(roles.values())
        if len(set(bound)) != len(bound):
            raise ConfigurationError(
                f"Scheme {self.name} maps several roles to the same part: {roles}"
            )
        for role, part in roles.items():
            if part not in parts:
                raise UnknownPartError(
                    f"Role {role!r} is bound to unknown part {part!r}"
                )
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "part_roles", roles)

    @classmethod
    def for_parts(
        cls,
        name: str,
        parts: Sequence[Union[str, PartLabel]],
        roles: Optional[Mapping[str, str]] = None,
    ) -> "RatioScheme":
        """Bind scheme ``name`` to ``parts``, positionally unless ``roles``
        is given."""
        names = tuple(p.name if isinstance(p, PartLabel) else p for p in parts)
        if roles is None:
            expected = SCHEME_ROLES.get(name, ())
            if len(expected) != len(names):
                raise ConfigurationError(
                    f"Scheme {name} needs {len(expected)} parts, got {len(names)}"
                )
            roles = dict(zip(expected, names))
        return cls(name=name, part_roles=roles, parts=names)

    @property
    def ratio_names(self) -> Tuple[str, ...]:
        return tuple(RATIO_DEFINITIONS[self.name])

    def figures(self, values: Sequence[float]) -> Dict[str, float]:
        index = {p: i for i, p in enumerate(self.parts)}
        return {role: float(values[index[p]]) for role, p in self.part_roles.items()}


@dataclass(frozen=True)
class StandardRatios:
    scheme: str
    values: Mapping[str, RatioValue]

    def __getitem__(self, name: str) -> RatioValue:
        return self.values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def undefined(self) -> List[str]:
        return [name for name, v in self.values.items() if v is UNDEFINED]

    def as_dict(self) -> Dict[str, RatioValue]:
        return dict(self.values)


def _ratios_from_values(values: Sequence[float], scheme: RatioScheme) -> StandardRatios:
    figures = scheme.figures(values)
    ratios: Dict[str, RatioValue] = {}
    for name, (numerator, denominator) in RATIO_DEFINITIONS[scheme.name].items():
        den = denominator(figures)
        ratios[name] = numerator(figures) / den if den > 0 else UNDEFINED
    return StandardRatios(scheme=scheme.name, values=ratios)


def standard_ratios(c: Composition, scheme: RatioScheme) -> StandardRatios:
    """Standard ratios of one composition, whose parts are in ``scheme.parts``
    order.

    Raises:
        ConfigurationError: the composition size does not match the scheme

    """
    if c.D != len(scheme.parts):
        raise ConfigurationError(
            f"Composition has {c.D} parts, scheme binds {len(scheme.parts)}"
        )
    ratios = _ratios_from_values(c.values, scheme)
    if ratios.undefined():
        logger.debug("Undefined ratios: %s", ", ".join(ratios.undefined()))
    return ratios


def centre_ratios(
    centre: CompositionalCentre, scheme: RatioScheme
) -> StandardRatios:
    """Industry ratios from the centre, e.g. turnover ``g(x1)/g(x4)``."""
    names = tuple(p.name for p in centre.parts)
    if names != scheme.parts:
        raise UnknownPartError(
            f"Centre parts {list(names)} do not match scheme parts "
            f"{list(scheme.parts)}"
        )
    ratios = standard_ratios(centre.as_composition(), scheme)
    if ratios.undefined():
        logger.warning(
            "Centre ratios undefined (non-positive denominator): %s",
            ", ".join(ratios.undefined()),
        )
    return ratios


@dataclass(frozen=True)
class GroupRatios:
    group: str
    n: int
    centre: CompositionalCentre
    ratios: StandardRatios


def group_labels(dataset: CompositionSet, group_column: str) -> List[str]:
    """Distinct non-missing labels of an extras column, numbers first."""
    labels = {lbl for lbl in dataset.extra(group_column).labels() if lbl is not None}
    return sorted(labels, key=label_sort_key)


def group_ratio_table(
    dataset: CompositionSet,
    scheme: RatioScheme,
    group_column: Optional[str] = None,
    groups: Optional[Sequence[str]] = None,
) -> List[GroupRatios]:
    """One row per group of ``group_column`` followed by the overall row.

    Args:
        dataset: valid composition set
        scheme: ratio scheme bound to the dataset parts
        group_column: categorical extras column, or None for the overall row
        groups: group labels to report, all labels present by default

    Raises:
        EmptyGroupError: a requested group holds no firm

    """
    rows = []
    if group_column is not None:
        if groups is None:
            groups = group_labels(dataset, group_column)
        for label in groups:
            mask = dataset.group_mask(group_column, label)
            if not mask.any():
                raise EmptyGroupError(f"empty group: {group_column}={label}")
            centre = compositional_centre(dataset, mask)
            rows.append(
                GroupRatios(
                    group=label,
                    n=int(mask.sum()),
                    centre=centre,
                    ratios=centre_ratios(centre, scheme),
                )
            )
    centre = compositional_centre(dataset)
    rows.append(
        GroupRatios(
            group=OVERALL,
            n=dataset.n,
            centre=centre,
            ratios=centre_ratios(centre, scheme),
        )
    )
    return rows


@dataclass(frozen=True)
class FirmRatios:
    firm: str
    ratios: StandardRatios


def firm_ratio_table(dataset: CompositionSet, scheme: RatioScheme) -> List[FirmRatios]:
    """Standard ratios of every firm."""
    if dataset.part_names != scheme.parts:
        raise UnknownPartError(
            f"Dataset parts {list(dataset.part_names)} do not match scheme parts "
            f"{list(scheme.parts)}"
        )
    rows = [
        FirmRatios(firm=firm, ratios=_ratios_from_values(values, scheme))
        for firm, values in zip(dataset.firms, dataset.values)
    ]
    undefined = sum(1 for row in rows if row.ratios.undefined())
    if undefined:
        logger.warning("%s firms have undefined ratios", undefined)
    return rows


def ratio_columns(rows: Sequence[FirmRatios], name: str) -> np.ndarray:
    """Values of ratio ``name`` across firms, NaN where undefined."""
    return np.array(
        [
            np.nan if row.ratios[name] is UNDEFINED else row.ratios[name]
            for row in rows
        ],
        dtype=float,
    )


def ratio_features(
    rows: Sequence[FirmRatios], names: Sequence[str]
) -> Tuple[np.ndarray, np.ndarray]:
    """Feature matrix of the ratios ``names``, one row per firm with every
    ratio defined, and the mask of the firms kept."""
    features = np.column_stack([ratio_columns(rows, name) for name in names])
    keep = np.isfinite(features).all(axis=1)
    if not keep.all():
        logger.warning("Leaving out %s firms with undefined ratios", int((~keep).sum()))
    return features[keep], keep


def ratio_geometric_mean(
    dataset: CompositionSet,
    numerator: str,
    denominator: str,
    row_filter: RowFilter = None,
) -> float:
    """Geometric mean over the selected firms of ``numerator/denominator``."""
    mask = dataset.mask(row_filter)
    if not mask.any():
        raise EmptyGroupError("empty group")
    ratio = dataset.column(numerator)[mask] / dataset.column(denominator)[mask]
    return float(np.exp(np.mean(np.log(ratio))))


@dataclass(frozen=True)
class MeanDiagnostic:
    """Arithmetic against geometric means of a ratio and of its reciprocal.

    Geometric means satisfy ``geometric * geometric_reversed == 1``; arithmetic
    means do not, and their product measures the inconsistency.

    """

    numerator: str
    denominator: str
    n: int
    arithmetic: float
    arithmetic_reversed: float
    geometric: float
    geometric_reversed: float

    @property
    def arithmetic_inconsistency(self) -> float:
        return self.arithmetic * self.arithmetic_reversed


def arithmetic_mean_diagnostic(
    dataset: CompositionSet,
    numerator: str,
    denominator: str,
    row_filter: RowFilter = None,
) -> MeanDiagnostic:
    """Compare the means of ``numerator/denominator`` and of its reciprocal.

    Only meant to show how arithmetic averages of ratios depend on which
    part is put in the numerator; no analysis uses it.

    """
    mask = dataset.mask(row_filter)
    if not mask.any():
        raise EmptyGroupError("empty group")
    ratio = dataset.column(numerator)[mask] / dataset.column(denominator)[mask]
    return MeanDiagnostic(
        numerator=numerator,
        denominator=denominator,
        n=int(mask.sum()),
        arithmetic=float(np.mean(ratio)),
        arithmetic_reversed=float(np.mean(1.0 / ratio)),
        geometric=float(np.exp(np.mean(np.log(ratio)))),
        geometric_reversed=float(np.exp(np.mean(-np.log(ratio)))),
    )


_ROLE_RE = re.compile(r"^[a-z_]+$")


def parse_roles(text: str) -> Dict[str, str]:
    """Parse ``role=part`` pairs separated by commas."""
    roles = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        role, sep, part = item.partition("=")
        role, part = role.strip(), part.strip()
        if not sep or not _ROLE_RE.match(role) or not part:
            raise ConfigurationError(f"Invalid role binding {item!r}, use role=part")
        roles[role] = part
    return roles
