# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Analysis configuration.

The configuration is a YAML file; its values override :data:`DEFAULT_CONFIG`
and are themselves overridden by command-line flags. Relative paths are
resolved against the directory of the configuration file. Example::

    dataset:
      path: wineries.csv
      firm_column: Firm
      parts:
        x1: {column: x1, description: revenues}
        x2: {column: x2, description: costs}
        x3: {column: x3, description: liabilities}
        x4: {column: x4, description: assets}
      categorical: [Brand]
    scheme: dupont4
    sbp: dupont4
    graph: dupont4
    cluster: {k: 3, k_min: 2, k_max: 8, restarts: 25}
    regression: {responses: pairwise, predictors: [Age, Brand]}
    zeros: {fraction: 0.65, allow_flagged: false}
    output: output

"""

from copy import deepcopy
from dataclasses import dataclass, field, replace
import importlib.resources
import logging
import os
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import yaml

from .composition import CompositionSet
from .dataset import DatasetLayout, PartColumn, bundled_dataset_path, read_dataset
from .exception import CodaError, ConfigurationError
from .graph import BUILTIN_GRAPHS, LogRatioGraph, builtin_graph, require_valid_graph
from .ratios import RatioScheme
from .transforms import BUILTIN_SBPS, SbpMatrix, builtin_sbp, validate_sbp

logger = logging.getLogger(__name__)

SEED_ENVVAR = "CODA_LEDGER_SEED"
FALLBACK_SEED = 42
BUNDLED_CONFIG = "wineries.yml"

DEFAULT_CONFIG: Dict[str, Any] = {
    "dataset": {
        "path": None,
        "firm_column": "Firm",
        "parts": {},
        "categorical": [],
        "delimiter": ",",
    },
    "scheme": "dupont4",
    "roles": None,
    "sbp": "dupont4",
    "graph": "dupont4",
    "cluster": {"k": 3, "k_min": 2, "k_max": 8, "restarts": 25, "seed": None},
    "regression": {"responses": "pairwise", "predictors": ["Age", "Brand"]},
    "zeros": {"fraction": 0.65, "allow_flagged": False},
    "output": "output",
}


def default_seed() -> int:
    """Seed from the ``CODA_LEDGER_SEED`` environment variable, else 42."""
    value = os.environ.get(SEED_ENVVAR)
    if value is None or value.strip() == "":
        return FALLBACK_SEED
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENVVAR} must be an integer, got {value!r}")


@dataclass(frozen=True)
class ClusterSettings:
    k: int = 3
    k_min: int = 2
    k_max: int = 8
    restarts: int = 25
    seed: int = FALLBACK_SEED


@dataclass(frozen=True)
class RegressionSettings:
    responses: str = "pairwise"
    predictors: Tuple[str, ...] = ("Age", "Brand")


@dataclass(frozen=True)
class ZeroSettings:
    fraction: float = 0.65
    allow_flagged: bool = False


@dataclass(frozen=True)
class AnalysisConfig:
    dataset_path: str
    layout: DatasetLayout = DatasetLayout()
    scheme: str = "dupont4"
    roles: Optional[Mapping[str, str]] = None
    sbp: str = "dupont4"
    graph: Union[str, Tuple[str, ...]] = "dupont4"
    cluster: ClusterSettings = ClusterSettings()
    regression: RegressionSettings = RegressionSettings()
    zeros: ZeroSettings = ZeroSettings()
    output: str = "output"
    base_dir: str = field(default=".", compare=False)

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def with_overrides(self, **overrides: Any) -> "AnalysisConfig":
        """Replace top-level and ``cluster``/``regression``/``zeros`` fields;
        ``None`` values are ignored."""
        top: Dict[str, Any] = {}
        nested: Dict[str, Dict[str, Any]] = {
            "cluster": {},
            "regression": {},
            "zeros": {},
        }
        for key, value in overrides.items():
            if value is None:
                continue
            section, _, name = key.partition("__")
            if name:
                if section not in nested:
                    raise ConfigurationError(
                        f"Unknown configuration section {section!r}"
                    )
                nested[section][name] = value
            else:
                top[key] = value
        for section, values in nested.items():
            if values:
                top[section] = replace(getattr(self, section), **values)
        return replace(self, **top)

    def load_dataset(self) -> CompositionSet:
        return read_dataset(self.dataset_path, self.layout)

    def ratio_scheme(self, dataset: CompositionSet) -> RatioScheme:
        return RatioScheme.for_parts(self.scheme, dataset.parts, self.roles)

    def sbp_matrix(self, dataset: CompositionSet) -> SbpMatrix:
        """Built-in SBP by name, else a sign-matrix file."""
        if self.sbp in BUILTIN_SBPS:
            return builtin_sbp(self.sbp, dataset.parts)
        with open(self.resolve(self.sbp)) as f:
            return SbpMatrix.parse(f.read(), dataset.parts)

    def log_ratio_graph(self, dataset: CompositionSet) -> LogRatioGraph:
        """Built-in graph by name, an edge-list file, or inline edges."""
        if isinstance(self.graph, tuple):
            return LogRatioGraph.parse("\n".join(self.graph), dataset.parts)
        if self.graph in BUILTIN_GRAPHS:
            return builtin_graph(self.graph, dataset.parts)
        with open(self.resolve(self.graph)) as f:
            return LogRatioGraph.parse(f.read(), dataset.parts)

    def check(self, dataset: CompositionSet) -> None:
        """Check the configuration against ``dataset`` before any analysis.

        Raises:
            ConfigurationError: a column, role, SBP or graph is not usable

        """
        try:
            self.ratio_scheme(dataset)
            sbp = self.sbp_matrix(dataset)
            violations = validate_sbp(sbp)
            if violations:
                raise ConfigurationError(
                    "Invalid SBP: " + "; ".join(str(v) for v in violations)
                )
            require_valid_graph(self.log_ratio_graph(dataset))
            for name in self.regression.predictors + self.layout.categorical:
                dataset.extra(name)
        except ConfigurationError:
            raise
        except CodaError as e:
            raise ConfigurationError(f"{type(e).__name__}: {e}")
        except OSError as e:
            raise ConfigurationError(str(e))
        if self.regression.responses not in ("pairwise", "ilr"):
            raise ConfigurationError(
                f"Regression responses must be pairwise or ilr, "
                f"got {self.regression.responses!r}"
            )
        if not 0 < self.zeros.fraction < 1:
            raise ConfigurationError(
                f"Zero replacement fraction must lie in (0, 1), "
                f"got {self.zeros.fraction!r}"
            )


def merge_configs(base: Mapping[str, Any], other: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``other`` into a copy of ``base``.

    Raises:
        ConfigurationError: ``other`` holds a key unknown to ``base``

    """
    merged = deepcopy(dict(base))
    for key, value in other.items():
        if key not in merged:
            raise ConfigurationError(f"Unknown configuration key {key!r}")
        if isinstance(merged[key], dict) and merged[key] and isinstance(value, dict):
            merged[key] = merge_configs(merged[key], value)
        else:
            merged[key] = value
    return merged


def bundled_config_path() -> str:
    resource = importlib.resources.files("coda.ledger") / "data" / BUNDLED_CONFIG
    return str(resource)


def _layout(section: Mapping[str, Any]) -> DatasetLayout:
    parts = []
    for name, spec in (section.get("parts") or {}).items():
        if isinstance(spec, str):
            spec = {"column": spec}
        if not isinstance(spec, dict):
            raise ConfigurationError(f"Invalid part entry for {name!r}")
        parts.append(
            PartColumn(
                str(name),
                str(spec.get("column", name)),
                str(spec.get("description", "")),
            )
        )
    return DatasetLayout(
        firm_column=str(section["firm_column"]),
        parts=tuple(parts),
        categorical=tuple(str(c) for c in section.get("categorical") or ()),
        delimiter=str(section["delimiter"]),
    )


def config_from_dict(raw: Mapping[str, Any], base_dir: str = ".") -> AnalysisConfig:
    conf = merge_configs(DEFAULT_CONFIG, raw)
    try:
        dataset_path = conf["dataset"]["path"]
        if dataset_path is None:
            dataset_path = bundled_dataset_path()
        elif not os.path.isabs(dataset_path):
            dataset_path = os.path.join(base_dir, dataset_path)
        graph = conf["graph"]
        if isinstance(graph, list):
            graph = tuple(str(edge) for edge in graph)
        cluster = dict(conf["cluster"])
        if cluster.get("seed") is None:
            cluster["seed"] = default_seed()
        regression = dict(conf["regression"])
        regression["predictors"] = tuple(regression["predictors"] or ())
        return AnalysisConfig(
            dataset_path=dataset_path,
            layout=_layout(conf["dataset"]),
            scheme=str(conf["scheme"]),
            roles=conf["roles"],
            sbp=str(conf["sbp"]),
            graph=graph,
            cluster=ClusterSettings(**{k: int(v) for k, v in cluster.items()}),
            regression=RegressionSettings(**regression),
            zeros=ZeroSettings(
                fraction=float(conf["zeros"]["fraction"]),
                allow_flagged=bool(conf["zeros"]["allow_flagged"]),
            ),
            output=str(conf["output"]),
            base_dir=base_dir,
        )
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid configuration: {e}")


def load_config(path: Optional[str] = None) -> AnalysisConfig:
    """Load the YAML configuration at ``path``, the bundled one by default."""
    if path is None:
        path = bundled_config_path()
    try:
        with open(path) as f:
            raw = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration file {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML in configuration file {path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigurationError(f"Configuration file {path} is not a mapping")
    logger.debug("Loaded configuration from %s", path)
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))
