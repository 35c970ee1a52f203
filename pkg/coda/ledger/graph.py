# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Sets of pairwise log-ratios seen as graphs over parts.

Parts are vertices and each pairwise log-ratio is an edge whose arrow points
at its numerator. D-1 log-ratios hold all the information of a D-part
composition, without redundancy, exactly when the undirected view of that
graph is connected and acyclic. In such a tree any other pairwise log-ratio
is the signed sum of the edges along the unique path joining its two parts.

"""

from dataclasses import dataclass
import logging
from typing import Dict, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .composition import CompositionSet, PartLabel
from .exception import InvalidGraphError, InvalidLogRatioError, UnknownPartError
from .transforms import LogRatioSpec, pairwise_logratio

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogRatioGraph:
    parts: Tuple[PartLabel, ...]
    edges: Tuple[LogRatioSpec, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "parts",
            tuple(p if isinstance(p, PartLabel) else PartLabel(p) for p in self.parts),
        )
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def part_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parts)

    def edge(self, name: str) -> LogRatioSpec:
        for edge in self.edges:
            if edge.name == name:
                return edge
        raise UnknownPartError(f"Unknown log-ratio {name!r} in graph")

    def undirected(self) -> nx.MultiGraph:
        """Undirected view; duplicated pairs are kept as parallel edges."""
        g = nx.MultiGraph()
        g.add_nodes_from(self.part_names)
        for edge in self.edges:
            g.add_edge(edge.numerator, edge.denominator, key=edge.name, spec=edge)
        return g

    @classmethod
    def parse(
        cls, text: str, parts: Sequence[Union[str, PartLabel]]
    ) -> "LogRatioGraph":
        """Parse one ``name: numerator / denominator`` edge per line.

        Blank lines and lines starting with ``#`` are skipped.

        """
        edges = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                edges.append(LogRatioSpec.parse(line))
            except InvalidLogRatioError as e:
                raise InvalidLogRatioError(f"line {lineno}: {e}")
        return cls(parts=tuple(parts), edges=tuple(edges))

    def format(self) -> str:
        return "".join(f"{edge}\n" for edge in self.edges)


@dataclass(frozen=True)
class GraphDiagnosis:
    edge_count: int
    expected_edge_count: int
    components: Tuple[Tuple[str, ...], ...]
    cycle: Tuple[str, ...]
    duplicated_pairs: Tuple[Tuple[str, str], ...]

    @property
    def valid(self) -> bool:
        return (
            self.edge_count == self.expected_edge_count
            and len(self.components) == 1
            and not self.cycle
            and not self.duplicated_pairs
        )

    @property
    def messages(self) -> List[str]:
        messages = []
        if self.edge_count != self.expected_edge_count:
            messages.append(
                f"wrong edge count: {self.edge_count} edges, "
                f"expected {self.expected_edge_count}"
            )
        if len(self.components) > 1:
            messages.append(
                "disconnected components: "
                + " ".join("{" + ", ".join(c) + "}" for c in self.components)
            )
        if self.cycle:
            messages.append("cycle: {" + ", ".join(self.cycle) + "}")
        for a, b in self.duplicated_pairs:
            messages.append(f"duplicated pair: {a} and {b}")
        return messages

    def __str__(self) -> str:
        return "valid" if self.valid else "; ".join(self.messages)


@dataclass(frozen=True)
class DerivationPath:
    """``target`` as a signed sum of graph edges."""

    target: LogRatioSpec
    terms: Tuple[Tuple[str, int], ...]

    def coefficients(self) -> Dict[str, int]:
        return dict(self.terms)

    def __str__(self) -> str:
        text = ""
        # positive terms first
        for name, coefficient in sorted(self.terms, key=lambda t: t[1] < 0):
            sign = "-" if coefficient < 0 else "+"
            if text:
                text += f" {sign} {name}"
            else:
                text = name if coefficient > 0 else f"-{name}"
        return f"{self.target.name} = {text}"


def _check_parts(g: LogRatioGraph) -> None:
    known = set(g.part_names)
    for edge in g.edges:
        for part in (edge.numerator, edge.denominator):
            if part not in known:
                raise UnknownPartError(
                    f"Log-ratio {edge.name!r} uses unknown part {part!r}"
                )


def validate_graph(g: LogRatioGraph) -> GraphDiagnosis:
    """Check that the log-ratios form a spanning tree over the parts.

    Connectivity and cycles are assessed on the undirected view. A single
    witness cycle is reported.

    Raises:
        UnknownPartError: an edge references a part outside the graph

    """
    _check_parts(g)
    order = {name: i for i, name in enumerate(g.part_names)}

    seen: Dict[frozenset, str] = {}
    duplicated = []
    for edge in g.edges:
        if edge.pair in seen:
            duplicated.append((seen[edge.pair], edge.name))
        else:
            seen[edge.pair] = edge.name

    simple = nx.Graph()
    simple.add_nodes_from(g.part_names)
    simple.add_edges_from(tuple(edge.pair) for edge in g.edges)
    components = sorted(
        (
            tuple(sorted(c, key=order.__getitem__))
            for c in nx.connected_components(simple)
        ),
        key=lambda c: order[c[0]],
    )
    try:
        cycle_edges = nx.find_cycle(simple)
    except nx.NetworkXNoCycle:
        cycle: Tuple[str, ...] = ()
    else:
        cycle = tuple(sorted((u for u, _ in cycle_edges), key=order.__getitem__))

    diagnosis = GraphDiagnosis(
        edge_count=len(g.edges),
        expected_edge_count=len(g.parts) - 1,
        components=tuple(components),
        cycle=cycle,
        duplicated_pairs=tuple(duplicated),
    )
    if diagnosis.valid:
        assert nx.is_tree(simple) and simple.number_of_edges() == len(g.parts) - 1
    else:
        logger.debug("Invalid log-ratio graph: %s", diagnosis)
    return diagnosis


def require_valid_graph(g: LogRatioGraph) -> None:
    diagnosis = validate_graph(g)
    if not diagnosis.valid:
        raise InvalidGraphError(f"Invalid log-ratio graph: {diagnosis}", diagnosis)


def derive_logratio(g: LogRatioGraph, target: LogRatioSpec) -> DerivationPath:
    """Express ``target`` along the unique tree path from its denominator to
    its numerator.

    An edge walked in its arrow direction (towards its numerator) counts +1,
    against it -1.

    Raises:
        InvalidGraphError: the graph is not a connected acyclic graph
        UnknownPartError: a part of ``target`` is not a vertex of the graph

    """
    require_valid_graph(g)
    for part in (target.numerator, target.denominator):
        if part not in g.part_names:
            raise UnknownPartError(f"Part {part!r} is not in the log-ratio graph")

    tree = g.undirected()
    path = nx.shortest_path(tree, source=target.denominator, target=target.numerator)
    terms = []
    for u, v in zip(path, path[1:]):
        # a tree has a single edge between adjacent vertices
        (spec,) = (data["spec"] for data in tree.get_edge_data(u, v).values())
        terms.append((spec.name, 1 if spec.numerator == v else -1))
    return DerivationPath(target=target, terms=tuple(terms))


def evaluate_path(
    dataset: CompositionSet, g: LogRatioGraph, path: DerivationPath
) -> np.ndarray:
    """Evaluate a derivation path on every firm of ``dataset``."""
    total = np.zeros(dataset.n)
    for name, coefficient in path.terms:
        total += coefficient * pairwise_logratio(dataset, g.edge(name))
    return total


BUILTIN_GRAPHS: Dict[str, Tuple[Tuple[str, int, int], ...]] = {
    # turnover, margin, leverage over revenues, costs, liabilities, assets
    "dupont4": (("y1", 0, 3), ("y2", 0, 1), ("y3", 2, 3)),
    # current-asset turnover, margin, current ratio, asset structure and
    # debt maturity over non-current assets, current assets, non-current
    # liabilities, current liabilities, revenues, costs
    "balance6": (
        ("y1", 4, 1),
        ("y2", 4, 5),
        ("y3", 1, 3),
        ("y4", 0, 1),
        ("y5", 2, 3),
    ),
}


def builtin_graph(name: str, parts: Sequence[Union[str, PartLabel]]) -> LogRatioGraph:
    """Bind a built-in graph to ``parts``, given in the built-in part order."""
    try:
        edges = BUILTIN_GRAPHS[name]
    except KeyError:
        raise InvalidGraphError(
            f"Unknown built-in graph {name!r}, known: {sorted(BUILTIN_GRAPHS)}"
        )
    if len(parts) != len(edges) + 1:
        raise InvalidGraphError(
            f"Built-in graph {name!r} needs {len(edges) + 1} parts, got {len(parts)}"
        )
    labels = [p.name if isinstance(p, PartLabel) else p for p in parts]
    return LogRatioGraph(
        parts=tuple(parts),
        edges=tuple(LogRatioSpec(n, labels[i], labels[j]) for n, i, j in edges),
    )
