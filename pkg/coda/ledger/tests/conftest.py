# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

from typing import Callable, List

import numpy as np
import pytest

from coda.ledger.composition import CompositionSet, ExtraColumn
from coda.ledger.reproduce import toy_dataset, winery_dataset

RANDOM_SETS = 200


@pytest.fixture(scope="session")
def winery() -> CompositionSet:
    """The bundled 109-firm winery dataset."""
    return winery_dataset()


@pytest.fixture
def toy() -> CompositionSet:
    """Seven firms with x1 = 10^(7-i) and x2 = 10^(i-1)."""
    return toy_dataset()


def make_composition_set(
    values, firms=None, parts=None, **extras
) -> CompositionSet:
    values = np.asarray(values, dtype=float)
    n, D = values.shape
    return CompositionSet(
        parts=parts or tuple(f"x{j}" for j in range(1, D + 1)),
        firms=firms or tuple(str(i) for i in range(1, n + 1)),
        values=values,
        extras={
            name: ExtraColumn(name, tuple(column), isinstance(column[0], str))
            for name, column in extras.items()
        },
    )


@pytest.fixture
def composition_set() -> Callable[..., CompositionSet]:
    return make_composition_set


@pytest.fixture(scope="session")
def random_compositions() -> List[CompositionSet]:
    """Log-normal composition sets, n in [8, 50] and D in [3, 6]."""
    rng = np.random.default_rng(20240611)
    sets = []
    for _ in range(RANDOM_SETS):
        n = int(rng.integers(8, 51))
        D = int(rng.integers(3, 7))
        values = np.exp(rng.normal(0.0, 1.5, size=(n, D))) * 1000.0
        sets.append(make_composition_set(values))
    return sets
