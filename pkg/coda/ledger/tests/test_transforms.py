# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import math

import numpy as np
import pytest

from coda.ledger.exception import (
    CompositionValidationError,
    InvalidLogRatioError,
    InvalidSbpError,
    UnknownPartError,
)
from coda.ledger.transforms import (
    LogRatioSpec,
    SbpMatrix,
    builtin_sbp,
    clr,
    ilr,
    pairwise_logratio,
    pairwise_matrix,
    sbp_basis,
    scaling_constant,
    validate_sbp,
)

PARTS = ("x1", "x2", "x3", "x4")


def test_parse_logratio_spec():
    spec = LogRatioSpec.parse(" y1 : x1 / x4 ")
    assert spec == LogRatioSpec("y1", "x1", "x4")
    assert str(spec) == "y1: x1 / x4"
    assert spec.reversed() == LogRatioSpec("x4_x1", "x4", "x1")
    assert spec.pair == frozenset({"x1", "x4"})


@pytest.mark.parametrize("text", ["y1 x1 / x4", "y1: x1 x4", ": x1 / x4"])
def test_parse_logratio_spec_errors(text):
    with pytest.raises(InvalidLogRatioError):
        LogRatioSpec.parse(text)


def test_logratio_spec_same_part():
    with pytest.raises(InvalidLogRatioError, match="both numerator and denominator"):
        LogRatioSpec("y", "x1", "x1")


def test_toy_base10_logratios(toy):
    y = pairwise_logratio(toy, LogRatioSpec("y", "x2", "x1"), base=10)
    assert y == pytest.approx([-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0], abs=1e-12)


def test_pairwise_antisymmetry(random_compositions):
    for dataset in random_compositions:
        spec = LogRatioSpec("y", "x1", "x2")
        assert np.array_equal(
            pairwise_logratio(dataset, spec),
            -pairwise_logratio(dataset, spec.reversed()),
        )


def test_pairwise_unknown_part(winery):
    with pytest.raises(UnknownPartError):
        pairwise_logratio(winery, LogRatioSpec("y", "x1", "x9"))


def test_pairwise_requires_valid_composition(composition_set):
    dataset = composition_set([[1.0, 0.0], [1.0, 2.0]])
    with pytest.raises(CompositionValidationError):
        pairwise_logratio(dataset, LogRatioSpec("y", "x1", "x2"))


def test_pairwise_matrix_columns(winery):
    specs = [LogRatioSpec("y1", "x1", "x4"), LogRatioSpec("y2", "x1", "x2")]
    matrix = pairwise_matrix(winery, specs)
    assert matrix.columns == ("y1", "y2")
    assert matrix.kind == "pairwise"
    assert matrix.column("y1")[0] == pytest.approx(math.log(10386 / 41456))
    with pytest.raises(UnknownPartError):
        matrix.column("y3")


def test_clr_rows_sum_to_zero(random_compositions, winery):
    for dataset in random_compositions + [winery]:
        z = clr(dataset).values
        assert np.abs(z.sum(axis=1)).max() <= 1e-10


def test_clr_difference_is_pairwise_logratio(random_compositions):
    for dataset in random_compositions:
        z = clr(dataset).values
        y = pairwise_logratio(dataset, LogRatioSpec("y", "x1", "x3"))
        assert np.abs(z[:, 0] - z[:, 2] - y).max() <= 1e-10


def test_clr_column_names(winery):
    assert clr(winery).columns == ("clr_x1", "clr_x2", "clr_x3", "clr_x4")


def test_scaling_constant():
    assert scaling_constant(1, 1) == pytest.approx(math.sqrt(0.5))
    assert scaling_constant(2, 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        scaling_constant(0, 2)


@pytest.mark.parametrize("name,D", [("dupont4", 4), ("balance6", 6)])
def test_builtin_sbps_are_valid_and_orthonormal(name, D):
    sbp = builtin_sbp(name, [f"x{j}" for j in range(1, D + 1)])
    assert validate_sbp(sbp) == []
    psi = sbp_basis(sbp)
    assert psi @ psi.T == pytest.approx(np.eye(D - 1), abs=1e-12)
    assert psi.sum(axis=1) == pytest.approx(np.zeros(D - 1), abs=1e-12)


def test_sbp_parse_and_format():
    text = "# dupont\n+ + - -\n\n+ - 0 0\n0 0 + -\n"
    sbp = SbpMatrix.parse(text, PARTS)
    assert sbp == builtin_sbp("dupont4", PARTS)
    assert sbp.format() == "+ + - -\n+ - 0 0\n0 0 + -\n"
    assert sbp.groups(0) == (("x1", "x2"), ("x3", "x4"))
    with pytest.raises(InvalidSbpError, match="line 1"):
        SbpMatrix.parse("+ * - -", PARTS)


@pytest.mark.parametrize(
    "signs,message",
    [
        (((1, 1, -1, -1), (1, -1, 0, 0)), "expected 3 rows"),
        (((1, 1, -1, 0), (1, -1, 0, 0), (0, 0, 1, -1)), "every part"),
        (((1, 1, -1, -1), (1, 0, -1, 0), (0, 0, 1, -1)), "unsplit"),
        (((1, 1, -1, -1), (1, 1, 0, 0), (0, 0, 1, -1)), "denominator"),
    ],
)
def test_invalid_sbps(signs, message):
    violations = validate_sbp(SbpMatrix(parts=PARTS, signs=signs))
    assert violations
    assert any(message in str(v) for v in violations)


def test_unsplit_group_is_reported():
    sbp = SbpMatrix(parts=PARTS, signs=((1, 1, -1, -1), (1, -1, 0, 0), (1, -1, 0, 0)))
    violations = validate_sbp(sbp)
    assert violations


def test_ilr_rejects_invalid_sbp(winery):
    sbp = SbpMatrix(parts=PARTS, signs=((1, 1, -1, -1), (1, -1, 0, 0)))
    with pytest.raises(InvalidSbpError) as exc:
        ilr(winery, sbp)
    assert exc.value.violations


def test_ilr_names(winery):
    sbp = builtin_sbp("dupont4", winery.parts)
    assert ilr(winery, sbp).columns == (
        "ilr_1:x1,x2|x3,x4",
        "ilr_2:x1|x2",
        "ilr_3:x3|x4",
    )
    with pytest.raises(InvalidSbpError, match="names"):
        ilr(winery, sbp, names=["a"])


def test_ilr_single_pair_is_scaled_logratio(winery):
    """A one-against-one partition is sqrt(1/2) times the pairwise log-ratio."""
    coordinates = ilr(winery, builtin_sbp("dupont4", winery.parts)).values
    y2 = pairwise_logratio(winery, LogRatioSpec("y2", "x1", "x2"))
    y3 = pairwise_logratio(winery, LogRatioSpec("y3", "x3", "x4"))
    assert np.abs(coordinates[:, 1] - math.sqrt(0.5) * y2).max() <= 1e-12
    assert np.abs(coordinates[:, 2] - math.sqrt(0.5) * y3).max() <= 1e-12


def test_ilr_norm_equals_clr_norm(random_compositions):
    for dataset in random_compositions:
        D = dataset.D
        # x1 against the rest, then peel off one part at a time
        signs = [
            tuple([0] * k + [1] + [-1] * (D - k - 1)) for k in range(D - 1)
        ]
        sbp = SbpMatrix(parts=dataset.parts, signs=tuple(signs))
        assert validate_sbp(sbp) == []
        coordinates = ilr(dataset, sbp).values
        z = clr(dataset).values
        assert np.linalg.norm(coordinates, axis=1) == pytest.approx(
            np.linalg.norm(z, axis=1), abs=1e-8
        )
