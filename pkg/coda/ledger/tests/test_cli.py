# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import logging
import os

from click.testing import CliRunner
import pytest

from coda.ledger.cli import cli
from coda.ledger.config import SEED_ENVVAR
from coda.ledger.dataset import bundled_dataset_path

CYCLIC_GRAPH = "y1: x1 / x4\ny4: x1 / x3\ny3: x3 / x4\n"


@pytest.fixture
def invoke(tmp_path, monkeypatch):
    monkeypatch.delenv(SEED_ENVVAR, raising=False)

    def invoke(*args, env=None):
        return CliRunner().invoke(cli, list(args), env=env)

    return invoke


def _out(tmp_path, name="out"):
    return str(tmp_path / name)


def test_help(invoke):
    result = invoke("-h")
    assert result.exit_code == 0
    for command in ("validate", "transform", "cluster", "reproduce-paper"):
        assert command in result.output


def test_validate(invoke, tmp_path):
    result = invoke("validate", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    assert "dataset: 109 firms, parts x1, x2, x3, x4" in result.output
    assert "composition: valid" in result.output
    assert "sbp: valid" in result.output
    assert "graph: valid" in result.output


def test_dataset_read_logged_once(invoke, tmp_path, caplog):
    with caplog.at_level(logging.INFO):
        result = invoke("validate", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    reads = [r for r in caplog.records if r.getMessage().startswith("Read 109 firms")]
    assert len(reads) == 1


def test_validate_cyclic_graph(invoke, tmp_path):
    graph = tmp_path / "cyclic.txt"
    graph.write_text(CYCLIC_GRAPH)
    result = invoke("validate", "--graph", str(graph))
    assert result.exit_code == 1
    assert "graph: " in result.output
    assert "cycle: {x1, x3, x4}" in result.output


def test_transform_refuses_cyclic_graph(invoke, tmp_path):
    graph = tmp_path / "cyclic.txt"
    graph.write_text(CYCLIC_GRAPH)
    result = invoke("transform", "--graph", str(graph), "--out", _out(tmp_path))
    assert result.exit_code == 1
    assert "error: ConfigurationError: InvalidGraphError:" in result.output
    assert "cycle" in result.output
    assert not os.path.exists(os.path.join(_out(tmp_path), "transformed.csv"))


@pytest.mark.parametrize(
    "kind,column", [("pairwise", "y2"), ("clr", "clr_x4"), ("ilr", "ilr_3:x3|x4")]
)
def test_transform(invoke, tmp_path, kind, column):
    result = invoke("transform", "--kind", kind, "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    with open(os.path.join(_out(tmp_path), "transformed.csv")) as f:
        assert column in f.readline()


def test_centre_by_brand(invoke, tmp_path):
    result = invoke("centre", "--group-by", "Brand", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    assert "group,n,x1,x2,x3,x4" in result.output
    assert "overall,109," in result.output
    assert os.path.exists(os.path.join(_out(tmp_path), "centre_ratios.csv"))


def test_markdown_output(invoke, tmp_path):
    result = invoke("ratios", "--format", "markdown", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    with open(os.path.join(_out(tmp_path), "firm_ratios.md")) as f:
        assert f.readline().startswith("|")


def test_explicit_roles(invoke, tmp_path):
    roles = "revenues=x1,costs=x2,liabilities=x3,assets=x4"
    result = invoke("ratios", "--roles", roles, "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    result = invoke("ratios", "--roles", "revenues:x1", "--out", _out(tmp_path))
    assert result.exit_code == 1
    assert "error: ConfigurationError: Invalid role binding" in result.output


def test_scheme_needs_matching_parts(invoke, tmp_path):
    result = invoke("ratios", "--scheme", "balance6", "--out", _out(tmp_path))
    assert result.exit_code == 1
    assert "needs 6 parts" in result.output


def test_biplot(invoke, tmp_path):
    result = invoke("biplot", "--group-by", "Brand", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    line = next(x for x in result.output.splitlines() if x.startswith("explained"))
    assert float(line.split(":")[1]) == pytest.approx(0.9899, abs=1e-3)
    assert os.path.exists(os.path.join(_out(tmp_path), "biplot.svg"))


def test_cluster_is_deterministic(invoke, tmp_path):
    outputs = []
    for name in ("first", "second"):
        args = ["cluster", "--k", "3", "--restarts", "3", "--seed", "5"]
        result = invoke(*args, "--out", _out(tmp_path, name))
        assert result.exit_code == 0, result.output
        with open(os.path.join(_out(tmp_path, name), "clustered.csv"), "rb") as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1]


def test_cluster_seed_from_environment(invoke, tmp_path):
    args = ["cluster", "--restarts", "2", "--out", _out(tmp_path)]
    result = invoke(*args, env={SEED_ENVVAR: "9"})
    assert result.exit_code == 0, result.output
    with open(os.path.join(_out(tmp_path), "cluster_indices.csv")) as f:
        header, row = f.read().splitlines()
    assert header.startswith("k,restarts,seed,")
    assert row.startswith("3,2,9,")


def test_cluster_sweep_and_mosaic(invoke, tmp_path):
    args = ["cluster", "--k-min", "2", "--k-max", "4", "--restarts", "2"]
    result = invoke(*args, "--group-by", "Brand", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    for name in ("cluster_sweep.csv", "cluster_sweep.svg", "clusters_by_Brand.svg"):
        assert os.path.exists(os.path.join(_out(tmp_path), name))


def test_cluster_on_ratios(invoke, tmp_path):
    result = invoke("cluster", "--on", "ratios", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    header = lines.index("k,sizes,within_ss,silhouette,calinski_harabasz")
    sizes = [int(s) for s in lines[header + 1].split(",")[1].split()]
    assert len(sizes) == 3
    assert sum(sizes) <= 109
    # clr clusters hold at most 50 firms
    assert max(sizes) > 50


def test_cluster_error_exit_code(invoke, tmp_path):
    result = invoke("cluster", "--k", "200", "--out", _out(tmp_path))
    assert result.exit_code == 2
    assert "error: ClusterError: k must lie in [2, 108], got 200" in result.output


def test_regress(invoke, tmp_path):
    args = ["regress", "--responses", "ilr", "--predictor", "Age"]
    result = invoke(*args, "--predictor", "Brand", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    assert "ilr_y1,Brand," in result.output
    assert os.path.exists(os.path.join(_out(tmp_path), "hypotheses.csv"))


def _minimal_config(tmp_path, rows):
    """Four-part dataset without extras and a configuration reading it."""
    (tmp_path / "firms.csv").write_text("Firm,x1,x2,x3,x4\n" + rows)
    config = tmp_path / "config.yml"
    config.write_text("dataset: {path: firms.csv}\nregression: {predictors: []}\n")
    return str(config)


def test_zeros(invoke, tmp_path):
    rows = "".join(
        f"{i},{i + 1},{0 if i == 3 else i + 2},{i + 3},{i + 10}\n" for i in range(8)
    )
    config = _minimal_config(tmp_path, rows)
    result = invoke("-C", config, "zeros", "--replace", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    assert "x2,0.1250,false" in result.output
    with open(os.path.join(_out(tmp_path), "replaced.csv")) as f:
        lines = f.read().splitlines()
    assert lines[4] == "3,4,1.3,6,13"


def test_parse_error(invoke, tmp_path):
    config = _minimal_config(tmp_path, "a,1,2,3,4\nb,NA,3,4,5\n")
    result = invoke("-C", config, "validate")
    assert result.exit_code == 1
    assert result.output.strip().splitlines()[-1] == (
        "error: DatasetParseError: missing compositional cell 'NA' "
        "(row 3, column 'x1')"
    )


def test_semicolon_dataset(invoke, tmp_path):
    with open(bundled_dataset_path()) as f:
        text = f.read().replace(",", ";")
    dataset = tmp_path / "wineries.csv"
    dataset.write_text(text)
    args = ["centre", "--dataset", str(dataset), "--delimiter", ";"]
    result = invoke(*args, "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    with open(os.path.join(_out(tmp_path), "centre.csv")) as f:
        assert "overall,109," in f.read()


def test_reproduce_paper(invoke, tmp_path):
    result = invoke("reproduce-paper", "--out", _out(tmp_path))
    assert result.exit_code == 0, result.output
    assert "0 failed" in result.output
    assert os.path.exists(os.path.join(_out(tmp_path), "comparison_report.txt"))
