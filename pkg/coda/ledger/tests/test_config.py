# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import os

import pytest

from coda.ledger.config import (
    DEFAULT_CONFIG,
    SEED_ENVVAR,
    AnalysisConfig,
    config_from_dict,
    default_seed,
    load_config,
    merge_configs,
)
from coda.ledger.exception import ConfigurationError


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENVVAR, raising=False)


@pytest.fixture
def config() -> AnalysisConfig:
    return load_config()


def test_bundled_config(config, winery):
    assert os.path.basename(config.dataset_path) == "wineries.csv"
    assert [p.name for p in config.layout.parts] == ["x1", "x2", "x3", "x4"]
    assert config.layout.categorical == ("Brand",)
    assert config.cluster.k == 3
    assert config.cluster.seed == 42
    assert config.regression.predictors == ("Age", "Brand")
    assert config.graph == ("y1: x1 / x4", "y2: x1 / x2", "y3: x3 / x4")
    config.check(winery)


def test_inline_graph_matches_builtin(config, winery):
    inline = config.log_ratio_graph(winery)
    builtin = config.with_overrides(graph="dupont4").log_ratio_graph(winery)
    assert [str(e) for e in inline.edges] == [str(e) for e in builtin.edges]


def test_scheme_roles(config, winery):
    scheme = config.ratio_scheme(winery)
    assert scheme.part_roles["assets"] == "x4"


def test_seed_from_environment(monkeypatch):
    assert default_seed() == 42
    monkeypatch.setenv(SEED_ENVVAR, "7")
    assert default_seed() == 7
    assert load_config().cluster.seed == 7
    monkeypatch.setenv(SEED_ENVVAR, "seven")
    with pytest.raises(ConfigurationError, match=SEED_ENVVAR):
        default_seed()


def test_relative_paths(tmp_path):
    (tmp_path / "config.yml").write_text(
        "dataset:\n  path: data/firms.csv\nsbp: balance.txt\ncluster: {seed: 3}\n"
    )
    config = load_config(str(tmp_path / "config.yml"))
    assert config.dataset_path == str(tmp_path / "data" / "firms.csv")
    assert config.resolve(config.sbp) == str(tmp_path / "balance.txt")
    assert config.cluster.seed == 3
    # unset keys keep their defaults
    assert config.cluster.restarts == 25
    assert config.layout.firm_column == "Firm"


def test_load_dataset_uses_layout(config, mocker):
    read = mocker.patch("coda.ledger.config.read_dataset")
    config.load_dataset()
    read.assert_called_once_with(config.dataset_path, config.layout)


@pytest.mark.parametrize(
    "text,message",
    [
        ("colour: red\n", "Unknown configuration key"),
        ("cluster: {kk: 3}\n", "Unknown configuration key"),
        ("cluster: [1, 2\n", "Invalid YAML"),
        ("- 1\n- 2\n", "not a mapping"),
        ("cluster: {k: three}\n", "Invalid configuration"),
    ],
)
def test_invalid_files(tmp_path, text, message):
    path = tmp_path / "config.yml"
    path.write_text(text)
    with pytest.raises(ConfigurationError, match=message):
        load_config(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="Cannot read"):
        load_config(str(tmp_path / "absent.yml"))


def test_merge_configs():
    merged = merge_configs(DEFAULT_CONFIG, {"zeros": {"fraction": 0.5}})
    assert merged["zeros"] == {"fraction": 0.5, "allow_flagged": False}
    assert DEFAULT_CONFIG["zeros"]["fraction"] == 0.65


def test_overrides(config):
    changed = config.with_overrides(
        output="elsewhere", cluster__k=4, cluster__seed=None, scheme=None
    )
    assert changed.output == "elsewhere"
    assert changed.cluster.k == 4
    assert changed.cluster.seed == config.cluster.seed
    assert changed.scheme == config.scheme
    assert config.cluster.k == 3
    with pytest.raises(ConfigurationError, match="section"):
        config.with_overrides(plots__width=3)


@pytest.mark.parametrize(
    "overrides,message",
    [
        ({"regression__predictors": ("Age", "Size")}, "Size"),
        ({"regression__responses": "clr"}, "pairwise or ilr"),
        ({"zeros__fraction": 1.5}, r"\(0, 1\)"),
        ({"graph": ("y1: x1/x3", "y2: x3/x4", "y3: x4/x1")}, "InvalidGraphError"),
        ({"scheme": "balance6"}, "roles mismatch"),
        ({"sbp": "missing-sbp.txt"}, "missing-sbp.txt"),
    ],
)
def test_check_rejects(config, winery, overrides, message):
    with pytest.raises(ConfigurationError, match=message):
        config.with_overrides(**overrides).check(winery)


def test_defaults_without_file(winery):
    config = config_from_dict({})
    assert config.roles is None
    assert config.graph == "dupont4"
    assert config.layout.parts == ()
    config.check(winery)
