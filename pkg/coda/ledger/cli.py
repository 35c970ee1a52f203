# Copyright (C) 2024-2026  The coda.ledger developers
# See the AUTHORS file at the top-level directory of this distribution
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Command-line interface.

Every subcommand reads the dataset named by the configuration, applies the
command-line overrides, checks the configuration and writes its tables and
figures to the output directory. Errors end the command with a single line
``error: <ExceptionName>: <message>`` on stderr.

"""

from dataclasses import replace
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, cast

import click

from .composition import MISSING, CompositionSet, ExtraColumn, validate
from .config import AnalysisConfig, load_config
from .dataset import write_dataset
from .exception import CodaError
from .graph import BUILTIN_GRAPHS, validate_graph
from .multivariate import biplot, kmeans_clr, kmeans_rows, link_projection, sweep_k
from .plots import mosaic_layout, render_plot
from .ratios import firm_ratio_table, group_ratio_table, parse_roles, ratio_features
from .regress import (
    design_from_extras,
    hypothesis_table,
    ilr_responses,
    ols,
    pairwise_responses,
)
from .reproduce import REPORT_FILE, reproduce, winery_dataset
from .tables import (
    CENTRE_DECIMALS,
    RATIO_DECIMALS,
    REGRESSION_DECIMALS,
    TableFormat,
    biplot_rows,
    centre_rows,
    cluster_index_rows,
    cluster_rows,
    emit_table,
    firm_ratio_rows,
    fit_index_rows,
    hypothesis_rows,
    link_rows,
    ratio_rows,
    regression_rows,
    sweep_rows,
    table_extension,
    zero_report_rows,
)
from .transforms import (
    BUILTIN_SBPS,
    LogRatioMatrix,
    clr,
    ilr,
    pairwise_matrix,
    validate_sbp,
)
from .zeros import replace_zeros, zero_report

logger = logging.getLogger(__name__)

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
CLUSTER_COLUMN = "Cluster"


class CodaGroup(click.Group):
    """Turns library errors into a one-line message and the error's exit
    code."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except CodaError as e:
            self._fail(ctx, e, e.exit_code)
        except OSError as e:
            self._fail(ctx, e, 2)

    @staticmethod
    def _fail(ctx: click.Context, error: Exception, exit_code: int) -> None:
        message = " ".join(str(error).split())
        click.echo(f"error: {type(error).__name__}: {message}", err=True)
        ctx.exit(exit_code)


@click.group(name="coda-ledger", cls=CodaGroup, context_settings=CONTEXT_SETTINGS)
@click.option(
    "--config-file",
    "-C",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="YAML analysis configuration, the bundled winery one by default",
)
@click.option(
    "--log-level",
    "-l",
    default="INFO",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    show_default=True,
    help="Logging level",
)
@click.pass_context
def cli(ctx: click.Context, config_file: Optional[str], log_level: str) -> None:
    """Compositional analysis of financial statements."""
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj["config"] = load_config(config_file)


def _apply(options: Sequence[Callable]) -> Callable:
    def decorator(f):
        for option in reversed(options):
            f = option(f)
        return f

    return decorator


analysis_options = _apply(
    [
        click.option(
            "--dataset",
            type=click.Path(exists=True, dir_okay=False),
            help="Dataset CSV file, overriding the configured one",
        ),
        click.option(
            "--delimiter", default=None, help="Field delimiter of the dataset file"
        ),
        click.option("--scheme", type=click.Choice(["dupont4", "balance6"])),
        click.option(
            "--roles",
            help="Role bindings such as revenues=x1,costs=x2, positional by default",
        ),
        click.option("--sbp", help="Built-in SBP name or sign-matrix file"),
        click.option("--graph", help="Built-in graph name or edge-list file"),
        click.option("--out", help="Output directory"),
        click.option(
            "--format",
            "table_format",
            default="csv",
            show_default=True,
            type=click.Choice(["csv", "markdown"]),
            help="Table format",
        ),
    ]
)


def _path_override(value: Optional[str], builtins) -> Optional[str]:
    if value is None or value in builtins:
        return value
    return os.path.abspath(value)


class Run:
    """Configuration, dataset and output helpers of one invocation."""

    def __init__(self, config: AnalysisConfig, table_format: TableFormat):
        self.config = config
        self.table_format = table_format
        self.out_dir = config.output

    @classmethod
    def setup(
        cls,
        ctx: click.Context,
        dataset: Optional[str] = None,
        delimiter: Optional[str] = None,
        scheme: Optional[str] = None,
        roles: Optional[str] = None,
        sbp: Optional[str] = None,
        graph: Optional[str] = None,
        out: Optional[str] = None,
        table_format: str = "csv",
        **overrides: Any,
    ) -> "Run":
        config: AnalysisConfig = ctx.obj["config"]
        layout = config.layout
        if delimiter is not None:
            layout = replace(layout, delimiter=delimiter)
        if roles is not None:
            config = replace(config, roles=parse_roles(roles))
        elif scheme is not None and scheme != config.scheme:
            # configured roles belong to the configured scheme
            config = replace(config, roles=None)
        config = config.with_overrides(
            dataset_path=os.path.abspath(dataset) if dataset else None,
            layout=layout,
            scheme=scheme,
            sbp=_path_override(sbp, BUILTIN_SBPS),
            graph=_path_override(graph, BUILTIN_GRAPHS),
            output=out,
            **overrides,
        )
        return cls(config, cast(TableFormat, table_format))

    def load(self, check: bool = True) -> CompositionSet:
        dataset = self.config.load_dataset()
        if check:
            self.config.check(dataset)
        return dataset

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def table(
        self,
        name: str,
        columns_rows: Tuple[List[str], List[Dict[str, Any]]],
        decimals=4,
        echo: bool = False,
    ) -> None:
        columns, rows = columns_rows
        path = self.path(name + table_extension(self.table_format))
        text = emit_table(rows, columns, path, self.table_format, decimals)
        if echo:
            click.echo(text, nl=False)

    def figure(self, name: str, kind, *args, **kwargs) -> None:
        render_plot(kind, self.path(name + ".svg"), *args, **kwargs)

    def write(self, name: str, dataset: CompositionSet, appended=None) -> None:
        write_dataset(
            dataset,
            self.path(name),
            appended,
            delimiter=self.config.layout.delimiter,
            firm_column=self.config.layout.firm_column,
        )


@cli.command(name="validate")
@analysis_options
@click.pass_context
def validate_cmd(ctx: click.Context, **options) -> None:
    """Check the dataset, the SBP and the log-ratio graph."""
    run = Run.setup(ctx, **options)
    dataset = run.load(check=False)
    failed = False
    click.echo(f"dataset: {dataset.n} firms, parts {', '.join(dataset.part_names)}")
    violations = validate(dataset)
    for violation in violations:
        click.echo(f"composition: {violation}")
    if not violations:
        click.echo("composition: valid")
    failed |= bool(violations)

    sbp_violations = validate_sbp(run.config.sbp_matrix(dataset))
    for sbp_violation in sbp_violations:
        click.echo(f"sbp: {sbp_violation}")
    if not sbp_violations:
        click.echo("sbp: valid")
    failed |= bool(sbp_violations)

    diagnosis = validate_graph(run.config.log_ratio_graph(dataset))
    click.echo(f"graph: {diagnosis}")
    failed |= not diagnosis.valid

    run.config.ratio_scheme(dataset)
    for name in run.config.regression.predictors + run.config.layout.categorical:
        dataset.extra(name)
    if failed:
        ctx.exit(1)


@cli.command()
@analysis_options
@click.option(
    "--replace",
    "write_replaced",
    is_flag=True,
    help="Write the dataset with zeros replaced",
)
@click.option(
    "--zero-fraction",
    type=float,
    help="Fraction of the detection limit used as replacement value",
)
@click.option(
    "--allow-flagged-zeros",
    is_flag=True,
    help="Replace zeros in parts with more than 20% of zeros",
)
@click.pass_context
def zeros(
    ctx: click.Context,
    write_replaced: bool,
    zero_fraction: Optional[float],
    allow_flagged_zeros: bool,
    **options,
) -> None:
    """Report zeros per part and optionally replace them.

    Zeros are replaced by a fraction of the smallest positive value of their
    part, a simple substitute for model-based replacement methods.

    """
    run = Run.setup(
        ctx,
        zeros__fraction=zero_fraction,
        zeros__allow_flagged=allow_flagged_zeros or None,
        **options,
    )
    dataset = run.load()
    report = zero_report(dataset)
    run.table("zeros", zero_report_rows(report), echo=True)
    if write_replaced:
        replaced = replace_zeros(
            dataset,
            fraction=run.config.zeros.fraction,
            allow_flagged=run.config.zeros.allow_flagged,
        )
        run.write("replaced.csv", replaced)


@cli.command()
@analysis_options
@click.option(
    "--kind",
    default="pairwise",
    show_default=True,
    type=click.Choice(["pairwise", "clr", "ilr"]),
    help="Log-ratio transform",
)
@click.pass_context
def transform(ctx: click.Context, kind: str, **options) -> None:
    """Append log-ratio columns to the dataset and write transformed.csv."""
    run = Run.setup(ctx, **options)
    dataset = run.load()
    matrix: LogRatioMatrix
    if kind == "pairwise":
        matrix = pairwise_matrix(dataset, run.config.log_ratio_graph(dataset).edges)
    elif kind == "clr":
        matrix = clr(dataset)
    else:
        matrix = ilr(dataset, run.config.sbp_matrix(dataset))
    run.write("transformed.csv", dataset, matrix.as_dict())
    click.echo(f"{', '.join(matrix.columns)} written for {dataset.n} firms")


@cli.command()
@analysis_options
@click.pass_context
def ratios(ctx: click.Context, **options) -> None:
    """Standard ratios of every firm."""
    run = Run.setup(ctx, **options)
    dataset = run.load()
    scheme = run.config.ratio_scheme(dataset)
    rows = firm_ratio_rows(firm_ratio_table(dataset, scheme))
    run.table("firm_ratios", rows, RATIO_DECIMALS)


@cli.command()
@analysis_options
@click.option("--group-by", help="Categorical column defining the groups")
@click.pass_context
def centre(ctx: click.Context, group_by: Optional[str], **options) -> None:
    """Compositional centres and the standard ratios derived from them."""
    run = Run.setup(ctx, **options)
    dataset = run.load()
    groups = group_ratio_table(dataset, run.config.ratio_scheme(dataset), group_by)
    run.table("centre", centre_rows(groups), CENTRE_DECIMALS, echo=True)
    run.table("centre_ratios", ratio_rows(groups), RATIO_DECIMALS, echo=True)


@cli.command(name="biplot")
@analysis_options
@click.option("--group-by", help="Categorical column used to colour the firms")
@click.pass_context
def biplot_cmd(ctx: click.Context, group_by: Optional[str], **options) -> None:
    """Covariance biplot of the clr-transformed firms."""
    run = Run.setup(ctx, **options)
    dataset = run.load()
    graph = run.config.log_ratio_graph(dataset)
    model = biplot(dataset)
    links = [
        (e.name, link_projection(model, e.numerator, e.denominator, dataset))
        for e in graph.edges
    ]
    groups = dataset.extra(group_by).labels() if group_by else None
    run.table("biplot", biplot_rows(model))
    run.table("biplot_links", link_rows(links), echo=True)
    run.figure(
        "biplot",
        "biplot",
        model,
        groups,
        [(e.name, e.numerator, e.denominator) for e in graph.edges],
        title="CoDa biplot",
    )
    click.echo(f"explained variance: {model.explained_variance_fraction:.4f}")


@cli.command()
@analysis_options
@click.option("--k", type=int, help="Number of clusters")
@click.option("--k-min", type=int, help="Smallest k of the index sweep")
@click.option("--k-max", type=int, help="Largest k of the index sweep")
@click.option("--restarts", type=int, help="k-means restarts")
@click.option("--seed", type=int, help="Random seed, CODA_LEDGER_SEED by default")
@click.option(
    "--on",
    "features",
    default="clr",
    show_default=True,
    type=click.Choice(["clr", "ratios"]),
    help="Cluster clr coordinates or standard ratios",
)
@click.option("--group-by", help="Categorical column crossed with the clusters")
@click.pass_context
def cluster(
    ctx: click.Context,
    k: Optional[int],
    k_min: Optional[int],
    k_max: Optional[int],
    restarts: Optional[int],
    seed: Optional[int],
    features: str,
    group_by: Optional[str],
    **options,
) -> None:
    """k-means clustering of the firms."""
    run = Run.setup(
        ctx,
        cluster__k=k,
        cluster__k_min=k_min,
        cluster__k_max=k_max,
        cluster__restarts=restarts,
        cluster__seed=seed,
        **options,
    )
    dataset = run.load()
    settings = run.config.cluster
    scheme = run.config.ratio_scheme(dataset)

    if k_min is not None or k_max is not None:
        sweep = sweep_k(
            dataset,
            settings.k_min,
            settings.k_max,
            restarts=settings.restarts,
            seed=settings.seed,
        )
        run.table("cluster_sweep", sweep_rows(sweep), echo=True)
        run.figure("cluster_sweep", "sweep", sweep, title="Cluster indices against k")

    if features == "clr":
        model = kmeans_clr(
            dataset, settings.k, restarts=settings.restarts, seed=settings.seed
        )
        labels: Sequence[Any] = model.labels()
        run.table("clusters", cluster_rows(model), CENTRE_DECIMALS, echo=True)
        run.table("cluster_indices", cluster_index_rows(model), echo=True)
    else:
        rows, keep = ratio_features(
            firm_ratio_table(dataset, scheme), scheme.ratio_names
        )
        fit = kmeans_rows(
            rows, settings.k, restarts=settings.restarts, seed=settings.seed
        )
        assignment = iter(fit.assignment)
        labels = [str(next(assignment) + 1) if kept else MISSING for kept in keep]
        run.table("cluster_indices", fit_index_rows(fit), echo=True)

    clustered = dataset.with_extra(ExtraColumn(CLUSTER_COLUMN, tuple(labels), True))
    groups = group_ratio_table(clustered, scheme, CLUSTER_COLUMN)
    run.table("cluster_centres", centre_rows(groups), CENTRE_DECIMALS)
    run.table("cluster_ratios", ratio_rows(groups), RATIO_DECIMALS, echo=True)
    run.write(
        "clustered.csv",
        dataset,
        {CLUSTER_COLUMN: ["NA" if lbl is MISSING else lbl for lbl in labels]},
    )
    if group_by:
        run.figure(
            "clusters_by_" + group_by,
            "mosaic",
            mosaic_layout(
                clustered.extra(CLUSTER_COLUMN).labels(),
                dataset.extra(group_by).labels(),
            ),
            title=f"{group_by} share per cluster",
            legend_title=group_by,
        )


@cli.command()
@analysis_options
@click.option(
    "--responses",
    type=click.Choice(["pairwise", "ilr"]),
    help="Pairwise log-ratios of the graph or ilr coordinates of the SBP",
)
@click.option(
    "--predictor",
    "predictors",
    multiple=True,
    help="Numeric predictor column, repeatable",
)
@click.pass_context
def regress(
    ctx: click.Context,
    responses: Optional[str],
    predictors: Tuple[str, ...],
    **options,
) -> None:
    """Regress log-ratios on firm characteristics."""
    run = Run.setup(
        ctx,
        regression__responses=responses,
        regression__predictors=predictors or None,
        **options,
    )
    dataset = run.load()
    settings = run.config.regression
    if settings.responses == "ilr":
        values = ilr_responses(dataset, run.config.sbp_matrix(dataset))
    else:
        values = pairwise_responses(dataset, run.config.log_ratio_graph(dataset).edges)
    design = design_from_extras(dataset, settings.predictors)
    fits = ols(values, design)
    run.table("regression", regression_rows(fits), REGRESSION_DECIMALS, echo=True)
    run.table(
        "hypotheses",
        hypothesis_rows(hypothesis_table(fits)),
        REGRESSION_DECIMALS,
        echo=True,
    )


@cli.command(name="reproduce-paper")
@click.option("--out", help="Output directory")
@click.option(
    "--format",
    "table_format",
    default="csv",
    show_default=True,
    type=click.Choice(["csv", "markdown"]),
)
@click.option("--restarts", type=int, help="k-means restarts")
@click.option("--seed", type=int, help="First k-means seed tried")
@click.pass_context
def reproduce_winery(
    ctx: click.Context,
    out: Optional[str],
    table_format: str,
    restarts: Optional[int],
    seed: Optional[int],
) -> None:
    """Run the whole analysis of the bundled winery dataset and compare the
    results with the published ones."""
    config: AnalysisConfig = ctx.obj["config"]
    out_dir = out or config.output
    report = reproduce(
        out_dir,
        dataset=winery_dataset(),
        table_format=cast(TableFormat, table_format),
        restarts=restarts or config.cluster.restarts,
        seed=config.cluster.seed if seed is None else seed,
    )
    for check in report.failed:
        click.echo(str(check))
    click.echo(
        f"{len(report.checks)} checks, {len(report.failed)} failed; "
        f"report written to {os.path.join(out_dir, REPORT_FILE)}"
    )
    if not report.passed:
        ctx.exit(1)


if __name__ == "__main__":
    cli()
