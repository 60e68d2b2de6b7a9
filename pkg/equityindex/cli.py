"""
Command line interface.

``equityindex evaluate`` computes all metrics on a score file, ``compare`` does so for
several score files side by side, ``synth`` writes a synthetic score file, ``table1``
(alias ``benchmark``) benchmarks the metrics on the synthetic bias scenarios and
``render`` converts JSON reports to markdown.

Output files are only written once everything they hold has been computed.
"""
import hashlib
import json
import logging
import os
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import click

from ._version import __version__
from .core.evaluation import EvalConfig, MetricReport, ReportFormat, evaluate_all
from .core.metrics import ThresholdSource
from .core.scores import Polarity, ScoreSet, ingest
from .errors import EquityIndexError
from .report import parse_reports, render_report, summary_table, to_markdown
from .scenarios import ScenarioKind, ScenarioSpec, export_csv, generate, summarize
from .scenarios.benchmark import benchmark_config, run_benchmark

_logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _floats(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[Tuple[float, ...]]:
    # "75,90,95"
    if value is None:
        return None
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(
            "expected comma separated numbers, got {!r}".format(value)
        )


def _weight_sets(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[Tuple[Tuple[float, ...], ...]]:
    # "0.2,0.8;0.5,0.5"
    if value is None:
        return None
    try:
        return tuple(
            tuple(float(w) for w in pair.split(","))
            for pair in value.split(";")
            if pair.strip()
        )
    except ValueError:
        raise click.BadParameter(
            "expected semicolon separated pairs like 0.2,0.8;0.5,0.5, got {!r}".format(
                value
            )
        )


def _names(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[Tuple[str, ...]]:
    if value is None:
        return None
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _evaluation_options(func: Callable) -> Callable:
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            help="JSON file mirroring the evaluation configuration, flags override it.",
        ),
        click.option(
            "--polarity",
            type=click.Choice([p.value for p in Polarity], case_sensitive=False),
            help="Whether higher scores mean more similar or more distant samples.",
        ),
        click.option("--bins", "n_bins", type=int, help="Number of histogram bins."),
        click.option("--smoothing", type=float, help="KL smoothing constant."),
        click.option(
            "--target-fmr", type=float, help="Pooled FMR of the operating point."
        ),
        click.option(
            "--percentiles",
            callback=_floats,
            help="CEI split percentiles, e.g. 75,90,95.",
        ),
        click.option(
            "--weights",
            "weight_sets",
            callback=_weight_sets,
            help="CEI (tail, center) weight sets, e.g. 0.2,0.8;0.5,0.5;0.8,0.2.",
        ),
        click.option(
            "--metrics", callback=_names, help="Metrics to compute, e.g. dfi,cei."
        ),
        click.option(
            "--min-per-cell", type=int, help="Records per (group, kind) cell to flag."
        ),
        click.option(
            "--threshold-source",
            type=click.Choice([t.value for t in ThresholdSource], case_sensitive=False),
            help="Distribution the CEI split thresholds are taken from.",
        ),
        click.option(
            "--allow-unnormalized-weights",
            is_flag=True,
            default=None,
            help="Accept CEI weights which do not sum to one.",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _output_options(func: Callable) -> Callable:
    func = click.option(
        "--format",
        "fmt",
        type=click.Choice([f.value for f in ReportFormat], case_sensitive=False),
        help="Report format (default: json for files, markdown on the terminal).",
    )(func)
    return click.option(
        "--out", type=click.Path(dir_okay=False), help="File to write the report to."
    )(func)


def _build_config(
    config_path: Optional[str], base: Optional[EvalConfig] = None, **flags: Any
) -> EvalConfig:
    config = EvalConfig.from_json(config_path) if config_path else base or EvalConfig()
    return config.replace(**flags).validate()


def _provenance(path: str) -> Dict[str, Any]:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return {"scores": os.path.basename(path), "sha256": digest.hexdigest()}


def _load(path: str, config: EvalConfig) -> ScoreSet:
    if config.polarity is None:
        raise click.UsageError(
            "the polarity of `{}` is required, pass --polarity or set it in the "
            "configuration".format(path)
        )
    score_set = ingest(path, config.polarity)
    _logger.info(
        "Read %d records of %d group(s) from %s", len(score_set), score_set.k, path
    )
    return score_set


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    _logger.info("Wrote %s", path)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write(out, text)
    else:
        click.echo(text, nl=False)


def _report_format(fmt: Optional[str], out: Optional[str]) -> ReportFormat:
    if fmt is not None:
        return ReportFormat.from_report_format(fmt)
    return ReportFormat.JSON if out else ReportFormat.MARKDOWN


def _warn(labelled: Dict[str, MetricReport]) -> None:
    for label, report in labelled.items():
        prefix = "" if len(labelled) == 1 else "{}: ".format(label)
        for flag in report.flags:
            click.echo("warning: {}{}".format(prefix, flag), err=True)
        for failure in report.failures:
            click.echo("error: {}{}".format(prefix, failure), err=True)


def _fail_on_failures(labelled: Dict[str, MetricReport]) -> None:
    failed = sum(len(r.failures) for r in labelled.values())
    if failed:
        raise click.ClickException("{} metric(s) could not be computed".format(failed))


@click.group()
@click.version_option(__version__)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    show_default=True,
)
def cli(log_level: str) -> None:
    """
    Demographic bias metrics for biometric verification scores.
    """
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )


@cli.command()
@click.option(
    "--scores",
    type=click.Path(dir_okay=False),
    help="CSV (or JSON) file with score, kind and group columns.",
)
@_evaluation_options
@_output_options
def evaluate(scores: Optional[str], config_path: Optional[str], **options: Any) -> None:
    """
    Compute all metrics on a score file.

    Without --out the report is printed. With --out it is written to the file and a
    summary table is printed. The exit status is nonzero if any requested metric
    could not be computed.
    """
    out = options.pop("out")
    fmt = _report_format(options.pop("fmt"), out)
    try:
        config = _build_config(config_path, scores_path=scores, **options)
        if config.scores_path is None:
            raise click.UsageError("a score file is required, pass --scores")
        score_set = _load(config.scores_path, config)
        report = evaluate_all(score_set, config, _provenance(config.scores_path))
    except (EquityIndexError, OSError) as exc:
        raise click.ClickException(str(exc))

    _warn({"": report})
    _emit(render_report(report, fmt), out)
    if out:
        click.echo(to_markdown(summary_table(report)))
    _fail_on_failures({"": report})


def _labelled_paths(scores: Sequence[str]) -> Dict[str, str]:
    labelled: Dict[str, str] = {}
    for entry in scores:
        label, sep, path = entry.partition("=")
        if not sep:
            path = entry
            label = os.path.splitext(os.path.basename(entry))[0]
        if label in labelled:
            raise click.BadParameter(
                "duplicate label `{}`".format(label), param_hint="--scores"
            )
        labelled[label] = path
    return labelled


@cli.command()
@click.option(
    "--scores",
    multiple=True,
    required=True,
    help="Score file, optionally labelled as LABEL=PATH. Repeat for every dataset.",
)
@_evaluation_options
@_output_options
def compare(scores: Sequence[str], config_path: Optional[str], **options: Any) -> None:
    """
    Compute all metrics on several score files and show them side by side.
    """
    out = options.pop("out")
    fmt = _report_format(options.pop("fmt"), out)
    paths = _labelled_paths(scores)
    try:
        config = _build_config(config_path, **options)
        reports = {}
        for label, path in paths.items():
            score_set = _load(path, config)
            reports[label] = evaluate_all(score_set, config, _provenance(path))
    except (EquityIndexError, OSError) as exc:
        raise click.ClickException(str(exc))

    _warn(reports)
    _emit(render_report(reports, fmt), out)
    if out:
        click.echo(to_markdown(summary_table(reports)))
    _fail_on_failures(reports)


@cli.command()
@click.option(
    "--spec",
    "spec_path",
    type=click.Path(dir_okay=False),
    help="JSON file mirroring the scenario specification, flags override it.",
)
@click.option(
    "--scenario",
    type=click.Choice([s.value for s in ScenarioKind], case_sensitive=False),
)
@click.option("--strength", type=float, help="Bias strength, 0 disables the bias.")
@click.option("--seed", type=int)
@click.option("--n-genuine", type=int, help="Genuine comparisons per group.")
@click.option("--n-impostor", type=int, help="Impostor comparisons per group.")
@click.option("--groups", callback=_names, help="Group keys, e.g. A,B.")
@click.option("--biased-group", help="Biased group (default: the last group).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def synth(spec_path: Optional[str], out: str, **options: Any) -> None:
    """
    Write a synthetic score file.

    Prints count, mean, standard deviation and tail mass of every group and kind.
    """
    try:
        spec = ScenarioSpec.from_json(spec_path) if spec_path else ScenarioSpec()
        spec = spec.replace(**options)
        score_set = generate(spec)
        export_csv(score_set, out)
    except (EquityIndexError, OSError) as exc:
        raise click.ClickException(str(exc))

    click.echo(summarize(score_set).to_markdown())


@cli.command("table1")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--strength",
    type=float,
    default=1.0,
    show_default=True,
    help="Bias strength of all scenarios, 0 checks that no bias is detected.",
)
@click.option("--n-genuine", type=int, help="Genuine comparisons per group.")
@click.option("--n-impostor", type=int, help="Impostor comparisons per group.")
@_evaluation_options
@_output_options
def benchmark(  # pylint: disable=too-many-arguments
    seed: int,
    strength: float,
    n_genuine: Optional[int],
    n_impostor: Optional[int],
    config_path: Optional[str],
    **options: Any
) -> None:
    """
    Benchmark the metrics on the BG, BI and BC scenarios.

    Renders one column per scenario followed by the CEI sweeps and the outcome of the
    detection pattern check. The exit status is nonzero if the check fails.
    """
    out = options.pop("out")
    fmt = _report_format(options.pop("fmt"), out)
    sizes = {
        k: v
        for k, v in (("n_genuine", n_genuine), ("n_impostor", n_impostor))
        if v is not None
    }
    try:
        config = _build_config(config_path, base=benchmark_config(), **options)
        result = run_benchmark(seed=seed, strengths=strength, config=config, **sizes)
    except EquityIndexError as exc:
        raise click.ClickException(str(exc))

    reports = {label.upper(): r for label, r in result.reports.items()}
    if fmt == ReportFormat.JSON:
        text = json.dumps(
            {
                "reports": {k: r.to_dict() for k, r in reports.items()},
                "check": result.check.to_dict(),
            },
            indent=2,
            sort_keys=True,
        )
        text += "\n"
    else:
        text = "{}\n## Detection pattern\n\n```\n{}\n```\n".format(
            render_report(reports, fmt), result.check.summary()
        )

    _warn(reports)
    _emit(text, out)
    if out:
        click.echo(result.check.summary())
    _fail_on_failures(reports)
    if not result.check.passed:
        raise click.ClickException(result.check.verdict)


cli.add_command(benchmark, "benchmark")


@cli.command()
@click.argument("reports", nargs=-1, required=True, type=click.Path(dir_okay=False))
@_output_options
def render(reports: Sequence[str], out: Optional[str], fmt: Optional[str]) -> None:
    """
    Render JSON reports, several reports are shown side by side.
    """
    labelled: Dict[str, MetricReport] = {}
    try:
        for path in reports:
            with open(path, encoding="utf-8") as fh:
                parsed = parse_reports(fh.read())
            stem = os.path.splitext(os.path.basename(path))[0]
            for label, report in parsed.items():
                if len(reports) == 1:
                    key = label
                elif len(parsed) == 1:
                    key = stem
                else:
                    key = "{} {}".format(stem, label)
                labelled[key] = report
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))

    fmt_ = ReportFormat.from_report_format(fmt) if fmt else ReportFormat.MARKDOWN
    if len(labelled) == 1:
        _emit(render_report(next(iter(labelled.values())), fmt_), out)
    else:
        _emit(render_report(labelled, fmt_), out)

