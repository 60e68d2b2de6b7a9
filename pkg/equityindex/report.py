"""
Rendering of metric reports as JSON or markdown.

JSON output is the versioned :meth:`MetricReport.to_dict` representation and can be
read back with :func:`parse_report`. Markdown output is meant for reading: metrics are
rows and datasets (or scenarios) are columns, the CEI sweep is a grid of percentile and
weight rows with one column per kind and dataset.
"""
import json
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .core.evaluation import MetricReport, ReportFormat
from .core.metrics import Variant
from .core.scores import Kind

DEFAULT_LABEL: str = "value"
"""Column label of a single report"""

SUMMARY_ROWS: Tuple[str, ...] = (
    "DFI_N",
    "DFI_E",
    "GARBE_FMR",
    "GARBE_FNMR",
    "IN_FMR",
    "IN_FNMR",
    "CEI_N genuine",
    "CEI_N impostor",
    "CEI_E genuine",
    "CEI_E impostor",
    "pooled FMR",
    "pooled FNMR",
)
"""Rows of :func:`summary_table`"""

_SCALAR_ROWS = ("dfi_n", "dfi_e", "garbe_fmr", "garbe_fnmr", "in_fmr", "in_fnmr")

Reports = Union[MetricReport, Mapping[str, MetricReport]]


def _labelled(reports: Reports) -> Dict[str, MetricReport]:
    if isinstance(reports, MetricReport):
        return {DEFAULT_LABEL: reports}
    return dict(reports)


def _value(value: Optional[float]) -> float:
    return np.nan if value is None else float(value)


def summary_table(
    reports: Reports,
    percentile: float = 95.0,
    weights: Sequence[float] = (0.8, 0.2),
) -> pd.DataFrame:
    """
    Main metrics of one or several reports side by side.

    Parameters
    ----------
    reports
        Single report or reports by label
    percentile
        Split percentile of the CEI rows
    weights
        (tail, center) weights of the CEI rows

    Returns
    -------
    :obj:`pd.DataFrame`
        One row per entry of :data:`SUMMARY_ROWS` and one column per report, values
        which were not computed are NaN
    """
    columns = {}
    for label, report in _labelled(reports).items():
        values = [_value(report.metrics.get(name)) for name in _SCALAR_ROWS]
        cell = report.cei_cell(percentile, weights)
        for variant in Variant:
            for kind in Kind:
                values.append(
                    np.nan if cell is None else _value(cell.value(variant, kind))
                )
        values += [
            _value(report.pooled_rates.get("fmr")),
            _value(report.pooled_rates.get("fnmr")),
        ]
        columns[label] = values

    return pd.DataFrame(columns, index=pd.Index(SUMMARY_ROWS, name="metric"))


def sweep_table(
    reports: Reports, variant: Union[Variant, str] = Variant.NORMAL
) -> pd.DataFrame:
    """
    CEI sweep of one or several reports.

    Parameters
    ----------
    reports
        Single report or reports by label
    variant
        CEI variant to tabulate

    Returns
    -------
    :obj:`pd.DataFrame`
        Rows indexed by percentile and weights in sweep order. Columns are the kinds
        for a single report and (kind, label) pairs for several reports.
    """
    variant = Variant.from_variant(variant)
    labelled = _labelled(reports)

    rows: List[Tuple[float, Tuple[float, float]]] = []
    data: Dict[Tuple[str, str], Dict[Tuple[float, str], float]] = {}
    for label, report in labelled.items():
        for cell in report.cei:
            key = (cell.percentile, cell.weights)
            if key not in rows:
                rows.append(key)
            for kind in Kind:
                column = data.setdefault((kind.value, label), {})
                column[cell.percentile, _weights_label(cell.weights)] = _value(
                    cell.value(variant, kind)
                )

    index = pd.MultiIndex.from_arrays(
        [[p for p, _ in rows], [_weights_label(w) for _, w in rows]],
        names=["percentile", "weights"],
    )
    columns = pd.MultiIndex.from_product(
        [[k.value for k in Kind], list(labelled)], names=["kind", "label"]
    )
    table = pd.DataFrame(
        {c: [data.get(c, {}).get(i, np.nan) for i in index] for c in columns},
        index=index,
        columns=columns,
    )
    if isinstance(reports, MetricReport):
        return table.droplevel("label", axis=1)
    return table


def _weights_label(weights: Sequence[float]) -> str:
    return "({:g}, {:g})".format(*weights)


def _index_label(value: object) -> str:
    if isinstance(value, float):
        return "P{:g}".format(value)
    return "w={}".format(value) if str(value).startswith("(") else str(value)


def _format_number(value: float) -> str:
    return "n/a" if pd.isna(value) else "{:.4f}".format(value)


def to_markdown(table: pd.DataFrame) -> str:
    """
    Render a table as GitHub flavoured markdown with four decimals.

    Index and column levels are flattened, missing values read ``n/a``.
    """
    out = table.copy()
    if isinstance(out.columns, pd.MultiIndex):
        out.columns = [" / ".join(str(c) for c in col) for col in out.columns]
    if isinstance(out.index, pd.MultiIndex):
        out.index = [" ".join(_index_label(v) for v in i) for i in out.index]
    for column in out.columns:
        if pd.api.types.is_numeric_dtype(out[column]):
            out[column] = out[column].map(_format_number)
    return out.to_markdown(stralign="right")


def _rates_table(report: MetricReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "fmr": [_value(r.fmr) for r in report.group_rates],
            "fnmr": [_value(r.fnmr) for r in report.group_rates],
        },
        index=pd.Index([r.group for r in report.group_rates], name="group"),
    )


def _render_markdown(reports: Reports) -> str:
    labelled = _labelled(reports)
    sections = ["## Fairness metrics", "", to_markdown(summary_table(reports)), ""]
    if any(r.cei for r in labelled.values()):
        for variant in Variant:
            sections += [
                "## CEI_{} sweep".format(variant.name[0]),
                "",
                to_markdown(sweep_table(reports, variant)),
                "",
            ]

    for label, report in labelled.items():
        heading = "" if len(labelled) == 1 else " ({})".format(label)
        if report.operating_point is not None:
            point = report.operating_point
            sections += [
                "## Operating point{}".format(heading),
                "",
                "threshold {:.6g} at target FMR {:g} (achieved {:.6g}, {} impostor "
                "comparisons)".format(
                    point.threshold,
                    point.target_fmr,
                    point.achieved_fmr,
                    point.n_impostor,
                ),
                "",
            ]
            if report.group_rates:
                sections += [
                    to_markdown(_rates_table(report)),
                    "",
                ]
        for title, lines in (
            ("Flags", list(report.flags)),
            ("Failures", [str(f) for f in report.failures]),
        ):
            if lines:
                sections += ["## {}{}".format(title, heading), ""]
                sections += ["- {}".format(line) for line in lines]
                sections.append("")

    return "\n".join(sections)


def render_report(
    reports: Reports, format: Union[ReportFormat, str] = ReportFormat.JSON  # noqa: A002
) -> str:
    """
    Render one or several reports.

    Parameters
    ----------
    reports
        Single report or reports by label
    format
        Output format

    Returns
    -------
    str
        Rendered text ending with a newline. JSON of a single report is its
        :meth:`MetricReport.to_dict` representation, JSON of several reports maps
        labels to these representations. Keys are sorted so that equal reports
        render to identical text.
    """
    fmt = ReportFormat.from_report_format(format)
    labelled = _labelled(reports)
    if fmt == ReportFormat.MARKDOWN:
        return _render_markdown(reports)

    if isinstance(reports, MetricReport):
        data = reports.to_dict()
    else:
        data = {label: r.to_dict() for label, r in labelled.items()}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def parse_reports(text: str) -> Dict[str, MetricReport]:
    """
    Read reports rendered as JSON by :func:`render_report`.

    Returns
    -------
    dict
        Reports by label, a single report is labelled :data:`DEFAULT_LABEL`

    Raises
    ------
    ValueError
        ``text`` is not a rendered report
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError("not a JSON report: {}".format(exc))
    if not isinstance(data, dict):
        raise ValueError("not a JSON report")
    if isinstance(data.get("reports"), dict):
        data = data["reports"]
    if "schema_version" in data:
        return {DEFAULT_LABEL: MetricReport.from_dict(data)}
    try:
        return {label: MetricReport.from_dict(r) for label, r in data.items()}
    except (AttributeError, KeyError, TypeError) as exc:
        raise ValueError("not a JSON report: {}".format(exc))


def parse_report(text: str) -> MetricReport:
    """
    Read a single report rendered as JSON by :func:`render_report`.

    Raises
    ------
    ValueError
        ``text`` is not a single rendered report
    """
    reports = parse_reports(text)
    if len(reports) != 1:
        raise ValueError("expected a single report, got {}".format(len(reports)))
    return next(iter(reports.values()))
