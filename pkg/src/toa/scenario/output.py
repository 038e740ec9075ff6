"""
Writers for arrival series and their summaries. Series are written as CSV with the columns
``t,pi,pi_plus,pi_minus,flux`` in decimal notation with 12 significant digits; summaries as JSON and as a
human-readable block.
"""
import json
import logging
import math
from pathlib import Path
from typing import IO, Iterable, List, Union

import matplotlib.pyplot as plt
import numpy as np

from toa.arrivals import COLUMNS, ArrivalSeries
from toa.exceptions import SinkError
from toa.scenario.runner import SummaryReport, VariantResult

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
LINE_STYLES = ['-', '--', ':', '-.']

Destination = Union[str, Path, IO[str]]


def format_value(value: float) -> str:
    """ Decimal notation, never scientific, with ``SIGNIFICANT_DIGITS`` significant digits. """
    return np.format_float_positional(
        float(value),
        precision=SIGNIFICANT_DIGITS,
        unique=False,
        fractional=False,
        trim='-'
    )


def emit_csv(
        series: ArrivalSeries,
        destination: Destination
):
    """
    Writes a series as CSV, one newline-terminated row per time point under the header ``t,pi,pi_plus,pi_minus,flux``.

    :param series: series to write.
    :param destination: file path or open text stream.
    :raises SinkError: if the destination cannot be written.
    """
    frame = series.frame[COLUMNS].apply(lambda column: column.map(format_value))
    try:
        frame.to_csv(destination, index=False, lineterminator='\n')
    except OSError as error:
        raise SinkError(f'Cannot write the series {series.label!r} to {destination}: {error}') from error


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    return value


def emit_summary(
        summary: SummaryReport,
        destination: Destination
):
    """
    Writes a summary as JSON with sorted keys. Non-finite numbers become ``null``.

    :raises SinkError: if the destination cannot be written.
    """
    text = json.dumps(_json_value(summary.as_dict()), indent=2, sort_keys=True) + '\n'
    try:
        if isinstance(destination, (str, Path)):
            Path(destination).write_text(text)
        else:
            destination.write(text)
    except OSError as error:
        raise SinkError(f'Cannot write the summary of {summary.label!r} to {destination}: {error}') from error


def format_summary(
        scenario: str,
        summary: SummaryReport
) -> str:
    """ Human-readable block for one variant. """
    lines = [
        f'[{scenario}/{summary.label}]',
        f'  number of arrivals       {summary.time_integral:.6f}',
        f'    from the left          {summary.integral_pi_plus:.6f}',
        f'    from the right         {summary.integral_pi_minus:.6f}',
        f'  mean arrival time        {summary.mean_arrival_time:.6f}',
        f'  arrival time spread      {summary.arrival_time_spread:.6f}',
        f'  peaks                    {len(summary.peaks)}',
    ]
    lines += [f'    t = {t:.4f}  pi = {value:.6f}' for t, value in summary.peaks]
    if summary.flux_density_deviation is not None:
        lines.append(f'  max |flux - pi| / peak   {summary.flux_density_deviation:.3e}')
    lines.append(f'  window covers arrivals   {"yes" if summary.window_covered else "NO"}')
    if summary.converged is not None:
        lines.append(f'  converged                {"yes" if summary.converged else "NO"}')
    lines.append(f'  runtime                  {summary.runtime:.2f}s')
    return '\n'.join(lines)


def variant_stem(
        scenario: str,
        label: str
) -> str:
    return f'{scenario}_{label}'


def write_variant_outputs(
        scenario: str,
        results: Iterable[VariantResult],
        directory: Union[str, Path]
) -> List[Path]:
    """
    Writes ``<scenario>_<variant>.csv`` and ``<scenario>_<variant>.summary.json`` for every variant.

    :return: the written paths, in variant order.
    :raises SinkError: if the directory cannot be created or a file cannot be written.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise SinkError(f'Cannot create the output directory {directory}: {error}') from error
    paths = []
    for result in results:
        stem = variant_stem(scenario, result.label)
        csv_path = directory / f'{stem}.csv'
        summary_path = directory / f'{stem}.summary.json'
        emit_csv(result.series, csv_path)
        emit_summary(result.summary, summary_path)
        logger.info('Wrote %s and %s', csv_path, summary_path)
        paths += [csv_path, summary_path]
    return paths


def plot_variants(
        results: Iterable[VariantResult],
        ax: plt.Axes,
        column: str = 'pi'
):
    """
    Overlay of one column of every variant, in the manner of a figure panel.
    """
    for index, result in enumerate(results):
        ax.plot(
            result.series.t,
            result.series.frame[column],
            LINE_STYLES[index % len(LINE_STYLES)] + 'k',
            alpha=.8,
            label=result.label
        )
    ax.set_xlabel('Time (a.u.)')
    ax.set_ylabel('Density of arrivals' if column != 'flux' else 'Flux')
    ax.legend(loc='upper right')
    ax.grid()
