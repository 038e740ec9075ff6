import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from toa.arrivals import (
    ArrivalSeries,
    arrival_series_1p,
    arrival_time_spread,
    find_arrival_peaks,
    mean_arrival_time,
    time_integral,
    window_covers_arrivals,
)
from toa.evolution.free import FreeEvolution
from toa.exceptions import SchemaError, ToaError, WindowTooSmallWarning
from toa.multiparticle import pair_series
from toa.scenario.model import NumericsConfig, ScenarioConfig, ScenarioKind
from toa.scenario.variants import Variant, pair_scenario, single_state, variants

logger = logging.getLogger(__name__)

CONVERGENCE_TOLERANCE = 1e-4


@dataclass
class SummaryReport:
    """
    Summary of one variant of a scenario.
    """
    label: str
    """ Variant label, e.g. ``boson`` or ``n2_boson``. """
    time_integral: float
    """ Number of arrivals inside the window. """
    mean_arrival_time: float
    arrival_time_spread: float
    peaks: List[Tuple[float, float]]
    """ ``(t, pi)`` of every local maximum, sorted by time. """
    integral_pi_plus: float
    integral_pi_minus: float
    runtime: float
    """ Wall-clock seconds spent on the variant. """
    window_covered: bool
    """ Whether the density at both window ends is below 1e-4 of its peak. """
    converged: Optional[bool] = None
    """ Outcome of the grid-doubling audit, ``None`` when not requested. """
    refined_time_integral: Optional[float] = None
    flux_density_deviation: Optional[float] = None
    """ Maximum of ``|flux - pi|`` relative to the peak density, when the flux comparison is requested. """
    audit_flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def audit_failed(self) -> bool:
        """
        Whether a hard audit failed. Window coverage is advisory and reported in ``audit_flags`` only.
        """
        return self.converged is False

    def as_dict(self) -> dict:
        summary = asdict(self)
        summary['peaks'] = [list(peak) for peak in self.peaks]
        summary['audit_failed'] = self.audit_failed
        return summary


@dataclass
class VariantResult:
    label: str
    series: ArrivalSeries
    summary: SummaryReport


def _series(
        config: ScenarioConfig,
        variant: Variant,
        numerics: NumericsConfig,
        max_workers: Optional[int]
) -> ArrivalSeries:
    metadata = {'label': variant.label, 'scenario': config.name}
    if config.kind is ScenarioKind.SINGLE:
        return arrival_series_1p(
            single_state(config, numerics),
            FreeEvolution(config.mass),
            config.x_arr,
            config.mass,
            config.times,
            max_workers,
            metadata
        )
    return pair_series(
        pair_scenario(config, variant, numerics),
        config.times,
        config.x_arr,
        config.mass,
        max_workers,
        metadata
    )


def summarize(
        series: ArrivalSeries,
        runtime: float = 0.,
        compare_flux: bool = False
) -> SummaryReport:
    """
    Integrals, moments, peaks and window audit of a series.
    """
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', WindowTooSmallWarning)
        window_covered = window_covers_arrivals(series)
        integral = time_integral(series)
        mean = mean_arrival_time(series) if integral > 0 else float('nan')
        spread = arrival_time_spread(series) if integral > 0 else float('nan')
        integral_plus = time_integral(series, 'pi_plus')
        integral_minus = time_integral(series, 'pi_minus')
    deviation = None
    if compare_flux:
        peak = np.max(series.pi)
        deviation = float(np.max(np.abs(series.flux - series.pi)) / peak) if peak > 0 else 0.
    return SummaryReport(
        label=series.label,
        time_integral=integral,
        mean_arrival_time=mean,
        arrival_time_spread=spread,
        peaks=find_arrival_peaks(series),
        integral_pi_plus=integral_plus,
        integral_pi_minus=integral_minus,
        runtime=runtime,
        window_covered=window_covered,
        flux_density_deviation=deviation,
        audit_flags={'window_coverage': window_covered},
    )


def _run_variant(
        config: ScenarioConfig,
        variant: Variant,
        max_workers: Optional[int]
) -> VariantResult:
    start = time.perf_counter()
    series = _series(config, variant, config.numerics, max_workers)
    summary = summarize(series, time.perf_counter() - start, config.numerics.flux)
    if not summary.window_covered:
        logger.warning('%s/%s: the time window cuts off arrivals', config.name, variant.label)

    if config.numerics.convergence_check:
        refined = _series(config, variant, config.numerics.refined(), max_workers)
        refined_integral = time_integral(refined)
        summary.refined_time_integral = refined_integral
        summary.converged = bool(
            abs(refined_integral - summary.time_integral) <= CONVERGENCE_TOLERANCE * abs(refined_integral)
        )
        summary.audit_flags['convergence'] = summary.converged
        if not summary.converged:
            logger.warning(
                '%s/%s: doubling the grid density moves the time integral from %.10g to %.10g',
                config.name, variant.label, summary.time_integral, refined_integral
            )
    summary.runtime = time.perf_counter() - start
    logger.info('%s/%s: %s arrivals in %.2fs', config.name, variant.label, summary.time_integral, summary.runtime)
    return VariantResult(variant.label, series, summary)


def run_scenario(
        config: ScenarioConfig,
        max_workers: Optional[int] = None
) -> List[VariantResult]:
    """
    Computes every variant of ``config``: one per statistics for orbital pairs and coherent internal states, one per
    level for stationary internal states, a single one for one particle.

    Outputs are deterministic for a fixed configuration. Errors raised by a variant are re-raised with the variant
    label prepended to the message.

    :param config: validated scenario.
    :param max_workers: number of processes evaluating the time points of a variant; in-process when ``None``.
    :return: a ``VariantResult`` with series and summary per variant, in variant order.
    """
    results = []
    for variant in variants(config):
        try:
            results.append(_run_variant(config, variant, max_workers))
        except SchemaError:
            raise
        except ToaError as error:
            raise type(error)(f'{config.name}/{variant.label}: {error}') from error
    return results
