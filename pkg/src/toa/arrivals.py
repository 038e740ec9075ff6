import logging
import warnings
from dataclasses import dataclass
from functools import partial
from numbers import Real
from typing import Iterable, List, Optional, Tuple

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from toa import utils
from toa.evolution.evolution_abc import Evolution
from toa.exceptions import GridMismatchError, NonpositiveMassError, WindowTooSmallWarning
from toa.grid import HBAR, MomentumGrid, TimeGrid, WaveFunction

logger = logging.getLogger(__name__)

DIRECTIONS = (1, -1)
""" Arrivals from the left (:math:`\\alpha = +`) and from the right (:math:`\\alpha = -`). """
COLUMNS = ['t', 'pi', 'pi_plus', 'pi_minus', 'flux']
WINDOW_TOLERANCE = 1e-4
DECOMPOSITION_TOLERANCE = 1e-10
DEFAULT_RELATIVE_PROMINENCE = .01


def _check_mass(mass: Real):
    if not mass > 0:
        raise NonpositiveMassError(f'mass must be positive, got {mass}')


def crossing_kernel(
        grid: MomentumGrid,
        x_arr: Real,
        mass: Real,
        alpha: int
) -> np.ndarray:
    r"""
    Momentum kernel of the crossing amplitude,
    :math:`\sqrt{\alpha p / (2\pi\hbar m)} \, \Theta(\alpha p) \, e^{ipX/\hbar}`, sampled on ``grid``. The step
    function is sharp at :math:`p = 0`, where the kernel vanishes.

    :raises GridMismatchError: if ``grid`` does not contain :math:`p = 0`.
    :raises NonpositiveMassError: if ``mass`` is not positive.
    """
    _check_mass(mass)
    if alpha not in DIRECTIONS:
        raise ValueError(f'alpha must be +1 or -1, got {alpha}')
    if not grid.p_min <= 0 <= grid.p_max:
        raise GridMismatchError(f'The grid [{grid.p_min}, {grid.p_max}] must contain p = 0')
    p = grid.points
    return np.sqrt(np.clip(alpha * p, 0, None) / (2 * np.pi * HBAR * mass)) * np.exp(1j * p * x_arr / HBAR)


def plane_wave(
        grid: MomentumGrid,
        x_arr: Real
) -> np.ndarray:
    r""" :math:`(2\pi\hbar)^{-1/2} e^{ipX/\hbar}` on ``grid``, which maps momentum amplitudes to :math:`\psi(X)`. """
    return np.exp(1j * grid.points * x_arr / HBAR) / np.sqrt(2 * np.pi * HBAR)


@dataclass(frozen=True)
class CrossingAmplitudes:
    """
    Amplitudes of crossing the arrival point from the left (``a_plus``) and from the right (``a_minus``).
    """
    a_plus: complex
    a_minus: complex

    def __iter__(self):
        return iter([self.a_plus, self.a_minus])


def crossing_amplitude(
        f: WaveFunction,
        x_arr: Real,
        mass: Real,
        alpha: int
) -> complex:
    r"""
    Quadrature of :math:`\int dp \sqrt{\alpha p/(2\pi\hbar m)} \, \Theta(\alpha p) \, e^{ipX/\hbar} f(p)`. For
    :math:`\alpha = +` only the :math:`p > 0` content of ``f`` enters, for :math:`\alpha = -` only :math:`p < 0`.
    """
    kernel = crossing_kernel(f.grid, x_arr, mass, alpha)
    return complex(f.grid.integrate(kernel * f.amplitudes))


def crossing_amplitudes(
        f: WaveFunction,
        x_arr: Real,
        mass: Real
) -> CrossingAmplitudes:
    return CrossingAmplitudes(*(crossing_amplitude(f, x_arr, mass, alpha) for alpha in DIRECTIONS))


@dataclass(frozen=True)
class ArrivalPoint:
    """
    Density of arrivals at one instant, split by direction, together with the flux.

    Can be unpacked like a tuple:

    >>> t, pi, pi_plus, pi_minus, flux = ArrivalPoint(...)

    """
    t: float
    """ Time. """
    pi: float
    """ Total density of arrivals, ``pi_plus + pi_minus``. """
    pi_plus: float
    """ Density of arrivals from the left. """
    pi_minus: float
    """ Density of arrivals from the right. """
    flux: float
    """ Probability flux at the arrival point. """

    @classmethod
    def from_directions(
            cls,
            t: Real,
            pi_plus: Real,
            pi_minus: Real,
            flux: Real
    ) -> 'ArrivalPoint':
        return cls(float(t), float(pi_plus + pi_minus), float(pi_plus), float(pi_minus), float(flux))

    def __iter__(self):
        return iter([self.t, self.pi, self.pi_plus, self.pi_minus, self.flux])


def flux_1p(
        f_t: WaveFunction,
        x_arr: Real,
        mass: Real
) -> float:
    r"""
    Flux :math:`j = \mathrm{Re}[\bar F G] / m` with :math:`F = \psi(X)` and :math:`G = -i\hbar\psi'(X)`, both
    computed from the momentum amplitudes:

    .. math::
        F = (2\pi\hbar)^{-1/2} \int dp \, e^{ipX/\hbar} f(p), \qquad
        G = (2\pi\hbar)^{-1/2} \int dp \, p \, e^{ipX/\hbar} f(p).
    """
    _check_mass(mass)
    wave = plane_wave(f_t.grid, x_arr) * f_t.amplitudes
    value = f_t.grid.integrate(wave)
    derivative = f_t.grid.integrate(f_t.grid.points * wave)
    return float((np.conj(value) * derivative).real / mass)


def flux_1p_kernel(
        f_t: WaveFunction,
        x_arr: Real,
        mass: Real
) -> float:
    r"""
    Flux evaluated literally as the double integral

    .. math::
        j = \int dp \, dq \, \bar f(p) f(q) \frac{p + q}{2hm} e^{i(q - p)X/\hbar}.

    Quadratic in the number of grid points; ``flux_1p`` is the factorized equivalent.
    """
    _check_mass(mass)
    p = f_t.grid.points
    kernel = (
        (p[:, np.newaxis] + p[np.newaxis, :]) / (2 * 2 * np.pi * HBAR * mass)
        * np.exp(1j * (p[np.newaxis, :] - p[:, np.newaxis]) * x_arr / HBAR)
    )
    integrand = np.conj(f_t.amplitudes)[:, np.newaxis] * kernel * f_t.amplitudes[np.newaxis, :]
    return float(utils.tensor_quadrature(integrand, f_t.grid.step, f_t.grid.step).real)


def arrival_density_1p(
        f_t: WaveFunction,
        x_arr: Real,
        mass: Real,
        t: Real = 0.
) -> ArrivalPoint:
    r"""
    Density of arrivals :math:`\Pi = \Pi_+ + \Pi_-` with :math:`\Pi_\alpha = |a_\alpha|^2`, for a state already
    evolved to time ``t``. Both terms are non-negative by construction.
    """
    a_plus, a_minus = crossing_amplitudes(f_t, x_arr, mass)
    return ArrivalPoint.from_directions(
        t,
        abs(a_plus) ** 2,
        abs(a_minus) ** 2,
        flux_1p(f_t, x_arr, mass)
    )


class ArrivalSeries:
    """
    Time series of arrival densities at a fixed arrival point. The core is a ``pd.DataFrame`` ``frame`` with the
    columns ``t, pi, pi_plus, pi_minus, flux``; ``metadata`` holds the arrival point, masses, statistics and the
    scenario label.

    The following sanity-checks are performed on the data:

    * all columns are present and finite,
    * the times are strictly increasing,
    * ``pi_plus`` and ``pi_minus`` are non-negative and add up to ``pi``.
    """
    def __init__(
            self,
            frame: pd.DataFrame,
            metadata: Optional[dict] = None
    ):
        self.frame = self._validate_frame(frame.copy())
        self.metadata = dict(metadata or {})

    @classmethod
    def from_points(
            cls,
            points: Iterable[ArrivalPoint],
            metadata: Optional[dict] = None
    ) -> 'ArrivalSeries':
        frame = pd.DataFrame([list(point) for point in points], columns=COLUMNS)
        return cls(frame, metadata)

    @staticmethod
    def _validate_frame(
            frame: pd.DataFrame
    ) -> pd.DataFrame:
        missing = [column for column in COLUMNS if column not in frame.columns]
        if missing:
            raise ValueError(f'Missing columns {missing} in the arrival series.')
        frame = frame[COLUMNS].astype(float).reset_index(drop=True)
        if frame.empty:
            raise ValueError('An arrival series needs at least one time point.')
        if not np.isfinite(frame.to_numpy()).all():
            raise ValueError(f'There are {np.sum(~np.isfinite(frame.to_numpy()))} non-finite values in the series.')
        if (np.diff(frame['t'].to_numpy()) <= 0).any():
            raise ValueError('Times in an arrival series must be strictly increasing.')
        if (frame[['pi_plus', 'pi_minus']].to_numpy() < 0).any():
            raise ValueError('Directional densities of arrivals cannot be negative.')
        decomposition = np.abs(frame['pi'] - frame['pi_plus'] - frame['pi_minus'])
        if (decomposition > DECOMPOSITION_TOLERANCE * np.maximum(1, frame['pi'].abs())).any():
            raise ValueError(f'pi differs from pi_plus + pi_minus by up to {decomposition.max()}.')
        return frame

    def __len__(self):
        return len(self.frame)

    @property
    def t(self) -> np.ndarray:
        return self.frame['t'].to_numpy()

    @property
    def pi(self) -> np.ndarray:
        return self.frame['pi'].to_numpy()

    @property
    def flux(self) -> np.ndarray:
        return self.frame['flux'].to_numpy()

    @property
    def net_crossings(self) -> np.ndarray:
        r""" :math:`\Pi_+ - \Pi_-`, the classical analogue of the flux. """
        return (self.frame['pi_plus'] - self.frame['pi_minus']).to_numpy()

    @property
    def label(self) -> str:
        return self.metadata.get('label', '')

    def points(self) -> List[ArrivalPoint]:
        return [ArrivalPoint(*row) for row in self.frame.itertuples(index=False)]

    def time_integral(
            self,
            column: str = 'pi'
    ) -> float:
        return time_integral(self, column)

    def mean_arrival_time(self) -> float:
        return mean_arrival_time(self)

    def peaks(
            self,
            relative_prominence: Real = DEFAULT_RELATIVE_PROMINENCE,
            column: str = 'pi'
    ) -> List[Tuple[float, float]]:
        return find_arrival_peaks(self, relative_prominence, column)

    def plot_density(
            self,
            ax: plt.Axes
    ):
        """
        Plot the density of arrivals against time.
        """
        ax.plot(
            self.t,
            self.pi,
            '-k',
            alpha=.8,
            label=self.label or r'$\Pi$'
        )
        ax.set_xlabel('Time (a.u.)')
        ax.set_ylabel('Density of arrivals')
        ax.set_title(f'Arrivals at X={self.metadata.get("x_arr", "?")}')
        ax.legend(loc='upper right')
        ax.grid()

    def plot_directions(
            self,
            ax: plt.Axes
    ):
        """
        Plot arrivals from the left and from the right separately.
        """
        ax.plot(self.t, self.frame['pi_plus'], '-k', alpha=.8, label=r'$\Pi_+$')
        ax.plot(self.t, self.frame['pi_minus'], ':k', alpha=.8, label=r'$\Pi_-$')
        ax.set_xlabel('Time (a.u.)')
        ax.set_ylabel('Density of arrivals')
        ax.set_title('Arrivals from the left and from the right')
        ax.legend(loc='upper right')
        ax.grid()

    def plot_flux(
            self,
            ax: plt.Axes
    ):
        """
        Plot the flux together with the density of arrivals and the net crossings :math:`\\Pi_+ - \\Pi_-`.
        """
        ax.plot(self.t, self.pi, '-k', alpha=.8, label=r'$\Pi$')
        ax.plot(self.t, self.flux, 'ok', alpha=.4, markersize=3, label='$j$')
        ax.plot(self.t, self.net_crossings, '--k', alpha=.6, label=r'$\Pi_+ - \Pi_-$')
        ax.set_xlabel('Time (a.u.)')
        ax.set_ylabel('Density')
        ax.set_title('Flux and density of arrivals')
        ax.legend(loc='upper right')
        ax.grid()


def _check_window(
        series: ArrivalSeries,
        column: str = 'pi'
) -> bool:
    values = series.frame[column].to_numpy()
    peak = np.max(np.abs(values))
    covered = bool(peak == 0 or max(abs(values[0]), abs(values[-1])) <= WINDOW_TOLERANCE * peak)
    if not covered:
        warnings.warn(
            f'The time window [{series.t[0]}, {series.t[-1]}] cuts off arrivals: boundary values reach '
            f'{max(abs(values[0]), abs(values[-1])) / peak:.2e} of the peak',
            WindowTooSmallWarning
        )
    return covered


def window_covers_arrivals(series: ArrivalSeries) -> bool:
    """
    Whether the density at both ends of the window is below :math:`10^{-4}` of its peak. Warns otherwise.
    """
    return _check_window(series)


def time_integral(
        series: ArrivalSeries,
        column: str = 'pi'
) -> float:
    r"""
    Trapezoid-in-time integral of a column, by default :math:`\int dt \, \Pi`: the number of arrivals, which
    equals the number of particles for free motion when the window covers all arrivals.
    """
    _check_window(series, column)
    return float(trapezoid(series.frame[column].to_numpy(), series.t))


def arrival_time_moment(
        series: ArrivalSeries,
        order: int = 1
) -> float:
    r""" Normalized moment :math:`\int dt \, t^k \Pi / \int dt \, \Pi` of the arrival times. """
    _check_window(series)
    weights = trapezoid(series.pi, series.t)
    if weights <= 0:
        raise ValueError('The series holds no arrivals.')
    return float(trapezoid(series.t ** order * series.pi, series.t) / weights)


def mean_arrival_time(series: ArrivalSeries) -> float:
    return arrival_time_moment(series, 1)


def arrival_time_spread(series: ArrivalSeries) -> float:
    """ Standard deviation of the arrival times. """
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', WindowTooSmallWarning)
        mean = mean_arrival_time(series)
        second = arrival_time_moment(series, 2)
    return float(np.sqrt(max(second - mean ** 2, 0.)))


def find_arrival_peaks(
        series: ArrivalSeries,
        relative_prominence: Real = DEFAULT_RELATIVE_PROMINENCE,
        column: str = 'pi'
) -> List[Tuple[float, float]]:
    """
    Local maxima of a column with a prominence of at least ``relative_prominence`` times its global maximum, after
    smoothing over 3 neighbouring samples.

    :return: ``(t, value)`` pairs sorted by time, with unsmoothed values.
    """
    values = series.frame[column].to_numpy()
    if len(values) < 3:
        return []
    smoothed = uniform_filter1d(values, size=3, mode='nearest')
    indices, _ = find_peaks(smoothed, prominence=relative_prominence * np.max(smoothed))
    return [(float(series.t[index]), float(values[index])) for index in indices]


def _evolved_arrival_point(
        f0: WaveFunction,
        evolution: Evolution,
        x_arr: Real,
        mass: Real,
        t: Real
) -> ArrivalPoint:
    return arrival_density_1p(evolution.evolve(f0, t), x_arr, mass, t)


def arrival_series_1p(
        f0: WaveFunction,
        evolution: Evolution,
        x_arr: Real,
        mass: Real,
        times: TimeGrid,
        max_workers: Optional[int] = None,
        metadata: Optional[dict] = None
) -> ArrivalSeries:
    """
    Evolves ``f0`` to every instant of ``times`` and evaluates density and flux there. The instants are independent
    and are spread over ``max_workers`` processes when given.
    """
    logger.debug('One-particle series at X=%s over %s instants', x_arr, times.n_steps)
    points = utils.parallel_map(
        partial(_evolved_arrival_point, f0, evolution, x_arr, mass),
        times.times,
        max_workers
    )
    return ArrivalSeries.from_points(
        points,
        {'x_arr': x_arr, 'mass': mass, **(metadata or {})}
    )
