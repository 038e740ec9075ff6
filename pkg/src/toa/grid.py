"""
Momentum-space substrate: uniform momentum grids, wavefunctions sampled on them, quadrature-based inner products and
uniform time grids.

All quantities are in atomic units (:math:`\\hbar = 1`, :math:`h = 2\\pi`). Position and momentum representations are
related by

.. math::
    \\psi(x) = (2\\pi\\hbar)^{-1/2} \\int dp \\, e^{ipx/\\hbar} \\tilde\\psi(p).
"""
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Real

import numpy as np

from toa import utils
from toa.exceptions import GridMismatchError, InvalidRangeError, ZeroNormError

HBAR = 1.
""" Reduced Planck constant in atomic units. """

ZERO_NORM_THRESHOLD = 1e-12
NORMALIZED_TOLERANCE = 1e-8
DEFAULT_NUMBER_OF_POINTS = 1024


@dataclass(frozen=True)
class MomentumGrid:
    r"""
    Uniform momentum lattice :math:`p_k = p_\mathrm{min} + k \cdot \mathrm{step}`, :math:`k = 0, \dots, n-1`.

    Grids compare equal when their end points and number of points are equal.
    """
    p_min: float
    """ Lowest momentum of the lattice. """
    p_max: float
    """ Highest momentum of the lattice. """
    n_points: int
    """ Number of lattice points, at least 2. """

    def __post_init__(self):
        if self.n_points < 2:
            raise InvalidRangeError(f'A momentum grid needs at least 2 points, got {self.n_points}')
        if not self.p_max > self.p_min:
            raise InvalidRangeError(f'p_max {self.p_max} must be bigger than p_min {self.p_min}')
        if not np.isfinite(self.step):
            raise InvalidRangeError(f'The grid [{self.p_min}, {self.p_max}] must be finite')

    @property
    def step(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        points = self.p_min + np.arange(self.n_points) * self.step
        points.setflags(write=False)
        return points

    def is_symmetric(
            self,
            tolerance: Real = 1e-12
    ) -> bool:
        """
        Whether the grid is symmetric about :math:`p = 0`, so that reversing a sampled function evaluates it at
        :math:`-p`.
        """
        return abs(self.p_min + self.p_max) <= tolerance * max(abs(self.p_min), abs(self.p_max))

    def covers(
            self,
            lower: Real,
            upper: Real
    ) -> bool:
        return self.p_min <= lower and upper <= self.p_max

    def integrate(
            self,
            values: np.ndarray,
            axis: int = -1
    ):
        """ Trapezoid quadrature of samples ``values`` taken on this grid. """
        return utils.uniform_quadrature(values, self.step, axis=axis)


def make_grid(
        p_min: Real,
        p_max: Real,
        n_points: int
) -> MomentumGrid:
    """
    Builds a uniform momentum grid.

    :param p_min: lowest momentum.
    :param p_max: highest momentum, bigger than ``p_min``.
    :param n_points: number of points, at least 2.
    :return: ``MomentumGrid``
    """
    return MomentumGrid(float(p_min), float(p_max), int(n_points))


def covering_grid(
        center: Real,
        spread: Real,
        n_points: int = DEFAULT_NUMBER_OF_POINTS,
        number_of_spreads: Real = 8,
        include_reflection: bool = False
) -> MomentumGrid:
    r"""
    Grid covering :math:`[\mathrm{center} - k\sigma, \mathrm{center} + k\sigma]` with :math:`k` ``number_of_spreads``
    and :math:`\sigma` ``spread``.

    With ``include_reflection`` the mirrored interval is covered as well, so that negative-momentum content of a
    state with positive central momentum (and vice versa) is resolved.
    """
    if spread <= 0:
        raise InvalidRangeError(f'spread must be positive, got {spread}')
    lower = center - number_of_spreads * spread
    upper = center + number_of_spreads * spread
    if include_reflection:
        lower, upper = min(lower, -upper), max(upper, -lower)
    return make_grid(lower, upper, n_points)


def symmetric_grid(
        half_width: Real,
        n_points: int = DEFAULT_NUMBER_OF_POINTS
) -> MomentumGrid:
    """ Grid on :math:`[-w, w]` with :math:`w` ``half_width``. """
    if half_width <= 0:
        raise InvalidRangeError(f'half_width must be positive, got {half_width}')
    return make_grid(-half_width, half_width, n_points)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    r"""
    Momentum-space amplitudes :math:`\tilde\psi(p_k)` of one particle on a ``MomentumGrid``.
    :math:`|\tilde\psi|^2` integrates to a probability.

    The amplitudes are stored as a read-only complex array. When ``normalized`` is set, the quadrature norm is
    checked to be 1 within :math:`10^{-8}`.
    """
    grid: MomentumGrid
    amplitudes: np.ndarray
    normalized: bool = field(default=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f'Expected {self.grid.n_points} amplitudes for the grid, got shape {amplitudes.shape}'
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)
        if self.normalized and abs(norm(self) - 1) > NORMALIZED_TOLERANCE:
            raise InvalidRangeError(f'Wavefunction flagged as normalized has norm {norm(self)}')

    @property
    def probability_density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(
            self,
            amplitudes: np.ndarray,
            normalized: bool = False
    ) -> 'WaveFunction':
        """ New wavefunction on the same grid. """
        return WaveFunction(self.grid, amplitudes, normalized=normalized)

    def scaled(
            self,
            factor: complex
    ) -> 'WaveFunction':
        return self.with_amplitudes(factor * self.amplitudes)


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform time grid of ``n_steps`` sampling instants from ``t_min`` to ``t_max`` inclusive. A grid with a single
    step holds ``t_min`` only.
    """
    t_min: float
    """ First sampling time. """
    t_max: float
    """ Last sampling time, bigger than ``t_min``. """
    n_steps: int
    """ Number of sampling instants. """

    def __post_init__(self):
        if not self.t_max > self.t_min:
            raise InvalidRangeError(f't_max {self.t_max} must be bigger than t_min {self.t_min}')
        if self.n_steps < 1:
            raise InvalidRangeError(f'n_steps must be at least 1, got {self.n_steps}')

    @property
    def times(self) -> np.ndarray:
        if self.n_steps == 1:
            return np.array([self.t_min])
        return np.linspace(self.t_min, self.t_max, self.n_steps)

    @property
    def step(self) -> float:
        if self.n_steps == 1:
            return self.t_max - self.t_min
        return (self.t_max - self.t_min) / (self.n_steps - 1)


def _check_same_grid(
        f: WaveFunction,
        g: WaveFunction
):
    if f.grid != g.grid:
        raise GridMismatchError(f'Wavefunctions live on different grids: {f.grid} and {g.grid}')


def inner_product(
        f: WaveFunction,
        g: WaveFunction
) -> complex:
    r"""
    Quadrature approximation of :math:`\langle f | g \rangle = \int dp \, \bar f(p) g(p)`, conjugate-linear in the
    first argument.

    :raises GridMismatchError: if ``f`` and ``g`` are sampled on different grids.
    """
    _check_same_grid(f, g)
    return complex(f.grid.integrate(np.conj(f.amplitudes) * g.amplitudes))


def norm(f: WaveFunction) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.)))


def normalize(f: WaveFunction) -> WaveFunction:
    """
    Rescales ``f`` to unit quadrature norm.

    :raises ZeroNormError: if the norm of ``f`` is below :math:`10^{-12}`.
    """
    f_norm = norm(f)
    if f_norm < ZERO_NORM_THRESHOLD:
        raise ZeroNormError(f'Cannot normalize a wavefunction with norm {f_norm}')
    return f.with_amplitudes(f.amplitudes / f_norm, normalized=True)


def mean_momentum(f: WaveFunction) -> float:
    r""" Expectation value :math:`\langle \hat p \rangle` of a (not necessarily normalized) state. """
    density = f.probability_density
    return float(f.grid.integrate(f.grid.points * density) / f.grid.integrate(density))


def mean_position(f: WaveFunction) -> float:
    r"""
    Expectation value :math:`\langle \hat x \rangle`. In momentum representation the position operator acts as
    :math:`i\hbar\,\partial_p`, consistently with the Fourier convention of this module.
    """
    derivative = np.gradient(f.amplitudes, f.grid.step)
    numerator = f.grid.integrate(np.conj(f.amplitudes) * 1j * HBAR * derivative)
    return float(numerator.real / f.grid.integrate(f.probability_density))
