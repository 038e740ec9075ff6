import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from numbers import Real
from typing import Optional

import numpy as np
from scipy.stats import norm as normal_distribution
from scipy.stats import poisson

from toa.exceptions import (
    DegenerateComboError,
    GridMismatchError,
    GridTooSmallError,
    InvalidRangeError,
    NonpositiveMassError,
    PoorRepresentationError,
    TruncatedSupportWarning,
    TruncationTooSevereError,
)
from toa.grid import HBAR, DEFAULT_NUMBER_OF_POINTS, MomentumGrid, WaveFunction, norm, symmetric_grid

logger = logging.getLogger(__name__)

TRUNCATED_SUPPORT_TOLERANCE = 1e-8
GRID_TOO_SMALL_TOLERANCE = 1e-8
COHERENT_TAIL_TOLERANCE = 1e-10
DEGENERATE_COMBO_THRESHOLD = 1e-10
POOR_REPRESENTATION_TOLERANCE = 1e-6
DEFAULT_N_MAX = 64

_MOMENTUM_PHASES = np.array([1, -1j, -1, 1j])


class Statistics(Enum):
    """
    Exchange statistics of a pair of particles.
    """
    BOSON = 'boson'
    FERMION = 'fermion'
    DISTINGUISHABLE = 'distinguishable'

    @property
    def exchange_sign(self) -> Optional[int]:
        """ +1 for bosons, -1 for fermions, ``None`` for distinguishable particles. """
        return {
            Statistics.BOSON: 1,
            Statistics.FERMION: -1,
        }.get(self)

    @property
    def is_identical(self) -> bool:
        return self is not Statistics.DISTINGUISHABLE

    @staticmethod
    def from_parity(level: int) -> 'Statistics':
        """
        Statistics compatible with the relative-motion eigenstate ``level``: even states are exchange-symmetric
        (bosonic), odd states antisymmetric (fermionic).
        """
        return Statistics.BOSON if level % 2 == 0 else Statistics.FERMION


@dataclass(frozen=True)
class GaussianSpec:
    """
    Minimum-uncertainty Gaussian wavepacket, described by its central position and momentum and its spatial spread.
    """
    x0: float
    """ Central position. """
    p0: float
    """ Central momentum. """
    delta_x: float
    """ Square root of the spatial variance. """
    mass: float = 1.
    """ Mass of the particle (or of the center of mass) carried by the packet. """

    def __post_init__(self):
        if not self.delta_x > 0:
            raise InvalidRangeError(f'delta_x must be positive, got {self.delta_x}')
        if not self.mass > 0:
            raise NonpositiveMassError(f'mass must be positive, got {self.mass}')

    @property
    def sigma_p(self) -> float:
        """ Momentum spread of a minimum-uncertainty packet. """
        return HBAR / (2 * self.delta_x)

    def classical_arrival_time(
            self,
            x_arr: Real
    ) -> float:
        """ Time at which a classical particle with momentum ``p0`` starting at ``x0`` reaches ``x_arr``. """
        return self.mass * (x_arr - self.x0) / self.p0


def gaussian_packet(
        spec: GaussianSpec,
        grid: MomentumGrid
) -> WaveFunction:
    r"""
    Samples the minimum-uncertainty packet

    .. math::
        \tilde\psi(p) = (2\pi\sigma_p^2)^{-1/4} \exp\left(-\frac{(p - p_0)^2}{4\sigma_p^2}\right) e^{-ipx_0/\hbar},
        \qquad \sigma_p = \frac{\hbar}{2\Delta x}.

    A ``TruncatedSupportWarning`` is issued when more than :math:`10^{-8}` of the probability lies outside ``grid``.
    """
    sigma_p = spec.sigma_p
    p = grid.points
    amplitudes = (
        (2 * np.pi * sigma_p ** 2) ** -.25
        * np.exp(-(p - spec.p0) ** 2 / (4 * sigma_p ** 2))
        * np.exp(-1j * p * spec.x0 / HBAR)
    )
    tail_mass = (
        normal_distribution.cdf(grid.p_min, loc=spec.p0, scale=sigma_p)
        + normal_distribution.sf(grid.p_max, loc=spec.p0, scale=sigma_p)
    )
    if tail_mass > TRUNCATED_SUPPORT_TOLERANCE:
        warnings.warn(
            f'Gaussian packet around p0={spec.p0} with sigma_p={sigma_p} has tail mass {tail_mass:.3e} outside '
            f'the grid [{grid.p_min}, {grid.p_max}]',
            TruncatedSupportWarning
        )
    return WaveFunction(grid, amplitudes)


def gaussian_overlap(
        spec_a: GaussianSpec,
        spec_b: GaussianSpec
) -> float:
    r"""
    Analytic modulus of the overlap of two minimum-uncertainty packets,

    .. math::
        |\langle a|b\rangle|^2 = \frac{2\sigma_a\sigma_b}{\sigma_a^2 + \sigma_b^2}
        \exp\left(-\frac{(p_a - p_b)^2 + 4\sigma_a^2\sigma_b^2(x_a - x_b)^2}{2(\sigma_a^2 + \sigma_b^2)}\right),

    with :math:`\sigma` the momentum spreads. For equal widths and momenta this is
    :math:`\exp(-d^2/(8\Delta x^2))` at distance :math:`d`.
    """
    sigma_a, sigma_b = spec_a.sigma_p, spec_b.sigma_p
    variance_sum = sigma_a ** 2 + sigma_b ** 2
    exponent = (
        (spec_a.p0 - spec_b.p0) ** 2 + 4 * sigma_a ** 2 * sigma_b ** 2 * (spec_a.x0 - spec_b.x0) ** 2 / HBAR ** 2
    ) / (2 * variance_sum)
    return float(np.sqrt(2 * sigma_a * sigma_b / variance_sum * np.exp(-exponent)))


@dataclass(frozen=True, eq=False)
class HOBasis:
    r"""
    Harmonic-oscillator eigenfunctions :math:`u_0, \dots, u_{n_\mathrm{max}}` in momentum representation, sampled on
    ``grid``. Row :math:`n` of ``eigenfunctions`` holds

    .. math::
        u_n(p) = (-i)^n (\pi b^2)^{-1/4} (2^n n!)^{-1/2} H_n(p/b) e^{-p^2/(2b^2)}, \qquad b = \sqrt{\mu\omega\hbar}.

    Build instances with ``ho_basis``.
    """
    mu: float
    """ (Reduced) mass of the oscillator. """
    omega: float
    """ Angular frequency. """
    n_max: int
    """ Highest level in the basis. """
    grid: MomentumGrid
    """ Grid the eigenfunctions are sampled on. """
    eigenfunctions: np.ndarray = field(repr=False)
    """ Complex array of shape ``(n_max + 1, grid.n_points)``. """

    @property
    def momentum_scale(self) -> float:
        return np.sqrt(self.mu * self.omega * HBAR)

    @property
    def energies(self) -> np.ndarray:
        return HBAR * self.omega * (np.arange(self.n_max + 1) + .5)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    def eigenfunction(
            self,
            n: int
    ) -> WaveFunction:
        if not 0 <= n <= self.n_max:
            raise InvalidRangeError(f'Level {n} is outside the basis 0..{self.n_max}')
        return WaveFunction(self.grid, self.eigenfunctions[n])

    def render(
            self,
            coefficients: np.ndarray
    ) -> WaveFunction:
        """ Sums :math:`\\sum_n c_n u_n(p)` on the grid. """
        return WaveFunction(self.grid, np.asarray(coefficients) @ self.eigenfunctions)


def _normalized_hermite_functions(
        y: np.ndarray,
        n_max: int
) -> np.ndarray:
    """
    Hermite functions :math:`h_n(y)`, orthonormal with respect to :math:`dy`, from the recurrence on the normalized
    functions themselves, so that no factorials or raw polynomial values are formed.
    """
    table = np.empty((n_max + 1, y.size))
    table[0] = np.pi ** -.25 * np.exp(-y ** 2 / 2)
    if n_max >= 1:
        table[1] = np.sqrt(2.) * y * table[0]
    for n in range(1, n_max):
        table[n + 1] = np.sqrt(2 / (n + 1)) * y * table[n] - np.sqrt(n / (n + 1)) * table[n - 1]
    return table


def ho_basis(
        mu: Real,
        omega: Real,
        n_max: int,
        grid: MomentumGrid
) -> HOBasis:
    """
    Builds the harmonic-oscillator eigenbasis up to level ``n_max`` on ``grid``.

    :param mu: mass of the oscillator, the reduced mass for relative motion.
    :param omega: angular frequency.
    :param n_max: highest level.
    :param grid: momentum grid, preferably symmetric about zero (see ``ho_grid``).
    :return: ``HOBasis``
    :raises GridTooSmallError: if the norm of the highest eigenfunction on the grid deviates from 1 by more than
        :math:`10^{-8}`, meaning the grid is too narrow or too coarse.
    """
    if not mu > 0:
        raise NonpositiveMassError(f'mu must be positive, got {mu}')
    if not omega > 0:
        raise InvalidRangeError(f'omega must be positive, got {omega}')
    if n_max < 0:
        raise InvalidRangeError(f'n_max must be non-negative, got {n_max}')

    scale = np.sqrt(mu * omega * HBAR)
    levels = np.arange(n_max + 1)
    eigenfunctions = (
        _normalized_hermite_functions(grid.points / scale, n_max) / np.sqrt(scale)
    ).astype(complex) * _MOMENTUM_PHASES[levels % 4][:, np.newaxis]
    eigenfunctions.setflags(write=False)

    defect = abs(1 - grid.integrate(np.abs(eigenfunctions[-1]) ** 2))
    if defect > GRID_TOO_SMALL_TOLERANCE:
        raise GridTooSmallError(
            f'Level {n_max} of the oscillator (b={scale:.4g}) has norm defect {defect:.3e} on the grid '
            f'[{grid.p_min}, {grid.p_max}] with {grid.n_points} points'
        )
    logger.debug('Built oscillator basis mu=%s omega=%s n_max=%s on %s points', mu, omega, n_max, grid.n_points)
    return HOBasis(float(mu), float(omega), int(n_max), grid, eigenfunctions)


def ho_grid(
        mu: Real,
        omega: Real,
        n_max: int,
        n_points: int = DEFAULT_NUMBER_OF_POINTS,
        safety: Real = 6
) -> MomentumGrid:
    r"""
    Symmetric grid holding the eigenfunctions up to ``n_max``: the classical turning momentum
    :math:`b\sqrt{2n_\mathrm{max}+1}` plus ``safety`` times the momentum scale :math:`b`.
    """
    scale = np.sqrt(mu * omega * HBAR)
    return symmetric_grid(scale * (np.sqrt(2 * n_max + 1) + safety), n_points)


@dataclass(frozen=True)
class CoherentLabel:
    """
    Label :math:`z` of the oscillator coherent state :math:`|z\\rangle`.
    """
    z: complex

    def conjugate(self) -> 'CoherentLabel':
        return CoherentLabel(complex(self.z).conjugate())

    def evolved(
            self,
            omega: Real,
            t: Real
    ) -> 'CoherentLabel':
        """ Coherent states stay coherent under oscillator evolution, with :math:`z \\to z e^{-i\\omega t}`. """
        return CoherentLabel(complex(self.z) * np.exp(-1j * omega * t))


def coherent_coefficients(
        z: CoherentLabel,
        n_max: int
) -> np.ndarray:
    r"""
    Fock coefficients :math:`c_n = e^{-|z|^2/2} z^n / \sqrt{n!}` for :math:`n = 0, \dots, n_\mathrm{max}`.

    :raises TruncationTooSevereError: if the discarded tail :math:`\sum_{n > n_\mathrm{max}} |c_n|^2` exceeds
        :math:`10^{-10}`.
    """
    z_value = complex(z.z)
    mean_number = abs(z_value) ** 2
    tail_mass = poisson.sf(n_max, mean_number) if mean_number > 0 else 0.
    if tail_mass > COHERENT_TAIL_TOLERANCE:
        raise TruncationTooSevereError(
            f'Truncating the coherent state z={z_value} at n_max={n_max} discards {tail_mass:.3e} of its norm'
        )
    coefficients = np.empty(n_max + 1, dtype=complex)
    coefficients[0] = np.exp(-mean_number / 2)
    for n in range(1, n_max + 1):
        coefficients[n] = coefficients[n - 1] * z_value / np.sqrt(n)
    return coefficients


@dataclass(frozen=True, eq=False)
class RelativeState:
    """
    State of the internal (relative) motion, as coefficients over a truncated oscillator eigenbasis.
    """
    basis: HOBasis
    coefficients: np.ndarray
    normalized: bool = False
    residual: Optional[float] = None
    """ Norm lost in the projection onto the basis, when the state was obtained with ``project_onto_basis``. """

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=complex)
        if coefficients.shape != (self.basis.n_max + 1,):
            raise InvalidRangeError(
                f'Expected {self.basis.n_max + 1} coefficients, got shape {coefficients.shape}'
            )
        coefficients.setflags(write=False)
        object.__setattr__(self, 'coefficients', coefficients)
        if self.normalized and abs(self.norm - 1) > 1e-8:
            raise InvalidRangeError(f'Relative state flagged as normalized has norm {self.norm}')

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def render(self) -> WaveFunction:
        return self.basis.render(self.coefficients)


def eigenstate(
        basis: HOBasis,
        n: int
) -> RelativeState:
    """ The stationary state :math:`u_n` as a ``RelativeState``. """
    if not 0 <= n <= basis.n_max:
        raise InvalidRangeError(f'Level {n} is outside the basis 0..{basis.n_max}')
    coefficients = np.zeros(basis.n_max + 1, dtype=complex)
    coefficients[n] = 1
    return RelativeState(basis, coefficients, normalized=True)


def coherent_state(
        basis: HOBasis,
        z: CoherentLabel
) -> RelativeState:
    return RelativeState(basis, coherent_coefficients(z, basis.n_max))


def _combo_coefficients(
        z: CoherentLabel,
        statistics: Statistics,
        n_max: int
) -> np.ndarray:
    if not statistics.is_identical:
        raise InvalidRangeError('Coherent combinations are defined for bosons and fermions only')
    return (
        coherent_coefficients(z, n_max)
        + statistics.exchange_sign * coherent_coefficients(z.conjugate(), n_max)
    )


def coherent_combo_norm(
        z: CoherentLabel,
        statistics: Statistics,
        n_max: int
) -> float:
    r""" Norm of :math:`|z\rangle \pm |\bar z\rangle` before renormalization, between 0 and 2. """
    return float(np.sqrt(np.sum(np.abs(_combo_coefficients(z, statistics, n_max)) ** 2)))


def coherent_combo(
        basis: HOBasis,
        z: CoherentLabel,
        statistics: Statistics
) -> RelativeState:
    r"""
    Symmetric (boson) or antisymmetric (fermion) combination :math:`|z\rangle \pm |\bar z\rangle`, renormalized to
    unit norm. Exchange of the particles maps :math:`z \to \bar z` in momentum representation, so these are the
    exchange-(anti)symmetric relative states built from coherent states.

    :raises DegenerateComboError: if the combination has norm below :math:`10^{-10}`, e.g. a fermionic combo with real
        ``z``.
    """
    combo = _combo_coefficients(z, statistics, basis.n_max)
    combo_norm = np.sqrt(np.sum(np.abs(combo) ** 2))
    if combo_norm < DEGENERATE_COMBO_THRESHOLD:
        raise DegenerateComboError(
            f'The {statistics.value} combination of coherent states with z={z.z} vanishes (norm {combo_norm:.3e})'
        )
    return RelativeState(basis, combo / combo_norm, normalized=True)


def project_onto_basis(
        f: WaveFunction,
        basis: HOBasis
) -> RelativeState:
    r"""
    Coefficients :math:`c_n = \langle u_n | f \rangle` of ``f`` in ``basis``. The norm not captured by the basis,
    :math:`\|f\|^2 - \sum_n |c_n|^2`, is kept in ``residual``.

    :raises GridMismatchError: if ``f`` is not sampled on the basis grid.
    :raises PoorRepresentationError: if the residual exceeds :math:`10^{-6}`.
    """
    if f.grid != basis.grid:
        raise GridMismatchError(f'Wavefunction grid {f.grid} differs from the basis grid {basis.grid}')
    coefficients = basis.grid.integrate(np.conj(basis.eigenfunctions) * f.amplitudes, axis=1)
    residual = float(norm(f) ** 2 - np.sum(np.abs(coefficients) ** 2))
    if residual > POOR_REPRESENTATION_TOLERANCE:
        raise PoorRepresentationError(
            f'The basis up to n_max={basis.n_max} misses {residual:.3e} of the norm of the wavefunction'
        )
    return RelativeState(basis, coefficients, residual=residual)
