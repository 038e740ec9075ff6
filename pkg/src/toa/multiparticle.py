"""
Densities of arrivals of two particles: bosons, fermions and distinguishable particles.

Two routes are implemented. For pairs of orbitals the density is reorganized in terms of one-particle crossing
amplitudes, with exchange cross terms weighted by the overlap of the orbitals. For general states, in particular
states factorized in center-of-mass and relative motion, the two-particle wavefunction is assembled on a tensor
momentum grid and the one-particle operator :math:`\\hat O \\otimes 1 + 1 \\otimes \\hat O` is evaluated directly.
The tensor route applied to explicitly symmetrized orbital pairs serves as an independent check of the first.
"""
import logging
from abc import abstractmethod
from dataclasses import dataclass, field
from functools import partial
from numbers import Real
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from toa import utils
from toa.arrivals import (
    DIRECTIONS,
    ArrivalPoint,
    ArrivalSeries,
    crossing_amplitude,
    crossing_kernel,
    plane_wave,
)
from toa.evolution.evolution_abc import Evolution
from toa.evolution.harmonic import evolve_pair_factorized
from toa.exceptions import (
    CoverageError,
    FermionicStateDegenerateError,
    GridMismatchError,
    InvalidRangeError,
    ParityMismatchError,
)
from toa.grid import MomentumGrid, TimeGrid, WaveFunction, inner_product, normalize
from toa.states import RelativeState, Statistics

logger = logging.getLogger(__name__)

FERMION_DEGENERACY_THRESHOLD = 1e-10
PARITY_TOLERANCE = 1e-6
COVERAGE_TOLERANCE = 1e-6
NORM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class OrbitalPair:
    r"""
    Two particles occupying the orbitals :math:`\chi_a` and :math:`\chi_b`, (anti)symmetrized according to
    ``statistics``. The orbitals are normalized on construction and their overlap
    :math:`s = \langle\chi_a|\chi_b\rangle` is cached in ``overlap_s``.
    """
    chi_a: WaveFunction
    chi_b: WaveFunction
    statistics: Statistics
    overlap_s: complex = field(init=False)

    def __post_init__(self):
        if self.chi_a.grid != self.chi_b.grid:
            raise GridMismatchError('The orbitals of a pair must share their momentum grid')
        object.__setattr__(self, 'chi_a', normalize(self.chi_a))
        object.__setattr__(self, 'chi_b', normalize(self.chi_b))
        object.__setattr__(self, 'overlap_s', inner_product(self.chi_a, self.chi_b))
        _denominator(self.statistics, self.overlap_s)

    @property
    def grid(self) -> MomentumGrid:
        return self.chi_a.grid

    def swapped(self) -> 'OrbitalPair':
        return OrbitalPair(self.chi_b, self.chi_a, self.statistics)


def _denominator(
        statistics: Statistics,
        overlap_s: complex
) -> float:
    if not statistics.is_identical:
        return 1.
    denominator = 1 + statistics.exchange_sign * abs(overlap_s) ** 2
    if denominator < FERMION_DEGENERACY_THRESHOLD:
        raise FermionicStateDegenerateError(
            f'Antisymmetrized orbitals with overlap |s|={abs(overlap_s):.12f} have no norm'
        )
    return denominator


def _pair_expectation(
        elements: np.ndarray,
        statistics: Statistics,
        overlap_s: complex
) -> float:
    r"""
    Expectation of a one-particle operator from its matrix elements :math:`O_{ij}` between the orbitals:
    :math:`[O_{aa} + O_{bb} \pm 2\,\mathrm{Re}(\bar s O_{ab})] / (1 \pm |s|^2)` for identical particles and
    :math:`O_{aa} + O_{bb}` for distinguishable ones.
    """
    diagonal = (elements[0, 0] + elements[1, 1]).real
    if not statistics.is_identical:
        return float(diagonal)
    cross = 2 * statistics.exchange_sign * (np.conj(overlap_s) * elements[0, 1]).real
    return float((diagonal + cross) / _denominator(statistics, overlap_s))


def pair_density_orbitals(
        pair: OrbitalPair,
        evolution: Evolution,
        t: Real,
        x_arr: Real,
        mass: Real
) -> ArrivalPoint:
    r"""
    Density of arrivals of an orbital pair at time ``t``. With :math:`A_{\alpha,i}` the crossing amplitude of the
    evolved orbital :math:`i` and :math:`\Pi^\alpha_{ij} = \bar A_{\alpha,i} A_{\alpha,j}`,

    .. math::
        \Pi_\alpha = \frac{\Pi^\alpha_{aa} + \Pi^\alpha_{bb} \pm 2\,\mathrm{Re}(\bar s\,\Pi^\alpha_{ab})}{1 \pm |s|^2}

    for bosons (upper sign) and fermions (lower sign), and :math:`\Pi^\alpha_{aa} + \Pi^\alpha_{bb}` for
    distinguishable particles. The flux follows from the one-particle flux matrix elements in the same way.
    Integrated over time the density counts both particles.

    :raises FermionicStateDegenerateError: for fermions in (numerically) the same orbital.
    """
    orbitals = [evolution.evolve(chi, t) for chi in (pair.chi_a, pair.chi_b)]
    directional = []
    for alpha in DIRECTIONS:
        amplitudes = np.array([crossing_amplitude(chi, x_arr, mass, alpha) for chi in orbitals])
        directional.append(_pair_expectation(
            np.outer(np.conj(amplitudes), amplitudes),
            pair.statistics,
            pair.overlap_s
        ))

    waves = [plane_wave(chi.grid, x_arr) * chi.amplitudes for chi in orbitals]
    values = np.array([chi.grid.integrate(wave) for chi, wave in zip(orbitals, waves)])
    derivatives = np.array([chi.grid.integrate(chi.grid.points * wave) for chi, wave in zip(orbitals, waves)])
    flux_elements = (
        np.outer(np.conj(values), derivatives) + np.outer(np.conj(derivatives), values)
    ) / (2 * mass)
    flux = _pair_expectation(flux_elements, pair.statistics, pair.overlap_s)
    return ArrivalPoint.from_directions(t, *directional, flux)


@dataclass(frozen=True, eq=False)
class TwoParticleWave:
    """
    Two-particle amplitudes :math:`\\psi(p_1, p_2)` on the tensor product of ``grid1`` (first particle, rows) and
    ``grid2`` (second particle, columns).
    """
    grid1: MomentumGrid
    grid2: MomentumGrid
    amplitudes: np.ndarray
    statistics: Statistics

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        expected_shape = (self.grid1.n_points, self.grid2.n_points)
        if amplitudes.shape != expected_shape:
            raise GridMismatchError(f'Expected amplitudes of shape {expected_shape}, got {amplitudes.shape}')
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(
            utils.tensor_quadrature(np.abs(self.amplitudes) ** 2, self.grid1.step, self.grid2.step).real
        ))


def symmetrized_product(
        pair: OrbitalPair,
        evolution: Optional[Evolution] = None,
        t: Real = 0.
) -> TwoParticleWave:
    r"""
    Explicit tensor state of an orbital pair, optionally evolved to ``t``:
    :math:`(\chi_a \otimes \chi_b \pm \chi_b \otimes \chi_a) / \sqrt{2(1 \pm |s|^2)}` for identical particles and
    :math:`\chi_a \otimes \chi_b` for distinguishable ones.
    """
    chi_a, chi_b = pair.chi_a, pair.chi_b
    if evolution is not None:
        chi_a, chi_b = evolution.evolve(chi_a, t), evolution.evolve(chi_b, t)
    product = np.outer(chi_a.amplitudes, chi_b.amplitudes)
    if pair.statistics.is_identical:
        exchanged = np.outer(chi_b.amplitudes, chi_a.amplitudes)
        product = (product + pair.statistics.exchange_sign * exchanged) / np.sqrt(
            2 * _denominator(pair.statistics, pair.overlap_s)
        )
    return TwoParticleWave(pair.grid, pair.grid, product, pair.statistics)


def _one_sided_density(
        amplitudes: np.ndarray,
        grid_detected: MomentumGrid,
        grid_other: MomentumGrid,
        x_arr: Real,
        mass: Real
) -> Tuple[float, float, float]:
    """
    Expectation of the density of arrivals (per direction) and flux of the particle along the rows of
    ``amplitudes``, with the other particle integrated out.
    """
    directional = []
    for alpha in DIRECTIONS:
        kernel = crossing_kernel(grid_detected, x_arr, mass, alpha)
        crossing = grid_detected.integrate(kernel[:, np.newaxis] * amplitudes, axis=0)
        directional.append(float(grid_other.integrate(np.abs(crossing) ** 2)))

    wave = plane_wave(grid_detected, x_arr)[:, np.newaxis] * amplitudes
    values = grid_detected.integrate(wave, axis=0)
    derivatives = grid_detected.integrate(grid_detected.points[:, np.newaxis] * wave, axis=0)
    flux = float(grid_other.integrate((np.conj(values) * derivatives).real) / mass)
    return directional[0], directional[1], flux


def pair_density_tensor(
        psi: TwoParticleWave,
        x_arr: Real,
        mass: Real,
        t: Real = 0.
) -> ArrivalPoint:
    r"""
    Expectation of :math:`\hat\Pi \otimes 1 + 1 \otimes \hat\Pi` (and of the corresponding flux) over a two-particle
    state already evolved to ``t``:

    .. math::
        \Pi_\alpha = 2 \int dp_2 \, |B_\alpha(p_2)|^2, \qquad
        B_\alpha(p_2) = \int dp_1 \sqrt{\frac{\alpha p_1}{2\pi\hbar m}} \Theta(\alpha p_1) e^{ip_1X/\hbar}
        \psi(p_1, p_2).

    The factor 2 holds for exchange-(anti)symmetric states; for distinguishable particles both sides are evaluated
    and added. ``mass`` is the mass of a single particle.
    """
    first = _one_sided_density(psi.amplitudes, psi.grid1, psi.grid2, x_arr, mass)
    if psi.statistics.is_identical:
        total = [2 * value for value in first]
    else:
        second = _one_sided_density(psi.amplitudes.T, psi.grid2, psi.grid1, x_arr, mass)
        total = [one + other for one, other in zip(first, second)]
    return ArrivalPoint.from_directions(t, *total)


def reduced_density_matrix(
        psi: TwoParticleWave,
        particle: int = 1
) -> Tuple[MomentumGrid, np.ndarray]:
    r"""
    Reduced one-particle density matrix :math:`\rho(p, p') = \int dq \, \psi(p, q) \bar\psi(p', q)` of ``particle``
    (1 or 2), obtained by tracing out the other particle.

    :return: the grid of the particle and the matrix :math:`\rho` sampled on it.
    """
    if particle == 1:
        amplitudes, grid, other = psi.amplitudes, psi.grid1, psi.grid2
    elif particle == 2:
        amplitudes, grid, other = psi.amplitudes.T, psi.grid2, psi.grid1
    else:
        raise InvalidRangeError(f'particle must be 1 or 2, got {particle}')
    weights = utils.trapezoid_weights(other.n_points, other.step)
    return grid, (amplitudes * weights) @ np.conj(amplitudes).T


def pair_density_reduced(
        psi: TwoParticleWave,
        x_arr: Real,
        mass: Real,
        t: Real = 0.
) -> ArrivalPoint:
    r"""
    Density of arrivals and flux as :math:`\sum_j \mathrm{Tr}[\hat O \rho^{(j)}]` over the reduced density matrices of
    both particles.
    """
    totals = np.zeros(3)
    for particle in (1, 2):
        grid, rho = reduced_density_matrix(psi, particle)
        weights = utils.trapezoid_weights(grid.n_points, grid.step)
        for index, alpha in enumerate(DIRECTIONS):
            kernel = weights * crossing_kernel(grid, x_arr, mass, alpha)
            totals[index] += (kernel @ rho @ np.conj(kernel)).real
        wave = weights * plane_wave(grid, x_arr)
        totals[2] += ((wave * grid.points) @ rho @ np.conj(wave)).real / mass
    return ArrivalPoint.from_directions(t, *totals)


def exchange_symmetry_defect(psi: TwoParticleWave) -> float:
    r"""
    :math:`\max |\psi(p_1, p_2) \mp \psi(p_2, p_1)|` for bosons (upper sign) and fermions (lower sign).
    Distinguishable particles carry no exchange constraint; their defect is 0.

    :raises GridMismatchError: if the two particles are sampled on different grids.
    """
    if psi.grid1 != psi.grid2:
        raise GridMismatchError('Exchange symmetry needs identical grids for both particles')
    if not psi.statistics.is_identical:
        return 0.
    return float(np.max(np.abs(psi.amplitudes - psi.statistics.exchange_sign * psi.amplitudes.T)))


def _cubic_resampler(f: WaveFunction) -> Callable[[np.ndarray], np.ndarray]:
    """
    Cubic-spline evaluation of ``f`` at arbitrary momenta. Outside the grid the wavefunction is taken to vanish,
    which is only allowed when it has decayed at the grid edges.
    """
    real = CubicSpline(f.grid.points, f.amplitudes.real)
    imaginary = CubicSpline(f.grid.points, f.amplitudes.imag)
    scale = np.max(np.abs(f.amplitudes))
    edge = max(abs(f.amplitudes[0]), abs(f.amplitudes[-1]))

    def resample(points: np.ndarray) -> np.ndarray:
        inside = (points >= f.grid.p_min) & (points <= f.grid.p_max)
        if not inside.all() and edge > COVERAGE_TOLERANCE * scale:
            raise CoverageError(
                f'Momenta in [{points.min():.4g}, {points.max():.4g}] are needed, but the source grid '
                f'[{f.grid.p_min}, {f.grid.p_max}] ends where the wavefunction is {edge / scale:.2e} of its maximum'
            )
        values = np.zeros(points.shape, dtype=complex)
        values[inside] = real(points[inside]) + 1j * imaginary(points[inside])
        return values
    return resample


def _check_parity(
        phi_rel: WaveFunction,
        statistics: Statistics
):
    if not statistics.is_identical:
        return
    points = phi_rel.grid.points
    if phi_rel.grid.is_symmetric():
        reflected = phi_rel.amplitudes[::-1]
        original = phi_rel.amplitudes
    else:
        inside = (-points >= phi_rel.grid.p_min) & (-points <= phi_rel.grid.p_max)
        reflected = _cubic_resampler(phi_rel)(-points[inside])
        original = phi_rel.amplitudes[inside]
    scale = np.max(np.abs(phi_rel.amplitudes))
    defect = np.max(np.abs(reflected - statistics.exchange_sign * original)) / scale if scale > 0 else 0.
    if defect > PARITY_TOLERANCE:
        parity = 'even' if statistics is Statistics.BOSON else 'odd'
        raise ParityMismatchError(
            f'{statistics.value.capitalize()}s need an {parity} relative wavefunction; parity defect is {defect:.2e}'
        )


def assemble_cm_rel(
        chi_cm: WaveFunction,
        phi_rel: WaveFunction,
        out_grid: MomentumGrid,
        statistics: Statistics
) -> TwoParticleWave:
    r"""
    Two-particle state :math:`\psi(p_1, p_2) = \chi(p_1 + p_2) \, \phi((p_1 - p_2)/2)` on ``out_grid`` for both
    particles. The Jacobian of the change of variables is 1, so the norm is inherited from the factors.

    On a uniform grid the total momenta :math:`p_i + p_j` and relative momenta :math:`(p_i - p_j)/2` take only
    :math:`2n - 1` distinct values each; the factors are resampled there by cubic splines and broadcast.

    :raises ParityMismatchError: if ``phi_rel`` is not even for bosons or odd for fermions.
    :raises CoverageError: if the source grids end before the wavefunctions have decayed, or ``out_grid`` cuts off
        part of the pair state.
    """
    _check_parity(phi_rel, statistics)
    n_points = out_grid.n_points
    offsets = np.arange(2 * n_points - 1)
    total_momenta = 2 * out_grid.p_min + offsets * out_grid.step
    relative_momenta = (offsets - (n_points - 1)) * out_grid.step / 2

    chi_values = _cubic_resampler(chi_cm)(total_momenta)
    phi_values = _cubic_resampler(phi_rel)(relative_momenta)
    rows, columns = np.indices((n_points, n_points))
    amplitudes = chi_values[rows + columns] * phi_values[rows - columns + n_points - 1]
    psi = TwoParticleWave(out_grid, out_grid, amplitudes, statistics)

    expected = chi_cm.grid.integrate(chi_cm.probability_density) * phi_rel.grid.integrate(phi_rel.probability_density)
    if abs(psi.norm() ** 2 - expected) > NORM_TOLERANCE:
        raise CoverageError(
            f'The pair grid [{out_grid.p_min}, {out_grid.p_max}] holds {psi.norm() ** 2:.8f} of a state with norm '
            f'{expected:.8f}'
        )
    return psi


class PairScenario:
    """
    Abstract two-particle scenario that yields the density of arrivals at any instant.
    """
    statistics: Statistics

    @abstractmethod
    def density_at(
            self,
            t: Real,
            x_arr: Real,
            mass: Real
    ) -> ArrivalPoint:
        pass  # pragma: no cover


@dataclass(frozen=True, eq=False)
class OrbitalPairScenario(PairScenario):
    """
    Orbital pair moving under a one-particle evolution, evaluated with the cross-term formula.
    """
    pair: OrbitalPair
    evolution: Evolution

    @property
    def statistics(self) -> Statistics:
        return self.pair.statistics

    def density_at(
            self,
            t: Real,
            x_arr: Real,
            mass: Real
    ) -> ArrivalPoint:
        return pair_density_orbitals(self.pair, self.evolution, t, x_arr, mass)


@dataclass(frozen=True, eq=False)
class CmRelScenario(PairScenario):
    """
    Pair of equal masses factorized in a freely moving center of mass and an oscillating relative motion. The
    oscillator basis of ``phi_rel`` must carry the reduced mass, half the particle mass.
    """
    chi_cm: WaveFunction
    phi_rel: RelativeState
    out_grid: MomentumGrid
    statistics: Statistics

    def evolved(
            self,
            t: Real,
            mass: Real
    ) -> Tuple[WaveFunction, RelativeState]:
        """ Center-of-mass and relative states at time ``t`` for particles of mass ``mass``. """
        if not np.isclose(self.phi_rel.basis.mu, mass / 2, rtol=1e-12, atol=0):
            raise InvalidRangeError(
                f'The relative motion has reduced mass {self.phi_rel.basis.mu}, expected {mass / 2} for particles '
                f'of mass {mass}'
            )
        return evolve_pair_factorized(self.chi_cm, self.phi_rel, 2 * mass, t)

    def density_at(
            self,
            t: Real,
            x_arr: Real,
            mass: Real
    ) -> ArrivalPoint:
        chi_t, phi_t = self.evolved(t, mass)
        psi = assemble_cm_rel(chi_t, phi_t.render(), self.out_grid, self.statistics)
        return pair_density_tensor(psi, x_arr, mass, t)


def _scenario_point(
        scenario: PairScenario,
        x_arr: Real,
        mass: Real,
        t: Real
) -> ArrivalPoint:
    return scenario.density_at(t, x_arr, mass)


def pair_series(
        scenario: PairScenario,
        times: TimeGrid,
        x_arr: Real,
        mass: Real,
        max_workers: Optional[int] = None,
        metadata: Optional[dict] = None
) -> ArrivalSeries:
    """
    Density of arrivals of a pair scenario over ``times``, evaluated independently per instant and spread over
    ``max_workers`` processes when given.
    """
    logger.debug('Pair series (%s) at X=%s over %s instants', scenario.statistics.value, x_arr, times.n_steps)
    points = utils.parallel_map(
        partial(_scenario_point, scenario, x_arr, mass),
        times.times,
        max_workers
    )
    return ArrivalSeries.from_points(
        points,
        {'x_arr': x_arr, 'mass': mass, 'statistics': scenario.statistics.value, **(metadata or {})}
    )
