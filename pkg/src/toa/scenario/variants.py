"""
Expansion of a scenario into its variants (one per exchange statistics or internal level) and construction of the
states and grids of every variant.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from toa.evolution.free import FreeEvolution
from toa.exceptions import ToaError
from toa.grid import MomentumGrid, WaveFunction, covering_grid, make_grid
from toa.multiparticle import CmRelScenario, OrbitalPair, OrbitalPairScenario, PairScenario, assemble_cm_rel
from toa.scenario.model import InternalState, NumericsConfig, ScenarioConfig, ScenarioKind
from toa.states import (
    CoherentLabel,
    GaussianSpec,
    HOBasis,
    RelativeState,
    Statistics,
    coherent_combo,
    eigenstate,
    gaussian_packet,
    ho_basis,
    ho_grid,
)

logger = logging.getLogger(__name__)

NUMBER_OF_SPREADS = 8
CENTER_OF_MASS_SPREADS = 10
SUPPORT_SAFETY = 6
NEGLIGIBLE_COEFFICIENT = 1e-10
AUDITED_PHASES = 16


@dataclass(frozen=True, eq=False)
class Variant:
    label: str
    statistics: Optional[Statistics]
    level: Optional[int] = None


def variants(config: ScenarioConfig) -> List[Variant]:
    """
    The variants of a scenario: one per statistics for orbital pairs and coherent combinations, one per level for
    internal eigenstates, whose statistics follows from their parity.
    """
    if config.kind is ScenarioKind.SINGLE:
        return [Variant('single', None)]
    if config.kind is ScenarioKind.PAIR_ORBITALS or config.internal.state is InternalState.COHERENT:
        return [Variant(statistics.value, statistics) for statistics in config.statistics]
    return [
        Variant(f'n{level}_{Statistics.from_parity(level).value}', Statistics.from_parity(level), level)
        for level in config.internal.levels
    ]


def orbital_grid(
        specs: List[GaussianSpec],
        n_points: int
) -> MomentumGrid:
    """ One-particle grid holding every orbital and the origin, where the crossing kernel switches direction. """
    lower = min(spec.p0 - NUMBER_OF_SPREADS * spec.sigma_p for spec in specs)
    upper = max(spec.p0 + NUMBER_OF_SPREADS * spec.sigma_p for spec in specs)
    return make_grid(min(lower, 0.), max(upper, 0.), n_points)


def relative_extent(state: RelativeState) -> float:
    """
    Momentum beyond which the relative state is negligible at every time: oscillator evolution only changes the
    phases of the coefficients, so the highest populated level bounds the support.
    """
    populated = np.flatnonzero(np.abs(state.coefficients) > NEGLIGIBLE_COEFFICIENT)
    highest = int(populated[-1]) if populated.size else 0
    return state.basis.momentum_scale * (np.sqrt(2 * highest + 1) + SUPPORT_SAFETY)


def pair_grid(
        center_of_mass: GaussianSpec,
        extent: float,
        n_points: int
) -> MomentumGrid:
    r""" Tensor-grid axis holding :math:`p_{1,2} = P/2 \pm p` for the supports of both factors. """
    lower = (center_of_mass.p0 - NUMBER_OF_SPREADS * center_of_mass.sigma_p) / 2 - extent
    upper = (center_of_mass.p0 + NUMBER_OF_SPREADS * center_of_mass.sigma_p) / 2 + extent
    return make_grid(min(lower, 0.), max(upper, 0.), n_points)


def single_state(
        config: ScenarioConfig,
        numerics: NumericsConfig
) -> WaveFunction:
    return gaussian_packet(config.orbital_a, orbital_grid([config.orbital_a], numerics.n_points))


def internal_basis(
        config: ScenarioConfig,
        numerics: NumericsConfig
) -> HOBasis:
    """ Oscillator basis of the relative motion, with the reduced mass of two equal particles. """
    mu = config.mass / 2
    omega = config.internal.omega
    return ho_basis(mu, omega, numerics.n_max, ho_grid(mu, omega, numerics.n_max, numerics.source_points))


def relative_state(
        config: ScenarioConfig,
        variant: Variant,
        basis: HOBasis
) -> RelativeState:
    if config.internal.state is InternalState.EIGENSTATE:
        return eigenstate(basis, variant.level)
    return coherent_combo(basis, CoherentLabel(config.internal.z), variant.statistics)


def pair_scenario(
        config: ScenarioConfig,
        variant: Variant,
        numerics: NumericsConfig
) -> PairScenario:
    """
    Builds the pair of a variant: an orbital pair under free motion, or a center-of-mass packet times a relative
    state on a tensor grid sized to both.
    """
    if config.kind is ScenarioKind.PAIR_ORBITALS:
        grid = orbital_grid([config.orbital_a, config.orbital_b], numerics.n_points)
        pair = OrbitalPair(
            gaussian_packet(config.orbital_a, grid),
            gaussian_packet(config.orbital_b, grid),
            variant.statistics
        )
        return OrbitalPairScenario(pair, FreeEvolution(config.mass))

    phi_rel = relative_state(config, variant, internal_basis(config, numerics))
    chi_cm = gaussian_packet(
        config.center_of_mass,
        covering_grid(config.center_of_mass.p0, config.center_of_mass.sigma_p, numerics.source_points,
                      CENTER_OF_MASS_SPREADS)
    )
    out_grid = pair_grid(config.center_of_mass, relative_extent(phi_rel), numerics.pair_points)
    return CmRelScenario(chi_cm, phi_rel, out_grid, variant.statistics)


def _audit_instants(
        config: ScenarioConfig,
        scenario: CmRelScenario
) -> np.ndarray:
    """
    Instants at which the assembled pair is checked: the window ends, and for moving relative states a sweep over
    one internal period, after which the relative state repeats up to a phase.
    """
    instants = [config.times.t_min, config.times.t_max]
    if np.count_nonzero(np.abs(scenario.phi_rel.coefficients) > NEGLIGIBLE_COEFFICIENT) > 1:
        period = 2 * np.pi / config.internal.omega
        instants += list(config.times.t_min + np.arange(AUDITED_PHASES) * period / AUDITED_PHASES)
    return np.array(instants)


def _audit_pair(
        config: ScenarioConfig,
        scenario: PairScenario
):
    if not isinstance(scenario, CmRelScenario):
        return
    for t in _audit_instants(config, scenario):
        chi_t, phi_t = scenario.evolved(t, config.mass)
        assemble_cm_rel(chi_t, phi_t.render(), scenario.out_grid, scenario.statistics)


def resolution_violations(config: ScenarioConfig) -> List[str]:
    """
    Builds the states of every variant with the configured numerics and reports each variant whose construction
    fails: oscillator bases that do not fit their grid, vanishing coherent combinations, or pair grids that do not
    hold the pair.
    """
    violations = []
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        for variant in variants(config):
            try:
                if config.kind is ScenarioKind.SINGLE:
                    single_state(config, config.numerics)
                else:
                    _audit_pair(config, pair_scenario(config, variant, config.numerics))
            except (ToaError, ArithmeticError) as error:
                violations.append(f'[numerics] variant {variant.label} cannot be built: {error}')
    if violations:
        logger.debug('%s: %s variants fail to build', config.name, len(violations))
    return violations
