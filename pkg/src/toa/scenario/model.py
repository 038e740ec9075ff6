"""
Scenario descriptions: what to compute, independent of how a scenario is written down or run.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from toa.grid import TimeGrid
from toa.states import DEFAULT_N_MAX, GaussianSpec, Statistics


class ScenarioKind(Enum):
    SINGLE = 'single'
    PAIR_ORBITALS = 'pair-orbitals'
    PAIR_CM_REL = 'pair-cm-rel'


class InternalState(Enum):
    EIGENSTATE = 'eigenstate'
    COHERENT = 'coherent'


@dataclass(frozen=True)
class InternalConfig:
    """
    Internal (relative) motion of a pair in a harmonic potential.
    """
    omega: float
    """ Angular frequency of the internal oscillator. """
    state: InternalState
    """ Stationary states or coherent combinations. """
    levels: Tuple[int, ...] = ()
    """ Eigenstate levels, one variant each. """
    z: complex = 0j
    """ Coherent-state label for coherent combinations. """


@dataclass(frozen=True)
class NumericsConfig:
    """
    Numerical resolution. The defaults are used by all presets.
    """
    n_points: int = 1024
    """ Points of the one-particle momentum grid (single particles and orbital pairs). """
    pair_points: int = 512
    """ Points per axis of the two-particle tensor grid. """
    source_points: int = 4096
    """ Points of the center-of-mass and relative-motion grids that are resampled onto the tensor grid. """
    n_max: int = DEFAULT_N_MAX
    """ Highest oscillator level of the internal basis. """
    flux: bool = False
    """ Whether the flux is compared with the density of arrivals in the summary. """
    convergence_check: bool = False
    """ Whether every variant is recomputed on grids with doubled density to audit convergence. """

    def refined(self) -> 'NumericsConfig':
        """ The same numerics with every grid density doubled. """
        return NumericsConfig(
            n_points=2 * self.n_points - 1,
            pair_points=2 * self.pair_points - 1,
            source_points=2 * self.source_points - 1,
            n_max=self.n_max,
            flux=self.flux,
            convergence_check=False
        )


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Complete description of a scenario: the states, the detection point, the time window and the numerics.
    """
    name: str
    kind: ScenarioKind
    mass: float
    """ Mass of each particle. """
    x_arr: float
    """ Arrival (detection) point. """
    times: TimeGrid
    statistics: Tuple[Statistics, ...] = ()
    orbital_a: Optional[GaussianSpec] = None
    """ The particle of a single-particle scenario, or the first orbital of a pair. """
    orbital_b: Optional[GaussianSpec] = None
    center_of_mass: Optional[GaussianSpec] = None
    internal: Optional[InternalConfig] = None
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output_dir: str = '.'
