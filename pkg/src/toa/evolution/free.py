from dataclasses import dataclass
from numbers import Real

import numpy as np

from toa.evolution.evolution_abc import Evolution
from toa.exceptions import NonpositiveMassError
from toa.grid import HBAR, WaveFunction


def evolve_free(
        f: WaveFunction,
        mass: Real,
        t: Real
) -> WaveFunction:
    r"""
    Free evolution in momentum representation, a pointwise phase :math:`e^{-ip^2t/(2m\hbar)}`. The norm is preserved
    up to rounding.
    """
    if not mass > 0:
        raise NonpositiveMassError(f'mass must be positive, got {mass}')
    phase = np.exp(-1j * f.grid.points ** 2 * t / (2 * mass * HBAR))
    return f.with_amplitudes(f.amplitudes * phase)


@dataclass(frozen=True)
class FreeEvolution(Evolution):
    """
    Evolution of a free particle of mass ``mass``.
    """
    mass: float

    def __post_init__(self):
        if not self.mass > 0:
            raise NonpositiveMassError(f'mass must be positive, got {self.mass}')

    def evolve(
            self,
            f: WaveFunction,
            t: Real
    ) -> WaveFunction:
        return evolve_free(f, self.mass, t)
