from dataclasses import dataclass
from numbers import Real
from typing import Tuple

import numpy as np

from toa.evolution.evolution_abc import Evolution
from toa.evolution.free import evolve_free
from toa.grid import WaveFunction
from toa.states import HOBasis, RelativeState, project_onto_basis


def evolve_ho(
        state: RelativeState,
        t: Real
) -> RelativeState:
    r"""
    Exact oscillator evolution in the eigenbasis: :math:`c_n \to c_n e^{-i\omega(n + 1/2)t}`.
    """
    phases = np.exp(-1j * state.basis.energies * t)
    return RelativeState(
        state.basis,
        state.coefficients * phases,
        normalized=state.normalized,
        residual=state.residual
    )


@dataclass(frozen=True, eq=False)
class HarmonicEvolution(Evolution):
    """
    Oscillator evolution of wavefunctions sampled on the grid of ``basis``. Wavefunctions are projected onto the
    basis, propagated exactly and rendered back, so no time-step error occurs.
    """
    basis: HOBasis

    def evolve(
            self,
            f: WaveFunction,
            t: Real
    ) -> WaveFunction:
        return evolve_ho(project_onto_basis(f, self.basis), t).render()


def evolve_pair_factorized(
        chi_cm: WaveFunction,
        phi_rel: RelativeState,
        total_mass: Real,
        t: Real
) -> Tuple[WaveFunction, RelativeState]:
    """
    Evolves a pair state factorized in center-of-mass and relative motion. The center of mass moves freely with
    ``total_mass`` (twice the particle mass for equal masses), the relative motion oscillates.

    :return: the evolved center-of-mass wavefunction and relative state.
    """
    return evolve_free(chi_cm, total_mass, t), evolve_ho(phi_rel, t)
