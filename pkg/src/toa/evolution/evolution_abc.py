from abc import abstractmethod
from numbers import Real

from toa.grid import WaveFunction


class Evolution:
    """
    Abstract one-particle time evolution :math:`U(t)` acting on momentum-space wavefunctions.

    The Hamiltonian is time independent, so evolving by :math:`t_1` and then by :math:`t_2` equals evolving by
    :math:`t_1 + t_2`.
    """
    @abstractmethod
    def evolve(
            self,
            f: WaveFunction,
            t: Real
    ) -> WaveFunction:
        """
        Returns :math:`U(t) f`.
        """
        pass  # pragma: no cover
