from typing import Iterable


class ToaError(Exception):
    """
    Base class of all errors raised by this package.
    """


class InvalidRangeError(ToaError, ValueError):
    """ A range or count parameter is outside its valid domain. """


class GridMismatchError(ToaError, ValueError):
    """ Two objects that must share a momentum grid do not. """


class ZeroNormError(ToaError, ValueError):
    """ A state with (numerically) zero norm cannot be normalized. """


class NonpositiveMassError(ToaError, ValueError):
    """ A mass parameter is zero or negative. """


class NumericalAuditError(ToaError, RuntimeError):
    """
    The numerical resolution does not support a reliable result. Raised by the resolution checks below, which the
    command line reports with exit code 3.
    """


class GridTooSmallError(NumericalAuditError, ValueError):
    """ The momentum grid does not hold the highest eigenfunction of a basis. """


class TruncationTooSevereError(NumericalAuditError, ValueError):
    """ The Fock-space truncation discards too much of a coherent state. """


class DegenerateComboError(ToaError, ValueError):
    """ A symmetric or antisymmetric combination of coherent states vanishes. """


class PoorRepresentationError(NumericalAuditError, ValueError):
    """ A wavefunction is not represented by a truncated eigenbasis. """


class FermionicStateDegenerateError(ToaError, ValueError):
    """ An antisymmetrized pair of (nearly) identical orbitals has no norm. """


class ParityMismatchError(ToaError, ValueError):
    """ The parity of a relative-motion state contradicts the exchange statistics. """


class CoverageError(NumericalAuditError, ValueError):
    """ Combination momenta fall outside the support of the source grids. """


class SchemaError(ToaError, ValueError):
    """
    A scenario document violates the configuration schema. All violations found are kept in ``violations``.
    """
    def __init__(
            self,
            violations: Iterable[str]
    ):
        self.violations = list(violations)
        super().__init__(
            f'{len(self.violations)} configuration error(s): ' + '; '.join(self.violations)
        )


class UnknownPresetError(ToaError, ValueError):
    """ No figure preset exists under the requested name. """


class SinkError(ToaError, OSError):
    """ An output destination cannot be written. """


class TruncatedSupportWarning(UserWarning):
    """ A wavepacket has non-negligible probability outside its momentum grid. """


class WindowTooSmallWarning(UserWarning):
    """ The time window cuts off a non-negligible part of the arrivals. """
