"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class QGHJMError(Exception):
    """Base class for errors raised by this package."""


class DomainError(QGHJMError, ValueError):
    """An argument is outside the domain of the operation."""


class ConfigError(QGHJMError, ValueError):
    """A run configuration could not be parsed or is inconsistent."""


class UnsupportedConfiguration(QGHJMError, ValueError):
    """The operation is only defined for a restricted model family."""


class WrongRegime(QGHJMError, ValueError):
    """The parameters belong to a regime handled by a different routine."""


class SupercriticalError(WrongRegime):
    """Mean reversion at or above the critical value: no flat-curve explosion."""


class PoleProximityError(DomainError):
    """Argument too close to a lattice pole of the Weierstrass function."""


class NumericalFailure(QGHJMError, RuntimeError):
    """A numerical procedure failed; ``partial`` holds whatever was computed."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class PicardDivergence(NumericalFailure):
    """The Picard iterate exceeded the rate ceiling."""


class SimulationFault(NumericalFailure):
    """A Monte Carlo path produced a non-finite state."""
