"""Exception types raised by klindblad."""


class ParameterDomainError(ValueError):
    """Model or physical parameters outside their allowed domain."""


class NonHermitianError(ValueError):
    """An operator that must be Hermitian is not."""


class PositivityError(ValueError):
    """A density matrix has an eigenvalue below the positivity tolerance."""


class NotXStateError(ValueError):
    """An X-state-only formula was given a matrix with off-X weight."""


class InvariantViolation(RuntimeError):
    """A stored state broke a density-matrix invariant during evolution.

    ``time`` and ``sector`` locate the offending sample; ``sector`` is None
    for the sector-averaged state.
    """

    def __init__(self, message, time=None, sector=None):
        super().__init__(message)
        self.time = time
        self.sector = sector


class ExponentialError(ArithmeticError):
    """Matrix exponential of a generator produced non-finite output."""
