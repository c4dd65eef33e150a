"""Exception types raised by the engine."""


class DegeneratePumpError(ValueError):
    """The pump parameter is zero, so the conversion phase is undefined."""


class SingularSystemError(ArithmeticError):
    """The cavity fluctuation equations have no unique solution."""


class SimulationDivergedError(ArithmeticError):
    """The explicit integrator produced non-finite or runaway amplitudes."""


class InsufficientDataError(ValueError):
    """Too few samples for the requested spectral estimate."""
