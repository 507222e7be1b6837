"""Exception hierarchy shared by all gbmflow modules."""


class GbmflowError(Exception):
    """Base class for all errors raised by gbmflow."""


class ParameterError(GbmflowError, ValueError):
    """A model parameter, grid, or call argument violated its contract."""


class QuadratureError(GbmflowError, RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the worst remaining panel so callers can report where the
    integrand resisted refinement.
    """

    def __init__(self, message, worst_panel=None, error_estimate=None):
        super().__init__(message)
        self.worst_panel = worst_panel
        self.error_estimate = error_estimate


class SimulationBudgetError(GbmflowError, RuntimeError):
    """A stochastic simulation exceeded its configured event budget."""
