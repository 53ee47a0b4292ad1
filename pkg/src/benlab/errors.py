"""Exception types shared across the package."""


class BenlabError(Exception):
    """Base class for all package errors."""


class NonFinite(BenlabError):
    """A coefficient became NaN/Inf (blow-up or too-large time step)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GridMismatch(BenlabError):
    """Fields passed to a multilinear operation live on different grids."""


class OffHyperplane(BenlabError):
    """Wavenumber tuple does not satisfy the zero-sum constraint."""


class ResonantDenominator(BenlabError):
    """Multiplier denominator vanishes (excluded resonant ray)."""


class ScaleMismatch(BenlabError):
    """Invalid scale factor for the field rescaling map."""


class InsufficientSamples(BenlabError):
    """Not enough recorded states for the requested quadrature."""


class BudgetExceeded(BenlabError):
    """Requested hyperplane sum exceeds the configured mode budget."""


class LatticeBudget(BenlabError):
    """Block discretization exceeds the configured (xi, tau) cell budget."""


class InfeasiblePlan(BenlabError):
    """Requested scaling plan lies outside the supported parameter range."""


class ScalingFailed(BenlabError):
    """Rescaled data violates the smallness precondition."""


class BootstrapViolated(BenlabError):
    """Energy ceiling breached during the global iteration."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(BenlabError):
    """Invalid experiment configuration."""
