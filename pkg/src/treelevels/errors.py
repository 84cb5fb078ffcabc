"""Exception types shared across the package."""


class TreelevelsError(Exception):
    """Base class for package-specific failures."""


class ResourceBudgetError(TreelevelsError):
    """A simulation or evaluation would exceed its configured work budget.

    Raised before (or as soon as) the budget is hit, with whatever partial
    diagnostics are available in the message.
    """

    def __init__(self, message, *, events=None, budget=None):
        super().__init__(message)
        self.events = events
        self.budget = budget


class ConditioningError(TreelevelsError):
    """Covariance factorization rejected a numerically degenerate grid.

    ``pair`` holds the offending pair of grid points (closest together).
    """

    def __init__(self, message, *, pair=None):
        super().__init__(message)
        self.pair = pair


class ConfigError(TreelevelsError):
    """Experiment configuration failed validation.

    ``field`` names the offending configuration entry when known.
    """

    def __init__(self, message, *, field=None):
        super().__init__(message)
        self.field = field
