"""Exception and warning types shared across the package."""


class ConfigurationError(ValueError):
    """A run, distribution, or problem was set up inconsistently."""


class BoundGuardError(RuntimeError):
    """The iterate norms exceeded the divergence guard during a run."""


class ProxDegeneracyWarning(UserWarning):
    """Raised when a prox has multiple minimizers and a tie-break was applied."""
