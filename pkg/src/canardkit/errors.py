"""Exception hierarchy shared by all canardkit modules."""


class CanardError(Exception):
    """Base class for every error raised by canardkit."""


class DomainError(CanardError, ValueError):
    """An argument lies outside the domain of a formula or special function."""


class BracketError(CanardError, ValueError):
    """A root bracket does not contain a sign change."""


class IntegrationError(CanardError):
    """The vector field produced a non-finite value.

    Attributes
    ----------
    time : float
        Time of the step that was being attempted.
    state : numpy.ndarray
        State at which the step was attempted.
    """

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class DivergenceError(IntegrationError):
    """The state max-norm exceeded the configured blow-up bound."""

    def __init__(self, message, last_time=None, state=None):
        super().__init__(message, time=last_time, state=state)
        self.last_time = last_time


class BlowUpError(CanardError):
    """A closed-form solution reaches a finite-time singularity."""


class NotAnEquilibriumError(CanardError, ValueError):
    """A point handed to the classifier is not a fast-subsystem equilibrium."""


class AssumptionError(CanardError):
    """Parameters violate a standing assumption of the model."""


class NoExitError(CanardError):
    """An orbit failed to reach the exit section."""


class EntryNotInSectionError(DomainError):
    """The entry point of a transition does not lie in the entry section."""


class ConfigError(CanardError, ValueError):
    """Invalid run configuration (command line or config file)."""
