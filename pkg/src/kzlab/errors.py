"""Exception hierarchy shared by all kzlab modules."""


class KzlabError(Exception):
    """Base class for every error raised by kzlab."""


class ValidationError(KzlabError, ValueError):
    """Input violates an operation's precondition."""


class DomainError(KzlabError, ValueError):
    """Argument sits on (or too close to) a pole or singular set."""


class ConfigurationError(KzlabError):
    """A required piece of configuration or user data is missing."""


class UnsupportedError(KzlabError):
    """Requested case is outside what the implementation covers."""


class BudgetError(KzlabError):
    """Enumeration would exceed the configured work budget."""


class AccuracyError(KzlabError):
    """A numerical result could not be certified to the requested tolerance.

    ``achieved`` carries the best error estimate that was reached, and
    ``values`` optionally holds the competing estimates.
    """

    def __init__(self, message, achieved=None, values=None):
        super().__init__(message)
        self.achieved = achieved
        self.values = values
