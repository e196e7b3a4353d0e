"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is outside the operation's domain."""


class UndefinedQualityError(ParameterError):
    """Descent quality requested for a zero gradient."""


class CatalogError(KeyError):
    """Unknown problem name or inadmissible dimension."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ConfigError(ValueError):
    """Invalid search or experiment configuration.

    ``condition`` names the failed check.
    """

    def __init__(self, condition, message):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


class AssumptionError(ParameterError):
    """Parameters violate an assumption required by a bound or identity."""
